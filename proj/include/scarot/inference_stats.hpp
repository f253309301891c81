#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scarot/mean_estimation.hpp"

namespace scarot {

/// Draws from the 2-D rotation/log-eigenvalue model
/// X = R(theta) diag(exp(D1), exp(D2)) R(theta)^T with theta truncated
/// normal on (-pi, pi) and (D1, D2) ~ N((mu1, mu2), sigma_d^2 I).
std::vector<Matrix> sample_model_2d(int n, double sigma_theta, double mu1,
                                    double mu2, double sigma_d, uint64_t seed);

/// SPD log-normal draws: Gaussian in log-Euclidean coordinates around
/// vecd(mean_log) with the given PSD covariance, mapped back by matrix exp.
std::vector<Matrix> sample_spd_lognormal(int n, const Matrix& mean_log,
                                         const Matrix& cov, uint64_t seed);

/// vecd: diagonal entries first, then upper off-diagonals scaled by sqrt(2)
/// (lexicographic), so the Euclidean inner product matches the Frobenius
/// inner product of the symmetric matrices.
Vector vecd(const Matrix& sym);
Matrix vecd_inv(const Vector& x, int p);

enum class Frame { psr, log_euclidean };

struct CoordinateCloud {
  Frame frame = Frame::log_euclidean;
  Matrix coords;  // n x d
  std::optional<EigenDecomp> reference;     // psr frame only
  std::vector<bool> outside_injectivity;    // psr frame only, per row
};

CoordinateCloud le_coordinates(const std::vector<Matrix>& xs);
Matrix le_mean(const std::vector<Matrix>& xs);

struct AiMeanResult {
  Matrix mean;
  bool converged = false;
  int iterations = 0;
};

/// Affine-invariant (Karcher) mean by fixed-point iteration, initialized at
/// the log-Euclidean mean.
AiMeanResult ai_mean(const std::vector<Matrix>& xs, double tol = 1e-10,
                     int max_iter = 200);

/// Tangent coordinates at `reference`: row i vectorizes the log of the
/// nearest fiber element of X_i.
CoordinateCloud psr_coordinates(const std::vector<Matrix>& xs,
                                const EigenDecomp& reference,
                                MetricWeight k = {});

struct BootstrapCov {
  Matrix cov;
  int replicates_used = 0;
  int replicates_dropped = 0;
};

/// Bootstrap covariance of the sample PSR mean: each replicate resamples
/// with replacement, reruns the mean (warm-started at the original mean),
/// matches its orbit to the original mean and records tangent coordinates;
/// the estimate is the average outer product. Replicate streams derive from
/// (seed, replicate index) so scheduling order cannot change the result.
BootstrapCov bootstrap_cov(const std::vector<Matrix>& xs, int b, uint64_t seed,
                           MetricWeight k = {}, const MeanOptions& opts = {});

struct ConfidenceRegion {
  Vector center;
  Matrix cov;
  Matrix cov_inv;   // pseudo-inverse when singular
  double threshold = 0.0;
  int rank = 0;
  bool pseudo_inverse = false;
};

ConfidenceRegion confidence_region(const Vector& mean_coords, const Matrix& cov,
                                   double level);

struct GroupTestReport {
  int p = 0;
  int d = 0;
  double level = 0.95;
  double chi2_threshold = 0.0;
  // PSR frame, pooled-mean reference coordinates.
  Vector mean1_psr, mean2_psr;
  Matrix cov1_psr, cov2_psr;
  ConfidenceRegion region1_psr, region2_psr;
  double t_psr = 0.0;
  double p_value_psr = 1.0;
  // Log-Euclidean frame, for comparison.
  Vector mean1_le, mean2_le;
  Matrix cov1_le, cov2_le;
  double t_le = 0.0;
  double p_value_le = 1.0;
  bool separated = false;  // PSR p-value below 1 - level
  int dropped1 = 0, dropped2 = 0;
};

/// Approximate bootstrap two-group comparison: group PSR means in pooled
/// PSR coordinates, per-group bootstrap covariances, chi-square confidence
/// ellipsoids and the quadratic separation statistic, with the same pipeline
/// repeated in log-Euclidean coordinates.
GroupTestReport two_group_report(const std::vector<Matrix>& xs1,
                                 const std::vector<Matrix>& xs2, int b,
                                 double level, uint64_t seed,
                                 MetricWeight k = {});

}  // namespace scarot
