#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scarot/sr_distance.hpp"

namespace scarot {

/// Closed-form Frechet mean on Diag+(p): exp of the entrywise log average.
PosDiag frechet_mean_diag(const std::vector<PosDiag>& ds);

struct SoMeanResult {
  Rotation mean;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Frechet mean on SO(p) by Riemannian gradient descent
/// U <- Exp((1/n) sum Log(U_i U^-1)) U, stopping when the gradient norm
/// (1/n)||sum Log(U_i U^-1)||_F drops below tol. Unique when the inputs lie
/// in a geodesic ball of radius pi/2; otherwise returns the local optimum
/// reached from init.
SoMeanResult frechet_mean_so(const std::vector<Rotation>& us,
                             const Rotation& init, double tol = 1e-10,
                             int max_iter = 1000);

struct MeanOptions {
  MetricWeight k{};
  double eps = 1e-12;       // objective-decrease tolerance
  int max_outer = 100;
  double eps_strat = kEpsStratum;
  bool multistart = false;  // try every observation's decomposition as init
};

struct MeanResult {
  EigenDecomp mean;
  int orbit_size = 0;
  std::vector<double> objective_trace;  // f at init, then after each pass
  int iterations = 0;        // passes that decreased f by more than eps
  int total_passes = 0;
  bool converged = false;
  std::vector<EigenDecomp> matched_fibers;  // final per-observation selections
  std::vector<int> step1_changes;  // selections changed vs previous pass
};

/// Sample PSR mean: alternate matching each observation to its nearest
/// fiber element and taking the product Frechet mean of the matches.
/// Defaults to the first observation's canonical decomposition as init.
MeanResult psr_mean(const std::vector<Matrix>& xs,
                    const std::optional<EigenDecomp>& init = std::nullopt,
                    const MeanOptions& opts = {});

/// Same loop against prebuilt fibers, over an index multiset (hot path for
/// bootstrap resampling).
MeanResult psr_mean_cached(const std::vector<Fiber>& fibers,
                           const std::vector<int>& indices,
                           const EigenDecomp& init, const MeanOptions& opts);

/// The G(p) orbit of m; every member attains the same PSR objective.
std::vector<EigenDecomp> mean_orbit(const EigenDecomp& m);

/// Empirical objectives: averages of squared PSR / SR distances.
double f_psr(const std::vector<Matrix>& xs, const EigenDecomp& m,
             MetricWeight k = {});
double f_sr(const std::vector<Matrix>& xs, const Matrix& s,
            MetricWeight k = {});

struct LowerMinimum {
  Matrix minimizer;
  double value = 0.0;
  bool exact = false;  // closed form (p = 2 / bottom) vs restarted search
};

/// Minimum of the SR objective over the union of lower strata. Closed form
/// for p = 2 (scaled identity at the grand log-eigenvalue mean); for p = 3,
/// the better of the bottom-stratum closed form and a restarted alternating
/// search over the multiplicity-(2,1) stratum.
LowerMinimum minimize_fsr_lower(const std::vector<Matrix>& xs,
                                MetricWeight k = {}, uint64_t seed = 0,
                                int restarts = 20);

enum class CertificateKind {
  sr_equals_psr,
  sr_in_lower,
  uniqueness,
  stratum_avoidance
};

std::string to_string(CertificateKind kind);

struct Certificate {
  CertificateKind kind;
  bool holds = false;
  std::map<std::string, double> witnesses;
  std::string note;
};

/// Compares the SR objective at the composed PSR mean against the lower
/// strata minimum: kind sr_equals_psr certifies the PSR mean projects to an
/// SR mean, sr_in_lower reports the SR mean set lies in the lower strata.
Certificate certify_sr_vs_psr(const std::vector<Matrix>& xs,
                              const EigenDecomp& mean, MetricWeight k = {},
                              uint64_t seed = 0);

/// Orbit-uniqueness certificate: data diameter below r'_cx.
Certificate certify_uniqueness(const std::vector<Matrix>& xs,
                               MetricWeight k = {});

/// Stratum-avoidance certificate: all observations within delta(S0)/3 of S0.
Certificate certify_stratum_avoidance(const std::vector<Matrix>& xs,
                                      const Matrix& s0, MetricWeight k = {});

}  // namespace scarot
