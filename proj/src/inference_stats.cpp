#include "scarot/inference_stats.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>

#include "scarot/parallel.hpp"
#include "scarot/rng.hpp"
#include "scarot/special.hpp"

namespace scarot {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Matrix sym_log(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((x + x.transpose()) / 2.0);
  if ((es.eigenvalues().array() <= 0.0).any()) {
    throw NotPositiveDefinite("matrix log needs positive eigenvalues");
  }
  return es.eigenvectors() *
         es.eigenvalues().array().log().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Matrix sym_exp(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((x + x.transpose()) / 2.0);
  return es.eigenvectors() *
         es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Matrix sym_pow(const Matrix& x, double e) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((x + x.transpose()) / 2.0);
  if ((es.eigenvalues().array() <= 0.0).any()) {
    throw NotPositiveDefinite("matrix power needs positive eigenvalues");
  }
  return es.eigenvectors() *
         es.eigenvalues().array().pow(e).matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

EigenDecomp nearest_orbit_member(const EigenDecomp& m,
                                 const EigenDecomp& target, MetricWeight k) {
  double best = std::numeric_limits<double>::infinity();
  EigenDecomp pick = m;
  for (const auto& cand : mean_orbit(m)) {
    double d = d_m(cand, target, k);
    if (d < best) {
      best = d;
      pick = cand;
    }
  }
  return pick;
}

std::vector<int> resample_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = rng.uniform_int(n);
  return idx;
}

}  // namespace

std::vector<Matrix> sample_model_2d(int n, double sigma_theta, double mu1,
                                    double mu2, double sigma_d,
                                    uint64_t seed) {
  if (n < 0 || sigma_theta <= 0.0 || sigma_d <= 0.0) {
    throw BadParameter("sample_model_2d needs n >= 0 and positive spreads");
  }
  Rng rng(seed);
  std::vector<Matrix> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    double theta = sigma_theta * rng.normal();
    while (theta <= -kPi || theta >= kPi) theta = sigma_theta * rng.normal();
    double d1 = mu1 + sigma_d * rng.normal();
    double d2 = mu2 + sigma_d * rng.normal();
    Vector diag(2);
    diag << d1, d2;
    out.push_back(EigenDecomp{Rotation::angle2d(theta), PosDiag::from_log(diag)}
                      .compose());
  }
  return out;
}

std::vector<Matrix> sample_spd_lognormal(int n, const Matrix& mean_log,
                                         const Matrix& cov, uint64_t seed) {
  const int p = static_cast<int>(mean_log.rows());
  const int d = p * (p + 1) / 2;
  if (cov.rows() != d || cov.cols() != d) {
    throw BadParameter("covariance must be d x d with d = p(p+1)/2");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es((cov + cov.transpose()) / 2.0);
  const double lmax = std::max(1e-300, es.eigenvalues().maxCoeff());
  if ((es.eigenvalues().array() < -1e-10 * lmax).any()) {
    throw BadParameter("covariance is not positive semidefinite");
  }
  Matrix root = es.eigenvectors() *
                es.eigenvalues().array().max(0.0).sqrt().matrix().asDiagonal();
  Vector mu = vecd(mean_log);
  Rng rng(seed);
  std::vector<Matrix> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vector z(d);
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    out.push_back(sym_exp(vecd_inv(mu + root * z, p)));
  }
  return out;
}

Vector vecd(const Matrix& sym) {
  const int p = static_cast<int>(sym.rows());
  Vector x(p * (p + 1) / 2);
  for (int i = 0; i < p; ++i) x[i] = sym(i, i);
  int idx = p;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) x[idx++] = std::sqrt(2.0) * sym(i, j);
  }
  return x;
}

Matrix vecd_inv(const Vector& x, int p) {
  if (x.size() != p * (p + 1) / 2) {
    throw DimensionMismatch("vecd vector has wrong length");
  }
  Matrix sym(p, p);
  for (int i = 0; i < p; ++i) sym(i, i) = x[i];
  int idx = p;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      sym(i, j) = sym(j, i) = x[idx++] / std::sqrt(2.0);
    }
  }
  return sym;
}

CoordinateCloud le_coordinates(const std::vector<Matrix>& xs) {
  if (xs.empty()) throw EmptyInput("le_coordinates needs data");
  const int p = static_cast<int>(xs.front().rows());
  CoordinateCloud cloud;
  cloud.frame = Frame::log_euclidean;
  cloud.coords.resize(static_cast<int>(xs.size()), p * (p + 1) / 2);
  for (size_t i = 0; i < xs.size(); ++i) {
    cloud.coords.row(i) = vecd(sym_log(xs[i])).transpose();
  }
  return cloud;
}

Matrix le_mean(const std::vector<Matrix>& xs) {
  if (xs.empty()) throw EmptyInput("le_mean needs data");
  Matrix sum = Matrix::Zero(xs.front().rows(), xs.front().cols());
  for (const auto& x : xs) sum += sym_log(x);
  return sym_exp(sum / static_cast<double>(xs.size()));
}

AiMeanResult ai_mean(const std::vector<Matrix>& xs, double tol, int max_iter) {
  if (xs.empty()) throw EmptyInput("ai_mean needs data");
  AiMeanResult res{le_mean(xs), false, 0};
  for (int it = 0; it < max_iter; ++it) {
    Matrix rinv = sym_pow(res.mean, -0.5);
    Matrix rhalf = sym_pow(res.mean, 0.5);
    Matrix w = Matrix::Zero(res.mean.rows(), res.mean.cols());
    for (const auto& x : xs) w += sym_log(rinv * x * rinv.transpose());
    w /= static_cast<double>(xs.size());
    res.iterations = it;
    if (w.norm() < tol) {
      res.converged = true;
      break;
    }
    res.mean = rhalf * sym_exp(w) * rhalf.transpose();
  }
  return res;
}

CoordinateCloud psr_coordinates(const std::vector<Matrix>& xs,
                                const EigenDecomp& reference, MetricWeight k) {
  if (xs.empty()) throw EmptyInput("psr_coordinates needs data");
  const int n = static_cast<int>(xs.size());
  CoordinateCloud cloud;
  cloud.frame = Frame::psr;
  cloud.reference = reference;
  cloud.coords.resize(n, tangent_dim(reference.dim()));
  cloud.outside_injectivity.assign(n, false);
  for (int i = 0; i < n; ++i) {
    auto [dist, el] = d_psr(xs[i], reference, k);
    (void)dist;
    try {
      cloud.coords.row(i) = vectorize(log_map(reference, el), k).transpose();
    } catch (const OutsideInjectivityRadius&) {
      cloud.outside_injectivity[i] = true;
      cloud.coords.row(i).setZero();
    }
  }
  return cloud;
}

BootstrapCov bootstrap_cov(const std::vector<Matrix>& xs, int b, uint64_t seed,
                           MetricWeight k, const MeanOptions& opts) {
  if (b < 1) throw BadParameter("bootstrap needs B >= 1");
  if (xs.empty()) throw EmptyInput("bootstrap_cov needs data");
  const int n = static_cast<int>(xs.size());
  const int d = tangent_dim(static_cast<int>(xs.front().rows()));

  std::vector<Fiber> fibers;
  fibers.reserve(n);
  for (const auto& x : xs) fibers.push_back(fiber_of(x, opts.eps_strat));
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  MeanOptions mo = opts;
  mo.k = k;
  const EigenDecomp m_n =
      psr_mean_cached(fibers, all, fibers.front().base, mo).mean;

  std::vector<std::optional<Vector>> rows(b);
  parallel_for(b, [&](int rep) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(rep)));
    try {
      std::vector<int> idx = resample_indices(n, rng);
      // Warm start at the original mean; keeps the orbit matching stable.
      MeanResult mr = psr_mean_cached(fibers, idx, m_n, mo);
      EigenDecomp matched = nearest_orbit_member(mr.mean, m_n, k);
      rows[rep] = vectorize(log_map(m_n, matched), k);
    } catch (const Error&) {
      rows[rep] = std::nullopt;
    }
  });

  BootstrapCov out;
  out.cov = Matrix::Zero(d, d);
  for (const auto& row : rows) {
    if (!row) {
      ++out.replicates_dropped;
      continue;
    }
    out.cov += (*row) * row->transpose();
    ++out.replicates_used;
  }
  if (out.replicates_used == 0) throw Error("all bootstrap replicates failed");
  out.cov /= static_cast<double>(out.replicates_used);
  return out;
}

ConfidenceRegion confidence_region(const Vector& mean_coords, const Matrix& cov,
                                   double level) {
  if (level <= 0.0 || level >= 1.0) {
    throw BadParameter("confidence level must be in (0, 1)");
  }
  const int d = static_cast<int>(cov.rows());
  if (cov.cols() != d || mean_coords.size() != d) {
    throw DimensionMismatch("covariance/mean dimensions disagree");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es((cov + cov.transpose()) / 2.0);
  const Vector& ev = es.eigenvalues();
  const double lmax = std::max(ev.maxCoeff(), 0.0);
  const double cutoff = std::max(lmax, 1.0) * 1e-12;
  ConfidenceRegion region;
  region.center = mean_coords;
  region.cov = cov;
  Vector inv = Vector::Zero(d);
  for (int i = 0; i < d; ++i) {
    if (ev[i] > cutoff) {
      inv[i] = 1.0 / ev[i];
      ++region.rank;
    }
  }
  region.pseudo_inverse = region.rank < d;
  region.cov_inv =
      es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  region.threshold = chi2_quantile(level, d);
  return region;
}

GroupTestReport two_group_report(const std::vector<Matrix>& xs1,
                                 const std::vector<Matrix>& xs2, int b,
                                 double level, uint64_t seed, MetricWeight k) {
  if (b < 1) throw BadParameter("two_group_report needs B >= 1");
  if (xs1.empty() || xs2.empty()) throw EmptyInput("both groups need data");
  const int p = static_cast<int>(xs1.front().rows());
  const int d = tangent_dim(p);

  GroupTestReport report;
  report.p = p;
  report.d = d;
  report.level = level;
  report.chi2_threshold = chi2_quantile(level, d);

  std::vector<Matrix> pooled = xs1;
  pooled.insert(pooled.end(), xs2.begin(), xs2.end());
  MeanOptions opts;
  opts.k = k;
  const EigenDecomp m_pool = psr_mean(pooled, std::nullopt, opts).mean;

  auto group_psr = [&](const std::vector<Matrix>& xs, uint64_t stream,
                       Vector& coords, Matrix& cov, int& dropped) {
    MeanResult mr = psr_mean(xs, std::nullopt, opts);
    EigenDecomp matched = nearest_orbit_member(mr.mean, m_pool, k);
    coords = vectorize(log_map(m_pool, matched), k);
    BootstrapCov bc = bootstrap_cov(xs, b, Rng::derive(seed, stream), k, opts);
    cov = bc.cov;
    dropped = bc.replicates_dropped;
  };
  group_psr(xs1, 1, report.mean1_psr, report.cov1_psr, report.dropped1);
  group_psr(xs2, 2, report.mean2_psr, report.cov2_psr, report.dropped2);

  auto group_le = [&](const std::vector<Matrix>& xs, uint64_t stream,
                      Vector& coords, Matrix& cov) {
    coords = vecd(sym_log(le_mean(xs)));
    const int n = static_cast<int>(xs.size());
    cov = Matrix::Zero(d, d);
    Rng rng(Rng::derive(seed, stream));
    for (int rep = 0; rep < b; ++rep) {
      std::vector<int> idx = resample_indices(n, rng);
      std::vector<Matrix> res;
      res.reserve(n);
      for (int i : idx) res.push_back(xs[i]);
      Vector x = vecd(sym_log(le_mean(res))) - coords;
      cov += x * x.transpose();
    }
    cov /= static_cast<double>(b);
  };
  group_le(xs1, 17, report.mean1_le, report.cov1_le);
  group_le(xs2, 18, report.mean2_le, report.cov2_le);

  report.region1_psr = confidence_region(report.mean1_psr, report.cov1_psr, level);
  report.region2_psr = confidence_region(report.mean2_psr, report.cov2_psr, level);

  auto separation = [&](const Vector& m1, const Vector& m2, const Matrix& c1,
                        const Matrix& c2, double& t, double& pv) {
    ConfidenceRegion pooled_cov = confidence_region(m1, c1 + c2, level);
    Vector diff = m1 - m2;
    t = diff.dot(pooled_cov.cov_inv * diff);
    pv = 1.0 - chi2_cdf(t, d);
  };
  separation(report.mean1_psr, report.mean2_psr, report.cov1_psr,
             report.cov2_psr, report.t_psr, report.p_value_psr);
  separation(report.mean1_le, report.mean2_le, report.cov1_le, report.cov2_le,
             report.t_le, report.p_value_le);
  report.separated = report.p_value_psr < 1.0 - level;
  return report;
}

}  // namespace scarot
