#include "scarot/mean_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scarot/parallel.hpp"
#include "scarot/rng.hpp"

namespace scarot {

namespace {

struct Selection {
  EigenDecomp element;
  int orbit_index = -1;
  double dist = 0.0;
};

std::vector<Selection> step1(const std::vector<Fiber>& fibers,
                             const std::vector<int>& indices,
                             const EigenDecomp& m, MetricWeight k) {
  std::vector<Selection> out(indices.size(),
                             Selection{m, -1, 0.0});
  parallel_for(static_cast<int>(indices.size()), [&](int i) {
    detail::FiberMatch match = detail::nearest_match(fibers[indices[i]], m, k);
    out[i] = Selection{std::move(match.element), match.orbit_index, match.dist};
  });
  return out;
}

double objective(const std::vector<Selection>& sel) {
  double sum = 0.0;
  for (const auto& s : sel) sum += s.dist * s.dist;
  return sum / static_cast<double>(sel.size());
}

int count_changes(const std::vector<Selection>& a,
                  const std::vector<Selection>& b) {
  int changed = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].orbit_index >= 0 && b[i].orbit_index >= 0) {
      changed += a[i].orbit_index != b[i].orbit_index;
    } else {
      changed += d_m(a[i].element, b[i].element) > 1e-9;
    }
  }
  return changed;
}

Matrix random_rotation3(Rng& rng) {
  Matrix g(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  if (q.determinant() < 0.0) q.col(2) *= -1.0;
  return q;
}

}  // namespace

PosDiag frechet_mean_diag(const std::vector<PosDiag>& ds) {
  if (ds.empty()) throw EmptyInput("frechet_mean_diag needs data");
  Vector sum = Vector::Zero(ds.front().dim());
  for (const auto& d : ds) {
    if (d.dim() != sum.size()) throw DimensionMismatch("mixed dimensions");
    sum += d.log();
  }
  return PosDiag::from_log(sum / static_cast<double>(ds.size()));
}

SoMeanResult frechet_mean_so(const std::vector<Rotation>& us,
                             const Rotation& init, double tol, int max_iter) {
  if (us.empty()) throw EmptyInput("frechet_mean_so needs data");
  const int p = init.dim();
  Rotation u = init;
  SoMeanResult res{u, false, 0, 0.0};
  for (int it = 0; it < max_iter; ++it) {
    Matrix g = Matrix::Zero(p, p);
    for (const auto& ui : us) g += rot_log(u, ui);
    g /= static_cast<double>(us.size());
    res.grad_norm = g.norm();
    res.iterations = it;
    if (res.grad_norm < tol) {
      res.converged = true;
      break;
    }
    u = Rotation(so_exp(g) * u.matrix());
  }
  res.mean = u;
  return res;
}

MeanResult psr_mean_cached(const std::vector<Fiber>& fibers,
                           const std::vector<int>& indices,
                           const EigenDecomp& init, const MeanOptions& opts) {
  if (indices.empty()) throw EmptyInput("psr_mean needs data");
  EigenDecomp m = init;
  std::vector<Selection> sel = step1(fibers, indices, m, opts.k);
  double f = objective(sel);

  MeanResult res{m, 0, {f}, 0, 0, false, {}, {}};
  for (int pass = 1; pass <= opts.max_outer; ++pass) {
    // Step 2: product Frechet mean of the current matches.
    std::vector<Rotation> rotations;
    std::vector<PosDiag> diags;
    rotations.reserve(sel.size());
    diags.reserve(sel.size());
    for (const auto& s : sel) {
      rotations.push_back(s.element.u);
      diags.push_back(s.element.d);
    }
    EigenDecomp m_new{frechet_mean_so(rotations, m.u).mean,
                      frechet_mean_diag(diags)};
    // Step 1 against the updated mean doubles as the objective evaluation.
    std::vector<Selection> sel_new = step1(fibers, indices, m_new, opts.k);
    double f_new = objective(sel_new);
    res.objective_trace.push_back(f_new);
    res.step1_changes.push_back(count_changes(sel, sel_new));
    res.total_passes = pass;
    m = std::move(m_new);
    sel = std::move(sel_new);
    if (f - f_new > opts.eps) {
      ++res.iterations;
      f = f_new;
    } else {
      res.converged = true;
      break;
    }
  }
  res.mean = m;
  res.orbit_size = static_cast<int>(enumerate_group(m.dim()).size());
  res.matched_fibers.reserve(sel.size());
  for (auto& s : sel) res.matched_fibers.push_back(std::move(s.element));
  return res;
}

MeanResult psr_mean(const std::vector<Matrix>& xs,
                    const std::optional<EigenDecomp>& init,
                    const MeanOptions& opts) {
  if (xs.empty()) throw EmptyInput("psr_mean needs data");
  std::vector<Fiber> fibers;
  fibers.reserve(xs.size());
  for (const auto& x : xs) fibers.push_back(fiber_of(x, opts.eps_strat));
  std::vector<int> indices(xs.size());
  std::iota(indices.begin(), indices.end(), 0);

  if (init) return psr_mean_cached(fibers, indices, *init, opts);
  if (!opts.multistart) {
    return psr_mean_cached(fibers, indices, fibers.front().base, opts);
  }
  std::optional<MeanResult> best;
  for (const auto& fiber : fibers) {
    MeanResult r = psr_mean_cached(fibers, indices, fiber.base, opts);
    if (!best || r.objective_trace.back() < best->objective_trace.back()) {
      best = std::move(r);
    }
  }
  return *best;
}

std::vector<EigenDecomp> mean_orbit(const EigenDecomp& m) {
  const auto& group = enumerate_group(m.dim());
  std::vector<EigenDecomp> out;
  out.reserve(group.size());
  for (const auto& h : group) out.push_back(act(h, m));
  return out;
}

double f_psr(const std::vector<Matrix>& xs, const EigenDecomp& m,
             MetricWeight k) {
  if (xs.empty()) throw EmptyInput("f_psr needs data");
  double sum = 0.0;
  for (const auto& x : xs) {
    double d = d_psr(x, m, k).first;
    sum += d * d;
  }
  return sum / static_cast<double>(xs.size());
}

double f_sr(const std::vector<Matrix>& xs, const Matrix& s, MetricWeight k) {
  if (xs.empty()) throw EmptyInput("f_sr needs data");
  double sum = 0.0;
  for (const auto& x : xs) {
    double d = d_sr(x, s, k).dist;
    sum += d * d;
  }
  return sum / static_cast<double>(xs.size());
}

namespace {

double grand_log_mean(const std::vector<Matrix>& xs) {
  double sum = 0.0;
  int count = 0;
  for (const auto& x : xs) {
    Vector l = canonical_decomposition(x).d.log();
    sum += l.sum();
    count += static_cast<int>(l.size());
  }
  return sum / count;
}

// f_n^SR over the bottom stratum is a 1-D quadratic in log c.
LowerMinimum bottom_minimum(const std::vector<Matrix>& xs, int p) {
  double c = grand_log_mean(xs);
  double value = 0.0;
  for (const auto& x : xs) {
    Vector l = canonical_decomposition(x).d.log();
    value += (l.array() - c).square().sum();
  }
  value /= static_cast<double>(xs.size());
  Matrix s = std::exp(c) * Matrix::Identity(p, p);
  return LowerMinimum{std::move(s), value, true};
}

// Alternating search over the p = 3 multiplicity-(2,1) stratum
// S = V diag(e^a, e^a, e^b) V^T: match each observation's fixed canonical
// decomposition to the nearest fiber element of S, then refit (V, a, b)
// from the matches in closed form plus an SO(3) Frechet mean.
LowerMinimum two_one_search(const std::vector<Matrix>& xs, MetricWeight k,
                            uint64_t seed, int restarts) {
  const int n = static_cast<int>(xs.size());
  std::vector<EigenDecomp> ms;
  ms.reserve(n);
  for (const auto& x : xs) ms.push_back(canonical_decomposition(x));

  auto make_fiber = [](const Matrix& v, double a, double b) {
    Stratum st{StratumTag::lower, {{0, 1}, {2}}};
    Vector logd(3);
    logd << a, a, b;
    Fiber f{st, EigenDecomp{Rotation(v), PosDiag::from_log(logd)}, {}, 1,
            {0, 1}};
    return f;
  };

  struct Assignment {
    double value = 0.0;
    std::vector<Rotation> aligned;
    double mean_a = 0.0, mean_b = 0.0;
  };
  // Matching step: pull each match back to the base chart (m-tilde = h^-1 . m,
  // circle angle removed) so V refits as a plain rotation mean and (a, b) in
  // closed form.
  auto assign = [&](const Matrix& v, double a, double b) {
    Fiber fiber = make_fiber(v, a, b);
    Assignment out;
    out.aligned.reserve(n);
    double suma = 0.0, sumb = 0.0;
    for (const auto& m : ms) {
      detail::FiberMatch match = detail::nearest_match(fiber, m, k);
      out.value += match.dist * match.dist;
      EigenDecomp mt = act(match.h.inverse(), m);
      out.aligned.emplace_back(mt.u.matrix() *
                               Rotation::plane(3, 0, 1, -match.phi).matrix());
      suma += mt.d.log()[0] + mt.d.log()[1];
      sumb += mt.d.log()[2];
    }
    out.value /= n;
    out.mean_a = suma / (2.0 * n);
    out.mean_b = sumb / n;
    return out;
  };

  double best_val = std::numeric_limits<double>::infinity();
  Matrix best_s;
  Rng rng(Rng::derive(seed, 0x5c1f));
  const double center = grand_log_mean(xs);
  for (int r = 0; r < restarts; ++r) {
    Matrix v;
    double a, b;
    if (r < 2) {
      // Merge one eigenvalue pair of the first observation; a 3-cycle
      // permutation moves the repeated plane into slots (0, 1).
      const auto& m = ms.front();
      const Vector& l = m.d.log();
      if (r == 0) {
        v = m.u.matrix();
        a = (l[0] + l[1]) / 2.0;
        b = l[2];
      } else {
        Matrix cyc(3, 3);
        cyc << 0, 0, 1, 1, 0, 0, 0, 1, 0;
        v = m.u.matrix() * cyc;
        a = (l[1] + l[2]) / 2.0;
        b = l[0];
      }
    } else {
      v = random_rotation3(rng);
      a = center + rng.uniform(-1.0, 1.0);
      b = center + rng.uniform(-1.0, 1.0);
    }

    Assignment cur = assign(v, a, b);
    for (int it = 0; it < 40; ++it) {
      Matrix v_new = frechet_mean_so(cur.aligned, Rotation(v)).mean.matrix();
      Assignment next = assign(v_new, cur.mean_a, cur.mean_b);
      double dec = cur.value - next.value;
      v = std::move(v_new);
      a = cur.mean_a;
      b = cur.mean_b;
      cur = std::move(next);
      if (dec < 1e-10) break;
    }
    if (cur.value < best_val) {
      best_val = cur.value;
      Vector logd(3);
      logd << a, a, b;
      best_s = EigenDecomp{Rotation(v), PosDiag::from_log(logd)}.compose();
    }
  }
  return LowerMinimum{std::move(best_s), best_val, false};
}

}  // namespace

LowerMinimum minimize_fsr_lower(const std::vector<Matrix>& xs, MetricWeight k,
                                uint64_t seed, int restarts) {
  if (xs.empty()) throw EmptyInput("minimize_fsr_lower needs data");
  const int p = static_cast<int>(xs.front().rows());
  if (p == 2) return bottom_minimum(xs, 2);
  if (p != 3) throw UnsupportedStratum("lower-stratum minimization supports p = 2, 3");

  LowerMinimum bottom = bottom_minimum(xs, 3);
  bool all_top = std::all_of(xs.begin(), xs.end(), [&](const Matrix& x) {
    return classify_stratum(x).tag == StratumTag::top;
  });
  if (!all_top) return bottom;  // numeric bound from the bottom stratum only

  LowerMinimum circle = two_one_search(xs, k, seed, restarts);
  if (circle.value < bottom.value) return circle;
  bottom.exact = false;  // the (2,1) stratum was searched, not solved
  return bottom;
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::sr_equals_psr: return "sr_equals_psr";
    case CertificateKind::sr_in_lower: return "sr_in_lower";
    case CertificateKind::uniqueness: return "uniqueness";
    case CertificateKind::stratum_avoidance: return "stratum_avoidance";
  }
  return "unknown";
}

Certificate certify_sr_vs_psr(const std::vector<Matrix>& xs,
                              const EigenDecomp& mean, MetricWeight k,
                              uint64_t seed) {
  double f_mean = f_sr(xs, mean.compose(), k);
  LowerMinimum lower = minimize_fsr_lower(xs, k, seed);
  Certificate cert;
  cert.kind = f_mean <= lower.value ? CertificateKind::sr_equals_psr
                                    : CertificateKind::sr_in_lower;
  cert.holds = f_mean <= lower.value;
  cert.witnesses["f_sr_at_mean"] = f_mean;
  cert.witnesses["f_sr_lower_min"] = lower.value;
  cert.witnesses["n"] = static_cast<double>(xs.size());
  cert.note = lower.exact ? "lower-stratum minimum is exact"
                          : "numeric lower-stratum bound";
  return cert;
}

Certificate certify_uniqueness(const std::vector<Matrix>& xs, MetricWeight k) {
  if (xs.empty()) throw EmptyInput("certify_uniqueness needs data");
  const int p = static_cast<int>(xs.front().rows());
  for (const auto& x : xs) {
    if (classify_stratum(x).tag != StratumTag::top) {
      throw UnsupportedStratum(
          "uniqueness certificate requires top-stratum observations");
    }
  }
  double diameter = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    for (size_t j = i + 1; j < xs.size(); ++j) {
      diameter = std::max(diameter, d_sr(xs[i], xs[j], k).dist);
    }
  }
  double radius = r_cx(p, k);
  Certificate cert;
  cert.kind = CertificateKind::uniqueness;
  cert.holds = diameter < radius;
  cert.witnesses["diameter"] = diameter;
  cert.witnesses["r_cx"] = radius;
  cert.witnesses["n"] = static_cast<double>(xs.size());
  return cert;
}

Certificate certify_stratum_avoidance(const std::vector<Matrix>& xs,
                                      const Matrix& s0, MetricWeight k) {
  if (xs.empty()) throw EmptyInput("certify_stratum_avoidance needs data");
  if (classify_stratum(s0).tag != StratumTag::top) {
    throw UnsupportedStratum("reference point must lie in the top stratum");
  }
  double max_dist = 0.0;
  for (const auto& x : xs) {
    max_dist = std::max(max_dist, d_sr(x, s0, k).dist);
  }
  double d0 = delta(s0);
  Certificate cert;
  cert.kind = CertificateKind::stratum_avoidance;
  cert.holds = max_dist < d0 / 3.0;
  cert.witnesses["max_dist"] = max_dist;
  cert.witnesses["delta_s0"] = d0;
  cert.witnesses["n"] = static_cast<double>(xs.size());
  return cert;
}

}  // namespace scarot
