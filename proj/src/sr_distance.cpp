#include "scarot/sr_distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scarot/optimize.hpp"

namespace scarot {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTieTol = 1e-12;

bool lex_less(const EigenDecomp& a, const EigenDecomp& b) {
  const int p = a.dim();
  for (int i = 0; i < p; ++i) {
    if (a.d.log()[i] != b.d.log()[i]) return a.d.log()[i] < b.d.log()[i];
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (a.u.matrix()(i, j) != b.u.matrix()(i, j)) {
        return a.u.matrix()(i, j) < b.u.matrix()(i, j);
      }
    }
  }
  return false;
}

EigenDecomp circle_element(const Fiber& fiber, const SignedPerm& h,
                           double phi) {
  const auto [i, j] = fiber.circle_plane;
  Rotation u(fiber.base.u.matrix() *
             Rotation::plane(fiber.base.dim(), i, j, phi).matrix());
  return act(h, EigenDecomp{std::move(u), fiber.base.d});
}

detail::FiberMatch nearest_on_circle(const Fiber& fiber, const EigenDecomp& m,
                                     MetricWeight k) {
  detail::FiberMatch best{std::numeric_limits<double>::infinity(), fiber.base,
                          -1, SignedPerm::identity(3), 0.0};
  for (const auto& h : enumerate_group(3)) {
    auto dist = [&](double phi) {
      return d_m(circle_element(fiber, h, phi), m, k);
    };
    auto [phi, val] =
        golden_minimize_multistart(dist, -kPi, kPi, kCircleRestarts, kTolOpt);
    if (val < best.dist - kTieTol) {
      best = {val, circle_element(fiber, h, phi), -1, h, phi};
    } else if (val <= best.dist + kTieTol) {
      EigenDecomp cand = circle_element(fiber, h, phi);
      if (lex_less(cand, best.element)) {
        best = {best.dist, std::move(cand), -1, h, phi};
      }
    }
  }
  return best;
}

// Both arguments in the p = 3 multiplicity-(2,1) stratum: minimize over the
// group and both circle angles, alternating golden-section sweeps seeded
// from a coarse grid.
MinimalPair d_sr_two_circles(const Fiber& fx, const Fiber& fy, MetricWeight k) {
  double best = std::numeric_limits<double>::infinity();
  EigenDecomp best_x = fx.base, best_y = fy.base;
  const SignedPerm id3 = SignedPerm::identity(3);
  const int grid = 16;
  for (const auto& h : enumerate_group(3)) {
    auto dist = [&](double phix, double phiy) {
      return d_m(circle_element(fx, id3, phix), circle_element(fy, h, phiy), k);
    };
    double sx = 0.0, sy = 0.0;
    double sbest = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid; ++a) {
      for (int b = 0; b < grid; ++b) {
        double px = -kPi + (2.0 * kPi * a) / grid;
        double py = -kPi + (2.0 * kPi * b) / grid;
        double v = dist(px, py);
        if (v < sbest) {
          sbest = v;
          sx = px;
          sy = py;
        }
      }
    }
    double phix = sx, phiy = sy, prev = sbest;
    for (int sweep = 0; sweep < 40; ++sweep) {
      phix = golden_minimize([&](double t) { return dist(t, phiy); },
                             phix - kPi / grid, phix + kPi / grid, kTolOpt)
                 .first;
      auto [ny, vy] =
          golden_minimize([&](double t) { return dist(phix, t); },
                          phiy - kPi / grid, phiy + kPi / grid, kTolOpt);
      phiy = ny;
      double dec = prev - vy;
      prev = vy;
      if (dec < kTolOpt) break;
    }
    if (prev < best) {
      best = prev;
      best_x = circle_element(fx, id3, phix);
      best_y = circle_element(fy, h, phiy);
    }
  }
  return MinimalPair{best_x, best_y, best};
}

}  // namespace

namespace detail {

FiberMatch nearest_match(const Fiber& fiber, const EigenDecomp& m,
                         MetricWeight k) {
  switch (fiber.stratum.tag) {
    case StratumTag::top: {
      const auto& reps = fiber.representatives;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& el : reps) best = std::min(best, d_m(el, m, k));
      int pick = -1;
      for (int i = 0; i < static_cast<int>(reps.size()); ++i) {
        if (d_m(reps[i], m, k) <= best + kTieTol) {
          if (pick < 0 || lex_less(reps[i], reps[pick])) pick = i;
        }
      }
      return {best, reps[pick], pick, SignedPerm::identity(m.dim()), 0.0};
    }
    case StratumTag::bottom: {
      // Any rotation works; align with m so only the diagonal part pays.
      EigenDecomp el{m.u, fiber.base.d};
      return {d_diag(fiber.base.d, m.d), std::move(el), -1,
              SignedPerm::identity(m.dim()), 0.0};
    }
    case StratumTag::lower:
      return nearest_on_circle(fiber, m, k);
  }
  throw UnsupportedStratum("unreachable stratum tag");
}

}  // namespace detail

std::pair<double, EigenDecomp> nearest_fiber_element(const Fiber& fiber,
                                                     const EigenDecomp& m,
                                                     MetricWeight k) {
  detail::FiberMatch match = detail::nearest_match(fiber, m, k);
  return {match.dist, std::move(match.element)};
}

std::pair<double, EigenDecomp> d_psr(const Matrix& x, const EigenDecomp& m,
                                     MetricWeight k, double eps_strat) {
  if (static_cast<int>(x.rows()) != m.dim()) {
    throw DimensionMismatch("matrix/decomposition dimension mismatch");
  }
  return nearest_fiber_element(fiber_of(x, eps_strat), m, k);
}

std::vector<EigenDecomp> d_psr_ties(const Matrix& x, const EigenDecomp& m,
                                    MetricWeight k, double tol) {
  Fiber fiber = fiber_of(x);
  auto [best, el] = nearest_fiber_element(fiber, m, k);
  std::vector<EigenDecomp> out;
  if (fiber.stratum.tag != StratumTag::top) {
    out.push_back(std::move(el));
    return out;
  }
  for (const auto& cand : fiber.representatives) {
    if (d_m(cand, m, k) <= best + tol) out.push_back(cand);
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

MinimalPair d_sr(const Matrix& x, const Matrix& y, MetricWeight k,
                 double eps_strat) {
  const Stratum sx = classify_stratum(x, eps_strat);
  const Stratum sy = classify_stratum(y, eps_strat);
  if (sy.tag == StratumTag::top) {
    EigenDecomp my = canonical_decomposition(y);
    auto [dist, mx] = d_psr(x, my, k, eps_strat);
    return MinimalPair{std::move(mx), std::move(my), dist};
  }
  if (sx.tag == StratumTag::top) {
    EigenDecomp mx = canonical_decomposition(x);
    auto [dist, my] = d_psr(y, mx, k, eps_strat);
    return MinimalPair{std::move(mx), std::move(my), dist};
  }
  if (sx.tag == StratumTag::bottom || sy.tag == StratumTag::bottom) {
    EigenDecomp mx = canonical_decomposition(x);
    EigenDecomp my = canonical_decomposition(y);
    double dist = d_diag(mx.d, my.d);
    if (sy.tag == StratumTag::bottom) {
      return MinimalPair{mx, EigenDecomp{mx.u, my.d}, dist};
    }
    return MinimalPair{EigenDecomp{my.u, mx.d}, my, dist};
  }
  // Both in the p = 3 multiplicity-(2,1) stratum.
  Fiber fx = fiber_of(x, eps_strat);
  Fiber fy = fiber_of(y, eps_strat);
  return d_sr_two_circles(fx, fy, k);
}

double delta(const Matrix& s) {
  EigenDecomp m = canonical_decomposition(s);
  const Vector& l = m.d.log();
  const int p = m.dim();
  if (p < 2) throw NotPositiveDefinite("delta needs p >= 2");
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 1; i < p; ++i) gap = std::min(gap, l[i - 1] - l[i]);
  return std::max(0.0, gap) / std::sqrt(2.0);
}

}  // namespace scarot
