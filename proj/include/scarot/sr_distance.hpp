#pragma once

#include <utility>
#include <vector>

#include "scarot/group_fiber.hpp"

namespace scarot {

inline constexpr double kTolOpt = 1e-10;
inline constexpr int kCircleRestarts = 8;

/// Eigen-decompositions achieving the scaling-rotation distance.
struct MinimalPair {
  EigenDecomp mx;
  EigenDecomp my;
  double dist = 0.0;
};

/// Partial scaling-rotation distance: the nearest element of F^-1(X) to m,
/// with the achieving fiber element. Exhaustive over the orbit in the top
/// stratum; closed form at the bottom; golden-section over the circle
/// subgroup for the p = 3 multiplicity-(2,1) stratum. Ties resolve to the
/// lexicographically smallest representative.
std::pair<double, EigenDecomp> d_psr(const Matrix& x, const EigenDecomp& m,
                                     MetricWeight k = {},
                                     double eps_strat = kEpsStratum);

/// Same search against a precomputed fiber (hot path for mean estimation).
std::pair<double, EigenDecomp> nearest_fiber_element(const Fiber& fiber,
                                                     const EigenDecomp& m,
                                                     MetricWeight k = {});

/// Scaling-rotation distance with an achieving minimal pair. When either
/// argument has distinct eigenvalues its decomposition can be fixed and the
/// search runs over the other fiber only; bottom-stratum arguments reduce to
/// the diagonal metric; a pair of p = 3 multiplicity-(2,1) arguments uses a
/// nested two-angle minimization.
MinimalPair d_sr(const Matrix& x, const Matrix& y, MetricWeight k = {},
                 double eps_strat = kEpsStratum);

/// Distance from S to the union of lower strata: half the minimal pairwise
/// log-eigenvalue gap, times sqrt(2); zero iff S has a repeated eigenvalue.
double delta(const Matrix& s);

/// All fiber elements tied (within tol) for the d_psr minimum.
std::vector<EigenDecomp> d_psr_ties(const Matrix& x, const EigenDecomp& m,
                                    MetricWeight k = {}, double tol = 1e-10);

namespace detail {

/// Full record of a fiber search: the achieving element, its orbit index
/// (-1 on continuous strata) and, for circle strata, the group element and
/// angle that produced it.
struct FiberMatch {
  double dist = 0.0;
  EigenDecomp element;
  int orbit_index = -1;
  SignedPerm h;
  double phi = 0.0;
};

FiberMatch nearest_match(const Fiber& fiber, const EigenDecomp& m,
                         MetricWeight k);

}  // namespace detail

}  // namespace scarot
