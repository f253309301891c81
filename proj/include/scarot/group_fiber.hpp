#pragma once

#include <array>
#include <optional>
#include <vector>

#include "scarot/manifold.hpp"

namespace scarot {

inline constexpr int kMaxGroupDim = 5;
inline constexpr double kEpsStratum = 1e-8;

/// Element of the finite group G(p) of even signed-permutation matrices:
/// column j of the matrix holds signs[j] at row perm[j].
struct SignedPerm {
  std::vector<int> perm;
  std::vector<int> signs;

  int dim() const { return static_cast<int>(perm.size()); }
  bool is_identity() const;
  Matrix matrix() const;
  SignedPerm compose(const SignedPerm& other) const;
  SignedPerm inverse() const;
  bool operator==(const SignedPerm& other) const;

  static SignedPerm identity(int p);
};

/// Complete list of the 2^(p-1) p! elements of G(p), cached per dimension.
const std::vector<SignedPerm>& enumerate_group(int p);

/// Group action h.(U, D) = (U h^-1, h D h^-1); fiber-preserving.
EigenDecomp act(const SignedPerm& h, const EigenDecomp& m);

enum class StratumTag { top, lower, bottom };

/// Eigenvalue-multiplicity type: blocks of indices (into the descending
/// eigenvalue order) whose log-eigenvalues coincide within the tolerance.
struct Stratum {
  StratumTag tag = StratumTag::top;
  std::vector<std::vector<int>> partition;
};

Stratum classify_stratum(const Matrix& x, double eps_strat = kEpsStratum);

/// Canonical eigen-decomposition: eigenvalues sorted descending,
/// determinant corrected to +1 by negating the last eigenvector column.
EigenDecomp canonical_decomposition(const Matrix& x);

/// The fiber F^-1(X). In the top stratum it is the explicit orbit
/// G(p) . (U, D); in lower strata it is described by a base decomposition
/// plus the dimension of the continuous stabilizer component G_D^0 (and,
/// for the p = 3 multiplicity-(2,1) stratum, the repeated coordinate plane).
struct Fiber {
  Stratum stratum;
  EigenDecomp base;
  std::vector<EigenDecomp> representatives;  // full orbit, top stratum only
  int continuous_dim = 0;
  std::array<int, 2> circle_plane{-1, -1};
};

Fiber fiber_of(const Matrix& x, double eps_strat = kEpsStratum);

/// beta_G(p) = min over nontrivial h of d_SO(I, h); pi/2 for p = 2..5,
/// computed exhaustively and cached.
double beta_g(int p);

/// Uniqueness radius r'_cx = sqrt(k) beta_G(p) / 4.
double r_cx(int p, MetricWeight k = {});

}  // namespace scarot
