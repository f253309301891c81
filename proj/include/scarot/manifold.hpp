#pragma once

#include <utility>

#include "scarot/types.hpp"

namespace scarot {

inline constexpr double kTolOrth = 1e-10;
inline constexpr double kOrthRepairLimit = 1e-6;

/// Rotation matrix in SO(p). Inputs within kTolOrth of orthogonality are
/// accepted as-is; inputs within kOrthRepairLimit are snapped back by polar
/// projection; anything worse (or with negative determinant) is rejected.
class Rotation {
 public:
  explicit Rotation(Matrix u);

  static Rotation identity(int p);
  /// Rotation by `angle` in the (i,j) coordinate plane, identity elsewhere.
  static Rotation plane(int p, int i, int j, double angle);
  /// 2x2 counterclockwise rotation by `angle`.
  static Rotation angle2d(double angle);

  const Matrix& matrix() const { return u_; }
  int dim() const { return static_cast<int>(u_.rows()); }
  Rotation inverse() const;

  friend Rotation operator*(const Rotation& a, const Rotation& b);

 private:
  struct Unchecked {};
  Rotation(Matrix u, Unchecked) : u_(std::move(u)) {}
  Matrix u_;
};

/// Positive diagonal matrix, stored as the vector of entry logarithms so that
/// the Log-Euclidean structure on Diag+(p) is exact.
class PosDiag {
 public:
  static PosDiag from_values(const Vector& diag);
  static PosDiag from_log(Vector log_diag);

  const Vector& log() const { return log_diag_; }
  Vector values() const { return log_diag_.array().exp(); }
  Matrix matrix() const;
  int dim() const { return static_cast<int>(log_diag_.size()); }

 private:
  explicit PosDiag(Vector log_diag) : log_diag_(std::move(log_diag)) {}
  Vector log_diag_;
};

/// A point (U, D) of M(p) = SO(p) x Diag+(p).
struct EigenDecomp {
  Rotation u;
  PosDiag d;

  int dim() const { return u.dim(); }
  /// Eigen-composition U D U^T.
  Matrix compose() const;
};

/// Tangent vector (A, L) at a point of M(p), right-translated: the tangent
/// at (U, D) is (A U, L D). A is antisymmetric and kept as its p(p-1)/2
/// rotation-generator coefficients so that A + A^T = 0 holds exactly.
/// Coefficient (i,j), i<j in lexicographic order, equals A(j,i); for p = 2
/// the single coefficient is the counterclockwise rotation angle.
struct TangentVec {
  Vector so_coeffs;
  Vector diag;
  int p = 0;

  static TangentVec zero(int p);
  /// Builds from an antisymmetric matrix (validated) and a diagonal vector.
  static TangentVec from_matrices(const Matrix& a, const Vector& l);
  Matrix antisym() const;
};

struct MetricWeight {
  double k = 1.0;
};

/// Principal log of the relative rotation: antisymmetric A with
/// Exp(A) U1 = U2 and minimal Frobenius norm. Closed forms for p = 2, 3;
/// real Schur decomposition for p >= 4. Involutions (angle pi) take a
/// deterministic branch: first nonzero axis component positive for p <= 3,
/// fixed Schur-plane orientation otherwise.
Matrix rot_log(const Rotation& u1, const Rotation& u2);

/// Exp of an antisymmetric matrix; inverse of the branch chosen by rot_log.
Matrix so_exp(const Matrix& a);

/// Rotation-group distance (1/sqrt(2)) ||Log(U2 U1^T)||_F; the rotation angle
/// magnitude for p = 2, 3.
double d_so(const Rotation& u1, const Rotation& u2);

/// Log-Euclidean distance on Diag+(p).
double d_diag(const PosDiag& d1, const PosDiag& d2);

/// Product metric sqrt(k d_so^2 + d_diag^2) on M(p).
double d_m(const EigenDecomp& m1, const EigenDecomp& m2, MetricWeight k = {});

/// True when the relative rotation is an involution, making the connecting
/// geodesic non-unique. rot_log/geodesic then use the deterministic branch.
bool is_antipodal(const Rotation& u1, const Rotation& u2, double tol = 1e-9);

/// Constant-speed geodesic with gamma(0) = m1, gamma(1) = m2.
EigenDecomp geodesic(const EigenDecomp& m1, const EigenDecomp& m2, double t);

EigenDecomp exp_map(const EigenDecomp& base, const TangentVec& v);

/// Inverse of exp_map; requires the relative rotation angle to be below pi.
TangentVec log_map(const EigenDecomp& base, const EigenDecomp& target);

/// Isometric vectorization (sqrt(k) * rotation coefficients; diagonal part):
/// the Euclidean inner product of images equals the metric g_M.
Vector vectorize(const TangentVec& v, MetricWeight k = {});
TangentVec devectorize(const Vector& x, int p, MetricWeight k = {});

/// Tangent dimension p(p-1)/2 + p.
int tangent_dim(int p);

}  // namespace scarot
