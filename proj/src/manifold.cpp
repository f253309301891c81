#include "scarot/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace scarot {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Matrix polar_project(const Matrix& u) {
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Index of coefficient (i,j), i<j lexicographic, within the p(p-1)/2 block.
int pair_index(int p, int i, int j) {
  return i * p - i * (i + 1) / 2 + (j - i - 1);
}

// theta / (2 sin theta), stable near zero.
double half_sinc_inv(double theta) {
  if (theta < 1e-4) {
    double t2 = theta * theta;
    return 0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0;
  }
  return theta / (2.0 * std::sin(theta));
}

// Principal log of a 3x3 rotation, robust across the whole angle range.
Matrix so3_log(const Matrix& r) {
  double c = (r.trace() - 1.0) / 2.0;
  c = std::min(1.0, std::max(-1.0, c));
  double theta = std::acos(c);
  Matrix a = Matrix::Zero(3, 3);
  if (theta < 1e-12) return a;
  if (theta < kPi - 1e-6) {
    a = half_sinc_inv(theta) * (r - r.transpose());
    return a;
  }
  // Angle at or near pi: sin(theta) ~ 0, recover the axis from the
  // symmetric part, w w^T = I + K^2 = (R + R^T)/2 adjusted.
  Matrix ww = (r + r.transpose()) / 2.0;
  ww.diagonal().array() -= c;
  ww /= (1.0 - c);
  int imax = 0;
  ww.diagonal().maxCoeff(&imax);
  Eigen::Vector3d w;
  w[imax] = std::sqrt(std::max(0.0, ww(imax, imax)));
  for (int i = 0; i < 3; ++i) {
    if (i != imax) w[i] = ww(imax, i) / w[imax];
  }
  double s = std::sin(theta);
  if (std::abs(s) > 1e-12) {
    // Orient w by the antisymmetric part.
    Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    if (w.dot(v) * s < 0.0) w = -w;
  } else {
    // Exact involution: first nonzero component positive.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(w[i]) > 1e-12) {
        if (w[i] < 0.0) w = -w;
        break;
      }
    }
  }
  a(0, 1) = -w[2] * theta;
  a(1, 0) = w[2] * theta;
  a(0, 2) = w[1] * theta;
  a(2, 0) = -w[1] * theta;
  a(1, 2) = -w[0] * theta;
  a(2, 1) = w[0] * theta;
  return a;
}

// Principal log via the real Schur form; for (numerically) orthogonal input
// the Schur factor is block diagonal with 2x2 rotation blocks and +-1 entries.
Matrix schur_log(const Matrix& r) {
  const int p = static_cast<int>(r.rows());
  Eigen::RealSchur<Matrix> schur(r);
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();
  Matrix a = Matrix::Zero(p, p);
  std::vector<int> minus_ones;
  int i = 0;
  while (i < p) {
    if (i + 1 < p && std::abs(t(i + 1, i)) > 1e-8) {
      double theta = std::atan2(t(i + 1, i), t(i, i));
      a(i, i + 1) = -theta;
      a(i + 1, i) = theta;
      i += 2;
    } else {
      if (t(i, i) < 0.0) minus_ones.push_back(i);
      ++i;
    }
  }
  // det = +1 forces an even count of -1 blocks; pair them as pi-rotations
  // in consecutive Schur planes (the deterministic branch).
  for (size_t m = 0; m + 1 < minus_ones.size(); m += 2) {
    int i1 = minus_ones[m], i2 = minus_ones[m + 1];
    a(i1, i2) = -kPi;
    a(i2, i1) = kPi;
  }
  Matrix out = q * a * q.transpose();
  return (out - out.transpose()) / 2.0;
}

}  // namespace

Rotation::Rotation(Matrix u) : u_(std::move(u)) {
  if (u_.rows() != u_.cols() || u_.rows() < 1) {
    throw NonOrthogonalInput("rotation matrix must be square");
  }
  const int p = static_cast<int>(u_.rows());
  double err = (u_.transpose() * u_ - Matrix::Identity(p, p)).norm();
  if (err > kTolOrth) {
    if (err > kOrthRepairLimit) {
      throw NonOrthogonalInput("matrix is not orthogonal (||U^T U - I|| = " +
                               std::to_string(err) + ")");
    }
    u_ = polar_project(u_);
  }
  if (u_.determinant() < 0.0) {
    throw NonOrthogonalInput("matrix has determinant -1, not a rotation");
  }
}

Rotation Rotation::identity(int p) {
  return Rotation(Matrix::Identity(p, p), Unchecked{});
}

Rotation Rotation::plane(int p, int i, int j, double angle) {
  Matrix u = Matrix::Identity(p, p);
  double c = std::cos(angle), s = std::sin(angle);
  u(i, i) = c;
  u(j, j) = c;
  u(i, j) = -s;
  u(j, i) = s;
  return Rotation(std::move(u), Unchecked{});
}

Rotation Rotation::angle2d(double angle) { return plane(2, 0, 1, angle); }

Rotation Rotation::inverse() const {
  return Rotation(u_.transpose(), Unchecked{});
}

Rotation operator*(const Rotation& a, const Rotation& b) {
  return Rotation(a.u_ * b.u_);
}

PosDiag PosDiag::from_values(const Vector& diag) {
  if (diag.size() < 1) throw NonPositiveEntry("empty diagonal");
  if ((diag.array() <= 0.0).any()) {
    throw NonPositiveEntry("diagonal entries must be strictly positive");
  }
  return PosDiag(diag.array().log());
}

PosDiag PosDiag::from_log(Vector log_diag) {
  if (log_diag.size() < 1) throw NonPositiveEntry("empty diagonal");
  return PosDiag(std::move(log_diag));
}

Matrix PosDiag::matrix() const {
  return values().asDiagonal();
}

Matrix EigenDecomp::compose() const {
  if (u.dim() != d.dim()) throw DimensionMismatch("rotation/diagonal size mismatch");
  return u.matrix() * d.matrix() * u.matrix().transpose();
}

TangentVec TangentVec::zero(int p) {
  TangentVec v;
  v.p = p;
  v.so_coeffs = Vector::Zero(p * (p - 1) / 2);
  v.diag = Vector::Zero(p);
  return v;
}

TangentVec TangentVec::from_matrices(const Matrix& a, const Vector& l) {
  const int p = static_cast<int>(a.rows());
  if (a.cols() != p || l.size() != p) {
    throw DimensionMismatch("tangent parts have inconsistent dimensions");
  }
  if ((a + a.transpose()).norm() > 1e-9 * std::max(1.0, a.norm())) {
    throw DimensionMismatch("rotation part is not antisymmetric");
  }
  TangentVec v = zero(p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      v.so_coeffs[pair_index(p, i, j)] = (a(j, i) - a(i, j)) / 2.0;
    }
  }
  v.diag = l;
  return v;
}

Matrix TangentVec::antisym() const {
  Matrix a = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      double c = so_coeffs[pair_index(p, i, j)];
      a(j, i) = c;
      a(i, j) = -c;
    }
  }
  return a;
}

Matrix rot_log(const Rotation& u1, const Rotation& u2) {
  if (u1.dim() != u2.dim()) throw DimensionMismatch("rotation size mismatch");
  const int p = u1.dim();
  Matrix r = u2.matrix() * u1.matrix().transpose();
  if (p == 2) {
    double theta = std::atan2(r(1, 0), r(0, 0));
    // atan2 returns -pi for the involution; take the +pi branch.
    if (theta <= -kPi + 1e-15) theta = kPi;
    Matrix a(2, 2);
    a << 0.0, -theta, theta, 0.0;
    return a;
  }
  if (p == 3) return so3_log(r);
  return schur_log(r);
}

Matrix so_exp(const Matrix& a) {
  const int p = static_cast<int>(a.rows());
  if (p == 2) {
    double theta = a(1, 0);
    Matrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
  }
  if (p == 3) {
    Eigen::Vector3d w(a(2, 1), a(0, 2), a(1, 0));
    double theta = w.norm();
    if (theta < 1e-12) return Matrix::Identity(3, 3) + a;
    Matrix k = a / theta;
    return Matrix::Identity(3, 3) + std::sin(theta) * k +
           (1.0 - std::cos(theta)) * (k * k);
  }
  // Scaling and squaring with a Taylor core; fine at these dimensions.
  double norm = a.norm();
  int squarings = 0;
  Matrix b = a;
  while (norm > 0.25) {
    b /= 2.0;
    norm /= 2.0;
    ++squarings;
  }
  Matrix term = Matrix::Identity(p, p);
  Matrix sum = term;
  for (int n = 1; n <= 18; ++n) {
    term = term * b / static_cast<double>(n);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

double d_so(const Rotation& u1, const Rotation& u2) {
  return rot_log(u1, u2).norm() / std::sqrt(2.0);
}

double d_diag(const PosDiag& d1, const PosDiag& d2) {
  if (d1.dim() != d2.dim()) throw DimensionMismatch("diagonal size mismatch");
  return (d1.log() - d2.log()).norm();
}

double d_m(const EigenDecomp& m1, const EigenDecomp& m2, MetricWeight k) {
  if (m1.dim() != m2.dim()) throw DimensionMismatch("point dimension mismatch");
  double dr = d_so(m1.u, m2.u);
  double dd = d_diag(m1.d, m2.d);
  return std::sqrt(k.k * dr * dr + dd * dd);
}

bool is_antipodal(const Rotation& u1, const Rotation& u2, double tol) {
  Matrix r = u2.matrix() * u1.matrix().transpose();
  const int p = u1.dim();
  // Involution <=> R symmetric and != I.
  return (r - r.transpose()).norm() < tol &&
         (r - Matrix::Identity(p, p)).norm() > tol;
}

EigenDecomp geodesic(const EigenDecomp& m1, const EigenDecomp& m2, double t) {
  Matrix a = rot_log(m1.u, m2.u);
  Vector dl = m2.d.log() - m1.d.log();
  Rotation u(so_exp(t * a) * m1.u.matrix());
  return EigenDecomp{std::move(u), PosDiag::from_log(m1.d.log() + t * dl)};
}

EigenDecomp exp_map(const EigenDecomp& base, const TangentVec& v) {
  if (v.p != base.dim()) throw DimensionMismatch("tangent dimension mismatch");
  Rotation u(so_exp(v.antisym()) * base.u.matrix());
  return EigenDecomp{std::move(u), PosDiag::from_log(base.d.log() + v.diag)};
}

TangentVec log_map(const EigenDecomp& base, const EigenDecomp& target) {
  Matrix a = rot_log(base.u, target.u);
  double angle = a.norm() / std::sqrt(2.0);
  if (angle >= kPi - 1e-12 && base.dim() <= 3) {
    throw OutsideInjectivityRadius("relative rotation at the cut locus");
  }
  TangentVec v = TangentVec::from_matrices(a, target.d.log() - base.d.log());
  return v;
}

Vector vectorize(const TangentVec& v, MetricWeight k) {
  Vector x(v.so_coeffs.size() + v.diag.size());
  x.head(v.so_coeffs.size()) = std::sqrt(k.k) * v.so_coeffs;
  x.tail(v.diag.size()) = v.diag;
  return x;
}

TangentVec devectorize(const Vector& x, int p, MetricWeight k) {
  const int nso = p * (p - 1) / 2;
  if (x.size() != nso + p) throw DimensionMismatch("vector has wrong length");
  TangentVec v = TangentVec::zero(p);
  v.so_coeffs = x.head(nso) / std::sqrt(k.k);
  v.diag = x.tail(p);
  return v;
}

int tangent_dim(int p) { return p * (p - 1) / 2 + p; }

}  // namespace scarot
