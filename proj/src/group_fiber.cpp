#include "scarot/group_fiber.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace scarot {

namespace {

int perm_sign(const std::vector<int>& perm) {
  const int p = static_cast<int>(perm.size());
  std::vector<bool> seen(p, false);
  int sign = 1;
  for (int i = 0; i < p; ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = i; !seen[j]; j = perm[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

std::vector<SignedPerm> build_group(int p) {
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<SignedPerm> out;
  out.reserve(static_cast<size_t>(1) << (p - 1));
  do {
    const int base_sign = perm_sign(perm);
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
      int prod = 1;
      std::vector<int> signs(p, 1);
      for (int j = 0; j < p; ++j) {
        if (mask & (1u << j)) {
          signs[j] = -1;
          prod = -prod;
        }
      }
      if (base_sign * prod == 1) out.push_back(SignedPerm{perm, signs});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

bool SignedPerm::is_identity() const {
  for (int j = 0; j < dim(); ++j) {
    if (perm[j] != j || signs[j] != 1) return false;
  }
  return true;
}

Matrix SignedPerm::matrix() const {
  const int p = dim();
  Matrix m = Matrix::Zero(p, p);
  for (int j = 0; j < p; ++j) m(perm[j], j) = signs[j];
  return m;
}

SignedPerm SignedPerm::compose(const SignedPerm& other) const {
  // Matrix product this * other.
  const int p = dim();
  SignedPerm out;
  out.perm.resize(p);
  out.signs.resize(p);
  for (int j = 0; j < p; ++j) {
    out.perm[j] = perm[other.perm[j]];
    out.signs[j] = other.signs[j] * signs[other.perm[j]];
  }
  return out;
}

SignedPerm SignedPerm::inverse() const {
  const int p = dim();
  SignedPerm out;
  out.perm.resize(p);
  out.signs.resize(p);
  for (int j = 0; j < p; ++j) {
    out.perm[perm[j]] = j;
    out.signs[perm[j]] = signs[j];
  }
  return out;
}

bool SignedPerm::operator==(const SignedPerm& other) const {
  return perm == other.perm && signs == other.signs;
}

SignedPerm SignedPerm::identity(int p) {
  SignedPerm e;
  e.perm.resize(p);
  std::iota(e.perm.begin(), e.perm.end(), 0);
  e.signs.assign(p, 1);
  return e;
}

const std::vector<SignedPerm>& enumerate_group(int p) {
  if (p < 2) throw DimensionTooLarge("group defined for p >= 2");
  if (p > kMaxGroupDim) {
    throw DimensionTooLarge("group enumeration capped at p = " +
                            std::to_string(kMaxGroupDim));
  }
  static std::map<int, std::vector<SignedPerm>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, build_group(p)).first;
  return it->second;
}

EigenDecomp act(const SignedPerm& h, const EigenDecomp& m) {
  const int p = m.dim();
  if (h.dim() != p) throw DimensionMismatch("group element dimension mismatch");
  // U h^-1: column j comes from column perm^-1(j) of U, scaled by its sign.
  // h D h^-1: diagonal entry j comes from entry perm^-1(j).
  const SignedPerm hinv = h.inverse();
  const Matrix& u = m.u.matrix();
  Matrix nu(p, p);
  Vector nlog(p);
  for (int j = 0; j < p; ++j) {
    const int src = hinv.perm[j];
    nu.col(j) = static_cast<double>(hinv.signs[j]) * u.col(src);
    nlog[j] = m.d.log()[src];
  }
  return EigenDecomp{Rotation(std::move(nu)), PosDiag::from_log(std::move(nlog))};
}

Stratum classify_stratum(const Matrix& x, double eps_strat) {
  EigenDecomp m = canonical_decomposition(x);
  const Vector& l = m.d.log();
  const int p = m.dim();
  Stratum s;
  std::vector<int> block{0};
  for (int i = 1; i < p; ++i) {
    // Descending logs; chain near-ties into one block (conservative).
    if (l[i - 1] - l[i] <= eps_strat) {
      block.push_back(i);
    } else {
      s.partition.push_back(block);
      block = {i};
    }
  }
  s.partition.push_back(block);
  if (s.partition.size() == static_cast<size_t>(p)) {
    s.tag = StratumTag::top;
  } else if (s.partition.size() == 1) {
    s.tag = StratumTag::bottom;
  } else {
    s.tag = StratumTag::lower;
  }
  return s;
}

EigenDecomp canonical_decomposition(const Matrix& x) {
  const int p = static_cast<int>(x.rows());
  if (x.cols() != p) throw NotPositiveDefinite("matrix must be square");
  if ((x - x.transpose()).norm() > 1e-8 * std::max(1.0, x.norm())) {
    throw NotPositiveDefinite("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es((x + x.transpose()) / 2.0);
  if (es.info() != Eigen::Success) {
    throw NotPositiveDefinite("eigen-decomposition failed");
  }
  Vector vals = es.eigenvalues();
  if ((vals.array() <= 0.0).any()) {
    throw NotPositiveDefinite("matrix has a non-positive eigenvalue");
  }
  Matrix u(p, p);
  Vector desc(p);
  for (int i = 0; i < p; ++i) {
    desc[i] = vals[p - 1 - i];
    u.col(i) = es.eigenvectors().col(p - 1 - i);
  }
  if (u.determinant() < 0.0) u.col(p - 1) *= -1.0;
  return EigenDecomp{Rotation(std::move(u)), PosDiag::from_values(desc)};
}

Fiber fiber_of(const Matrix& x, double eps_strat) {
  Fiber f{classify_stratum(x, eps_strat), canonical_decomposition(x), {}, 0,
          {-1, -1}};
  const int p = f.base.dim();
  switch (f.stratum.tag) {
    case StratumTag::top: {
      const auto& group = enumerate_group(p);
      f.representatives.reserve(group.size());
      for (const auto& h : group) f.representatives.push_back(act(h, f.base));
      break;
    }
    case StratumTag::bottom:
      f.continuous_dim = p * (p - 1) / 2;  // all of SO(p)
      break;
    case StratumTag::lower: {
      if (p != 3) {
        throw UnsupportedStratum(
            "lower-stratum fibers are only supported for p = 3");
      }
      f.continuous_dim = 1;
      for (const auto& block : f.stratum.partition) {
        if (block.size() == 2) f.circle_plane = {block[0], block[1]};
      }
      break;
    }
  }
  return f;
}

double beta_g(int p) {
  static std::map<int, double> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  const auto& group = enumerate_group(p);
  double best = std::numeric_limits<double>::infinity();
  const Rotation id = Rotation::identity(p);
  for (const auto& h : group) {
    if (h.is_identity()) continue;
    best = std::min(best, d_so(id, Rotation(h.matrix())));
  }
  cache[p] = best;
  return best;
}

double r_cx(int p, MetricWeight k) {
  return std::sqrt(k.k) * beta_g(p) / 4.0;
}

}  // namespace scarot
