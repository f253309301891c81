#include <doctest.h>

#include <cmath>

#include "scarot/manifold.hpp"
#include "test_util.hpp"

using namespace scarot;
using testutil::random_point;
using testutil::random_rotation;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("rotation validation repairs small drift and rejects garbage") {
  Matrix u = Rotation::angle2d(0.7).matrix();
  u(0, 0) += 1e-8;
  Rotation fixed(u);
  CHECK((fixed.matrix().transpose() * fixed.matrix() - Matrix::Identity(2, 2))
            .norm() < 1e-12);

  Matrix bad = u;
  bad(0, 1) += 0.1;
  CHECK_THROWS_AS(Rotation{bad}, NonOrthogonalInput);

  Matrix flip = Matrix::Identity(2, 2);
  flip(1, 1) = -1.0;
  CHECK_THROWS_AS(Rotation{flip}, NonOrthogonalInput);
}

TEST_CASE("pos diag rejects non-positive entries") {
  Vector d(2);
  d << 1.0, -2.0;
  CHECK_THROWS_AS(PosDiag::from_values(d), NonPositiveEntry);
  d << 1.0, 0.0;
  CHECK_THROWS_AS(PosDiag::from_values(d), NonPositiveEntry);
}

TEST_CASE("rot_log quarter turn has norm pi/2") {
  Matrix a = rot_log(Rotation::identity(2), Rotation::angle2d(kPi / 2));
  CHECK(a.norm() / std::sqrt(2.0) == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("rot_log of equal rotations is zero") {
  Rng rng(11);
  for (int p : {2, 3, 4}) {
    Rotation u = random_rotation(p, rng);
    CHECK(rot_log(u, u).norm() < 1e-9);
  }
}

TEST_CASE("rot_log round trip against an independent Rodrigues oracle") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    Vector w(3);
    for (int i = 0; i < 3; ++i) w[i] = rng.normal();
    w.normalize();
    w *= rng.uniform(0.0, kPi - 1e-3);
    Matrix u2 = testutil::rodrigues3(w);
    Matrix a = rot_log(Rotation::identity(3), Rotation(u2));
    Vector got(3);
    got << a(2, 1), a(0, 2), a(1, 0);
    CHECK((got - w).norm() < 1e-9);
  }
}

TEST_CASE("involution branch is the deterministic positive one") {
  Matrix a2 = rot_log(Rotation::identity(2), Rotation::angle2d(kPi));
  CHECK(a2(1, 0) == doctest::Approx(kPi));

  Matrix r = Matrix::Identity(3, 3);
  r(1, 1) = -1.0;
  r(2, 2) = -1.0;  // pi rotation about the x-axis
  Matrix a3 = rot_log(Rotation::identity(3), Rotation(r));
  CHECK(a3(2, 1) == doctest::Approx(kPi));  // axis (1, 0, 0), positive
  CHECK((so_exp(a3) - r).norm() < 1e-9);
  CHECK(is_antipodal(Rotation::identity(3), Rotation(r)));
}

TEST_CASE("schur log handles p = 4 and 5 including involutions") {
  Rng rng(13);
  for (int p : {4, 5}) {
    for (int rep = 0; rep < 20; ++rep) {
      Rotation u1 = random_rotation(p, rng);
      Rotation u2 = random_rotation(p, rng);
      Matrix a = rot_log(u1, u2);
      CHECK((a + a.transpose()).norm() < 1e-12);
      CHECK((so_exp(a) * u1.matrix() - u2.matrix()).norm() < 1e-8);
    }
  }
  Matrix inv = Matrix::Identity(4, 4);
  inv(0, 0) = inv(1, 1) = -1.0;
  Matrix a = rot_log(Rotation::identity(4), Rotation(inv));
  CHECK((so_exp(a) - inv).norm() < 1e-9);
  CHECK(a.norm() / std::sqrt(2.0) == doctest::Approx(kPi));
}

TEST_CASE("d_so equals the rotation angle for p = 2") {
  for (double theta : {-2.5, -0.3, 0.0, 0.4, 3.0}) {
    CHECK(d_so(Rotation::identity(2), Rotation::angle2d(theta)) ==
          doctest::Approx(std::abs(theta)).epsilon(1e-12));
  }
}

TEST_CASE("d_so triangle inequality on random SO(3) triples") {
  Rng rng(14);
  for (int rep = 0; rep < 200; ++rep) {
    Rotation a = random_rotation(3, rng);
    Rotation b = random_rotation(3, rng);
    Rotation c = random_rotation(3, rng);
    CHECK(d_so(a, c) <= d_so(a, b) + d_so(b, c) + 1e-9);
    CHECK(d_so(a, b) == doctest::Approx(d_so(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("d_diag closed forms") {
  Vector d1(2), d2(2);
  d1 << std::exp(1.0), std::exp(-1.0);
  CHECK(d_diag(PosDiag::from_values(d1), PosDiag::from_log(Vector::Zero(2))) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  d1 << 8.0, 3.0;
  d2 << 3.0, 8.0;
  CHECK(d_diag(PosDiag::from_values(d1), PosDiag::from_values(d2)) ==
        doctest::Approx(std::sqrt(2.0) * std::abs(std::log(8.0 / 3.0))));
  CHECK(d_diag(PosDiag::from_values(d1), PosDiag::from_values(d1)) == 0.0);
}

TEST_CASE("d_m combines the parts with weight k") {
  EigenDecomp id{Rotation::identity(2), PosDiag::from_log(Vector::Zero(2))};
  EigenDecomp rot{Rotation::angle2d(0.6), PosDiag::from_log(Vector::Zero(2))};
  CHECK(d_m(id, rot) == doctest::Approx(0.6).epsilon(1e-12));

  Vector l(2);
  l << 1.0, -1.0;
  EigenDecomp a{Rotation::identity(2), PosDiag::from_log(l)};
  EigenDecomp b{Rotation::angle2d(kPi / 4), PosDiag::from_log(Vector::Zero(2))};
  CHECK(d_m(a, b) ==
        doctest::Approx(std::sqrt(kPi * kPi / 16.0 + 2.0)).epsilon(1e-12));
  CHECK(d_m(a, b, MetricWeight{4.0}) ==
        doctest::Approx(std::sqrt(4.0 * kPi * kPi / 16.0 + 2.0)));
}

TEST_CASE("geodesic endpoints, midpoint and constant speed") {
  Rng rng(15);
  Vector la(2), lb(2);
  la << std::log(2.0), std::log(5.0);
  lb << std::log(5.0), std::log(2.0);
  EigenDecomp m1{Rotation::identity(2), PosDiag::from_log(la)};
  EigenDecomp m2{Rotation::identity(2), PosDiag::from_log(lb)};
  EigenDecomp mid = geodesic(m1, m2, 0.5);
  CHECK((mid.d.values().array() - std::sqrt(10.0)).abs().maxCoeff() < 1e-12);

  for (int rep = 0; rep < 100; ++rep) {
    int p = rep % 2 == 0 ? 2 : 3;
    EigenDecomp a = random_point(p, rng, 2.5);
    EigenDecomp b = random_point(p, rng, 2.5);
    CHECK(d_m(geodesic(a, b, 0.0), a) < 1e-10);
    CHECK(d_m(geodesic(a, b, 1.0), b) < 1e-10);
    double s = rng.uniform(), t = rng.uniform();
    double total = d_m(a, b);
    CHECK(d_m(geodesic(a, b, s), geodesic(a, b, t)) ==
          doctest::Approx(std::abs(s - t) * total).epsilon(1e-8));
  }
}

TEST_CASE("log_map inverts exp_map and matches the metric") {
  Rng rng(16);
  EigenDecomp base{Rotation::identity(2), PosDiag::from_log(Vector::Zero(2))};
  CHECK(vectorize(log_map(base, base)).norm() == 0.0);

  for (int rep = 0; rep < 100; ++rep) {
    int p = rep % 2 == 0 ? 2 : 3;
    EigenDecomp a = random_point(p, rng, 2.0);
    EigenDecomp b = random_point(p, rng, 2.0);
    TangentVec v = log_map(a, b);
    CHECK(d_m(exp_map(a, v), b) < 1e-9);
    CHECK(vectorize(v).norm() == doctest::Approx(d_m(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("log_map coordinates at the identity") {
  double theta = 0.37, la = 0.9, lb = -0.4, k = 2.25;
  EigenDecomp base{Rotation::identity(2), PosDiag::from_log(Vector::Zero(2))};
  Vector l(2);
  l << la, lb;
  EigenDecomp target{Rotation::angle2d(theta), PosDiag::from_log(l)};
  Vector x = vectorize(log_map(base, target), MetricWeight{k});
  CHECK(x[0] == doctest::Approx(std::sqrt(k) * theta).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(la));
  CHECK(x[2] == doctest::Approx(lb));
}

TEST_CASE("log_map rejects the cut locus") {
  EigenDecomp base{Rotation::identity(2), PosDiag::from_log(Vector::Zero(2))};
  EigenDecomp anti{Rotation::angle2d(kPi), PosDiag::from_log(Vector::Zero(2))};
  CHECK_THROWS_AS(log_map(base, anti), OutsideInjectivityRadius);
}

TEST_CASE("vectorize is a metric isometry with inverse devectorize") {
  CHECK(vectorize(TangentVec::zero(3)).norm() == 0.0);

  // p = 2, k = 4: first coordinate is sqrt(k) * a21.
  Matrix a(2, 2);
  double theta = 0.81;
  a << 0.0, -theta, theta, 0.0;
  Vector l = Vector::Zero(2);
  Vector x = vectorize(TangentVec::from_matrices(a, l), MetricWeight{4.0});
  CHECK(x[0] == doctest::Approx(2.0 * theta).epsilon(1e-12));

  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    int p = rep % 2 == 0 ? 2 : 3;
    double k = rng.uniform(0.2, 5.0);
    TangentVec v1 = log_map(random_point(p, rng, 1.0), random_point(p, rng, 1.0));
    TangentVec v2 = log_map(random_point(p, rng, 1.0), random_point(p, rng, 1.0));
    Vector x1 = vectorize(v1, MetricWeight{k});
    Vector x2 = vectorize(v2, MetricWeight{k});
    double inner = x1.dot(x2);
    double metric = (k / 2.0) * (v1.antisym() * v2.antisym().transpose()).trace() +
                    v1.diag.dot(v2.diag);
    CHECK(inner == doctest::Approx(metric).epsilon(1e-9));

    TangentVec back = devectorize(x1, p, MetricWeight{k});
    CHECK((back.so_coeffs - v1.so_coeffs).norm() < 1e-12);
    CHECK((back.diag - v1.diag).norm() < 1e-12);
  }
}
