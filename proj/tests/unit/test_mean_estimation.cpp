#include <doctest.h>

#include <cmath>

#include "scarot/inference_stats.hpp"
#include "scarot/mean_estimation.hpp"
#include "scarot/optimize.hpp"
#include "test_util.hpp"

using namespace scarot;
using testutil::random_point;
using testutil::random_rotation;
using testutil::random_spd;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("frechet_mean_diag closed forms") {
  Vector l(2);
  l << 0.4, -1.2;
  PosDiag d = PosDiag::from_log(l);
  PosDiag mean = frechet_mean_diag({d, d});
  CHECK((mean.log() - l).norm() < 1e-15);

  Vector a(2), b(2);
  a << std::log(2.0), std::log(7.0);
  b << std::log(7.0), std::log(2.0);
  PosDiag mid = frechet_mean_diag({PosDiag::from_log(a), PosDiag::from_log(b)});
  CHECK((mid.values().array() - std::sqrt(14.0)).abs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(frechet_mean_diag({}), EmptyInput);
}

TEST_CASE("frechet_mean_diag matches per-coordinate golden search") {
  Rng rng(41);
  std::vector<PosDiag> ds;
  for (int i = 0; i < 3; ++i) ds.push_back(testutil::random_pos_diag(2, rng));
  PosDiag mean = frechet_mean_diag(ds);
  for (int c = 0; c < 2; ++c) {
    auto obj = [&](double v) {
      double sum = 0.0;
      for (const auto& d : ds) sum += (d.log()[c] - v) * (d.log()[c] - v);
      return sum;
    };
    auto [x, fx] = golden_minimize(obj, -10.0, 10.0, 1e-12, 400);
    (void)fx;
    CHECK(mean.log()[c] == doctest::Approx(x).epsilon(1e-7));
  }
}

TEST_CASE("frechet_mean_so fixed points and symmetry") {
  Rng rng(42);
  Rotation u = random_rotation(3, rng);
  SoMeanResult r = frechet_mean_so({u, u, u}, u);
  CHECK(r.converged);
  CHECK(d_so(r.mean, u) < 1e-12);

  double theta = 0.9;
  SoMeanResult sym = frechet_mean_so(
      {Rotation::angle2d(-theta), Rotation::angle2d(theta)},
      Rotation::angle2d(0.1));
  CHECK(d_so(sym.mean, Rotation::identity(2)) < 1e-9);
}

TEST_CASE("frechet_mean_so descends on a random SO(3) cluster") {
  Rng rng(43);
  Rotation center = random_rotation(3, rng);
  std::vector<Rotation> us;
  for (int i = 0; i < 8; ++i) {
    Vector w(3);
    for (int j = 0; j < 3; ++j) w[j] = 0.2 * rng.normal();
    us.emplace_back(testutil::rodrigues3(w) * center.matrix());
  }
  SoMeanResult r = frechet_mean_so(us, us.front());
  CHECK(r.converged);
  CHECK(r.grad_norm < 1e-9);
  auto objective = [&](const Rotation& u) {
    double sum = 0.0;
    for (const auto& ui : us) sum += rot_log(u, ui).squaredNorm();
    return sum / us.size();
  };
  double at_mean = objective(r.mean);
  for (const auto& ui : us) CHECK(at_mean <= objective(ui) + 1e-12);
}

TEST_CASE("frechet_mean_so gradient matches central finite differences") {
  Rng rng(44);
  std::vector<Rotation> us;
  for (int i = 0; i < 5; ++i) us.push_back(random_rotation(3, rng, 1.0));
  auto objective = [&](const Rotation& u) {
    double sum = 0.0;
    for (const auto& ui : us) sum += rot_log(u, ui).squaredNorm();
    return sum / us.size();
  };
  auto check_at = [&](const Rotation& u) {
    Matrix g = Matrix::Zero(3, 3);
    for (const auto& ui : us) g += rot_log(u, ui);
    g /= static_cast<double>(us.size());
    const double h = 1e-5;
    for (int c = 0; c < 3; ++c) {
      TangentVec dir = TangentVec::zero(3);
      dir.so_coeffs[c] = 1.0;
      Matrix e = dir.antisym();
      double fp = objective(Rotation(so_exp(h * e) * u.matrix()));
      double fm = objective(Rotation(so_exp(-h * e) * u.matrix()));
      double fd = (fp - fm) / (2.0 * h);
      double analytic = -2.0 * (g.transpose() * e).trace();
      CHECK(std::abs(fd - analytic) < 1e-6);
    }
  };
  check_at(frechet_mean_so(us, us.front()).mean);
  check_at(random_rotation(3, rng, 0.7));
}

TEST_CASE("psr_mean of a single observation has zero objective") {
  Rng rng(45);
  Matrix x = random_spd(2, rng);
  MeanResult r = psr_mean({x});
  CHECK(r.converged);
  CHECK(r.objective_trace.back() < 1e-18);
  CHECK((r.mean.compose() - x).norm() < 1e-10);
  CHECK(r.orbit_size == 4);
}

TEST_CASE("psr_mean bisects a pure-rotation pair") {
  double theta = kPi / 10;
  Vector l(2);
  l << 0.7, -0.2;
  Matrix x1 = EigenDecomp{Rotation::angle2d(-theta), PosDiag::from_log(l)}.compose();
  Matrix x2 = EigenDecomp{Rotation::angle2d(theta), PosDiag::from_log(l)}.compose();
  MeanResult r = psr_mean({x1, x2});
  EigenDecomp expect{Rotation::identity(2), PosDiag::from_log(l)};
  double best = 1e300;
  for (const auto& m : mean_orbit(r.mean)) best = std::min(best, d_m(m, expect));
  CHECK(best < 1e-9);
}

TEST_CASE("tight cluster converges in one productive pass") {
  std::vector<Matrix> xs = sample_model_2d(20, 0.02, 1.0, -0.5, 0.02, 77);
  Certificate unique = certify_uniqueness(xs);
  REQUIRE(unique.holds);  // diameter below r'_cx by construction
  MeanResult r = psr_mean(xs);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.total_passes == 2);
  REQUIRE(r.step1_changes.size() == 2);
  CHECK(r.step1_changes[1] == 0);
}

TEST_CASE("psr_mean objective trace never increases") {
  Rng rng(46);
  for (int rep = 0; rep < 10; ++rep) {
    int p = rep % 2 == 0 ? 2 : 3;
    std::vector<Matrix> xs;
    for (int i = 0; i < 15; ++i) xs.push_back(random_spd(p, rng));
    MeanResult r = psr_mean(xs);
    CHECK(r.converged);
    for (size_t j = 1; j < r.objective_trace.size(); ++j) {
      CHECK(r.objective_trace[j] <= r.objective_trace[j - 1] + 1e-14);
    }
    CHECK(f_sr(xs, r.mean.compose()) <= f_psr(xs, r.mean) + 1e-12);
  }
}

TEST_CASE("objective is invariant over the mean orbit") {
  Rng rng(47);
  for (int p : {2, 3}) {
    std::vector<Matrix> xs;
    for (int i = 0; i < 6; ++i) xs.push_back(random_spd(p, rng));
    EigenDecomp m = random_point(p, rng);
    double base = f_psr(xs, m);
    for (const auto& member : mean_orbit(m)) {
      CHECK(f_psr(xs, member) == doctest::Approx(base).epsilon(1e-12));
    }
    CHECK(mean_orbit(m).size() == enumerate_group(p).size());
  }
}

TEST_CASE("psr_mean matches a dense grid search for tiny p = 2 samples") {
  Rng rng(48);
  std::vector<Matrix> xs;
  for (int i = 0; i < 3; ++i) {
    xs.push_back(sample_model_2d(1, 0.4, 0.8, -0.5, 0.4,
                                 Rng::derive(99, i)).front());
  }
  MeanResult r = psr_mean(xs, std::nullopt, {});
  double f_proc = r.objective_trace.back();

  std::vector<Fiber> fibers;
  for (const auto& x : xs) fibers.push_back(fiber_of(x));
  auto grid_objective = [&](const EigenDecomp& m) {
    double sum = 0.0;
    for (const auto& f : fibers) {
      double d = nearest_fiber_element(f, m).first;
      sum += d * d;
    }
    return sum / xs.size();
  };
  // Two-stage grid: theta on a quarter turn (orbit symmetry), logs around
  // the data range; coarse step 0.02, refined step 0.002.
  double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
  for (const auto& f : fibers) {
    EigenDecomp c = canonical_decomposition(f.base.compose());
    lo1 = std::min(lo1, c.d.log()[0]);
    hi1 = std::max(hi1, c.d.log()[0]);
    lo2 = std::min(lo2, c.d.log()[1]);
    hi2 = std::max(hi2, c.d.log()[1]);
  }
  double best = 1e300;
  double bt = 0, b1 = 0, b2 = 0;
  auto scan = [&](double t0, double t1, double dt, double a0, double a1,
                  double b0v, double b1v, double dl) {
    for (double t = t0; t <= t1; t += dt) {
      for (double la = a0; la <= a1; la += dl) {
        for (double lb = b0v; lb <= b1v; lb += dl) {
          Vector l(2);
          l << la, lb;
          EigenDecomp m{Rotation::angle2d(t), PosDiag::from_log(l)};
          double v = grid_objective(m);
          if (v < best) {
            best = v;
            bt = t;
            b1 = la;
            b2 = lb;
          }
        }
      }
    }
  };
  scan(-kPi / 4, kPi / 4, 0.02, lo1 - 0.3, hi1 + 0.3, lo2 - 0.3, hi2 + 0.3, 0.02);
  scan(bt - 0.03, bt + 0.03, 0.002, b1 - 0.03, b1 + 0.03, b2 - 0.03, b2 + 0.03,
       0.002);
  CHECK(f_proc <= best + 1e-4);
  CHECK(std::abs(f_proc - best) < 1e-4);
}

TEST_CASE("multistart never does worse than the default start") {
  Rng rng(49);
  std::vector<Matrix> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(random_spd(2, rng));
  MeanOptions opts;
  double single = psr_mean(xs, std::nullopt, opts).objective_trace.back();
  opts.multistart = true;
  double multi = psr_mean(xs, std::nullopt, opts).objective_trace.back();
  CHECK(multi <= single + 1e-12);
}

TEST_CASE("minimize_fsr_lower p = 2 closed form") {
  Vector d(2);
  d << 3.0, 12.0;
  LowerMinimum lm = minimize_fsr_lower({Matrix(d.asDiagonal())});
  CHECK(lm.exact);
  CHECK(lm.minimizer(0, 0) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(lm.minimizer(0, 1) == 0.0);

  Matrix ci = 2.5 * Matrix::Identity(2, 2);
  LowerMinimum same = minimize_fsr_lower({ci, ci});
  CHECK(same.value < 1e-20);
  CHECK((same.minimizer - ci).norm() < 1e-10);
}

TEST_CASE("minimize_fsr_lower p = 2 matches golden search over log c") {
  Rng rng(50);
  std::vector<Matrix> xs;
  for (int i = 0; i < 12; ++i) xs.push_back(random_spd(2, rng));
  LowerMinimum lm = minimize_fsr_lower(xs);
  auto obj = [&](double logc) {
    Matrix s = std::exp(logc) * Matrix::Identity(2, 2);
    return f_sr(xs, s);
  };
  auto [logc, val] = golden_minimize(obj, -10.0, 10.0, 1e-11, 400);
  CHECK(lm.value == doctest::Approx(val).epsilon(1e-8));
  CHECK(std::log(lm.minimizer(0, 0)) == doctest::Approx(logc).epsilon(1e-6));
}

TEST_CASE("minimize_fsr_lower p = 3 beats the bottom stratum when it should") {
  // Data concentrated near a (2,1)-stratum point with a rotation spread:
  // merging only the close eigenvalue pair is strictly better than cI.
  Rng rng(51);
  std::vector<Matrix> xs;
  for (int i = 0; i < 10; ++i) {
    Vector l(3);
    l << 1.0 + 0.05 * rng.normal(), 0.95 + 0.05 * rng.normal(),
        -1.0 + 0.05 * rng.normal();
    xs.push_back(
        EigenDecomp{testutil::random_rotation(3, rng, 0.3), PosDiag::from_log(l)}
            .compose());
  }
  LowerMinimum lm = minimize_fsr_lower(xs, MetricWeight{1.0}, 7, 8);
  double grand = 0.0;
  for (const auto& x : xs) grand += canonical_decomposition(x).d.log().sum();
  grand /= 3.0 * xs.size();
  double bottom = f_sr(xs, Matrix(std::exp(grand) * Matrix::Identity(3, 3)));
  CHECK(lm.value <= bottom + 1e-9);
  CHECK(classify_stratum(lm.minimizer).tag != StratumTag::top);
  CHECK(lm.value == doctest::Approx(f_sr(xs, lm.minimizer)).epsilon(1e-6));
}

TEST_CASE("uniqueness certificate") {
  std::vector<Matrix> tight = sample_model_2d(10, 0.01, 1.0, 0.0, 0.01, 5);
  Certificate ok = certify_uniqueness(tight);
  CHECK(ok.holds);
  CHECK(ok.witnesses.at("diameter") < ok.witnesses.at("r_cx"));

  double eps = 0.1;
  Vector l(2);
  l << eps / 2, -eps / 2;
  Matrix x1 = EigenDecomp{Rotation::identity(2), PosDiag::from_log(l)}.compose();
  Matrix x2 =
      EigenDecomp{Rotation::angle2d(kPi / 4), PosDiag::from_log(l)}.compose();
  Certificate toy = certify_uniqueness({x1, x2});
  CHECK_FALSE(toy.holds);
  CHECK(toy.witnesses.at("diameter") == doctest::Approx(kPi / 4).epsilon(1e-9));

  Certificate single = certify_uniqueness({x1});
  CHECK(single.holds);

  CHECK_THROWS_AS(certify_uniqueness({Matrix(Matrix::Identity(2, 2))}),
                  UnsupportedStratum);
}

TEST_CASE("sr vs psr certificate on the two synthetic regimes") {
  std::vector<Matrix> case1 = sample_model_2d(200, kPi / 12, 2.0, 0.0, 0.2, 3);
  MeanResult m1 = psr_mean(case1);
  Certificate c1 = certify_sr_vs_psr(case1, m1.mean);
  CHECK(c1.kind == CertificateKind::sr_equals_psr);
  CHECK(c1.holds);
  CHECK(c1.witnesses.at("f_sr_at_mean") < c1.witnesses.at("f_sr_lower_min"));

  std::vector<Matrix> case2 = sample_model_2d(200, kPi / 3, 1.0, 0.0, 0.2, 3);
  MeanResult m2 = psr_mean(case2);
  Certificate c2 = certify_sr_vs_psr(case2, m2.mean);
  CHECK(c2.kind == CertificateKind::sr_in_lower);
  CHECK_FALSE(c2.holds);

  Rng rng(52);
  Matrix single = random_spd(2, rng);
  MeanResult ms = psr_mean({single});
  Certificate cs = certify_sr_vs_psr({single}, ms.mean);
  CHECK(cs.kind == CertificateKind::sr_equals_psr);
  CHECK(cs.witnesses.at("f_sr_at_mean") < 1e-15);
}

TEST_CASE("stratum avoidance certificate") {
  Vector d(2);
  d << std::exp(2.0), 1.0;
  Matrix s0 = d.asDiagonal();
  Certificate self = certify_stratum_avoidance({s0}, s0);
  CHECK(self.holds);

  // Tight Case-I-style cluster around S0; the bound is delta(S0)/3.
  std::vector<Matrix> cluster = sample_model_2d(30, kPi / 36, 2.0, 0.0, 0.08, 9);
  Certificate typical = certify_stratum_avoidance(cluster, s0);
  CHECK(typical.holds);

  std::vector<Matrix> with_ci = cluster;
  with_ci.push_back(2.0 * Matrix::Identity(2, 2));
  Certificate never = certify_stratum_avoidance(with_ci, s0);
  CHECK_FALSE(never.holds);
  // The scaled identity sits at least delta(S0) away from S0.
  CHECK(never.witnesses.at("max_dist") >= never.witnesses.at("delta_s0") - 1e-9);

  CHECK_THROWS_AS(
      certify_stratum_avoidance(cluster, Matrix(Matrix::Identity(2, 2))),
      UnsupportedStratum);
}
