#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scarot/inference_stats.hpp"
#include "scarot/mean_estimation.hpp"
#include "scarot/special.hpp"
#include "scarot/sr_distance.hpp"

namespace py = pybind11;
using namespace scarot;

namespace {

// Decompositions cross the boundary as (U, d) tuples of plain arrays.
py::tuple decomp_out(const EigenDecomp& m) {
  return py::make_tuple(m.u.matrix(), m.d.values());
}

EigenDecomp decomp_in(const Matrix& u, const Vector& d) {
  return EigenDecomp{Rotation(u), PosDiag::from_values(d)};
}

py::dict certificate_out(const Certificate& cert) {
  py::dict w;
  for (const auto& [name, value] : cert.witnesses) w[name.c_str()] = value;
  py::dict out;
  out["kind"] = to_string(cert.kind);
  out["holds"] = cert.holds;
  out["witnesses"] = w;
  out["note"] = cert.note;
  return out;
}

py::dict mean_out(const MeanResult& r) {
  py::dict out;
  out["mean"] = decomp_out(r.mean);
  py::list orbit;
  for (const auto& m : mean_orbit(r.mean)) orbit.append(decomp_out(m));
  out["orbit"] = orbit;
  out["orbit_size"] = r.orbit_size;
  out["objective_trace"] = r.objective_trace;
  out["iterations"] = r.iterations;
  out["total_passes"] = r.total_passes;
  out["converged"] = r.converged;
  py::list matched;
  for (const auto& m : r.matched_fibers) matched.append(decomp_out(m));
  out["matched_fibers"] = matched;
  out["step1_changes"] = r.step1_changes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_scarot, m) {
  m.doc() = "scaling-rotation statistics for SPD matrices";
  m.attr("__version__") = kVersion;

  py::register_exception<UnsupportedStratum>(m, "UnsupportedStratumError");
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError");

  m.def("group_order", [](int p) { return enumerate_group(p).size(); },
        py::arg("p"));
  m.def("group_elements", [](int p) {
    py::list out;
    for (const auto& h : enumerate_group(p)) out.append(Matrix(h.matrix()));
    return out;
  });
  m.def("beta", &beta_g, py::arg("p"));
  m.def("r_cx", [](int p, double k) { return r_cx(p, MetricWeight{k}); },
        py::arg("p"), py::arg("k") = 1.0);

  m.def("canonical_decomposition",
        [](const Matrix& x) { return decomp_out(canonical_decomposition(x)); });
  m.def("fiber", [](const Matrix& x) {
    py::list out;
    for (const auto& el : fiber_of(x).representatives) out.append(decomp_out(el));
    return out;
  }, "All eigen-decompositions of a top-stratum SPD matrix");
  m.def("stratum", [](const Matrix& x) {
    switch (classify_stratum(x).tag) {
      case StratumTag::top: return "top";
      case StratumTag::bottom: return "bottom";
      default: return "lower";
    }
  });

  m.def("d_sr", [](const Matrix& x, const Matrix& y, double k) {
    MinimalPair pair = d_sr(x, y, MetricWeight{k});
    return py::make_tuple(pair.dist, decomp_out(pair.mx), decomp_out(pair.my));
  }, py::arg("x"), py::arg("y"), py::arg("k") = 1.0,
     "Scaling-rotation distance with an achieving minimal pair");
  m.def("d_psr", [](const Matrix& x, const Matrix& u, const Vector& d, double k) {
    auto [dist, el] = d_psr(x, decomp_in(u, d), MetricWeight{k});
    return py::make_tuple(dist, decomp_out(el));
  }, py::arg("x"), py::arg("u"), py::arg("d"), py::arg("k") = 1.0);
  m.def("delta", &delta, "Distance to the union of lower strata");

  m.def("psr_mean", [](const std::vector<Matrix>& xs, double k, double eps,
                       int max_outer, bool multistart) {
    MeanOptions opts;
    opts.k = MetricWeight{k};
    opts.eps = eps;
    opts.max_outer = max_outer;
    opts.multistart = multistart;
    return mean_out(psr_mean(xs, std::nullopt, opts));
  }, py::arg("xs"), py::arg("k") = 1.0, py::arg("eps") = 1e-12,
     py::arg("max_outer") = 100, py::arg("multistart") = false);

  m.def("f_psr", [](const std::vector<Matrix>& xs, const Matrix& u,
                    const Vector& d, double k) {
    return f_psr(xs, decomp_in(u, d), MetricWeight{k});
  }, py::arg("xs"), py::arg("u"), py::arg("d"), py::arg("k") = 1.0);
  m.def("f_sr", [](const std::vector<Matrix>& xs, const Matrix& s, double k) {
    return f_sr(xs, s, MetricWeight{k});
  }, py::arg("xs"), py::arg("s"), py::arg("k") = 1.0);

  m.def("certify_uniqueness", [](const std::vector<Matrix>& xs, double k) {
    return certificate_out(certify_uniqueness(xs, MetricWeight{k}));
  }, py::arg("xs"), py::arg("k") = 1.0);
  m.def("certify_sr_vs_psr", [](const std::vector<Matrix>& xs, const Matrix& u,
                                const Vector& d, double k, uint64_t seed) {
    return certificate_out(
        certify_sr_vs_psr(xs, decomp_in(u, d), MetricWeight{k}, seed));
  }, py::arg("xs"), py::arg("u"), py::arg("d"), py::arg("k") = 1.0,
     py::arg("seed") = 0);
  m.def("certify_stratum_avoidance",
        [](const std::vector<Matrix>& xs, const Matrix& s0, double k) {
          return certificate_out(
              certify_stratum_avoidance(xs, s0, MetricWeight{k}));
        }, py::arg("xs"), py::arg("s0"), py::arg("k") = 1.0);

  m.def("sample_model_2d", &sample_model_2d, py::arg("n"),
        py::arg("sigma_theta"), py::arg("mu1"), py::arg("mu2"),
        py::arg("sigma_d"), py::arg("seed"));
  m.def("sample_spd_lognormal", &sample_spd_lognormal, py::arg("n"),
        py::arg("mean_log"), py::arg("cov"), py::arg("seed"));

  m.def("le_mean", &le_mean);
  m.def("ai_mean", [](const std::vector<Matrix>& xs) { return ai_mean(xs).mean; });
  m.def("le_coordinates",
        [](const std::vector<Matrix>& xs) { return le_coordinates(xs).coords; });
  m.def("psr_coordinates", [](const std::vector<Matrix>& xs, const Matrix& u,
                              const Vector& d, double k) {
    return psr_coordinates(xs, decomp_in(u, d), MetricWeight{k}).coords;
  }, py::arg("xs"), py::arg("u"), py::arg("d"), py::arg("k") = 1.0);

  m.def("bootstrap_cov", [](const std::vector<Matrix>& xs, int b, uint64_t seed,
                            double k) {
    BootstrapCov bc = bootstrap_cov(xs, b, seed, MetricWeight{k});
    return py::make_tuple(bc.cov, bc.replicates_used, bc.replicates_dropped);
  }, py::arg("xs"), py::arg("b"), py::arg("seed"), py::arg("k") = 1.0);

  m.def("two_group_report", [](const std::vector<Matrix>& xs1,
                               const std::vector<Matrix>& xs2, int b,
                               double level, uint64_t seed, double k) {
    GroupTestReport r = two_group_report(xs1, xs2, b, level, seed, MetricWeight{k});
    py::dict out;
    out["p"] = r.p;
    out["d"] = r.d;
    out["level"] = r.level;
    out["chi2_threshold"] = r.chi2_threshold;
    out["mean1_psr"] = r.mean1_psr;
    out["mean2_psr"] = r.mean2_psr;
    out["cov1_psr"] = r.cov1_psr;
    out["cov2_psr"] = r.cov2_psr;
    out["t_psr"] = r.t_psr;
    out["p_value_psr"] = r.p_value_psr;
    out["mean1_le"] = r.mean1_le;
    out["mean2_le"] = r.mean2_le;
    out["cov1_le"] = r.cov1_le;
    out["cov2_le"] = r.cov2_le;
    out["t_le"] = r.t_le;
    out["p_value_le"] = r.p_value_le;
    out["separated"] = r.separated;
    return out;
  }, py::arg("xs1"), py::arg("xs2"), py::arg("b") = 200,
     py::arg("level") = 0.95, py::arg("seed") = 0, py::arg("k") = 1.0);

  m.def("chi2_quantile", &chi2_quantile, py::arg("prob"), py::arg("df"));
}
