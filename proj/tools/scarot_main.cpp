#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "scarot/dataset.hpp"
#include "scarot/inference_stats.hpp"
#include "scarot/mean_estimation.hpp"
#include "scarot/sr_distance.hpp"

using json = nlohmann::ordered_json;
using namespace scarot;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json decomp_to_json(const EigenDecomp& m) {
  return json{{"u", matrix_to_json(m.u.matrix())},
              {"d", vector_to_json(m.d.values())},
              {"log_d", vector_to_json(m.d.log())}};
}

EigenDecomp decomp_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open decomposition file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("bad JSON in " + path + ": " + e.what());
  }
  if (!j.contains("u") || (!j.contains("d") && !j.contains("log_d"))) {
    throw ParseError("decomposition JSON needs fields 'u' and 'd' or 'log_d'");
  }
  const auto& uj = j["u"];
  const int p = static_cast<int>(uj.size());
  Matrix u(p, p);
  for (int i = 0; i < p; ++i) {
    for (int c = 0; c < p; ++c) u(i, c) = uj.at(i).at(c).get<double>();
  }
  Vector logd(p);
  if (j.contains("log_d")) {
    for (int i = 0; i < p; ++i) logd[i] = j["log_d"].at(i).get<double>();
  } else {
    for (int i = 0; i < p; ++i) {
      double v = j["d"].at(i).get<double>();
      if (v <= 0.0) throw ParseError("diagonal entries must be positive");
      logd[i] = std::log(v);
    }
  }
  return EigenDecomp{Rotation(std::move(u)), PosDiag::from_log(std::move(logd))};
}

json config_to_json(const RunConfig& cfg) {
  return json{{"k", cfg.k},
              {"eps", cfg.eps},
              {"tol_opt", cfg.tol_opt},
              {"eps_strat", cfg.eps_strat},
              {"max_iter", cfg.max_iter},
              {"seed", cfg.seed},
              {"bootstrap", cfg.bootstrap},
              {"level", cfg.level}};
}

json certificate_to_json(const Certificate& cert) {
  json w = json::object();
  for (const auto& [name, value] : cert.witnesses) w[name] = value;
  json out{{"kind", to_string(cert.kind)}, {"holds", cert.holds},
           {"witnesses", w}};
  if (!cert.note.empty()) out["note"] = cert.note;
  return out;
}

json report_header(const RunConfig& cfg) {
  return json{{"version", kVersion}, {"config", config_to_json(cfg)}};
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write output file: " + out_path);
    out << j.dump(2) << "\n";
  }
}

void add_config_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--k", cfg.k, "rotation weight k");
  cmd->add_option("--eps", cfg.eps, "mean objective-decrease tolerance");
  cmd->add_option("--tol-opt", cfg.tol_opt, "1-D search tolerance");
  cmd->add_option("--eps-strat", cfg.eps_strat, "stratum detection tolerance");
  cmd->add_option("--max-iter", cfg.max_iter, "max outer iterations");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--bootstrap", cfg.bootstrap, "bootstrap replicates B");
  cmd->add_option("--level", cfg.level, "confidence level");
}

MeanOptions mean_options(const RunConfig& cfg) {
  MeanOptions opts;
  opts.k = MetricWeight{cfg.k};
  opts.eps = cfg.eps;
  opts.max_outer = cfg.max_iter;
  opts.eps_strat = cfg.eps_strat;
  return opts;
}

json mean_report(const Dataset& data, const RunConfig& cfg, bool multistart) {
  auto start = std::chrono::steady_clock::now();
  MeanOptions opts = mean_options(cfg);
  opts.multistart = multistart;
  MeanResult result = psr_mean(data.items, std::nullopt, opts);

  json j = report_header(cfg);
  j["p"] = data.p;
  j["n"] = data.n();
  j["mean"] = decomp_to_json(result.mean);
  json orbit = json::array();
  for (const auto& m : mean_orbit(result.mean)) orbit.push_back(decomp_to_json(m));
  j["orbit"] = orbit;
  j["orbit_size"] = result.orbit_size;
  j["objective_trace"] = result.objective_trace;
  j["iterations"] = result.iterations;
  j["total_passes"] = result.total_passes;
  j["converged"] = result.converged;

  json certs = json::object();
  try {
    certs["uniqueness"] =
        certificate_to_json(certify_uniqueness(data.items, opts.k));
  } catch (const UnsupportedStratum& e) {
    certs["uniqueness"] = json{{"error", e.what()}};
  }
  try {
    certs["sr_vs_psr"] = certificate_to_json(
        certify_sr_vs_psr(data.items, result.mean, opts.k, cfg.seed));
  } catch (const UnsupportedStratum& e) {
    certs["sr_vs_psr"] = json{{"error", e.what()}};
  }
  j["certificates"] = certs;
  j["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (!result.converged) j["warning"] = "mean did not reach tolerance";
  return j;
}

int cmd_mean(const std::string& input, const std::string& out,
             const RunConfig& cfg, bool multistart) {
  Dataset data = read_dataset(input);
  json j = mean_report(data, cfg, multistart);
  bool converged = j["converged"].get<bool>();
  emit(j, out);
  return converged ? 0 : 4;
}

int cmd_dist(const std::string& x_path, const std::string& y_path,
             const std::string& ref_path, const std::string& mode,
             const std::string& out, const RunConfig& cfg) {
  Dataset xd = read_dataset(x_path);
  if (xd.n() < 1) throw ParseError("X dataset is empty");
  const Matrix& x = xd.items.front();
  MetricWeight k{cfg.k};
  json j = report_header(cfg);
  j["mode"] = mode;
  if (mode == "sr") {
    if (y_path.empty()) throw BadParameter("--mode sr needs --y");
    Dataset yd = read_dataset(y_path);
    if (yd.n() < 1) throw ParseError("Y dataset is empty");
    MinimalPair pair = d_sr(x, yd.items.front(), k, cfg.eps_strat);
    j["distance"] = pair.dist;
    j["minimal_pair"] = json{{"mx", decomp_to_json(pair.mx)},
                             {"my", decomp_to_json(pair.my)}};
  } else {
    if (ref_path.empty()) throw BadParameter("--mode psr needs --ref");
    EigenDecomp m = decomp_from_json_file(ref_path);
    auto [dist, el] = d_psr(x, m, k, cfg.eps_strat);
    j["distance"] = dist;
    j["achieving_element"] = decomp_to_json(el);
    j["reference"] = decomp_to_json(m);
  }
  emit(j, out);
  return 0;
}

int cmd_simulate(int the_case, int n, double sigma_theta, double mu1,
                 double mu2, double sigma_d, const std::string& out_data,
                 const std::string& out_summary, const RunConfig& cfg) {
  if (the_case == 1) {
    sigma_theta = M_PI / 12.0;
    mu1 = 2.0;
    mu2 = 0.0;
    sigma_d = 0.2;
  } else if (the_case == 2) {
    sigma_theta = M_PI / 3.0;
    mu1 = 1.0;
    mu2 = 0.0;
    sigma_d = 0.2;
  } else if (the_case != 0) {
    throw BadParameter("--case must be 1 or 2");
  }
  if (n < 1) throw BadParameter("need n >= 1 draws");

  Dataset data;
  data.p = 2;
  data.items = sample_model_2d(n, sigma_theta, mu1, mu2, sigma_d, cfg.seed);
  write_dataset(data, out_data);

  json j = report_header(cfg);
  j["model"] = json{{"case", the_case},
                    {"n", n},
                    {"sigma_theta", sigma_theta},
                    {"mu1", mu1},
                    {"mu2", mu2},
                    {"sigma_d", sigma_d}};
  j["dataset"] = out_data;
  MeanOptions opts = mean_options(cfg);
  MeanResult result = psr_mean(data.items, std::nullopt, opts);
  j["mean"] = decomp_to_json(result.mean);
  Certificate cert =
      certify_sr_vs_psr(data.items, result.mean, opts.k, cfg.seed);
  j["certificate"] = certificate_to_json(cert);
  j["f_sr_at_mean"] = cert.witnesses.at("f_sr_at_mean");
  j["f_sr_lower_min"] = cert.witnesses.at("f_sr_lower_min");
  emit(j, out_summary);
  return 0;
}

int cmd_compare(const std::string& input, const std::string& out,
                const RunConfig& cfg) {
  Dataset data = read_dataset(input);
  if (data.n() < 1) throw ParseError("dataset is empty");
  MetricWeight k{cfg.k};
  MeanOptions opts = mean_options(cfg);

  CoordinateCloud le = le_coordinates(data.items);
  EigenDecomp reference = psr_mean(data.items, std::nullopt, opts).mean;
  CoordinateCloud psr = psr_coordinates(data.items, reference, k);

  Matrix le_m = le_mean(data.items);
  Matrix ai_m = ai_mean(data.items).mean;
  Matrix psr_m = reference.compose();

  std::ostringstream os;
  const int d = static_cast<int>(le.coords.cols());
  os << "tag";
  for (int j = 0; j < d; ++j) os << ",le_" << j;
  for (int j = 0; j < d; ++j) os << ",psr_" << j;
  os << "\n";
  auto write_row = [&](const std::string& tag, const Vector& le_row,
                       const Vector& psr_row) {
    os << tag;
    for (int j = 0; j < d; ++j) os << "," << format_double(le_row[j]);
    for (int j = 0; j < d; ++j) os << "," << format_double(psr_row[j]);
    os << "\n";
  };
  for (int i = 0; i < data.n(); ++i) {
    write_row("obs", le.coords.row(i), psr.coords.row(i));
  }
  auto coords_of = [&](const Matrix& m) {
    CoordinateCloud c = psr_coordinates({m}, reference, k);
    return std::pair<Vector, Vector>(le_coordinates({m}).coords.row(0),
                                     c.coords.row(0));
  };
  auto [le_le, le_psr] = coords_of(le_m);
  write_row("mean_le", le_le, le_psr);
  auto [ai_le, ai_psr] = coords_of(ai_m);
  write_row("mean_ai", ai_le, ai_psr);
  auto [ps_le, ps_psr] = coords_of(psr_m);
  write_row("mean_psr", ps_le, ps_psr);

  if (out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out);
    if (!f) throw Error("cannot write output file: " + out);
    f << os.str();
  }
  return 0;
}

int cmd_group_test(const std::string& in1, const std::string& in2,
                   const std::string& out, const RunConfig& cfg) {
  Dataset g1 = read_dataset(in1);
  Dataset g2 = read_dataset(in2);
  if (g1.p != g2.p) throw ParseError("groups have different dimensions");
  GroupTestReport rep = two_group_report(g1.items, g2.items, cfg.bootstrap,
                                         cfg.level, cfg.seed, MetricWeight{cfg.k});
  json j = report_header(cfg);
  j["p"] = rep.p;
  j["d"] = rep.d;
  j["n1"] = g1.n();
  j["n2"] = g2.n();
  j["chi2_threshold"] = rep.chi2_threshold;
  j["psr"] = json{{"mean1", vector_to_json(rep.mean1_psr)},
                  {"mean2", vector_to_json(rep.mean2_psr)},
                  {"cov1", matrix_to_json(rep.cov1_psr)},
                  {"cov2", matrix_to_json(rep.cov2_psr)},
                  {"t", rep.t_psr},
                  {"p_value", rep.p_value_psr},
                  {"dropped_replicates", rep.dropped1 + rep.dropped2}};
  j["log_euclidean"] = json{{"mean1", vector_to_json(rep.mean1_le)},
                            {"mean2", vector_to_json(rep.mean2_le)},
                            {"cov1", matrix_to_json(rep.cov1_le)},
                            {"cov2", matrix_to_json(rep.cov2_le)},
                            {"t", rep.t_le},
                            {"p_value", rep.p_value_le}};
  j["separated"] = rep.separated;
  emit(j, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scaling-rotation statistics for SPD matrices"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string input, input2, output, ref_path, mode = "sr";
  bool multistart = false;
  int the_case = 0, n = 200;
  double sigma_theta = M_PI / 12.0, mu1 = 2.0, mu2 = 0.0, sigma_d = 0.2;

  auto* mean_cmd = app.add_subcommand("mean", "sample PSR mean + certificates");
  mean_cmd->add_option("--input", input, "dataset CSV")->required();
  mean_cmd->add_option("--out", output, "JSON report path (default stdout)");
  mean_cmd->add_flag("--multistart", multistart,
                     "try every observation as the initial guess");
  add_config_flags(mean_cmd, cfg);

  auto* dist_cmd = app.add_subcommand("dist", "SR / PSR distance");
  dist_cmd->add_option("--x", input, "X dataset CSV (first record)")->required();
  dist_cmd->add_option("--y", input2, "Y dataset CSV (first record, sr mode)");
  dist_cmd->add_option("--ref", ref_path, "decomposition JSON (psr mode)");
  dist_cmd->add_option("--mode", mode, "sr or psr")
      ->check(CLI::IsMember({"sr", "psr"}));
  dist_cmd->add_option("--out", output, "JSON report path (default stdout)");
  add_config_flags(dist_cmd, cfg);

  auto* sim_cmd = app.add_subcommand("simulate", "draw from the 2-D model");
  sim_cmd->add_option("--case", the_case, "preset parameters: 1 or 2");
  sim_cmd->add_option("--n", n, "sample size");
  sim_cmd->add_option("--sigma-theta", sigma_theta, "rotation spread");
  sim_cmd->add_option("--mu1", mu1, "first log-eigenvalue mean");
  sim_cmd->add_option("--mu2", mu2, "second log-eigenvalue mean");
  sim_cmd->add_option("--sigma-d", sigma_d, "log-eigenvalue spread");
  sim_cmd->add_option("--out", input, "dataset CSV path")->required();
  sim_cmd->add_option("--summary", output, "JSON summary path (default stdout)");
  add_config_flags(sim_cmd, cfg);

  auto* cmp_cmd = app.add_subcommand("compare", "LE / PSR coordinates + means");
  cmp_cmd->add_option("--input", input, "dataset CSV")->required();
  cmp_cmd->add_option("--out", output, "CSV output path (default stdout)");
  add_config_flags(cmp_cmd, cfg);

  auto* grp_cmd = app.add_subcommand("group-test", "two-group bootstrap test");
  grp_cmd->add_option("--group1", input, "group 1 dataset CSV")->required();
  grp_cmd->add_option("--group2", input2, "group 2 dataset CSV")->required();
  grp_cmd->add_option("--out", output, "JSON report path (default stdout)");
  add_config_flags(grp_cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.validate();
    if (mean_cmd->parsed()) return cmd_mean(input, output, cfg, multistart);
    if (dist_cmd->parsed())
      return cmd_dist(input, input2, ref_path, mode, output, cfg);
    if (sim_cmd->parsed())
      return cmd_simulate(the_case, n, sigma_theta, mu1, mu2, sigma_d, input,
                          output, cfg);
    if (cmp_cmd->parsed()) return cmd_compare(input, output, cfg);
    if (grp_cmd->parsed()) return cmd_group_test(input, input2, output, cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BadParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonOrthogonalInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonPositiveEntry& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedStratum& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DimensionTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
