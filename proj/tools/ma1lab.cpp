// Command-line front end: seeded simulation, single fits, asymptotic pile-up
// Monte Carlo, and the table-reproduction harness with CSV/JSON output.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ma1/experiments.hpp"
#include "ma1/version.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::uint64_t seed = 0;
  long reps = -1;
  long asym_reps = -1;
  long m = -1;
  std::vector<std::size_t> n_list;
  std::vector<std::string> noise;
  std::vector<double> theta0;
  std::string mode;
  std::string out;
  std::string format = "csv";
  std::string config;
  std::string method = "joint";
  std::string in_path;
  unsigned workers = 0;
  bool rb = false;
};

void add_common_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "master 64-bit seed");
  cmd->add_option("--reps", o.reps, "replicates per cell");
  cmd->add_option("--n", o.n_list, "sample sizes")->delimiter(',');
  cmd->add_option("--noise", o.noise, "noise families (laplace,gaussian,uniform,t5)")
      ->delimiter(',');
  cmd->add_option("--theta0", o.theta0, "generating MA(1) coefficients")->delimiter(',');
  cmd->add_option("--mode", o.mode, "search mode: local|global")
      ->check(CLI::IsMember({"local", "global"}));
  cmd->add_option("--m", o.m, "asymptotic grid size");
  cmd->add_option("--asym-reps", o.asym_reps, "asymptotic replicate count");
  cmd->add_option("--out", o.out, "output path (csv output also writes <out>.json sidecar)");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", o.workers, "worker threads (0 = hardware)");
  cmd->add_option("--config", o.config, "JSON config file; explicit flags override");
}

void apply_config_json(ma1::ExperimentSpec& spec, const json& j) {
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("reps")) spec.reps = j["reps"].get<std::size_t>();
  if (j.contains("n")) spec.n_list = j["n"].get<std::vector<std::size_t>>();
  if (j.contains("theta0")) spec.theta0_list = j["theta0"].get<std::vector<double>>();
  if (j.contains("workers")) spec.workers = j["workers"].get<unsigned>();
  if (j.contains("rb")) spec.rb = j["rb"].get<bool>();
  if (j.contains("mode")) {
    spec.mode = j["mode"].get<std::string>() == "global" ? ma1::SearchMode::Global
                                                         : ma1::SearchMode::LocalNearestOne;
  }
  if (j.contains("noise")) {
    spec.noise_list.clear();
    for (const auto& name : j["noise"]) {
      spec.noise_list.push_back(ma1::family_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("asymptotic")) {
    const auto& a = j["asymptotic"];
    if (a.contains("m")) spec.asymptotic.m = a["m"].get<std::size_t>();
    if (a.contains("reps")) spec.asymptotic.reps = a["reps"].get<std::size_t>();
    if (a.contains("beta_max")) spec.asymptotic.beta_max = a["beta_max"].get<double>();
    if (a.contains("grid_step")) spec.asymptotic.grid_step = a["grid_step"].get<double>();
    if (a.contains("refine_tol")) spec.asymptotic.refine_tol = a["refine_tol"].get<double>();
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    if (s.contains("beta_max")) spec.search.beta_max = s["beta_max"].get<double>();
    if (s.contains("grid_step")) spec.search.grid_step = s["grid_step"].get<double>();
    if (s.contains("refine_tol")) spec.search.refine_tol = s["refine_tol"].get<double>();
    if (s.contains("sigma_profile_tol")) {
      spec.search.sigma_profile_tol = s["sigma_profile_tol"].get<double>();
    }
  }
}

ma1::ExperimentSpec build_spec(ma1::TableKind table, const CLI::App* cmd, const Options& o) {
  ma1::ExperimentSpec spec = ma1::ExperimentSpec::defaults_for(table);
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw std::invalid_argument("cannot open config file: " + o.config);
    json j;
    in >> j;
    apply_config_json(spec, j);
  }
  if (cmd->count("--seed")) spec.seed = o.seed;
  if (cmd->count("--reps")) spec.reps = static_cast<std::size_t>(o.reps);
  if (cmd->count("--n")) spec.n_list = o.n_list;
  if (cmd->count("--theta0")) spec.theta0_list = o.theta0;
  if (cmd->count("--workers")) spec.workers = o.workers;
  if (cmd->count("--mode")) {
    spec.mode = o.mode == "global" ? ma1::SearchMode::Global
                                   : ma1::SearchMode::LocalNearestOne;
  }
  if (cmd->count("--noise")) {
    spec.noise_list.clear();
    for (const auto& name : o.noise) spec.noise_list.push_back(ma1::family_from_name(name));
  }
  if (cmd->count("--m")) spec.asymptotic.m = static_cast<std::size_t>(o.m);
  if (cmd->count("--asym-reps")) {
    spec.asymptotic.reps = static_cast<std::size_t>(o.asym_reps);
  } else if (table == ma1::TableKind::PileupAsymptotic && cmd->count("--reps")) {
    // For the pure asymptotic command --reps means the Monte Carlo replicates.
    spec.asymptotic.reps = static_cast<std::size_t>(o.reps);
  }
  spec.asymptotic.seed = spec.seed;
  spec.asymptotic.workers = spec.workers;
  return spec;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void emit_report(const ma1::ExperimentSpec& spec, const std::vector<ma1::TableRow>& rows,
                 const Options& o) {
  if (o.format == "csv") {
    const std::string csv = ma1::to_csv(rows);
    if (o.out.empty()) {
      std::cout << csv;
    } else {
      write_text(o.out, csv);
      write_text(o.out + ".json", ma1::report_json(spec, rows).dump(2) + "\n");
    }
  } else {
    const std::string text = ma1::report_json(spec, rows).dump(2) + "\n";
    if (o.out.empty()) {
      std::cout << text;
    } else {
      write_text(o.out, text);
    }
  }
}

int run_table_command(ma1::TableKind table, const CLI::App* cmd, const Options& o) {
  const ma1::ExperimentSpec spec = build_spec(table, cmd, o);
  const std::vector<ma1::TableRow> rows = ma1::run_experiment(spec);
  emit_report(spec, rows, o);
  return 0;
}

int run_simulate(const CLI::App* cmd, const Options& o) {
  // Table2 defaults: single-cell, Laplace noise.
  const ma1::ExperimentSpec spec = build_spec(ma1::TableKind::Table2, cmd, o);
  const std::size_t n = spec.n_list.empty() ? 50 : spec.n_list.front();
  const double theta0 = spec.theta0_list.empty() ? 1.0 : spec.theta0_list.front();
  const ma1::Family fam = spec.noise_list.front();
  const ma1::Ma1Sample sample =
      ma1::simulate_ma1({theta0, n, spec.seed}, ma1::noise_spec(fam));
  std::string text;
  if (o.format == "csv") {
    text = "t,x,z\n0,," + ma1::format_double(sample.z[0]) + "\n";
    for (std::size_t t = 1; t <= n; ++t) {
      text += std::to_string(t) + ',' + ma1::format_double(sample.x[t - 1]) + ',' +
              ma1::format_double(sample.z[t]) + '\n';
    }
  } else {
    json j;
    j["version"] = ma1::kVersion;
    j["n"] = n;
    j["theta0"] = theta0;
    j["noise"] = ma1::family_name(fam);
    j["seed"] = spec.seed;
    j["x"] = sample.x;
    j["z"] = sample.z;
    text = j.dump(2) + "\n";
  }
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

int run_fit(const CLI::App* cmd, const Options& o) {
  const ma1::ExperimentSpec spec = build_spec(ma1::TableKind::Table2, cmd, o);
  const std::size_t n = spec.n_list.empty() ? 50 : spec.n_list.front();
  const double theta0 = spec.theta0_list.empty() ? 1.0 : spec.theta0_list.front();
  const ma1::Family fam = spec.noise_list.front();

  std::vector<double> x;
  json meta;
  if (!o.in_path.empty()) {
    std::ifstream in(o.in_path);
    if (!in) throw std::invalid_argument("cannot open input path: " + o.in_path);
    json j;
    in >> j;
    x = j.at("x").get<std::vector<double>>();
    meta = j;
  } else {
    const ma1::Ma1Sample sample =
        ma1::simulate_ma1({theta0, n, spec.seed}, ma1::noise_spec(fam));
    x = sample.x;
  }

  ma1::SearchConfig sc = spec.search;
  sc.mode = spec.mode;
  if (o.method == "lad" && !cmd->count("--mode")) sc.mode = ma1::SearchMode::Global;

  ma1::FitResult fr;
  if (o.method == "joint") {
    fr = ma1::fit_joint(x, sc);
  } else if (o.method == "exact") {
    fr = ma1::fit_exact(x, sc);
  } else if (o.method == "lad") {
    fr = ma1::fit_lad(x, sc);
  } else {
    throw std::invalid_argument("unknown method: " + o.method);
  }

  json j;
  j["version"] = ma1::kVersion;
  j["method"] = ma1::method_name(fr.method);
  j["mode"] = ma1::mode_name(fr.mode);
  j["n"] = x.size();
  if (o.in_path.empty()) {
    j["theta0"] = theta0;
    j["noise"] = ma1::family_name(fam);
    j["seed"] = spec.seed;
  } else {
    j["input"] = o.in_path;
  }
  j["theta_hat"] = fr.theta_hat;
  if (std::isnan(fr.z_init_hat)) {
    j["z_init_hat"] = nullptr;
  } else {
    j["z_init_hat"] = fr.z_init_hat;
  }
  j["sigma_hat"] = fr.sigma_hat;
  j["objective"] = fr.objective;
  j["pileup"] = fr.pileup;
  j["degenerate"] = fr.diag.degenerate;
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MA(1) unit-root estimation laboratory under a Laplace likelihood"};
  app.set_version_flag("--version", std::string(ma1::kVersion));
  app.require_subcommand(1);

  Options o;
  CLI::App* simulate = app.add_subcommand("simulate", "emit one simulated path");
  CLI::App* fit = app.add_subcommand("fit", "fit one path with one method");
  CLI::App* pileup = app.add_subcommand("pileup-asym", "asymptotic pile-up probabilities");
  CLI::App* t1 = app.add_subcommand("table1", "empirical + asymptotic pile-up frequencies");
  CLI::App* t2 = app.add_subcommand("table2", "bias/sd/rmse of the local fits at theta0=1");
  CLI::App* t3 = app.add_subcommand("table3", "global fits across theta0 values");
  CLI::App* lad = app.add_subcommand("lad-compare", "LAD vs exact fit rmse comparison");
  for (CLI::App* cmd : {simulate, fit, pileup, t1, t2, t3, lad}) {
    add_common_options(cmd, o);
  }
  fit->add_option("--method", o.method, "joint|exact|lad")
      ->check(CLI::IsMember({"joint", "exact", "lad"}));
  fit->add_option("--in", o.in_path, "JSON path file from `simulate` (reads x)");
  pileup->add_flag("--rb", o.rb, "also emit the Rao-Blackwellized Laplace estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(simulate, o);
    if (fit->parsed()) return run_fit(fit, o);
    if (pileup->parsed()) {
      ma1::ExperimentSpec spec = build_spec(ma1::TableKind::PileupAsymptotic, pileup, o);
      spec.rb = o.rb;
      emit_report(spec, ma1::run_experiment(spec), o);
      return 0;
    }
    if (t1->parsed()) return run_table_command(ma1::TableKind::Table1, t1, o);
    if (t2->parsed()) return run_table_command(ma1::TableKind::Table2, t2, o);
    if (t3->parsed()) return run_table_command(ma1::TableKind::Table3, t3, o);
    if (lad->parsed()) return run_table_command(ma1::TableKind::LadCompare, lad, o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ma1::WindowMissError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
