#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ma1/asymptotics.hpp"
#include "ma1/estimators.hpp"
#include "ma1/noise.hpp"
#include "ma1/parallel.hpp"
#include "ma1/stats.hpp"
#include "ma1/version.hpp"

namespace ma1 {

enum class TableKind { Table1, Table2, Table3, LadCompare, PileupAsymptotic };

inline const char* table_name(TableKind t) {
  switch (t) {
    case TableKind::Table1: return "table1";
    case TableKind::Table2: return "table2";
    case TableKind::Table3: return "table3";
    case TableKind::LadCompare: return "lad-compare";
    case TableKind::PileupAsymptotic: return "pileup-asym";
  }
  return "?";
}

// One experiment request. Lists left empty are filled by defaults_for().
struct ExperimentSpec {
  TableKind table = TableKind::Table1;
  std::vector<std::size_t> n_list;
  std::size_t reps = 1000;
  std::vector<Family> noise_list;
  std::vector<double> theta0_list;
  SearchMode mode = SearchMode::LocalNearestOne;
  std::uint64_t seed = 0;
  AsymptoticConfig asymptotic{.m = 2000, .reps = 20000};  // desk scale
  SearchConfig search;
  unsigned workers = 0;
  bool rb = false;  // pileup-asym: also emit the Rao-Blackwellized Laplace row

  static ExperimentSpec defaults_for(TableKind table) {
    ExperimentSpec s;
    s.table = table;
    switch (table) {
      case TableKind::Table1:
        s.n_list = {20, 50, 100, 200, 500};
        s.noise_list = {Family::Gaussian, Family::Laplace, Family::Uniform, Family::StudentT5};
        s.theta0_list = {1.0};
        break;
      case TableKind::Table2:
        s.n_list = {20, 50, 100, 200};
        s.noise_list = {Family::Laplace};
        s.theta0_list = {1.0};
        break;
      case TableKind::Table3:
        s.n_list = {50};
        s.noise_list = {Family::Laplace};
        s.theta0_list = {0.8, 0.9, 0.95, 1.0 / 0.95, 1.0 / 0.9, 1.0 / 0.8};
        s.mode = SearchMode::Global;
        break;
      case TableKind::LadCompare:
        s.n_list = {50, 100};
        s.noise_list = {Family::Laplace};
        s.theta0_list = {1.0};
        s.mode = SearchMode::Global;
        break;
      case TableKind::PileupAsymptotic:
        s.noise_list = {Family::Gaussian, Family::Laplace, Family::Uniform, Family::StudentT5};
        s.n_list = {};
        s.theta0_list = {1.0};
        break;
    }
    return s;
  }

  void validate() const {
    if (reps < 1) throw std::invalid_argument("ExperimentSpec: reps must be >= 1");
    if (noise_list.empty()) throw std::invalid_argument("ExperimentSpec: noise list empty");
    if (table != TableKind::PileupAsymptotic && n_list.empty()) {
      throw std::invalid_argument("ExperimentSpec: n list empty");
    }
    if (theta0_list.empty()) throw std::invalid_argument("ExperimentSpec: theta0 list empty");
    search.validate();
  }
};

// One output row; NaN doubles and negative counts serialize as empty fields,
// n < 0 marks an asymptotic (n = infinity) row.
struct TableRow {
  std::string table;
  std::string method;
  std::string mode;
  std::string noise;
  long n = -1;
  double theta0 = std::numeric_limits<double>::quiet_NaN();
  std::size_t reps = 0;
  double pileup_freq = std::numeric_limits<double>::quiet_NaN();
  long count_lt1 = -1;
  long count_eq1 = -1;
  double bias = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double asymp_sd = std::numeric_limits<double>::quiet_NaN();
  double mc_se = std::numeric_limits<double>::quiet_NaN();
  long excluded = 0;
};

namespace detail {

inline std::uint64_t cell_key(TableKind table, std::size_t cell) {
  return ((static_cast<std::uint64_t>(table) + 1) << 40) | cell;
}

// Per-cell records for one estimator across replicates.
struct CellRecords {
  std::vector<double> theta;
  std::vector<char> pileup;
  std::vector<char> miss;
  explicit CellRecords(std::size_t reps) : theta(reps, 0.0), pileup(reps, 0), miss(reps, 0) {}
};

inline TableRow summarize_cell(const CellRecords& rec, TableRow row, double theta0) {
  std::vector<double> kept;
  kept.reserve(rec.theta.size());
  long lt1 = 0, eq1 = 0, excluded = 0;
  for (std::size_t r = 0; r < rec.theta.size(); ++r) {
    if (rec.miss[r]) {
      ++excluded;
      continue;
    }
    kept.push_back(rec.theta[r]);
    if (rec.theta[r] < 1.0) ++lt1;
    if (rec.theta[r] == 1.0) ++eq1;
  }
  const Moments m = moments_of(kept);
  row.reps = rec.theta.size();
  row.excluded = excluded;
  row.count_lt1 = lt1;
  row.count_eq1 = eq1;
  row.theta0 = theta0;
  if (m.count > 0) {
    row.pileup_freq = static_cast<double>(eq1) / static_cast<double>(m.count);
    row.bias = m.mean - theta0;
    row.sd = m.sd;
    row.rmse = std::sqrt(row.bias * row.bias + row.sd * row.sd);
    row.mc_se = m.sd / std::sqrt(static_cast<double>(m.count));
  }
  return row;
}

}  // namespace detail

// Table 1: empirical pile-up frequencies of the local joint fit at theta0 = 1
// for each (n, noise family), plus the asymptotic (n = infinity) row per
// family from the limit Monte Carlo.
inline std::vector<TableRow> run_table1(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<TableRow> rows;
  SearchConfig sc = spec.search;
  sc.mode = SearchMode::LocalNearestOne;
  std::size_t cell = 0;
  for (std::size_t n : spec.n_list) {
    for (Family fam : spec.noise_list) {
      const NoiseSpec ns = noise_spec(fam);
      detail::CellRecords rec(spec.reps);
      const std::uint64_t key = detail::cell_key(TableKind::Table1, cell);
      parallel_for(spec.reps, spec.workers, [&](std::size_t r) {
        Rng rng = make_stream(spec.seed, key, r);
        const Ma1Sample sample = simulate_ma1({1.0, n, spec.seed}, ns, rng);
        try {
          const FitResult fr = fit_joint(sample.x, sc);
          rec.theta[r] = fr.theta_hat;
          rec.pileup[r] = fr.pileup;
        } catch (const WindowMissError&) {
          rec.miss[r] = 1;
        }
      });
      TableRow row;
      row.table = "table1";
      row.method = "joint";
      row.mode = "local";
      row.noise = family_name(fam);
      row.n = static_cast<long>(n);
      rows.push_back(detail::summarize_cell(rec, row, 1.0));
      const TableRow& back = rows.back();
      if (back.count_eq1 >= 0) {
        rows.back().mc_se = binomial_se(back.pileup_freq,
                                        static_cast<std::size_t>(back.reps) - back.excluded);
      }
      ++cell;
    }
  }
  for (Family fam : spec.noise_list) {
    AsymptoticConfig ac = spec.asymptotic;
    const auto [f0, c] = derive_constants(fam);
    ac.f0 = f0;
    ac.c = c;
    ac.workers = spec.workers;
    ac.seed = hash_combine(spec.seed, detail::cell_key(TableKind::Table1, cell));
    const PileupEstimate pe = pileup_prob_mc(ac);
    TableRow row;
    row.table = "table1";
    row.method = "joint";
    row.mode = "asymptotic";
    row.noise = family_name(fam);
    row.n = -1;
    row.theta0 = 1.0;
    row.reps = pe.reps;
    row.pileup_freq = pe.estimate;
    row.mc_se = pe.std_error;
    rows.push_back(row);
    ++cell;
  }
  return rows;
}

// Table 2: bias/sd/rmse of the local joint and exact fits for Laplace noise at
// theta0 = 1, with the asymptotic sd column sd(beta_hat)/n from the limit run.
inline std::vector<TableRow> run_table2(const ExperimentSpec& spec) {
  spec.validate();
  AsymptoticConfig ac = spec.asymptotic;
  const auto [f0, c] = derive_constants(Family::Laplace);
  ac.f0 = f0;
  ac.c = c;
  ac.workers = spec.workers;
  ac.seed = hash_combine(spec.seed, detail::cell_key(TableKind::Table2, 0xff));
  const LimitDistributionSummary lim = limit_beta_distributions(ac);

  std::vector<TableRow> rows;
  const NoiseSpec ns = noise_spec(Family::Laplace);
  SearchConfig sc = spec.search;
  sc.mode = SearchMode::LocalNearestOne;
  std::size_t cell = 0;
  for (std::size_t n : spec.n_list) {
    detail::CellRecords rec_j(spec.reps), rec_e(spec.reps);
    const std::uint64_t key = detail::cell_key(TableKind::Table2, cell);
    parallel_for(spec.reps, spec.workers, [&](std::size_t r) {
      Rng rng = make_stream(spec.seed, key, r);
      const Ma1Sample sample = simulate_ma1({1.0, n, spec.seed}, ns, rng);
      try {
        const FitResult fr = fit_joint(sample.x, sc);
        rec_j.theta[r] = fr.theta_hat;
        rec_j.pileup[r] = fr.pileup;
      } catch (const WindowMissError&) {
        rec_j.miss[r] = 1;
      }
      try {
        const FitResult fr = fit_exact(sample.x, sc);
        rec_e.theta[r] = fr.theta_hat;
        rec_e.pileup[r] = fr.pileup;
      } catch (const WindowMissError&) {
        rec_e.miss[r] = 1;
      }
    });
    TableRow row;
    row.table = "table2";
    row.mode = "local";
    row.noise = family_name(Family::Laplace);
    row.n = static_cast<long>(n);
    row.method = "joint";
    rows.push_back(detail::summarize_cell(rec_j, row, 1.0));
    rows.back().asymp_sd = lim.sd_beta_J / static_cast<double>(n);
    row.method = "exact";
    rows.push_back(detail::summarize_cell(rec_e, row, 1.0));
    rows.back().asymp_sd = lim.sd_beta_E / static_cast<double>(n);
    ++cell;
  }
  return rows;
}

// Table 3: global fits for Laplace noise across invertible and noninvertible
// theta0; counts of invertible (< 1) and unit-root (= 1) outcomes plus
// bias/sd/rmse per method. The beta window is widened to cover the dispersed
// global-optimizer sampling distribution at these theta0.
inline std::vector<TableRow> run_table3(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<TableRow> rows;
  const NoiseSpec ns = noise_spec(Family::Laplace);
  SearchConfig sc = spec.search;
  sc.mode = SearchMode::Global;
  sc.beta_max = std::max(sc.beta_max, 50.0);
  std::size_t cell = 0;
  for (std::size_t n : spec.n_list) {
    for (double theta0 : spec.theta0_list) {
      detail::CellRecords rec_j(spec.reps), rec_e(spec.reps);
      const std::uint64_t key = detail::cell_key(TableKind::Table3, cell);
      parallel_for(spec.reps, spec.workers, [&](std::size_t r) {
        Rng rng = make_stream(spec.seed, key, r);
        const Ma1Sample sample = simulate_ma1({theta0, n, spec.seed}, ns, rng);
        try {
          const FitResult fr = fit_joint(sample.x, sc);
          rec_j.theta[r] = fr.theta_hat;
          rec_j.pileup[r] = fr.pileup;
        } catch (const WindowMissError&) {
          rec_j.miss[r] = 1;
        }
        try {
          const FitResult fr = fit_exact(sample.x, sc);
          rec_e.theta[r] = fr.theta_hat;
          rec_e.pileup[r] = fr.pileup;
        } catch (const WindowMissError&) {
          rec_e.miss[r] = 1;
        }
      });
      TableRow row;
      row.table = "table3";
      row.mode = "global";
      row.noise = family_name(Family::Laplace);
      row.n = static_cast<long>(n);
      row.method = "joint";
      rows.push_back(detail::summarize_cell(rec_j, row, theta0));
      row.method = "exact";
      rows.push_back(detail::summarize_cell(rec_e, row, theta0));
      ++cell;
    }
  }
  return rows;
}

// LAD versus exact fit at theta0 = 1 on shared paths; the third row per n
// reports rmse(lad)/rmse(exact) in the rmse column.
inline std::vector<TableRow> run_lad_compare(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<TableRow> rows;
  const NoiseSpec ns = noise_spec(Family::Laplace);
  SearchConfig sc_lad = spec.search;
  sc_lad.mode = SearchMode::Global;
  SearchConfig sc_exact = spec.search;
  sc_exact.mode = SearchMode::LocalNearestOne;
  std::size_t cell = 0;
  for (std::size_t n : spec.n_list) {
    detail::CellRecords rec_l(spec.reps), rec_e(spec.reps);
    const std::uint64_t key = detail::cell_key(TableKind::LadCompare, cell);
    parallel_for(spec.reps, spec.workers, [&](std::size_t r) {
      Rng rng = make_stream(spec.seed, key, r);
      const Ma1Sample sample = simulate_ma1({1.0, n, spec.seed}, ns, rng);
      try {
        const FitResult fr = fit_lad(sample.x, sc_lad);
        rec_l.theta[r] = fr.theta_hat;
        rec_l.pileup[r] = fr.pileup;
      } catch (const WindowMissError&) {
        rec_l.miss[r] = 1;
      }
      try {
        const FitResult fr = fit_exact(sample.x, sc_exact);
        rec_e.theta[r] = fr.theta_hat;
        rec_e.pileup[r] = fr.pileup;
      } catch (const WindowMissError&) {
        rec_e.miss[r] = 1;
      }
    });
    TableRow row;
    row.table = "lad-compare";
    row.noise = family_name(Family::Laplace);
    row.n = static_cast<long>(n);
    row.method = "lad";
    row.mode = "global";
    rows.push_back(detail::summarize_cell(rec_l, row, 1.0));
    const double rmse_lad = rows.back().rmse;
    row.method = "exact";
    row.mode = "local";
    rows.push_back(detail::summarize_cell(rec_e, row, 1.0));
    const double rmse_exact = rows.back().rmse;
    TableRow ratio;
    ratio.table = "lad-compare";
    ratio.method = "lad_vs_exact";
    ratio.noise = family_name(Family::Laplace);
    ratio.n = static_cast<long>(n);
    ratio.theta0 = 1.0;
    ratio.reps = spec.reps;
    ratio.rmse = rmse_lad / rmse_exact;
    rows.push_back(ratio);
    ++cell;
  }
  return rows;
}

// Asymptotic pile-up probabilities per family; optionally also the
// Rao-Blackwellized Laplace estimate.
inline std::vector<TableRow> run_pileup_asymptotic(const ExperimentSpec& spec) {
  if (spec.noise_list.empty()) throw std::invalid_argument("noise list empty");
  std::vector<TableRow> rows;
  std::size_t cell = 0;
  for (Family fam : spec.noise_list) {
    AsymptoticConfig ac = spec.asymptotic;
    const auto [f0, c] = derive_constants(fam);
    ac.f0 = f0;
    ac.c = c;
    ac.workers = spec.workers;
    ac.seed = hash_combine(spec.seed, detail::cell_key(TableKind::PileupAsymptotic, cell));
    const PileupEstimate pe = pileup_prob_mc(ac);
    TableRow row;
    row.table = "pileup-asym";
    row.method = "mc";
    row.mode = "asymptotic";
    row.noise = family_name(fam);
    row.n = -1;
    row.theta0 = 1.0;
    row.reps = pe.reps;
    row.pileup_freq = pe.estimate;
    row.mc_se = pe.std_error;
    rows.push_back(row);
    ++cell;
    if (spec.rb && fam == Family::Laplace) {
      ac.seed = hash_combine(spec.seed, detail::cell_key(TableKind::PileupAsymptotic, cell));
      const PileupEstimate rb = pileup_prob_laplace_rb(ac);
      TableRow rb_row = row;
      rb_row.method = "rb";
      rb_row.reps = rb.reps;
      rb_row.pileup_freq = rb.estimate;
      rb_row.mc_se = rb.std_error;
      rows.push_back(rb_row);
      ++cell;
    }
  }
  return rows;
}

inline std::vector<TableRow> run_experiment(const ExperimentSpec& spec) {
  switch (spec.table) {
    case TableKind::Table1: return run_table1(spec);
    case TableKind::Table2: return run_table2(spec);
    case TableKind::Table3: return run_table3(spec);
    case TableKind::LadCompare: return run_lad_compare(spec);
    case TableKind::PileupAsymptotic: return run_pileup_asymptotic(spec);
  }
  throw std::logic_error("unreachable");
}

// --- serialization ---------------------------------------------------------

// Shortest round-trip decimal form; locale-independent and byte-stable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const std::vector<TableRow>& rows) {
  std::string out =
      "table,method,mode,noise,n,theta0,reps,pileup_freq,count_lt1,count_eq1,"
      "bias,sd,rmse,asymp_sd,mc_se,excluded\n";
  for (const TableRow& r : rows) {
    out += r.table + ',' + r.method + ',' + r.mode + ',' + r.noise + ',';
    out += r.n < 0 ? "inf" : std::to_string(r.n);
    out += ',';
    out += format_double(r.theta0);
    out += ',' + std::to_string(r.reps) + ',';
    out += format_double(r.pileup_freq);
    out += ',';
    out += r.count_lt1 < 0 ? "" : std::to_string(r.count_lt1);
    out += ',';
    out += r.count_eq1 < 0 ? "" : std::to_string(r.count_eq1);
    out += ',';
    out += format_double(r.bias);
    out += ',';
    out += format_double(r.sd);
    out += ',';
    out += format_double(r.rmse);
    out += ',';
    out += format_double(r.asymp_sd);
    out += ',';
    out += format_double(r.mc_se);
    out += ',' + std::to_string(r.excluded) + '\n';
  }
  return out;
}

inline nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["table"] = table_name(spec.table);
  j["n"] = spec.n_list;
  j["reps"] = spec.reps;
  std::vector<std::string> fams;
  for (Family f : spec.noise_list) fams.emplace_back(family_name(f));
  j["noise"] = fams;
  j["theta0"] = spec.theta0_list;
  j["mode"] = mode_name(spec.mode);
  j["seed"] = spec.seed;
  j["workers"] = spec.workers;
  j["rb"] = spec.rb;
  j["asymptotic"] = {{"m", spec.asymptotic.m},
                     {"reps", spec.asymptotic.reps},
                     {"beta_max", spec.asymptotic.beta_max},
                     {"grid_step", spec.asymptotic.grid_step},
                     {"refine_tol", spec.asymptotic.refine_tol}};
  j["search"] = {{"beta_max", spec.search.beta_max},
                 {"grid_step", spec.search.grid_step},
                 {"refine_tol", spec.search.refine_tol},
                 {"sigma_profile_tol", spec.search.sigma_profile_tol}};
  return j;
}

inline nlohmann::json row_to_json(const TableRow& r) {
  nlohmann::json j;
  auto put = [&](const char* k, double v) {
    if (std::isnan(v)) {
      j[k] = nullptr;
    } else {
      j[k] = v;
    }
  };
  j["table"] = r.table;
  j["method"] = r.method;
  j["mode"] = r.mode;
  j["noise"] = r.noise;
  if (r.n < 0) {
    j["n"] = "inf";
  } else {
    j["n"] = r.n;
  }
  put("theta0", r.theta0);
  j["reps"] = r.reps;
  put("pileup_freq", r.pileup_freq);
  if (r.count_lt1 >= 0) j["count_lt1"] = r.count_lt1; else j["count_lt1"] = nullptr;
  if (r.count_eq1 >= 0) j["count_eq1"] = r.count_eq1; else j["count_eq1"] = nullptr;
  put("bias", r.bias);
  put("sd", r.sd);
  put("rmse", r.rmse);
  put("asymp_sd", r.asymp_sd);
  put("mc_se", r.mc_se);
  j["excluded"] = r.excluded;
  return j;
}

inline nlohmann::json report_json(const ExperimentSpec& spec,
                                  const std::vector<TableRow>& rows) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = spec_to_json(spec);
  j["rows"] = nlohmann::json::array();
  for (const TableRow& r : rows) j["rows"].push_back(row_to_json(r));
  return j;
}

}  // namespace ma1
