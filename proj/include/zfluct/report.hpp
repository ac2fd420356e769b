#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zfluct/admissibility.hpp"
#include "zfluct/coeff_model.hpp"
#include "zfluct/mc.hpp"
#include "zfluct/restriction.hpp"
#include "zfluct/variance.hpp"

#include "json.hpp"

namespace zfluct::report {

// Experiment driver behind the CLI: parses key = value configs with
// [command] sections, runs a command over an r (or t) grid, and writes a
// fixed-schema CSV, a JSON manifest, and plot-ready .dat files. Given the
// same config and seed the CSV bytes are identical, whatever the thread
// count.

struct usage_error : model_error {
  using model_error::model_error;
};

struct ExperimentConfig {
  std::string family = "exp";
  std::map<std::string, double> family_params;
  std::string coeff_file;
  bool restricted = false;  // run on the lacunary restriction of the model

  std::vector<double> r_grid;  // canonical grid (t_grid inputs are converted)

  double tol = 1e-9;
  double tail_eps = 1e-12;
  double c_g = 2.5;
  double epsilon = 0.1;
  double gamma = 0.25;
  double c1 = 20.0;
  std::int64_t ell_min = 2;
  std::int64_t ell_max = 3;
  std::int64_t samples = 10000;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::int64_t max_index = 2'000'000;
  std::string admissible_kind = "type1";
  double local_eta = 0.1;
  double local_eps = 0.05;
};

struct ResultRow {
  double t = 0.0, r = 0.0;
  std::optional<double> mean_exact, var_exact, var_err;
  std::optional<double> upper, lower_general, lower_monotone, asymptotic;
  std::optional<double> j1, j2;
  std::optional<double> mc_mean, mc_var, mc_mean_stderr, mc_var_stderr;
  std::string flags;
};

inline const char* kCsvHeader =
    "t,r,mean_exact,var_exact,var_err,upper,lower_general,lower_monotone,asymptotic,"
    "J1,J2,mc_mean,mc_var,mc_mean_stderr,mc_var_stderr,flags";

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "null"; }

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::string to_csv_line(const ResultRow& row) {
  using detail::fmt;
  std::ostringstream os;
  os << fmt(row.t) << ',' << fmt(row.r) << ',' << fmt(row.mean_exact) << ','
     << fmt(row.var_exact) << ',' << fmt(row.var_err) << ',' << fmt(row.upper) << ','
     << fmt(row.lower_general) << ',' << fmt(row.lower_monotone) << ',' << fmt(row.asymptotic)
     << ',' << fmt(row.j1) << ',' << fmt(row.j2) << ',' << fmt(row.mc_mean) << ','
     << fmt(row.mc_var) << ',' << fmt(row.mc_mean_stderr) << ',' << fmt(row.mc_var_stderr)
     << ',' << row.flags;
  return os.str();
}

inline std::vector<ResultRow> parse_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("t,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 16) cells.push_back("");
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s == "null" || s.empty()) return std::nullopt;
      return std::strtod(s.c_str(), nullptr);
    };
    ResultRow row;
    row.t = std::strtod(cells[0].c_str(), nullptr);
    row.r = std::strtod(cells[1].c_str(), nullptr);
    row.mean_exact = opt(cells[2]);
    row.var_exact = opt(cells[3]);
    row.var_err = opt(cells[4]);
    row.upper = opt(cells[5]);
    row.lower_general = opt(cells[6]);
    row.lower_monotone = opt(cells[7]);
    row.asymptotic = opt(cells[8]);
    row.j1 = opt(cells[9]);
    row.j2 = opt(cells[10]);
    row.mc_mean = opt(cells[11]);
    row.mc_var = opt(cells[12]);
    row.mc_mean_stderr = opt(cells[13]);
    row.mc_var_stderr = opt(cells[14]);
    row.flags = cells[15];
    rows.push_back(row);
  }
  return rows;
}

/// Parses the `key = value` config format with one optional [section] per
/// command; section keys override globals when that command runs.
inline std::map<std::string, std::map<std::string, std::string>> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config: " + path);
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string cur;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string s = detail::trim(line);
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']') {
      cur = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw usage_error(path + " line " + std::to_string(lineno) + ": expected key = value");
    sections[cur][detail::trim(s.substr(0, eq))] = detail::trim(s.substr(eq + 1));
  }
  return sections;
}

namespace detail {

inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> xs;
  std::istringstream ss(s);
  double v;
  while (ss >> v) xs.push_back(v);
  return xs;
}

inline void apply_kv(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  auto num = [&](const std::string& k) { return std::strtod(kv.at(k).c_str(), nullptr); };
  for (const auto& [k, v] : kv) {
    if (k == "family") cfg.family = v;
    else if (k == "coeff_file") cfg.coeff_file = v;
    else if (k == "restricted") cfg.restricted = (v == "true" || v == "1" || v == "yes");
    else if (k == "r_grid") cfg.r_grid = parse_grid(v);
    else if (k == "t_grid") {
      cfg.r_grid.clear();
      for (double t : parse_grid(v)) cfg.r_grid.push_back(std::exp(0.5 * t));
    } else if (k == "tol") cfg.tol = num(k);
    else if (k == "tail_eps") cfg.tail_eps = num(k);
    else if (k == "c_g") cfg.c_g = num(k);
    else if (k == "epsilon") cfg.epsilon = num(k);
    else if (k == "gamma") cfg.gamma = num(k);
    else if (k == "c1") cfg.c1 = num(k);
    else if (k == "ell_min") cfg.ell_min = static_cast<std::int64_t>(num(k));
    else if (k == "ell_max") cfg.ell_max = static_cast<std::int64_t>(num(k));
    else if (k == "samples") cfg.samples = static_cast<std::int64_t>(num(k));
    else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(num(k));
    else if (k == "threads") cfg.threads = static_cast<int>(num(k));
    else if (k == "max_index") cfg.max_index = static_cast<std::int64_t>(num(k));
    else if (k == "kind") cfg.admissible_kind = v;
    else if (k == "local_eta") cfg.local_eta = num(k);
    else if (k == "local_eps") cfg.local_eps = num(k);
    else if (k == "alpha" || k == "L" || k == "n" || k == "m" || k == "a_n" || k == "a_m" ||
             k == "k")
      cfg.family_params[k] = num(k);
    else throw usage_error("unknown config key: " + k);
  }
}

}  // namespace detail

inline ExperimentConfig load_config(const std::string& path, const std::string& command) {
  auto sections = parse_config_file(path);
  ExperimentConfig cfg;
  if (auto it = sections.find(""); it != sections.end()) detail::apply_kv(cfg, it->second);
  if (auto it = sections.find(command); it != sections.end()) detail::apply_kv(cfg, it->second);
  return cfg;
}

inline CoefficientModel build_model(const ExperimentConfig& cfg) {
  CoefficientModel base = cfg.family == "file" ? load_coefficient_file(cfg.coeff_file)
                                               : make_family(cfg.family, cfg.family_params);
  if (!cfg.restricted) return base;
  IntervalPartition part = interval_partition(base, cfg.ell_max);
  RestrictOptions ro;
  ro.ell_min = cfg.ell_min;
  ro.c1 = cfg.c1;
  return restrict(base, part, ro).first;
}

inline void validate(const ExperimentConfig& cfg, const std::string& command) {
  if (cfg.r_grid.empty()) throw usage_error("empty grid: set r_grid or t_grid");
  for (std::size_t i = 0; i + 1 < cfg.r_grid.size(); ++i)
    if (!(cfg.r_grid[i] < cfg.r_grid[i + 1]))
      throw usage_error("grid must be strictly increasing");
  for (double r : cfg.r_grid)
    if (!(r > 0.0)) throw usage_error("grid radii must be positive");
  bool needs_mc = command == "var-mc" || (command == "sweep" && cfg.samples > 0);
  if (needs_mc && !cfg.seed) throw usage_error(command + ": a seed is mandatory");
  if (needs_mc && cfg.samples < 100) throw usage_error("samples must be at least 100");
}

/// Two/three-column whitespace-delimited data files for external plotting.
inline std::vector<std::string> emit_plotdata(const std::vector<ResultRow>& rows,
                                              const std::filesystem::path& dir) {
  if (rows.empty()) throw usage_error("emit_plotdata: no rows");
  std::vector<std::string> written;
  {
    std::ostringstream os;
    for (const auto& row : rows)
      if (row.var_exact && row.asymptotic && *row.asymptotic > 0.0)
        os << detail::fmt(row.t) << ' ' << detail::fmt(*row.var_exact / *row.asymptotic)
           << '\n';
    if (!os.str().empty()) {
      auto p = dir / "ratio_typeI.dat";
      std::ofstream(p) << os.str();
      written.push_back(p.string());
    }
  }
  {
    std::ostringstream os;
    for (const auto& row : rows)
      if (row.mc_var && row.upper && *row.upper > 0.0)
        os << detail::fmt(row.t) << ' ' << detail::fmt(*row.mc_var / *row.upper) << ' '
           << detail::fmt(*row.upper) << '\n';
    if (!os.str().empty()) {
      auto p = dir / "var_over_b.dat";
      std::ofstream(p) << os.str();
      written.push_back(p.string());
    }
  }
  return written;
}

inline constexpr const char* kVersion = "zfluct 0.1.0";

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;
  std::vector<ResultRow> rows;
};

/// Executes one command over the configured grid and writes CSV + manifest
/// (+ plot data / model exports where the command produces them).
inline RunResult run(const std::string& command, const ExperimentConfig& cfg,
                     const std::filesystem::path& out_dir) {
  static const std::vector<std::string> kCommands{"mean",  "var-exact",  "var-mc", "bounds",
                                                  "jsplit", "admissible", "restrict", "sweep"};
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw usage_error("unknown command: " + command);
  validate(cfg, command);
  auto t0 = std::chrono::steady_clock::now();

  std::filesystem::create_directories(out_dir);
  RunResult result;
  nlohmann::json extra;

  CoefficientModel model = build_model(cfg);
  VarianceOptions vopts;
  vopts.tail_eps = cfg.tail_eps;
  vopts.rel_tol = cfg.tol;
  vopts.c_g = cfg.c_g;
  vopts.max_index = cfg.max_index;

  if (command == "restrict") {
    CoefficientModel base = cfg.family == "file" ? load_coefficient_file(cfg.coeff_file)
                                                 : make_family(cfg.family, cfg.family_params);
    IntervalPartition part = interval_partition(base, cfg.ell_max);
    RestrictOptions ro;
    ro.ell_min = cfg.ell_min;
    ro.c1 = cfg.c1;
    auto [restricted, plan] = zfluct::restrict(base, part, ro);
    auto coeff_path = out_dir / "restricted_coeffs.txt";
    save_coefficient_file(restricted, coeff_path.string());
    result.artifacts.push_back(coeff_path.string());

    nlohmann::json pj;
    for (std::int64_t ell = part.ell_min; ell <= part.ell_max; ++ell) {
      nlohmann::json o{{"ell", ell},
                       {"t_ell", part.t_ell(ell)},
                       {"t_ell_next", part.t_ell(ell + 1)},
                       {"long", part.is_long(ell)}};
      if (auto in = part.interior(ell)) o["interior"] = {in->first, in->second};
      pj.push_back(o);
    }
    extra["partition"] = pj;
    extra["kept_indices"] = plan.kept->size();

    nlohmann::json sim = nlohmann::json::array();
    std::vector<double> ts;
    for (double r : cfg.r_grid) ts.push_back(2.0 * std::log(r));
    for (const auto& row : similarity_report(base, restricted, ts, part, cfg.tail_eps))
      sim.push_back({{"t", row.t},
                     {"A_ratio", row.a_ratio},
                     {"B_ratio", row.b_ratio},
                     {"in_interior", row.in_interior}});
    extra["similarity"] = sim;
    for (std::int64_t ell = part.ell_min; ell <= part.ell_max; ++ell) {
      ResultRow row;
      row.t = part.t_ell(ell);
      row.r = std::exp(0.5 * row.t);
      row.flags = part.is_long(ell) ? "long" : "short";
      result.rows.push_back(row);
    }
  } else if (command == "admissible") {
    nlohmann::json reports = nlohmann::json::array();
    for (double r : cfg.r_grid) {
      double t = 2.0 * std::log(r);
      ResultRow row;
      row.t = t;
      row.r = r;
      if (cfg.admissible_kind == "type1") {
        auto rep = check_type1(model, t, cfg.c_g);
        reports.push_back(rep.to_json());
        row.flags = rep.all_passed() ? "pass" : "fail";
      } else if (cfg.admissible_kind == "type2") {
        auto rep = check_type2(model, t, cfg.c_g, cfg.epsilon);
        reports.push_back(rep.to_json());
        row.flags = rep.all_passed() ? "pass" : "fail";
      } else if (cfg.admissible_kind == "local") {
        TiltedWindow w = tilted_window(model, t, cfg.tail_eps, {cfg.max_index});
        double delta = w.var > 0.0 ? 1.0 / std::sqrt(w.var) : 1.0;
        auto res = check_local(model, t, delta, cfg.local_eta, cfg.local_eps);
        reports.push_back({{"kind", "local"},
                           {"t", t},
                           {"worst_ratio", res.worst_ratio},
                           {"passed", res.passed}});
        row.flags = res.passed ? "pass" : "fail";
      } else {
        throw usage_error("admissible: kind must be type1, type2, or local");
      }
      result.rows.push_back(row);
    }
    auto rp = out_dir / "admissibility.json";
    std::ofstream(rp) << reports.dump(2) << '\n';
    result.artifacts.push_back(rp.string());
  } else {
    const bool do_mean = command == "mean" || command == "sweep";
    const bool do_var = command == "var-exact" || command == "sweep";
    const bool do_bounds = command == "bounds" || command == "sweep";
    const bool do_jsplit = command == "jsplit" || command == "sweep";
    const bool do_mc = command == "var-mc" || (command == "sweep" && cfg.samples > 0);
    for (double r : cfg.r_grid) {
      ResultRow row;
      row.t = 2.0 * std::log(r);
      row.r = r;
      if (do_mean) row.mean_exact = mean_exact(model, r, vopts);
      if (do_var) {
        QuadratureResult q = variance_exact(model, r, cfg.tol, vopts);
        row.var_exact = q.value;
        row.var_err = q.abs_error_estimate;
        if (!q.converged) row.flags += "var_not_converged;";
      }
      if (do_bounds) {
        BoundsReport b = bounds(model, r, cfg.epsilon, cfg.c_g, vopts);
        if (!do_mean) row.mean_exact = b.mean;
        row.upper = b.upper;
        row.lower_general = b.lower_general;
        row.lower_monotone = b.lower_monotone;
        row.asymptotic = b.asymptotic_type1;
      }
      if (do_jsplit) {
        TiltedWindow w = tilted_window(model, row.t, cfg.tail_eps, {cfg.max_index});
        if (w.var > 1.0) {
          JSplitResult js = j_split(model, r, cfg.c_g, cfg.tol, vopts);
          row.j1 = js.j1;
          row.j2 = js.j2;
          if (js.delta_capped) row.flags += "j1_full;";
        } else {
          row.flags += "jsplit_skipped_B_le_1;";
        }
      }
      if (do_mc) {
        MCOptions mo;
        mo.tail_eps = cfg.tail_eps;
        mo.threads = cfg.threads;
        mo.max_index = cfg.max_index;
        MCStats st = mc_stats(model, r, cfg.samples, *cfg.seed, mo);
        row.mc_mean = st.mean;
        row.mc_var = st.variance;
        row.mc_mean_stderr = st.mean_stderr;
        row.mc_var_stderr = st.var_stderr;
        if (st.failed_counts > 0)
          row.flags += "mc_failures=" + std::to_string(st.failed_counts) + ";";
      }
      result.rows.push_back(row);
    }
  }

  auto csv_path = out_dir / (command + ".csv");
  {
    std::ofstream csv(csv_path);
    csv << "#schema=1\n" << kCsvHeader << '\n';
    for (const auto& row : result.rows) csv << to_csv_line(row) << '\n';
    if (!csv) throw numeric_error("failed writing " + csv_path.string());
  }
  result.artifacts.push_back(csv_path.string());

  if (command == "sweep")
    for (auto& p : emit_plotdata(result.rows, out_dir)) result.artifacts.push_back(p);

  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json manifest{
      {"version", kVersion},
      {"command", command},
      {"elapsed_seconds", elapsed},
      {"config",
       {{"family", cfg.family},
        {"family_params", cfg.family_params},
        {"coeff_file", cfg.coeff_file},
        {"restricted", cfg.restricted},
        {"r_grid", cfg.r_grid},
        {"tol", cfg.tol},
        {"tail_eps", cfg.tail_eps},
        {"c_g", cfg.c_g},
        {"epsilon", cfg.epsilon},
        {"gamma", cfg.gamma},
        {"c1", cfg.c1},
        {"ell_min", cfg.ell_min},
        {"ell_max", cfg.ell_max},
        {"samples", cfg.samples},
        {"seed", cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json()},
        {"threads", cfg.threads},
        {"max_index", cfg.max_index},
        {"admissible_kind", cfg.admissible_kind},
        {"local_eta", cfg.local_eta},
        {"local_eps", cfg.local_eps}}},
      {"artifacts", result.artifacts}};
  if (!extra.empty()) manifest["details"] = extra;
  auto man_path = out_dir / (command + "_manifest.json");
  std::ofstream(man_path) << manifest.dump(2) << '\n';
  result.artifacts.push_back(man_path.string());
  return result;
}

}  // namespace zfluct::report
