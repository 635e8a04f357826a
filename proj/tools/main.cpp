// cghd: phase estimation under coarse-grained homodyne detection.
//
// Subcommands compute binned detection statistics, Fisher-information
// ratios, optimal bin boundaries and weights, calibration curves, and run
// seeded Monte Carlo estimation campaigns. Tabular results go out as CSV
// with '#' metadata comments; configs and estimators are JSON.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cghd/io.hpp"
#include "cghd/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitSaturated = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV with '#' metadata comments: version, seed, full config echo.
std::string csv_header(std::uint64_t seed, const json& config_echo) {
  std::string out;
  out += "# cghd " + std::string(cghd::kVersion) + "\n";
  out += "# seed: " + std::to_string(seed) + "\n";
  out += "# config: " + config_echo.dump() + "\n";
  return out;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string render_table(const Table& table, const std::string& format,
                         std::uint64_t seed, const json& config_echo) {
  if (format == "json") {
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj;
      for (size_t i = 0; i < table.columns.size(); ++i)
        obj[table.columns[i]] = row[i];
      rows.push_back(obj);
    }
    json out{{"meta",
              {{"version", cghd::kVersion}, {"seed", seed}, {"config", config_echo}}},
             {"rows", rows}};
    return out.dump(2) + "\n";
  }
  std::string out = csv_header(seed, config_echo);
  for (size_t i = 0; i < table.columns.size(); ++i)
    out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

// "2..10" or "7".
std::pair<int, int> parse_m_range(const std::string& text) {
  const auto dots = text.find("..");
  int lo, hi;
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoi(text);
    } else {
      lo = std::stoi(text.substr(0, dots));
      hi = std::stoi(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse bin-number range: " + text);
  }
  if (lo < 2 || hi < lo)
    throw ConfigError("bin numbers must satisfy 2 <= M (got " + text + ")");
  return {lo, hi};
}

std::vector<cghd::Binning> parse_binnings(const std::string& text) {
  if (text == "equal") return {cghd::Binning::Equal};
  if (text == "optimal") return {cghd::Binning::Optimal};
  if (text == "both") return {cghd::Binning::Equal, cghd::Binning::Optimal};
  throw ConfigError("unknown binning: " + text + " (equal|optimal|both)");
}

const char* binning_name(cghd::Binning b) {
  return b == cghd::Binning::Equal ? "equal" : "optimal";
}

cghd::SimCampaignConfig load_campaign_config(const std::string& config_path,
                                             int M, const std::string& binning,
                                             std::uint64_t seed) {
  cghd::SimCampaignConfig config;
  if (!config_path.empty()) {
    config = cghd::campaign_config_from_json(read_text(config_path));
  } else {
    // Reference-experiment defaults: alpha = 5.7 with 3.8 dB of squeezing.
    config.cfg = {5.7, cghd::squeezing_db_to_r(3.8)};
    config.scheme = cghd::make_scheme(M, cghd::default_range(config.cfg),
                                      parse_binnings(binning).front(),
                                      cghd::OuterMode::Infinite);
  }
  config.master_seed = seed;
  config.validate();
  return config;
}

// Weight vector of a scheme at phi0 = 0; the finite-range route reproduces
// the printed weight tables.
std::vector<double> scheme_weights(int M, cghd::Binning binning) {
  const cghd::InterferometerConfig cfg{5.7, cghd::squeezing_db_to_r(3.8)};
  const auto scheme =
      cghd::make_scheme(M, cghd::default_range(cfg), binning, cghd::OuterMode::Finite);
  const auto p = cghd::bin_probabilities(cfg, 0.0, scheme);
  const auto dp = cghd::bin_prob_derivative(cfg, 0.0, scheme);
  return cghd::optimal_weight(p, dp);
}

Table weight_table(int m_lo, int m_hi, cghd::Binning binning, bool tag_binning) {
  Table table;
  table.columns = {"M"};
  if (tag_binning) table.columns.push_back("binning");
  for (int k = 1; k <= 10; ++k) table.columns.push_back("w" + std::to_string(k));
  for (int M = m_lo; M <= m_hi; ++M) {
    const auto w = scheme_weights(M, binning);
    std::vector<std::string> row{std::to_string(M)};
    if (tag_binning) row.push_back(binning_name(binning));
    for (int k = 0; k < 10; ++k)
      row.push_back(k < M ? format_double(w[k]) : "");
    table.rows.push_back(std::move(row));
  }
  return table;
}

int cmd_fisher_ratio(const std::string& m_range, const std::string& binning,
                     const std::string& output, const std::string& format,
                     std::uint64_t seed) {
  const auto [lo, hi] = parse_m_range(m_range);
  Table table;
  table.columns = {"M", "binning", "f_M"};
  for (const auto b : parse_binnings(binning)) {
    for (int M = lo; M <= hi; ++M) {
      const auto scheme = cghd::make_scheme(M, 4.0, b);
      table.rows.push_back({std::to_string(M), binning_name(b),
                            format_double(cghd::fisher_ratio(scheme))});
    }
  }
  const json echo{{"M", m_range}, {"binning", binning}};
  write_text(output, render_table(table, format, seed, echo));
  return kExitOk;
}

int cmd_optimize_bins(int M, double R, double r, double db, bool infinite,
                      const std::string& output, std::uint64_t seed) {
  double squeeze = r;
  if (db > 0.0) squeeze = cghd::squeezing_db_to_r(db);
  const double range = R > 0.0 ? R : cghd::default_range({1.0, squeeze});
  const auto mode = infinite ? cghd::OuterMode::Infinite : cghd::OuterMode::Finite;
  const auto opt = cghd::optimize_bins(M, range, mode);
  if (!opt.converged)
    std::cerr << json{{"warning", "optimizer hit the iteration limit; "
                                  "best-found scheme reported"}}.dump()
              << "\n";
  json obj = json::parse(cghd::bin_scheme_to_json(opt.scheme));
  obj["fisher_ratio"] = opt.ratio;
  obj["converged"] = opt.converged;
  obj["meta"] = {{"version", cghd::kVersion}, {"seed", seed}};
  write_text(output, obj.dump(2) + "\n");
  return kExitOk;
}

int cmd_weights(const std::string& m_range, const std::string& binning,
                const std::string& output, const std::string& format,
                std::uint64_t seed) {
  const auto [lo, hi] = parse_m_range(m_range);
  Table table;
  bool first = true;
  for (const auto b : parse_binnings(binning)) {
    auto part = weight_table(lo, hi, b, true);
    if (first) {
      table = std::move(part);
      first = false;
    } else {
      for (auto& row : part.rows) table.rows.push_back(std::move(row));
    }
  }
  const json echo{{"M", m_range}, {"binning", binning}};
  write_text(output, render_table(table, format, seed, echo));
  return kExitOk;
}

int cmd_tables(const std::string& out_dir, std::uint64_t seed) {
  std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  const json echo{{"M", "2..10"}, {"phi0_deg", 0.0}};
  write_text((dir / "table1_equal.csv").string(),
             render_table(weight_table(2, 10, cghd::Binning::Equal, false), "csv",
                          seed, echo));
  write_text((dir / "table2_optimal.csv").string(),
             render_table(weight_table(2, 10, cghd::Binning::Optimal, false), "csv",
                          seed, echo));
  std::cout << "wrote " << (dir / "table1_equal.csv").string() << " and "
            << (dir / "table2_optimal.csv").string() << "\n";
  return kExitOk;
}

int cmd_calibrate(const std::string& config_path, const std::string& output,
                  std::uint64_t seed) {
  if (config_path.empty()) throw ConfigError("calibrate requires --config");
  const auto config = load_campaign_config(config_path, 2, "equal", seed);
  const auto pipeline = cghd::calibrate_pipeline(config);
  json obj = json::parse(cghd::estimator_to_json(pipeline.estimator));
  obj["fit"] = {{"alpha_hat", pipeline.fit.alpha_hat},
                {"r_hat", pipeline.fit.r_hat},
                {"residual", pipeline.fit.residual}};
  obj["meta"] = {{"version", cghd::kVersion},
                 {"seed", seed},
                 {"config", json::parse(cghd::campaign_config_to_json(config, -1))}};
  write_text(output, obj.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& m_range,
                 const std::string& binning, const std::string& output,
                 std::uint64_t seed) {
  const auto [lo, hi] = parse_m_range(m_range);
  auto base = load_campaign_config(config_path, lo, "equal", seed);

  Table table;
  table.columns = {"M", "binning",
                   "dphi_quantum", "dphi_quantum_err",
                   "dphi_classical", "dphi_classical_err",
                   "crb_quantum", "dphi_ideal_quantum", "dphi_ideal_classical"};
  bool saturation_dominated = false;
  for (const auto b : parse_binnings(binning)) {
    for (int M = lo; M <= hi; ++M) {
      const int tag = (b == cghd::Binning::Equal ? 0 : 1);

      auto quantum = base;
      quantum.scheme = cghd::make_scheme(M, cghd::default_range(base.cfg), b,
                                         base.scheme.outer_mode);
      quantum.master_seed =
          cghd::derive_seed(seed, cghd::Stage::Campaign, M, 2 * tag);
      const auto q = cghd::run_campaign(quantum);

      // Classical control: same pipeline without squeezing, range 4 sigma(0).
      auto classical = base;
      classical.cfg = {base.cfg.alpha, 0.0};
      classical.scheme = cghd::make_scheme(M, cghd::default_range(classical.cfg),
                                           b, base.scheme.outer_mode);
      classical.master_seed =
          cghd::derive_seed(seed, cghd::Stage::Campaign, M, 2 * tag + 1);
      const auto c = cghd::run_campaign(classical);

      saturation_dominated |= q.saturated_repeats > quantum.repeats / 2 ||
                              c.saturated_repeats > classical.repeats / 2;

      const double ideal_q =
          1.0 / std::sqrt(base.nu * cghd::ideal_fisher(base.cfg));
      const double ideal_c = cghd::classical_ideal_dphi(
          base.cfg.alpha, base.nu, base.phi_true);
      table.rows.push_back({std::to_string(M), binning_name(b),
                            format_double(q.dphi_std),
                            format_double(q.dphi_bootstrap_err),
                            format_double(c.dphi_std),
                            format_double(c.dphi_bootstrap_err),
                            format_double(q.crb_predicted),
                            format_double(ideal_q), format_double(ideal_c)});
    }
  }
  const json echo = json::parse(cghd::campaign_config_to_json(base, -1));
  write_text(output, render_table(table, "csv", seed, echo));
  return saturation_dominated ? kExitSaturated : kExitOk;
}

int cmd_phase_scan(const std::string& config_path, const std::string& grid_spec,
                   const std::string& output, std::uint64_t seed) {
  auto config = load_campaign_config(config_path, 2, "equal", seed);

  double lo_deg = 0.0, hi_deg = 15.0;
  int count = 31;
  if (!grid_spec.empty()) {
    if (std::sscanf(grid_spec.c_str(), "%lf:%lf:%d", &lo_deg, &hi_deg, &count) != 3 ||
        count < 1 || !(hi_deg >= lo_deg))
      throw ConfigError("bad --grid, expected lo_deg:hi_deg:count");
  }
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = cghd::deg_to_rad(
        count == 1 ? lo_deg : lo_deg + (hi_deg - lo_deg) * i / (count - 1));

  const auto reports = cghd::phase_range_scan(config, grid);

  Table table;
  table.columns = {"phi_deg", "dphi_rad", "dphi_err_rad", "crb_rad", "flags"};
  int dominated = 0;
  for (const auto& report : reports) {
    std::string flags;
    if (report.saturated_repeats > 0)
      flags += "sat=" + std::to_string(report.saturated_repeats);
    if (!report.excluded_bins.empty())
      flags += std::string(flags.empty() ? "" : ";") + "excl=" +
               std::to_string(report.excluded_bins.size());
    if (report.degenerate_statistics)
      flags += std::string(flags.empty() ? "" : ";") + "degenerate";
    if (report.saturated_repeats > config.repeats / 2) ++dominated;
    table.rows.push_back({format_double(cghd::rad_to_deg(report.phi_true)),
                          format_double(report.dphi_std),
                          format_double(report.dphi_bootstrap_err),
                          format_double(report.crb_predicted), flags});
  }
  const json echo = json::parse(cghd::campaign_config_to_json(config, -1));
  write_text(output, render_table(table, "csv", seed, echo));
  return dominated == count ? kExitSaturated : kExitOk;
}

int cmd_scaling_sweep(int M, const std::string& binning, int nu, double n_min,
                      double n_max, int points, bool linear,
                      const std::string& output, const std::string& format,
                      std::uint64_t seed) {
  if (M < 2) throw ConfigError("scaling-sweep: M must be >= 2");
  if (!(n_min > 0.0) || !(n_max >= n_min) || points < 1)
    throw ConfigError("scaling-sweep: bad photon-number grid");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    grid[i] = linear ? n_min + (n_max - n_min) * t
                     : n_min * std::pow(n_max / n_min, t);
  }
  const auto b = parse_binnings(binning).front();
  const auto rows = cghd::scaling_sweep(grid, M, b, nu);
  Table table;
  table.columns = {"n_tot", "dphi_ideal", "dphi_M", "hl", "sql"};
  for (const auto& row : rows)
    table.rows.push_back({format_double(row.n_tot), format_double(row.dphi_ideal),
                          format_double(row.dphi_M), format_double(row.hl),
                          format_double(row.sql)});
  const json echo{{"M", M}, {"binning", binning}, {"nu", nu},
                  {"n_min", n_min}, {"n_max", n_max}, {"points", points},
                  {"spacing", linear ? "linear" : "log"}};
  write_text(output, render_table(table, format, seed, echo));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase estimation under coarse-grained homodyne detection"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may appear after the subcommand
  app.set_version_flag("--version", cghd::kVersion);

  std::uint64_t seed = cghd::kDefaultMasterSeed;
  std::string output;
  std::string format = "csv";
  std::string config_path;
  app.add_option("--seed", seed, "master seed for all randomness")
      ->capture_default_str();
  app.add_option("-o,--output", output, "output path (default: stdout)");
  app.add_option("--format", format, "table output format (csv|json)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", config_path, "campaign config JSON path");

  std::string m_range = "2..10";
  std::string binning = "both";

  auto* fisher = app.add_subcommand("fisher-ratio",
                                    "Fisher-information ratio f_M for M bins");
  fisher->add_option("--M", m_range, "bin number or range, e.g. 7 or 2..10");
  fisher->add_option("--binning", binning, "equal|optimal|both");

  int opt_m = 2;
  double opt_R = 0.0, opt_r = 0.0, opt_db = 0.0;
  bool opt_infinite = false;
  auto* optimize = app.add_subcommand("optimize-bins",
                                      "maximize f_M over interior boundaries");
  optimize->add_option("--M", opt_m, "bin number")->required();
  optimize->add_option("--R", opt_R, "detection range (default 4 e^{-r})");
  optimize->add_option("--r", opt_r, "squeezing parameter for the default range");
  optimize->add_option("--squeezing-db", opt_db, "squeezing in dB (overrides --r)");
  optimize->add_flag("--infinite", opt_infinite, "treat outer boundaries as infinite");

  std::string w_range = "2..10", w_binning = "both";
  auto* weights = app.add_subcommand("weights", "optimal weight vectors at phi0 = 0");
  weights->add_option("--M", w_range, "bin number or range");
  weights->add_option("--binning", w_binning, "equal|optimal|both");

  std::string out_dir;
  auto* tables = app.add_subcommand("tables",
                                    "regenerate the weight tables for M = 2..10");
  tables->add_option("--out-dir", out_dir, "directory for the two CSV files");

  auto* calibrate = app.add_subcommand("calibrate",
                                       "simulated calibration: scan, fit, weights, g");

  std::string sim_range = "2..7", sim_binning = "both";
  auto* simulate = app.add_subcommand("simulate",
                                      "estimation-error campaign vs bin number");
  simulate->add_option("--M", sim_range, "bin number or range");
  simulate->add_option("--binning", sim_binning, "equal|optimal|both");

  std::string grid_spec;
  auto* scan = app.add_subcommand("phase-scan",
                                  "estimation error vs phase, calibrated at phi0");
  scan->add_option("--grid", grid_spec, "phase grid lo_deg:hi_deg:count");

  int sw_m = 2, sw_nu = 1, sw_points = 25;
  double sw_min = 10.0, sw_max = 1e4;
  bool sw_linear = false;
  std::string sw_binning = "equal";
  auto* sweep = app.add_subcommand("scaling-sweep",
                                   "error vs total photon number (Heisenberg scaling)");
  sweep->add_option("--M", sw_m, "bin number");
  sweep->add_option("--binning", sw_binning, "equal|optimal");
  sweep->add_option("--nu", sw_nu, "repetitions per estimate");
  sweep->add_option("--n-min", sw_min, "smallest total photon number");
  sweep->add_option("--n-max", sw_max, "largest total photon number");
  sweep->add_option("--points", sw_points, "grid size");
  sweep->add_flag("--linear", sw_linear, "linear instead of log spacing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << json{{"error", e.what()}, {"code", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  }

  try {
    if (fisher->parsed())
      return cmd_fisher_ratio(m_range, binning, output, format, seed);
    if (optimize->parsed())
      return cmd_optimize_bins(opt_m, opt_R, opt_r, opt_db, opt_infinite, output, seed);
    if (weights->parsed())
      return cmd_weights(w_range, w_binning, output, format, seed);
    if (tables->parsed()) return cmd_tables(out_dir, seed);
    if (calibrate->parsed()) return cmd_calibrate(config_path, output, seed);
    if (simulate->parsed())
      return cmd_simulate(config_path, sim_range, sim_binning, output, seed);
    if (scan->parsed()) return cmd_phase_scan(config_path, grid_spec, output, seed);
    if (sweep->parsed())
      return cmd_scaling_sweep(sw_m, sw_binning, sw_nu, sw_min, sw_max, sw_points,
                               sw_linear, output, format, seed);
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitConfig}}.dump() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"code", kExitNumerical}}.dump() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
