// fembv-gpd: fits K locally stationary GPD regression models plus a
// per-location, switch-budgeted regime path to threshold-excess panels,
// selects (K, C, lambda) by AICc and emits regime diagnostics.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fembv/data_model.hpp"
#include "fembv/diagnostics.hpp"
#include "fembv/exceptions.hpp"
#include "fembv/io.hpp"
#include "fembv/model_selection.hpp"
#include "fembv/optimizer.hpp"
#include "fembv/synth.hpp"
#include "fembv/version.hpp"

namespace fs = std::filesystem;
using namespace fembv;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::string version_string() {
  std::ostringstream os;
  os << "fembv-gpd " << kToolVersion << " (formats: " << kFitFormatVersion << ", "
     << kCsvFormatVersion << ")";
  return os.str();
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + out + "'");
  return dir;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<CovariateKind> resolve_kinds(const std::vector<std::string>& names,
                                         const std::string& global_list) {
  std::vector<CovariateKind> kinds(names.size(), CovariateKind::local);
  for (const auto& g : split_list(global_list)) {
    bool found = false;
    for (std::size_t p = 0; p < names.size(); ++p) {
      if (names[p] == g) {
        kinds[p] = CovariateKind::global;
        found = true;
      }
    }
    if (!found)
      throw ValidationError("--global-covariates names unknown covariate '" + g + "'");
  }
  return kinds;
}

// Shared data-loading options for commands that consume panel CSVs.
struct DataOpts {
  std::string excesses;
  std::string covariates;
  std::string global_covariates;
};

struct LoadedData {
  ExcessPanel panel;
  CovariatePanel covs;
  std::vector<CovariateKind> kinds;
};

LoadedData load_data(const DataOpts& opts) {
  LoadedData data;
  data.panel = read_excess_csv(opts.excesses);
  if (opts.covariates.empty()) {
    data.covs = empty_covariates(data.panel);
    return data;
  }
  const RawCovariates raw = read_covariates_csv(opts.covariates);
  data.kinds = resolve_kinds(raw.names, opts.global_covariates);
  data.covs = scale_covariates(align_panels(data.panel, raw, data.kinds));
  return data;
}

void add_data_options(CLI::App* cmd, DataOpts& opts, bool covariates_required) {
  cmd->add_option("--excesses", opts.excesses, "Excess panel CSV (location,time,excess)")
      ->required();
  auto* cov = cmd->add_option("--covariates", opts.covariates,
                              "Covariates CSV (location,time,<name>,...)");
  if (covariates_required) cov->required();
  cmd->add_option("--global-covariates", opts.global_covariates,
                  "Comma-separated covariate names scaled to [-1,1] over all "
                  "locations (others are local, scaled to [0,1] per location)");
}

struct FitOpts {
  ModelConfig config;
  bool l1_exclude_offsets = false;
};

void add_fit_options(CLI::App* cmd, FitOpts& opts) {
  cmd->add_option("--restarts", opts.config.restarts, "Random restarts of the AO loop")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opts.config.seed, "Base seed for all rng streams");
  cmd->add_option("--tol", opts.config.ao_tolerance, "AO convergence tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-ao", opts.config.max_ao_iterations, "Maximum AO iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--l1-exclude-offsets", opts.l1_exclude_offsets,
                "Exclude offsets from the L1 penalty");
  cmd->add_option("--anneal-steps", opts.config.annealer.n_steps,
                  "Annealing proposals per regime per parameter step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--anneal-scale", opts.config.annealer.initial_step_scale,
                  "Initial proposal scale")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--anneal-t0", opts.config.annealer.temperature_init,
                  "Initial annealing temperature")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--anneal-decay", opts.config.annealer.temperature_decay,
                  "Per-step geometric temperature decay")
      ->check(CLI::Range(1e-6, 0.9999999));
}

int clamp_budget(int C, const ExcessPanel& panel) {
  const int max_len = static_cast<int>(panel.max_length());
  if (C > max_len) {
    std::cerr << "warning: C=" << C << " exceeds the longest excess series ("
              << max_len << "); clamped\n";
    return max_len;
  }
  return C;
}

void echo_config(RunManifest& manifest, const ModelConfig& c) {
  manifest.params.emplace_back("K", std::to_string(c.K));
  manifest.params.emplace_back("C", std::to_string(c.C));
  manifest.params.emplace_back("lambda", format_double(c.lambda));
  manifest.params.emplace_back("restarts", std::to_string(c.restarts));
  manifest.params.emplace_back("max_ao_iterations", std::to_string(c.max_ao_iterations));
  manifest.params.emplace_back("ao_tolerance", format_double(c.ao_tolerance));
  manifest.params.emplace_back("seed", std::to_string(c.seed));
  manifest.params.emplace_back("l1_include_offsets",
                               c.l1_include_offsets ? "true" : "false");
  manifest.params.emplace_back("anneal_steps", std::to_string(c.annealer.n_steps));
  manifest.params.emplace_back("anneal_scale",
                               format_double(c.annealer.initial_step_scale));
  manifest.params.emplace_back("anneal_t0", format_double(c.annealer.temperature_init));
  manifest.params.emplace_back("anneal_decay",
                               format_double(c.annealer.temperature_decay));
}

int g_threads = 0;  // resolved per invocation; 0 means machine parallelism

// -------------------------------------------------------------------------
// extract

struct ExtractOpts {
  std::string input;
  std::string out;
  double quantile = 0.98;
  double epsilon = 1e-5;
};

void cmd_extract(const ExtractOpts& opts) {
  Timer timer;
  const fs::path dir = ensure_out_dir(opts.out);
  const auto series = read_raw_series_csv(opts.input);
  PanelBuildResult built = build_excess_panel(series, opts.quantile, opts.epsilon);
  for (const auto& w : built.warnings) std::cerr << "warning: " << w << '\n';

  write_excess_csv(dir / "excess.csv", built.panel);
  write_thresholds_csv(dir / "thresholds.csv", built.panel, opts.quantile);

  RunManifest manifest;
  manifest.command = "extract";
  manifest.inputs.emplace_back("raw_series", opts.input);
  manifest.params.emplace_back("quantile", format_double(opts.quantile));
  manifest.params.emplace_back("epsilon", format_double(opts.epsilon));
  manifest.outputs = {(dir / "excess.csv").string(), (dir / "thresholds.csv").string()};
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(dir / "manifest.json", manifest);
  std::cout << "extracted " << built.panel.n_total() << " excesses over "
            << built.panel.n_locations() << " locations\n";
}

// -------------------------------------------------------------------------
// fit

struct CmdFitOpts {
  DataOpts data;
  FitOpts fit;
  std::string out;
};

void cmd_fit(const CmdFitOpts& opts) {
  Timer timer;
  const fs::path dir = ensure_out_dir(opts.out);
  LoadedData data = load_data(opts.data);

  ModelConfig config = opts.fit.config;
  config.l1_include_offsets = !opts.fit.l1_exclude_offsets;
  config.C = clamp_budget(config.C, data.panel);

  const FitResult result = fit(data.panel, data.covs, config, g_threads);
  write_fit_json(dir / "fit.json", result, data.covs.names, data.covs.kinds);
  write_paths_csv(dir / "paths.csv", data.panel, result.paths);

  RunManifest manifest;
  manifest.command = "fit";
  manifest.inputs.emplace_back("excesses", opts.data.excesses);
  if (!opts.data.covariates.empty())
    manifest.inputs.emplace_back("covariates", opts.data.covariates);
  manifest.params.emplace_back("global_covariates", opts.data.global_covariates);
  echo_config(manifest, config);
  manifest.outputs = {(dir / "fit.json").string(), (dir / "paths.csv").string()};
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(dir / "manifest.json", manifest);

  std::cout << "fit: nll=" << format_double(result.nll)
            << " penalized_nll=" << format_double(result.penalized_nll)
            << " converged=" << (result.converged ? "true" : "false")
            << " ao_iterations=" << result.ao_iterations << '\n';
}

// -------------------------------------------------------------------------
// select

struct CmdSelectOpts {
  DataOpts data;
  FitOpts fit;
  std::string out;
  std::string K_grid = "1,2,3";
  std::string C_grid;
  std::string lambda_grid = "0";
};

void cmd_select(const CmdSelectOpts& opts) {
  Timer timer;
  const fs::path dir = ensure_out_dir(opts.out);
  LoadedData data = load_data(opts.data);

  std::vector<int> Ks, Cs;
  std::vector<double> lambdas;
  for (const auto& s : split_list(opts.K_grid)) Ks.push_back(std::stoi(s));
  for (const auto& s : split_list(opts.C_grid))
    Cs.push_back(clamp_budget(std::stoi(s), data.panel));
  for (const auto& s : split_list(opts.lambda_grid)) lambdas.push_back(std::stod(s));
  if (Ks.empty() || Cs.empty() || lambdas.empty())
    throw ValidationError("select: --K-grid, --C-grid and --lambda-grid must be "
                          "nonempty");

  ModelConfig base = opts.fit.config;
  base.l1_include_offsets = !opts.fit.l1_exclude_offsets;

  const GridResult grid = grid_search(data.panel, data.covs, Ks, Cs, lambdas, base,
                                      g_threads);
  write_selection_csv(dir / "selection.csv", grid.records);

  RunManifest manifest;
  manifest.command = "select";
  manifest.inputs.emplace_back("excesses", opts.data.excesses);
  if (!opts.data.covariates.empty())
    manifest.inputs.emplace_back("covariates", opts.data.covariates);
  manifest.params.emplace_back("global_covariates", opts.data.global_covariates);
  manifest.params.emplace_back("K_grid", opts.K_grid);
  manifest.params.emplace_back("C_grid", opts.C_grid);
  manifest.params.emplace_back("lambda_grid", opts.lambda_grid);
  echo_config(manifest, base);
  manifest.outputs = {(dir / "selection.csv").string()};

  if (grid.best_index < 0) {
    manifest.wall_time_seconds = timer.seconds();
    write_manifest(dir / "manifest.json", manifest);
    throw NumericalError("select: every grid cell failed");
  }

  const fs::path best_dir = dir / "best";
  ensure_out_dir(best_dir.string());
  write_fit_json(best_dir / "fit.json", *grid.best_fit, data.covs.names,
                 data.covs.kinds);
  write_paths_csv(best_dir / "paths.csv", data.panel, grid.best_fit->paths);
  manifest.outputs.push_back((best_dir / "fit.json").string());
  manifest.outputs.push_back((best_dir / "paths.csv").string());
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(dir / "manifest.json", manifest);

  const auto& best = grid.records[static_cast<std::size_t>(grid.best_index)];
  std::cout << "selected K=" << best.K << " C=" << best.C
            << " lambda=" << format_double(best.lambda)
            << " aicc=" << format_double(best.aicc) << '\n';
  for (const auto& r : grid.records)
    if (r.failed)
      std::cerr << "warning: cell K=" << r.K << " C=" << r.C
                << " lambda=" << format_double(r.lambda) << " failed: " << r.error
                << '\n';
}

// -------------------------------------------------------------------------
// diagnose

struct CmdDiagnoseOpts {
  std::string fit_json;
  DataOpts data;
  std::string paths;
  std::string out;
  int n_boot = 500;
  double level = 0.95;
  std::uint64_t seed = 0;
};

SwitchingPath align_paths_to_panel(const PathsTable& table, const ExcessPanel& panel,
                                   std::size_t K) {
  SwitchingPath paths;
  paths.labels.resize(panel.n_locations());
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    std::size_t src = table.locations.size();
    for (std::size_t i = 0; i < table.locations.size(); ++i)
      if (table.locations[i] == panel.locations[s]) src = i;
    if (src == table.locations.size()) {
      if (panel.length(s) == 0) continue;
      throw ValidationError("paths file has no rows for location '" +
                            panel.locations[s] + "'");
    }
    if (table.times[src] != panel.times[s])
      throw ValidationError("paths file times do not match the excess panel at "
                            "location '" + panel.locations[s] + "'");
    for (const int k : table.paths.labels[src])
      if (k < 0 || static_cast<std::size_t>(k) >= K)
        throw ValidationError("paths file labels a regime outside the fit's range");
    paths.labels[s] = table.paths.labels[src];
  }
  return paths;
}

void cmd_diagnose(const CmdDiagnoseOpts& opts) {
  Timer timer;
  const fs::path dir = ensure_out_dir(opts.out);
  const LoadedFit loaded = read_fit_json(opts.fit_json);

  ExcessPanel panel = read_excess_csv(opts.data.excesses);
  CovariatePanel covs;
  if (loaded.theta.P == 0) {
    covs = empty_covariates(panel);
  } else {
    if (opts.data.covariates.empty())
      throw ValidationError("diagnose: the fit uses covariates; pass --covariates");
    const RawCovariates raw = read_covariates_csv(opts.data.covariates);
    if (raw.names != loaded.covariate_names)
      throw ValidationError("diagnose: covariate names do not match the fit");
    covs = scale_covariates(align_panels(panel, raw, loaded.covariate_kinds));
  }

  const PathsTable table = read_paths_csv(opts.paths);
  const SwitchingPath paths = align_paths_to_panel(table, panel, loaded.theta.K);

  Rng rng(opts.seed);
  const std::vector<double> residuals =
      fit_residuals(panel, covs, loaded.theta, paths);
  const QqTable qq = qq_data(residuals, opts.n_boot, opts.level, rng);
  write_qq_csv(dir / "qq.csv", qq);

  const StdErrorReport report = standard_errors(loaded.theta, paths, panel, covs);
  write_stderr_csv(dir / "stderr.csv", report, loaded.covariate_names);
  for (std::size_t k = 0; k < report.regimes.size(); ++k)
    if (!report.regimes[k].positive_definite)
      std::cerr << "warning: regime " << k
                << ": observed information not positive definite ("
                << report.regimes[k].n_points << " points)\n";

  RunManifest manifest;
  manifest.command = "diagnose";
  manifest.inputs.emplace_back("fit", opts.fit_json);
  manifest.inputs.emplace_back("excesses", opts.data.excesses);
  if (!opts.data.covariates.empty())
    manifest.inputs.emplace_back("covariates", opts.data.covariates);
  manifest.inputs.emplace_back("paths", opts.paths);
  manifest.params.emplace_back("n_boot", std::to_string(opts.n_boot));
  manifest.params.emplace_back("level", format_double(opts.level));
  manifest.params.emplace_back("seed", std::to_string(opts.seed));
  manifest.outputs = {(dir / "qq.csv").string(), (dir / "stderr.csv").string()};
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(dir / "manifest.json", manifest);

  std::size_t inside = 0;
  for (std::size_t i = 0; i < qq.n; ++i)
    if (qq.empirical[i] >= qq.band_lo[i] && qq.empirical[i] <= qq.band_hi[i]) ++inside;
  std::cout << "qq: " << inside << "/" << qq.n << " points inside the "
            << format_double(opts.level) << " bands\n";
}

// -------------------------------------------------------------------------
// es

struct CmdEsOpts {
  std::string paths;
  std::string excesses;
  std::string mode = "stationary";
  double tau_max = 0.0;  // 0 means unbounded
  std::string out;
};

void cmd_es(const CmdEsOpts& opts) {
  Timer timer;
  const fs::path dir = ensure_out_dir(opts.out);

  std::vector<std::string> locations;
  std::vector<std::vector<std::int64_t>> events;
  int cluster = -1;
  if (opts.mode != "stationary") {
    if (opts.mode.rfind("cluster:", 0) != 0)
      throw ValidationError("es: --mode must be 'stationary' or 'cluster:<k>'");
    cluster = std::stoi(opts.mode.substr(8));
    if (cluster < 0) throw ValidationError("es: cluster index must be >= 0");
  }

  if (!opts.paths.empty()) {
    const PathsTable table = read_paths_csv(opts.paths);
    locations = table.locations;
    events.resize(locations.size());
    for (std::size_t s = 0; s < locations.size(); ++s) {
      for (std::size_t j = 0; j < table.times[s].size(); ++j) {
        if (cluster < 0 || table.paths.labels[s][j] == cluster)
          events[s].push_back(table.times[s][j]);
      }
    }
  } else if (!opts.excesses.empty()) {
    if (cluster >= 0)
      throw ValidationError("es: cluster mode needs --paths (regime labels)");
    const ExcessPanel panel = read_excess_csv(opts.excesses);
    locations = panel.locations;
    events = panel.times;
  } else {
    throw ValidationError("es: pass --paths or --excesses");
  }

  const double tau_max = opts.tau_max > 0.0 ? opts.tau_max : kInf;
  EsMatrix es = event_sync(locations, events, tau_max);
  es.mode = opts.mode;
  for (const auto& w : es.warnings) std::cerr << "warning: " << w << '\n';
  write_es_csv(dir / "es.csv", es);

  RunManifest manifest;
  manifest.command = "es";
  if (!opts.paths.empty()) manifest.inputs.emplace_back("paths", opts.paths);
  if (!opts.excesses.empty()) manifest.inputs.emplace_back("excesses", opts.excesses);
  manifest.params.emplace_back("mode", opts.mode);
  manifest.params.emplace_back("tau_max", format_double(tau_max));
  manifest.outputs = {(dir / "es.csv").string()};
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(dir / "manifest.json", manifest);
  std::cout << "es: wrote " << locations.size() << "x" << locations.size()
            << " matrix\n";
}

// -------------------------------------------------------------------------
// simulate

struct CmdSimulateOpts {
  std::string out;
  std::string scenario = "default";
  std::uint64_t seed = 0;
  std::size_t S = 0;  // 0 keeps the scenario default
  std::size_t T = 0;
  int switches = -1;
};

void cmd_simulate(const CmdSimulateOpts& opts) {
  Timer timer;
  const fs::path dir = ensure_out_dir(opts.out);

  SynthScenario scenario;
  if (opts.scenario == "default")
    scenario = default_recovery_scenario(opts.seed);
  else if (opts.scenario == "noise")
    scenario = noise_covariate_scenario(opts.seed);
  else
    throw ValidationError("simulate: --scenario must be 'default' or 'noise'");
  if (opts.S > 0) scenario.S = opts.S;
  if (opts.T > 0) scenario.T = opts.T;
  if (opts.switches >= 0) scenario.switches_per_location = opts.switches;

  const SynthData data = gen_panel(scenario);
  write_excess_csv(dir / "excess.csv", data.panel);
  write_covariates_csv(dir / "covariates.csv", data.panel, data.covariates);
  write_paths_csv(dir / "truth_paths.csv", data.panel, data.truth);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.params.emplace_back("scenario", opts.scenario);
  manifest.params.emplace_back("seed", std::to_string(opts.seed));
  manifest.params.emplace_back("S", std::to_string(scenario.S));
  manifest.params.emplace_back("T", std::to_string(scenario.T));
  manifest.params.emplace_back("switches", std::to_string(scenario.switches_per_location));
  manifest.outputs = {(dir / "excess.csv").string(),
                      (dir / "covariates.csv").string(),
                      (dir / "truth_paths.csv").string()};
  manifest.wall_time_seconds = timer.seconds();
  write_manifest(dir / "manifest.json", manifest);
  std::cout << "simulated " << data.panel.n_total() << " excesses over "
            << scenario.S << " locations\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime-switching GPD regression for threshold-excess panels"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.add_option("--threads", g_threads,
                 "Worker thread cap (default: machine parallelism)")
      ->envname("FEMBV_GPD_THREADS");
  app.require_subcommand(1);

  ExtractOpts extract_opts;
  auto* extract = app.add_subcommand("extract",
                                     "Extract threshold excesses from raw series");
  extract->fallthrough();
  extract->add_option("--input", extract_opts.input, "Raw series CSV (location,time,value)")
      ->required();
  extract->add_option("--out", extract_opts.out, "Output directory")->required();
  extract->add_option("--quantile", extract_opts.quantile,
                      "Quantile level of the threshold")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  extract->add_option("--epsilon", extract_opts.epsilon,
                      "Offset added to the quantile threshold");
  extract->callback([&] { cmd_extract(extract_opts); });

  CmdFitOpts fit_opts;
  auto* fitc = app.add_subcommand("fit", "Fit the switching GPD regression model");
  fitc->fallthrough();
  add_data_options(fitc, fit_opts.data, false);
  fitc->add_option("--out", fit_opts.out, "Output directory")->required();
  fitc->add_option("--K", fit_opts.fit.config.K, "Number of regimes")
      ->required()
      ->check(CLI::PositiveNumber);
  fitc->add_option("--C", fit_opts.fit.config.C, "Switch budget per location")
      ->required()
      ->check(CLI::NonNegativeNumber);
  fitc->add_option("--lambda", fit_opts.fit.config.lambda, "L1 penalty weight")
      ->check(CLI::NonNegativeNumber);
  add_fit_options(fitc, fit_opts.fit);
  fitc->callback([&] { cmd_fit(fit_opts); });

  CmdSelectOpts select_opts;
  auto* select = app.add_subcommand("select",
                                    "Grid search over (K, C, lambda) scored by AICc");
  select->fallthrough();
  add_data_options(select, select_opts.data, false);
  select->add_option("--out", select_opts.out, "Output directory")->required();
  select->add_option("--K-grid", select_opts.K_grid, "Comma-separated K values");
  select->add_option("--C-grid", select_opts.C_grid, "Comma-separated C values")
      ->required();
  select->add_option("--lambda-grid", select_opts.lambda_grid,
                     "Comma-separated lambda values");
  add_fit_options(select, select_opts.fit);
  select->callback([&] { cmd_select(select_opts); });

  CmdDiagnoseOpts diag_opts;
  auto* diagnose = app.add_subcommand("diagnose",
                                      "QQ residuals and asymptotic standard errors");
  diagnose->fallthrough();
  diagnose->add_option("--fit", diag_opts.fit_json, "fit.json from a fit run")
      ->required();
  add_data_options(diagnose, diag_opts.data, false);
  diagnose->add_option("--paths", diag_opts.paths, "paths.csv from the same run")
      ->required();
  diagnose->add_option("--out", diag_opts.out, "Output directory")->required();
  diagnose->add_option("--n-boot", diag_opts.n_boot, "Simulation envelope size")
      ->check(CLI::PositiveNumber);
  diagnose->add_option("--level", diag_opts.level, "Band level, e.g. 0.95")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  diagnose->add_option("--seed", diag_opts.seed, "Envelope simulation seed");
  diagnose->callback([&] { cmd_diagnose(diag_opts); });

  CmdEsOpts es_opts;
  auto* es = app.add_subcommand("es", "Event-synchronization matrix");
  es->fallthrough();
  es->add_option("--paths", es_opts.paths, "paths.csv (needed for cluster mode)");
  es->add_option("--excesses", es_opts.excesses, "excess.csv (stationary mode)");
  es->add_option("--mode", es_opts.mode, "'stationary' or 'cluster:<k>'");
  es->add_option("--tau-max", es_opts.tau_max,
                 "Cap on the coincidence window (default: unbounded)");
  es->add_option("--out", es_opts.out, "Output directory")->required();
  es->callback([&] { cmd_es(es_opts); });

  CmdSimulateOpts sim_opts;
  auto* simulate = app.add_subcommand("simulate",
                                      "Generate a ground-truth synthetic panel");
  simulate->fallthrough();
  simulate->add_option("--out", sim_opts.out, "Output directory")->required();
  simulate->add_option("--scenario", sim_opts.scenario, "'default' or 'noise'");
  simulate->add_option("--seed", sim_opts.seed, "Generator seed");
  simulate->add_option("--S", sim_opts.S, "Locations (0 keeps scenario default)");
  simulate->add_option("--T", sim_opts.T, "Excesses per location");
  simulate->add_option("--switches", sim_opts.switches, "Regime changes per location");
  simulate->callback([&] { cmd_simulate(sim_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
