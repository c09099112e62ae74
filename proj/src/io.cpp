#include "fembv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fembv/exceptions.hpp"
#include "fembv/version.hpp"

namespace fembv {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_error(const std::filesystem::path& path, std::size_t line,
                      const std::string& what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
    fields.back().pop_back();
  return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path,
                    std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw ValidationError(csv_error(path, line, "bad numeric field '" + s + "'"));
  return v;
}

std::int64_t parse_int(const std::string& s, const std::filesystem::path& path,
                       std::size_t line) {
  std::int64_t v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw ValidationError(csv_error(path, line, "bad integer field '" + s + "'"));
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: pin Unix newlines
  if (!out) throw ValidationError("cannot open output file '" + path.string() + "'");
  return out;
}

void expect_header(const std::string& got, const std::string& want,
                   const std::filesystem::path& path) {
  std::string trimmed = got;
  if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
  if (trimmed != want)
    throw ValidationError(csv_error(path, 1, "expected header '" + want +
                                              "', got '" + trimmed + "'"));
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<RawSeries> read_raw_series_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(csv_error(path, 1, "empty file"));
  expect_header(line, "location,time,value", path);

  std::vector<RawSeries> series;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ValidationError(csv_error(path, lineno, "expected 3 fields"));
    const std::string& loc = fields[0];
    if (series.empty() || series.back().location_id != loc) {
      bool seen = false;
      for (const auto& s : series) seen = seen || s.location_id == loc;
      if (seen)
        throw ValidationError(csv_error(path, lineno,
                                        "rows for location '" + loc +
                                            "' are not contiguous"));
      series.push_back(RawSeries{loc, {}, {}});
    }
    RawSeries& s = series.back();
    const std::int64_t t = parse_int(fields[1], path, lineno);
    if (!s.times.empty() && t <= s.times.back())
      throw ValidationError(csv_error(path, lineno,
                                      "time indices not strictly increasing"));
    s.times.push_back(t);
    s.values.push_back(parse_double(fields[2], path, lineno));
  }
  if (series.empty()) throw ValidationError(csv_error(path, 1, "no data rows"));
  return series;
}

void write_excess_csv(const std::filesystem::path& path, const ExcessPanel& panel) {
  std::ofstream out = open_output(path);
  out << "location,time,excess\n";
  for (std::size_t s = 0; s < panel.n_locations(); ++s)
    for (std::size_t j = 0; j < panel.length(s); ++j)
      out << panel.locations[s] << ',' << panel.times[s][j] << ','
          << format_double(panel.excesses[s][j]) << '\n';
}

ExcessPanel read_excess_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(csv_error(path, 1, "empty file"));
  expect_header(line, "location,time,excess", path);

  ExcessPanel panel;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ValidationError(csv_error(path, lineno, "expected 3 fields"));
    const std::string& loc = fields[0];
    if (panel.locations.empty() || panel.locations.back() != loc) {
      for (const auto& known : panel.locations)
        if (known == loc)
          throw ValidationError(csv_error(path, lineno,
                                          "rows for location '" + loc +
                                              "' are not contiguous"));
      panel.locations.push_back(loc);
      panel.thresholds.push_back(0.0);
      panel.times.emplace_back();
      panel.excesses.emplace_back();
    }
    const std::int64_t t = parse_int(fields[1], path, lineno);
    if (!panel.times.back().empty() && t <= panel.times.back().back())
      throw ValidationError(csv_error(path, lineno,
                                      "time indices not strictly increasing"));
    const double y = parse_double(fields[2], path, lineno);
    if (!(y > 0.0))
      throw ValidationError(csv_error(path, lineno, "excess must be > 0"));
    panel.times.back().push_back(t);
    panel.excesses.back().push_back(y);
  }
  if (panel.locations.empty())
    throw ValidationError(csv_error(path, 1, "no data rows"));
  return panel;
}

void write_thresholds_csv(const std::filesystem::path& path, const ExcessPanel& panel,
                          double quantile_level) {
  std::ofstream out = open_output(path);
  out << "location,threshold,quantile_level\n";
  for (std::size_t s = 0; s < panel.n_locations(); ++s)
    out << panel.locations[s] << ',' << format_double(panel.thresholds[s]) << ','
        << format_double(quantile_level) << '\n';
}

RawCovariates read_covariates_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(csv_error(path, 1, "empty file"));
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "location" || header[1] != "time")
    throw ValidationError(csv_error(path, 1,
                                    "expected header 'location,time,<name>,...'"));
  RawCovariates raw;
  raw.names.assign(header.begin() + 2, header.end());
  const std::size_t P = raw.names.size();

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != P + 2)
      throw ValidationError(csv_error(path, lineno,
                                      "expected " + std::to_string(P + 2) + " fields"));
    const std::string& loc = fields[0];
    if (raw.locations.empty() || raw.locations.back() != loc) {
      for (const auto& known : raw.locations)
        if (known == loc)
          throw ValidationError(csv_error(path, lineno,
                                          "rows for location '" + loc +
                                              "' are not contiguous"));
      raw.locations.push_back(loc);
      raw.times.emplace_back();
      raw.values.emplace_back();
    }
    const std::int64_t t = parse_int(fields[1], path, lineno);
    if (!raw.times.back().empty() && t <= raw.times.back().back())
      throw ValidationError(csv_error(path, lineno,
                                      "time indices not strictly increasing"));
    raw.times.back().push_back(t);
    for (std::size_t p = 0; p < P; ++p)
      raw.values.back().push_back(parse_double(fields[p + 2], path, lineno));
  }
  if (raw.locations.empty())
    throw ValidationError(csv_error(path, 1, "no data rows"));
  return raw;
}

void write_covariates_csv(const std::filesystem::path& path, const ExcessPanel& panel,
                          const CovariatePanel& covs) {
  std::ofstream out = open_output(path);
  out << "location,time";
  for (const auto& name : covs.names) out << ',' << name;
  out << '\n';
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    for (std::size_t j = 0; j < panel.length(s); ++j) {
      out << panel.locations[s] << ',' << panel.times[s][j];
      const auto row = covs.row(s, j);
      for (const double v : row) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

void write_paths_csv(const std::filesystem::path& path, const ExcessPanel& panel,
                     const SwitchingPath& paths) {
  std::ofstream out = open_output(path);
  out << "location,time,regime\n";
  for (std::size_t s = 0; s < panel.n_locations(); ++s)
    for (std::size_t j = 0; j < panel.length(s); ++j)
      out << panel.locations[s] << ',' << panel.times[s][j] << ','
          << paths.labels[s][j] << '\n';
}

PathsTable read_paths_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(csv_error(path, 1, "empty file"));
  expect_header(line, "location,time,regime", path);

  PathsTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ValidationError(csv_error(path, lineno, "expected 3 fields"));
    const std::string& loc = fields[0];
    if (table.locations.empty() || table.locations.back() != loc) {
      for (const auto& known : table.locations)
        if (known == loc)
          throw ValidationError(csv_error(path, lineno,
                                          "rows for location '" + loc +
                                              "' are not contiguous"));
      table.locations.push_back(loc);
      table.times.emplace_back();
      table.paths.labels.emplace_back();
    }
    const std::int64_t t = parse_int(fields[1], path, lineno);
    if (!table.times.back().empty() && t <= table.times.back().back())
      throw ValidationError(csv_error(path, lineno,
                                      "time indices not strictly increasing"));
    const std::int64_t k = parse_int(fields[2], path, lineno);
    if (k < 0)
      throw ValidationError(csv_error(path, lineno, "regime must be >= 0"));
    table.times.back().push_back(t);
    table.paths.labels.back().push_back(static_cast<int>(k));
  }
  if (table.locations.empty())
    throw ValidationError(csv_error(path, 1, "no data rows"));
  return table;
}

void write_selection_csv(const std::filesystem::path& path,
                         const std::vector<SelectionRecord>& records) {
  std::ofstream out = open_output(path);
  out << "K,C,lambda,nll,penalized_nll,n,p,aicc,converged,seed\n";
  for (const auto& r : records) {
    out << r.K << ',' << r.C << ',' << format_double(r.lambda) << ','
        << format_double(r.nll) << ',' << format_double(r.penalized_nll) << ','
        << r.n << ',' << r.p << ',' << format_double(r.aicc) << ','
        << (r.converged ? "true" : "false") << ',' << r.seed << '\n';
  }
}

void write_qq_csv(const std::filesystem::path& path, const QqTable& table) {
  std::ofstream out = open_output(path);
  out << "theoretical,empirical,band_lo,band_hi\n";
  for (std::size_t i = 0; i < table.n; ++i)
    out << format_double(table.theoretical[i]) << ','
        << format_double(table.empirical[i]) << ','
        << format_double(table.band_lo[i]) << ','
        << format_double(table.band_hi[i]) << '\n';
}

void write_es_csv(const std::filesystem::path& path, const EsMatrix& es) {
  std::ofstream out = open_output(path);
  out << "location";
  for (const auto& loc : es.locations) out << ',' << loc;
  out << '\n';
  const std::size_t S = es.locations.size();
  for (std::size_t i = 0; i < S; ++i) {
    out << es.locations[i];
    for (std::size_t j = 0; j < S; ++j) out << ',' << format_double(es.at(i, j));
    out << '\n';
  }
}

void write_stderr_csv(const std::filesystem::path& path, const StdErrorReport& report,
                      const std::vector<std::string>& covariate_names) {
  std::ofstream out = open_output(path);
  out << "regime,coefficient,se_or_flag\n";
  std::vector<std::string> coeff_names;
  coeff_names.push_back("xi_offset");
  for (const auto& n : covariate_names) coeff_names.push_back("xi_" + n);
  coeff_names.push_back("sigma_offset");
  for (const auto& n : covariate_names) coeff_names.push_back("sigma_" + n);
  for (std::size_t k = 0; k < report.regimes.size(); ++k) {
    const auto& reg = report.regimes[k];
    for (std::size_t c = 0; c < coeff_names.size(); ++c) {
      out << k << ',' << coeff_names[c] << ',';
      if (reg.positive_definite)
        out << format_double(reg.se[c]);
      else
        out << "not_positive_definite";
      out << '\n';
    }
  }
}

namespace {

ordered_json config_to_json(const ModelConfig& config) {
  ordered_json j;
  j["K"] = config.K;
  j["C"] = config.C;
  j["lambda"] = config.lambda;
  j["restarts"] = config.restarts;
  j["max_ao_iterations"] = config.max_ao_iterations;
  j["ao_tolerance"] = config.ao_tolerance;
  j["seed"] = config.seed;
  j["l1_include_offsets"] = config.l1_include_offsets;
  j["annealer"] = {{"n_steps", config.annealer.n_steps},
                   {"initial_step_scale", config.annealer.initial_step_scale},
                   {"temperature_init", config.annealer.temperature_init},
                   {"temperature_decay", config.annealer.temperature_decay},
                   {"step_floor", config.annealer.step_floor}};
  return j;
}

ModelConfig config_from_json(const ordered_json& j) {
  ModelConfig config;
  config.K = j.at("K").get<int>();
  config.C = j.at("C").get<int>();
  config.lambda = j.at("lambda").get<double>();
  config.restarts = j.at("restarts").get<int>();
  config.max_ao_iterations = j.at("max_ao_iterations").get<int>();
  config.ao_tolerance = j.at("ao_tolerance").get<double>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.l1_include_offsets = j.at("l1_include_offsets").get<bool>();
  const auto& a = j.at("annealer");
  config.annealer.n_steps = a.at("n_steps").get<int>();
  config.annealer.initial_step_scale = a.at("initial_step_scale").get<double>();
  config.annealer.temperature_init = a.at("temperature_init").get<double>();
  config.annealer.temperature_decay = a.at("temperature_decay").get<double>();
  config.annealer.step_floor = a.at("step_floor").get<double>();
  return config;
}

ordered_json coeffs_to_json(std::span<const double> coeffs,
                            const std::vector<std::string>& names) {
  ordered_json j;
  j["offset"] = coeffs[0];
  for (std::size_t p = 0; p < names.size(); ++p) j[names[p]] = coeffs[p + 1];
  return j;
}

}  // namespace

void write_fit_json(const std::filesystem::path& path, const FitResult& result,
                    const std::vector<std::string>& covariate_names,
                    const std::vector<CovariateKind>& covariate_kinds) {
  if (covariate_names.size() != result.theta.P ||
      covariate_kinds.size() != result.theta.P)
    throw ValidationError("write_fit_json: covariate name count mismatch");
  ordered_json j;
  j["format"] = kFitFormatVersion;
  j["tool_version"] = kToolVersion;
  j["config"] = config_to_json(result.config);
  j["covariates"] = covariate_names;
  ordered_json kinds = ordered_json::array();
  for (const auto kind : covariate_kinds)
    kinds.push_back(kind == CovariateKind::global ? "global" : "local");
  j["covariate_kinds"] = std::move(kinds);
  j["regimes"] = ordered_json::array();
  for (std::size_t k = 0; k < result.theta.K; ++k) {
    ordered_json regime;
    regime["xi"] = coeffs_to_json(result.theta.xi_coeffs(k), covariate_names);
    regime["sigma"] = coeffs_to_json(result.theta.sigma_coeffs(k), covariate_names);
    j["regimes"].push_back(std::move(regime));
  }
  j["nll"] = result.nll;
  j["penalized_nll"] = result.penalized_nll;
  j["ao_iterations"] = result.ao_iterations;
  j["restart_index_of_best"] = result.restart_index_of_best;
  j["converged"] = result.converged;

  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

LoadedFit read_fit_json(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("bad fit JSON '" + path.string() + "': " + e.what());
  }
  if (j.value("format", "") != std::string(kFitFormatVersion))
    throw ValidationError("unsupported fit format in '" + path.string() + "'");

  LoadedFit fit;
  fit.config = config_from_json(j.at("config"));
  fit.covariate_names = j.at("covariates").get<std::vector<std::string>>();
  for (const auto& kind : j.at("covariate_kinds")) {
    const std::string name = kind.get<std::string>();
    if (name != "local" && name != "global")
      throw ValidationError("bad covariate kind '" + name + "' in '" +
                            path.string() + "'");
    fit.covariate_kinds.push_back(name == "global" ? CovariateKind::global
                                                   : CovariateKind::local);
  }
  const auto& regimes = j.at("regimes");
  const std::size_t K = regimes.size();
  const std::size_t P = fit.covariate_names.size();
  fit.theta = RegimeParameters::zeros(K, P);
  for (std::size_t k = 0; k < K; ++k) {
    const auto read_coeffs = [&](const ordered_json& src, std::span<double> dst) {
      dst[0] = src.at("offset").get<double>();
      for (std::size_t p = 0; p < P; ++p)
        dst[p + 1] = src.at(fit.covariate_names[p]).get<double>();
    };
    read_coeffs(regimes[k].at("xi"), fit.theta.xi_coeffs(k));
    read_coeffs(regimes[k].at("sigma"), fit.theta.sigma_coeffs(k));
  }
  fit.nll = j.at("nll").get<double>();
  fit.penalized_nll = j.at("penalized_nll").get<double>();
  return fit;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  ordered_json j;
  j["command"] = manifest.command;
  j["tool_version"] = kToolVersion;
  j["format_version"] = kCsvFormatVersion;
  ordered_json inputs;
  for (const auto& [name, value] : manifest.inputs) inputs[name] = value;
  j["inputs"] = std::move(inputs);
  ordered_json params;
  for (const auto& [name, value] : manifest.params) params[name] = value;
  j["params"] = std::move(params);
  j["outputs"] = manifest.outputs;
  j["wall_time_seconds"] = manifest.wall_time_seconds;

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_output(tmp);
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fembv
