#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fembv/config.hpp"
#include "fembv/data_model.hpp"
#include "fembv/diagnostics.hpp"
#include "fembv/model_selection.hpp"
#include "fembv/optimizer.hpp"

namespace fembv {

// All CSV files: UTF-8, Unix newlines, '.' decimal separator, one header
// row. Doubles are written shortest-round-trip so rereads are exact.

std::string format_double(double v);

// raw series CSV: location,time,value
std::vector<RawSeries> read_raw_series_csv(const std::filesystem::path& path);

// excess panel CSV: location,time,excess
void write_excess_csv(const std::filesystem::path& path, const ExcessPanel& panel);
ExcessPanel read_excess_csv(const std::filesystem::path& path);

// thresholds sidecar: location,threshold,quantile_level
void write_thresholds_csv(const std::filesystem::path& path, const ExcessPanel& panel,
                          double quantile_level);

// covariates CSV: location,time,<name1>,...,<nameP>
RawCovariates read_covariates_csv(const std::filesystem::path& path);
void write_covariates_csv(const std::filesystem::path& path, const ExcessPanel& panel,
                          const CovariatePanel& covs);

// paths CSV: location,time,regime
void write_paths_csv(const std::filesystem::path& path, const ExcessPanel& panel,
                     const SwitchingPath& paths);
struct PathsTable {
  std::vector<std::string> locations;
  std::vector<std::vector<std::int64_t>> times;
  SwitchingPath paths;
};
PathsTable read_paths_csv(const std::filesystem::path& path);

// selection CSV: K,C,lambda,nll,penalized_nll,n,p,aicc,converged,seed
void write_selection_csv(const std::filesystem::path& path,
                         const std::vector<SelectionRecord>& records);

// qq CSV: theoretical,empirical,band_lo,band_hi
void write_qq_csv(const std::filesystem::path& path, const QqTable& table);

// es CSV: square matrix with location-id header row/column
void write_es_csv(const std::filesystem::path& path, const EsMatrix& es);

// stderr CSV: regime,coefficient,se_or_flag
void write_stderr_csv(const std::filesystem::path& path, const StdErrorReport& report,
                      const std::vector<std::string>& covariate_names);

// fit JSON: config echo, covariate names/kinds and per-regime coefficient maps.
void write_fit_json(const std::filesystem::path& path, const FitResult& result,
                    const std::vector<std::string>& covariate_names,
                    const std::vector<CovariateKind>& covariate_kinds);
struct LoadedFit {
  RegimeParameters theta;
  std::vector<std::string> covariate_names;
  std::vector<CovariateKind> covariate_kinds;
  ModelConfig config;
  double nll = 0.0;
  double penalized_nll = 0.0;
};
LoadedFit read_fit_json(const std::filesystem::path& path);

// Every CLI command drops a manifest next to its outputs: enough to re-run
// the command bit-identically. Written atomically (temp file + rename).
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;   // name -> path
  std::vector<std::pair<std::string, std::string>> params;   // echoed settings
  std::vector<std::string> outputs;
  double wall_time_seconds = 0.0;
};
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace fembv
