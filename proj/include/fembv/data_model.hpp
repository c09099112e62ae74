#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fembv {

// A single pre-extraction measurement series (e.g. daily accumulated
// precipitation at one station). Time indices are integer day counts
// relative to a user-declared epoch and must be strictly increasing.
struct RawSeries {
  std::string location_id;
  std::vector<std::int64_t> times;
  std::vector<double> values;
};

// Per-location threshold excesses Y_{s,t}: the modeled quantity. Lengths
// may differ between locations and a location may legitimately be empty
// (kept so location indexing stays stable).
struct ExcessPanel {
  std::vector<std::string> locations;
  std::vector<double> thresholds;                 // per location
  std::vector<std::vector<std::int64_t>> times;   // strictly increasing per location
  std::vector<std::vector<double>> excesses;      // all entries > 0

  std::size_t n_locations() const { return locations.size(); }
  std::size_t length(std::size_t s) const { return excesses[s].size(); }
  std::size_t n_total() const {
    std::size_t n = 0;
    for (const auto& e : excesses) n += e.size();
    return n;
  }
  std::size_t max_length() const {
    std::size_t m = 0;
    for (const auto& e : excesses) m = m > e.size() ? m : e.size();
    return m;
  }
};

enum class CovariateKind { local, global };

struct ScalingConstants {
  double min = 0.0;
  double max = 1.0;
};

// Covariate vectors U_{s,t}, aligned 1:1 with an ExcessPanel. After
// scale_covariates, local covariates live in [0,1] (pooled per location)
// and global ones in [-1,1] (pooled over all locations).
struct CovariatePanel {
  std::vector<std::string> names;                 // size P
  std::vector<CovariateKind> kinds;               // size P
  std::vector<std::vector<std::int64_t>> times;   // mirrors the panel alignment
  std::vector<std::vector<double>> values;        // per location, row-major T_s x P
  std::vector<ScalingConstants> local_scaling;    // [s*P + p], valid when scaled
  std::vector<ScalingConstants> global_scaling;   // [p], valid when scaled
  bool scaled = false;

  std::size_t P() const { return names.size(); }
  std::size_t n_locations() const { return values.size(); }
  std::span<const double> row(std::size_t s, std::size_t j) const {
    return {values[s].data() + j * P(), P()};
  }
};

// Raw (pre-alignment) covariate table as read from CSV: one series of
// covariate vectors per location, on the observation grid.
struct RawCovariates {
  std::vector<std::string> names;
  std::vector<std::string> locations;
  std::vector<std::vector<std::int64_t>> times;
  std::vector<std::vector<double>> values;        // row-major T x P
};

// Type-7 empirical quantile (linear interpolation of order statistics at
// index 1+(n-1)p). Takes a copy because it sorts.
double empirical_quantile(std::vector<double> values, double level);

struct ExtractResult {
  double threshold = 0.0;
  std::vector<std::int64_t> times;
  std::vector<double> excesses;
};

// Threshold = empirical quantile(level) + epsilon; keeps observations with
// value strictly above it as (time, value - threshold). An empty excess
// list is a valid outcome, not an error.
ExtractResult extract_excesses(const RawSeries& series, double quantile_level,
                               double epsilon = 1e-5);

struct PanelBuildResult {
  ExcessPanel panel;
  std::vector<std::string> warnings;  // e.g. locations with no exceedances
};

PanelBuildResult build_excess_panel(const std::vector<RawSeries>& series,
                                    double quantile_level, double epsilon = 1e-5);

// Subsets and orders covariate rows to match the excess panel exactly.
// Every (location, excess time) must have a covariate record.
CovariatePanel align_panels(const ExcessPanel& panel, const RawCovariates& raw,
                            const std::vector<CovariateKind>& kinds);

// Affine rescale: local covariates to [0,1] per location, global ones to
// [-1,1] pooled over all locations. Constants are stored for reporting.
// Rejects constant (zero-range) covariates by name. Idempotent on already
// scaled data up to round-off.
CovariatePanel scale_covariates(CovariatePanel covs);

// P = 0 covariate panel aligned with `panel` (offset-only models).
CovariatePanel empty_covariates(const ExcessPanel& panel);

}  // namespace fembv
