#include "fembv/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fembv/exceptions.hpp"
#include "fembv/gpd.hpp"

namespace fembv {

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw ValidationError("empirical_quantile: empty sample");
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("empirical_quantile: level must be in (0,1)");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  // 1-based interpolation index h = 1 + (n-1)*level
  const double h = 1.0 + static_cast<double>(n - 1) * level;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h)) - 1;
  const double frac = h - std::floor(h);
  if (frac == 0.0 || lo + 1 >= n) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

ExtractResult extract_excesses(const RawSeries& series, double quantile_level,
                               double epsilon) {
  if (series.values.empty())
    throw ValidationError("extract_excesses: empty series for location '" +
                          series.location_id + "'");
  if (series.values.size() != series.times.size())
    throw ValidationError("extract_excesses: times/values length mismatch");
  if (!(quantile_level > 0.0 && quantile_level < 1.0))
    throw ValidationError("extract_excesses: quantile level must be in (0,1)");
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (!std::isfinite(series.values[i]))
      throw ValidationError("extract_excesses: non-finite value at location '" +
                            series.location_id + "', time " +
                            std::to_string(series.times[i]));
    if (i > 0 && series.times[i] <= series.times[i - 1])
      throw ValidationError("extract_excesses: time indices not strictly increasing "
                            "at location '" + series.location_id + "'");
  }

  ExtractResult out;
  out.threshold = empirical_quantile(series.values, quantile_level) + epsilon;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (series.values[i] > out.threshold) {
      out.times.push_back(series.times[i]);
      out.excesses.push_back(series.values[i] - out.threshold);
    }
  }
  return out;
}

PanelBuildResult build_excess_panel(const std::vector<RawSeries>& series,
                                    double quantile_level, double epsilon) {
  if (series.empty()) throw ValidationError("build_excess_panel: no locations");
  PanelBuildResult out;
  for (const auto& s : series) {
    ExtractResult e = extract_excesses(s, quantile_level, epsilon);
    if (e.excesses.empty())
      out.warnings.push_back("location '" + s.location_id +
                             "' has no exceedances; kept empty");
    out.panel.locations.push_back(s.location_id);
    out.panel.thresholds.push_back(e.threshold);
    out.panel.times.push_back(std::move(e.times));
    out.panel.excesses.push_back(std::move(e.excesses));
  }
  return out;
}

CovariatePanel align_panels(const ExcessPanel& panel, const RawCovariates& raw,
                            const std::vector<CovariateKind>& kinds) {
  if (kinds.size() != raw.names.size())
    throw ValidationError("align_panels: covariate kind list does not match names");
  CovariatePanel covs;
  covs.names = raw.names;
  covs.kinds = kinds;
  const std::size_t P = raw.names.size();

  std::vector<std::string> missing;
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    // locate this location's covariate series
    std::size_t src = raw.locations.size();
    for (std::size_t i = 0; i < raw.locations.size(); ++i) {
      if (raw.locations[i] == panel.locations[s]) {
        src = i;
        break;
      }
    }
    if (src == raw.locations.size() && panel.length(s) > 0 && P > 0)
      throw ValidationError("align_panels: no covariate series for location '" +
                            panel.locations[s] + "'");

    std::vector<std::int64_t> times;
    std::vector<double> rows;
    times.reserve(panel.length(s));
    rows.reserve(panel.length(s) * P);
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < panel.length(s); ++j) {
      const std::int64_t t = panel.times[s][j];
      bool found = false;
      if (src < raw.locations.size()) {
        while (cursor < raw.times[src].size() && raw.times[src][cursor] < t) ++cursor;
        found = cursor < raw.times[src].size() && raw.times[src][cursor] == t;
      }
      if (!found && P > 0) {
        missing.push_back("(" + panel.locations[s] + ", " + std::to_string(t) + ")");
        continue;
      }
      times.push_back(t);
      if (P > 0) {
        const double* r = raw.values[src].data() + cursor * P;
        rows.insert(rows.end(), r, r + P);
      }
    }
    if (P == 0) times = panel.times[s];
    covs.times.push_back(std::move(times));
    covs.values.push_back(std::move(rows));
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "align_panels: missing covariate record for " << missing.size()
        << " excess point(s):";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg << " " << missing[i];
    if (missing.size() > 10) msg << " ...";
    throw ValidationError(msg.str());
  }
  return covs;
}

CovariatePanel scale_covariates(CovariatePanel covs) {
  const std::size_t P = covs.P();
  const std::size_t S = covs.values.size();
  covs.local_scaling.assign(S * P, ScalingConstants{});
  covs.global_scaling.assign(P, ScalingConstants{});

  for (std::size_t p = 0; p < P; ++p) {
    if (covs.kinds[p] == CovariateKind::global) {
      double lo = kInf, hi = -kInf;
      for (std::size_t s = 0; s < S; ++s) {
        const std::size_t T = covs.values[s].size() / P;
        for (std::size_t j = 0; j < T; ++j) {
          const double v = covs.values[s][j * P + p];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      if (!(hi > lo))
        throw ValidationError("scale_covariates: constant covariate '" +
                              covs.names[p] + "'");
      covs.global_scaling[p] = {lo, hi};
      for (std::size_t s = 0; s < S; ++s) {
        const std::size_t T = covs.values[s].size() / P;
        for (std::size_t j = 0; j < T; ++j) {
          double& v = covs.values[s][j * P + p];
          v = 2.0 * (v - lo) / (hi - lo) - 1.0;
        }
      }
    } else {
      for (std::size_t s = 0; s < S; ++s) {
        const std::size_t T = covs.values[s].size() / P;
        if (T == 0) continue;
        double lo = kInf, hi = -kInf;
        for (std::size_t j = 0; j < T; ++j) {
          const double v = covs.values[s][j * P + p];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (!(hi > lo))
          throw ValidationError("scale_covariates: constant covariate '" +
                                covs.names[p] + "' at location index " +
                                std::to_string(s));
        covs.local_scaling[s * P + p] = {lo, hi};
        for (std::size_t j = 0; j < T; ++j) {
          double& v = covs.values[s][j * P + p];
          v = (v - lo) / (hi - lo);
        }
      }
    }
  }
  covs.scaled = true;
  return covs;
}

CovariatePanel empty_covariates(const ExcessPanel& panel) {
  CovariatePanel covs;
  covs.times = panel.times;
  covs.values.assign(panel.n_locations(), {});
  covs.scaled = true;
  return covs;
}

}  // namespace fembv
