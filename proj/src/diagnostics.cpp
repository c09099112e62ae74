#include "fembv/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "fembv/exceptions.hpp"
#include "fembv/gpd.hpp"
#include "fembv/objective.hpp"

namespace fembv {

double residual_transform(double y, double xi, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("residual_transform: sigma must be > 0");
  if (!(y > 0.0)) throw std::domain_error("residual_transform: y must be > 0");
  if (std::abs(xi) < kXiSwitch) return y / sigma;
  const double z = xi * y / sigma;
  if (1.0 + z <= 0.0) throw std::domain_error("residual_transform: support violation");
  return std::log1p(z) / xi;
}

std::vector<double> fit_residuals(const ExcessPanel& panel,
                                  const CovariatePanel& covs,
                                  const RegimeParameters& theta,
                                  const SwitchingPath& paths) {
  std::vector<double> out;
  out.reserve(panel.n_total());
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    for (std::size_t j = 0; j < panel.length(s); ++j) {
      const int k = paths.labels[s][j];
      const GpdPoint p = eval_params(theta, static_cast<std::size_t>(k), covs.row(s, j));
      out.push_back(residual_transform(panel.excesses[s][j], p.xi, p.sigma));
    }
  }
  return out;
}

QqTable qq_data(std::vector<double> residuals, int n_boot, double level, Rng& rng) {
  if (residuals.empty()) throw ValidationError("qq_data: no residuals");
  if (n_boot < 1) throw ValidationError("qq_data: n_boot must be >= 1");
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("qq_data: level must be in (0,1)");

  std::sort(residuals.begin(), residuals.end());
  const std::size_t n = residuals.size();

  QqTable table;
  table.n = n;
  table.empirical = std::move(residuals);
  table.theoretical.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = static_cast<double>(i + 1) / static_cast<double>(n + 1);
    table.theoretical[i] = -std::log1p(-q);
  }

  // Simulation envelope: per order statistic, quantiles over n_boot sorted
  // Exp(1) samples of size n.
  std::vector<std::vector<double>> order_stats(n);
  for (auto& v : order_stats) v.reserve(static_cast<std::size_t>(n_boot));
  std::vector<double> sample(n);
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < n; ++i) sample[i] = -std::log1p(-rng.uniform01());
    std::sort(sample.begin(), sample.end());
    for (std::size_t i = 0; i < n; ++i) order_stats[i].push_back(sample[i]);
  }
  table.band_lo.resize(n);
  table.band_hi.resize(n);
  const double alpha = (1.0 - level) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    table.band_lo[i] = empirical_quantile(order_stats[i], alpha);
    table.band_hi[i] = empirical_quantile(order_stats[i], 1.0 - alpha);
  }
  return table;
}

namespace {

// Cholesky in place; returns false when the matrix is not positive definite.
bool cholesky(std::vector<double>& a, std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * m + k] * a[j * m + k];
      if (i == j) {
        if (!(sum > 0.0) || !std::isfinite(sum)) return false;
        a[i * m + i] = std::sqrt(sum);
      } else {
        a[i * m + j] = sum / a[j * m + j];
      }
    }
  }
  return true;
}

// Diagonal of the inverse from the Cholesky factor L (solves L L^T x = e_i).
std::vector<double> inverse_diagonal(const std::vector<double>& L, std::size_t m) {
  std::vector<double> diag(m);
  std::vector<double> col(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(col.begin(), col.end(), 0.0);
    col[i] = 1.0;
    for (std::size_t r = 0; r < m; ++r) {  // forward: L z = e_i
      double sum = col[r];
      for (std::size_t c = 0; c < r; ++c) sum -= L[r * m + c] * col[c];
      col[r] = sum / L[r * m + r];
    }
    for (std::size_t r = m; r-- > 0;) {  // backward: L^T x = z
      double sum = col[r];
      for (std::size_t c = r + 1; c < m; ++c) sum -= L[c * m + r] * col[c];
      col[r] = sum / L[r * m + r];
    }
    diag[i] = col[i];
  }
  return diag;
}

struct RegimeData {
  std::vector<double> y;
  std::vector<double> u;
  std::size_t P = 0;
  std::size_t n = 0;
};

double restricted_nll(const RegimeData& d, const std::vector<double>& x) {
  const std::size_t P = d.P;
  double total = 0.0;
  for (std::size_t i = 0; i < d.n; ++i) {
    const double loss =
        point_loss(d.y[i], d.u.data() + i * P, P, x.data(), x.data() + P + 1);
    if (loss == kInf) return kInf;
    total += loss;
  }
  return total;
}

}  // namespace

StdErrorReport standard_errors(const RegimeParameters& theta,
                               const SwitchingPath& paths,
                               const ExcessPanel& panel,
                               const CovariatePanel& covs) {
  const std::size_t P = theta.P;
  const std::size_t m = 2 * (P + 1);

  std::vector<RegimeData> data(theta.K);
  for (auto& d : data) d.P = P;
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    for (std::size_t j = 0; j < panel.length(s); ++j) {
      auto& d = data[static_cast<std::size_t>(paths.labels[s][j])];
      d.y.push_back(panel.excesses[s][j]);
      const auto u = covs.row(s, j);
      d.u.insert(d.u.end(), u.begin(), u.end());
    }
  }
  for (auto& d : data) d.n = d.y.size();

  StdErrorReport report;
  report.regimes.resize(theta.K);
  for (std::size_t k = 0; k < theta.K; ++k) {
    RegimeStdErrors& out = report.regimes[k];
    const RegimeData& d = data[k];
    out.n_points = d.n;
    out.positive_definite = false;
    if (d.n == 0) continue;

    std::vector<double> x0(m);
    std::copy_n(theta.xi_coeffs(k).data(), P + 1, x0.data());
    std::copy_n(theta.sigma_coeffs(k).data(), P + 1, x0.data() + P + 1);
    const double f0 = restricted_nll(d, x0);
    if (f0 == kInf)
      throw NumericalError("standard_errors: fitted parameters infeasible");

    std::vector<double> base_h(m);
    for (std::size_t i = 0; i < m; ++i)
      base_h[i] = 1e-4 * std::max(1.0, std::abs(x0[i]));

    // Central-difference Hessian; steps are halved (up to 6 times) when a
    // stencil point leaves the feasible region, which is common near the
    // open constraint boundaries.
    std::vector<double> hess(m * m);
    bool stencil_failed = false;
    auto eval_shifted = [&](std::size_t i, double hi, std::size_t j, double hj) {
      std::vector<double> x = x0;
      x[i] += hi;
      if (j != i) x[j] += hj;
      else x[i] += hj;
      return restricted_nll(d, x);
    };
    for (std::size_t i = 0; i < m && !stencil_failed; ++i) {
      for (std::size_t j = i; j < m && !stencil_failed; ++j) {
        double hi = base_h[i];
        double hj = base_h[j];
        double value = kInf;
        for (int shrink = 0; shrink <= 6; ++shrink) {
          if (i == j) {
            const double fp = eval_shifted(i, hi, i, 0.0);
            const double fmv = eval_shifted(i, -hi, i, 0.0);
            if (fp < kInf && fmv < kInf) {
              value = (fp - 2.0 * f0 + fmv) / (hi * hi);
              break;
            }
          } else {
            const double fpp = eval_shifted(i, hi, j, hj);
            const double fpm = eval_shifted(i, hi, j, -hj);
            const double fmp = eval_shifted(i, -hi, j, hj);
            const double fmm = eval_shifted(i, -hi, j, -hj);
            if (fpp < kInf && fpm < kInf && fmp < kInf && fmm < kInf) {
              value = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
              break;
            }
          }
          hi *= 0.5;
          hj *= 0.5;
        }
        if (value == kInf) {
          stencil_failed = true;
          break;
        }
        hess[i * m + j] = value;
        hess[j * m + i] = value;
      }
    }
    if (stencil_failed)
      throw NumericalError(
          "standard_errors: Hessian stencil infeasible after step shrinkage "
          "(regime " + std::to_string(k) + ")");

    std::vector<double> chol = hess;
    if (!cholesky(chol, m)) continue;  // flag stays: not positive definite
    const std::vector<double> diag = inverse_diagonal(chol, m);
    bool all_positive = true;
    for (const double v : diag)
      if (!(v > 0.0) || !std::isfinite(v)) all_positive = false;
    if (!all_positive) continue;

    out.positive_definite = true;
    out.se.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.se[i] = std::sqrt(diag[i]);
  }
  return report;
}

namespace {

// Events in `a` that follow an event in `b` within the pairwise window
// tau_lm; simultaneous events contribute one half.
double directed_sync_count(const std::vector<std::int64_t>& a,
                           const std::vector<std::int64_t>& b, double tau_max) {
  double count = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    for (std::size_t m = 0; m < b.size(); ++m) {
      const double d = static_cast<double>(a[l] - b[m]);
      if (d == 0.0) {
        count += 0.5;
        continue;
      }
      if (d < 0.0) continue;
      double min_gap = kInf;
      if (l + 1 < a.size()) min_gap = std::min(min_gap, static_cast<double>(a[l + 1] - a[l]));
      if (l > 0) min_gap = std::min(min_gap, static_cast<double>(a[l] - a[l - 1]));
      if (m + 1 < b.size()) min_gap = std::min(min_gap, static_cast<double>(b[m + 1] - b[m]));
      if (m > 0) min_gap = std::min(min_gap, static_cast<double>(b[m] - b[m - 1]));
      // singleton/singleton pairs have no gaps and rely on tau_max alone
      const double tau = std::min(tau_max, 0.5 * min_gap);
      if (d <= tau) count += 1.0;
    }
  }
  return count;
}

}  // namespace

EsMatrix event_sync(const std::vector<std::string>& locations,
                    const std::vector<std::vector<std::int64_t>>& event_times,
                    double tau_max) {
  if (locations.size() != event_times.size())
    throw ValidationError("event_sync: location/series count mismatch");
  if (!(tau_max > 0.0)) throw ValidationError("event_sync: tau_max must be > 0");
  const std::size_t S = locations.size();
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t j = 1; j < event_times[s].size(); ++j) {
      if (event_times[s][j] <= event_times[s][j - 1])
        throw ValidationError("event_sync: event times not strictly increasing at '" +
                              locations[s] + "'");
    }
  }

  EsMatrix es;
  es.locations = locations;
  es.values.assign(S * S, 0.0);
  for (std::size_t i = 0; i < S; ++i) {
    es.values[i * S + i] = 1.0;
    if (event_times[i].empty())
      es.warnings.push_back("location '" + locations[i] +
                            "' has no events; row/column set to 0");
  }
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = i + 1; j < S; ++j) {
      if (event_times[i].empty() || event_times[j].empty()) continue;
      const double cij = directed_sync_count(event_times[i], event_times[j], tau_max);
      const double cji = directed_sync_count(event_times[j], event_times[i], tau_max);
      const double denom = std::sqrt(static_cast<double>(event_times[i].size()) *
                                     static_cast<double>(event_times[j].size()));
      const double value = std::clamp((cij + cji) / denom, 0.0, 1.0);
      es.values[i * S + j] = value;
      es.values[j * S + i] = value;
    }
  }
  return es;
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ValidationError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

}  // namespace fembv
