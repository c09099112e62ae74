#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fembv/data_model.hpp"
#include "fembv/regression.hpp"
#include "fembv/rng.hpp"
#include "fembv/switching.hpp"

namespace fembv {

// Probability-integral map of a GPD excess to a unit exponential residual:
// z = log(1 + xi*y/sigma)/xi (or y/sigma near xi = 0). Residuals of a
// correctly specified fit are iid Exp(1).
double residual_transform(double y, double xi, double sigma);

// Residuals of every observation under its assigned regime, pooled in
// (location, time) order.
std::vector<double> fit_residuals(const ExcessPanel& panel,
                                  const CovariatePanel& covs,
                                  const RegimeParameters& theta,
                                  const SwitchingPath& paths);

struct QqTable {
  std::vector<double> theoretical;  // -log(1 - i/(n+1)), ascending
  std::vector<double> empirical;    // residual order statistics
  std::vector<double> band_lo;
  std::vector<double> band_hi;
  std::size_t n = 0;
};

// Exponential QQ data with a parametric simulation envelope: per order
// statistic, the (1-level)/2 and (1+level)/2 quantiles over n_boot
// simulated Exp(1) samples of the same size.
QqTable qq_data(std::vector<double> residuals, int n_boot, double level, Rng& rng);

struct RegimeStdErrors {
  bool positive_definite = false;
  std::vector<double> se;       // xi offset, xi slopes..., sigma offset, sigma slopes...
  std::size_t n_points = 0;
};

struct StdErrorReport {
  std::vector<RegimeStdErrors> regimes;
};

// Asymptotic standard errors from the observed information: per regime, a
// central-difference Hessian of the regime's restricted (unpenalized) NLL
// at the fitted coefficients, inverted via Cholesky. A Hessian that is not
// positive definite sets a flag instead of failing.
StdErrorReport standard_errors(const RegimeParameters& theta,
                               const SwitchingPath& paths,
                               const ExcessPanel& panel,
                               const CovariatePanel& covs);

struct EsMatrix {
  std::vector<std::string> locations;
  std::vector<double> values;  // S x S, symmetric, unit diagonal, in [0,1]
  std::string mode = "stationary";  // "stationary" or "cluster:<k>"
  std::vector<std::string> warnings;

  double at(std::size_t i, std::size_t j) const {
    return values[i * locations.size() + j];
  }
};

// Event synchronization: normalized count of quasi-simultaneous events
// between two locations. A pair (l, m) synchronizes when event l in i
// follows event m in j within tau_lm = min(tau_max, half the smallest
// adjacent inter-event gap around either event); simultaneous events count
// one half in each direction. ES_ij = (c(i|j)+c(j|i))/sqrt(m_i m_j),
// clamped to [0,1]. Locations without events get zero rows (unit diagonal)
// plus a warning.
EsMatrix event_sync(const std::vector<std::string>& locations,
                    const std::vector<std::vector<std::int64_t>>& event_times,
                    double tau_max);

// Kolmogorov-Smirnov statistic of a sample against a continuous cdf.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

}  // namespace fembv
