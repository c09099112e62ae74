#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fembv {

// Shape/scale pair for the generalized Pareto density. A plain value type:
// range and support feasibility are enforced by the consumers.
struct GpdPoint {
  double xi = 0.0;     // shape, feasible range (-0.5, 0.5) open
  double sigma = 1.0;  // scale, > 0
};

// Below this |xi| the exponential branch is used; the relative branch error
// stays under ~1e-8 while 1/xi remains well away from overflow.
inline constexpr double kXiSwitch = 1e-8;
inline constexpr double kXiMax = 0.5;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log density of a positive excess. Returns -inf outside the support
// (1 + xi*y/sigma <= 0) so optimizers can treat infeasible assignments as
// infinite loss.
inline double gpd_logpdf(double y, const GpdPoint& p) {
  if (!(p.sigma > 0.0)) throw std::domain_error("gpd_logpdf: sigma must be > 0");
  if (!(y > 0.0)) throw std::domain_error("gpd_logpdf: y must be > 0");
  if (std::abs(p.xi) < kXiSwitch) return -std::log(p.sigma) - y / p.sigma;
  const double z = p.xi * y / p.sigma;
  if (1.0 + z <= 0.0) return kNegInf;
  return -std::log(p.sigma) - (1.0 / p.xi + 1.0) * std::log1p(z);
}

// Distribution function on y >= 0; clamps to 1 at and beyond the upper
// endpoint sigma/|xi| when xi < 0.
inline double gpd_cdf(double y, const GpdPoint& p) {
  if (!(p.sigma > 0.0)) throw std::domain_error("gpd_cdf: sigma must be > 0");
  if (!(y >= 0.0)) throw std::domain_error("gpd_cdf: y must be >= 0");
  if (std::abs(p.xi) < kXiSwitch) return -std::expm1(-y / p.sigma);
  const double z = p.xi * y / p.sigma;
  if (1.0 + z <= 0.0) return 1.0;
  return -std::expm1(-std::log1p(z) / p.xi);
}

// Inverse of gpd_cdf on u in [0, 1).
inline double gpd_quantile(double u, const GpdPoint& p) {
  if (!(p.sigma > 0.0)) throw std::domain_error("gpd_quantile: sigma must be > 0");
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("gpd_quantile: u must be in [0,1)");
  if (std::abs(p.xi) < kXiSwitch) return -p.sigma * std::log1p(-u);
  return p.sigma / p.xi * std::expm1(-p.xi * std::log1p(-u));
}

}  // namespace fembv
