#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fembv/data_model.hpp"
#include "fembv/gpd.hpp"
#include "fembv/regression.hpp"
#include "fembv/switching.hpp"

namespace fembv {

// Per-location loss table L[j][k] = -log h(y_{s,t_j}; theta_k(u_{s,t_j})),
// +inf exactly where regime k is infeasible at that point.
struct LocationLoss {
  std::string location;
  std::vector<std::int64_t> times;
  std::size_t T = 0;
  std::size_t K = 0;
  std::vector<double> cells;  // row-major T x K

  double at(std::size_t j, std::size_t k) const { return cells[j * K + k]; }
};

// Negative log density of one observation under one regime's affine model;
// +inf when the regime is infeasible there (sigma <= 0, xi outside the open
// range, or support violation). This is the hot kernel shared by the loss
// matrix, the NLL and the annealer.
inline double point_loss(double y, const double* u, std::size_t P,
                         const double* xi_coeffs, const double* sigma_coeffs) {
  double xi = xi_coeffs[0];
  double sg = sigma_coeffs[0];
  for (std::size_t p = 0; p < P; ++p) {
    xi += xi_coeffs[p + 1] * u[p];
    sg += sigma_coeffs[p + 1] * u[p];
  }
  if (!(sg > 0.0) || !(xi > -kXiMax && xi < kXiMax)) return kInf;
  if (std::abs(xi) < kXiSwitch) return std::log(sg) + y / sg;
  const double z = xi * y / sg;
  if (1.0 + z <= 0.0) return kInf;
  return std::log(sg) + (1.0 / xi + 1.0) * std::log1p(z);
}

std::vector<LocationLoss> build_loss_matrix(const ExcessPanel& panel,
                                            const CovariatePanel& covs,
                                            const RegimeParameters& theta);

// Sum over locations and excess times of the assigned regime's loss;
// +inf if any assigned pair is infeasible. Locations are accumulated in
// panel order so the value is independent of threading.
double weighted_nll(const ExcessPanel& panel, const CovariatePanel& covs,
                    const RegimeParameters& theta, const SwitchingPath& paths);

// L1 norm of all regression coefficients; offsets can be excluded.
double l1_norm(const RegimeParameters& theta, bool include_offsets = true);

// weighted_nll + lambda * l1_norm.
double penalized_nll(const ExcessPanel& panel, const CovariatePanel& covs,
                     const RegimeParameters& theta, const SwitchingPath& paths,
                     double lambda, bool l1_include_offsets = true);

}  // namespace fembv
