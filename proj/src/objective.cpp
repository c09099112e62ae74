#include "fembv/objective.hpp"

#include <cmath>

#include "fembv/exceptions.hpp"

namespace fembv {

std::vector<LocationLoss> build_loss_matrix(const ExcessPanel& panel,
                                            const CovariatePanel& covs,
                                            const RegimeParameters& theta) {
  const std::size_t P = theta.P;
  std::vector<LocationLoss> losses(panel.n_locations());
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    LocationLoss& loc = losses[s];
    loc.location = panel.locations[s];
    loc.times = panel.times[s];
    loc.T = panel.length(s);
    loc.K = theta.K;
    loc.cells.resize(loc.T * loc.K);
    for (std::size_t j = 0; j < loc.T; ++j) {
      const double y = panel.excesses[s][j];
      const double* u = P > 0 ? covs.values[s].data() + j * P : nullptr;
      for (std::size_t k = 0; k < theta.K; ++k) {
        loc.cells[j * loc.K + k] = point_loss(y, u, P, theta.xi_coeffs(k).data(),
                                              theta.sigma_coeffs(k).data());
      }
    }
  }
  return losses;
}

double weighted_nll(const ExcessPanel& panel, const CovariatePanel& covs,
                    const RegimeParameters& theta, const SwitchingPath& paths) {
  const std::size_t P = theta.P;
  double total = 0.0;
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    for (std::size_t j = 0; j < panel.length(s); ++j) {
      const int k = paths.labels[s][j];
      const double* u = P > 0 ? covs.values[s].data() + j * P : nullptr;
      const double loss = point_loss(panel.excesses[s][j], u, P,
                                     theta.xi_coeffs(k).data(),
                                     theta.sigma_coeffs(k).data());
      if (loss == kInf) return kInf;
      total += loss;
    }
  }
  return total;
}

double l1_norm(const RegimeParameters& theta, bool include_offsets) {
  double total = 0.0;
  for (std::size_t k = 0; k < theta.K; ++k) {
    const auto xc = theta.xi_coeffs(k);
    const auto sc = theta.sigma_coeffs(k);
    for (std::size_t c = include_offsets ? 0 : 1; c <= theta.P; ++c)
      total += std::abs(xc[c]) + std::abs(sc[c]);
  }
  return total;
}

double penalized_nll(const ExcessPanel& panel, const CovariatePanel& covs,
                     const RegimeParameters& theta, const SwitchingPath& paths,
                     double lambda, bool l1_include_offsets) {
  if (lambda < 0.0) throw ValidationError("penalized_nll: lambda must be >= 0");
  const double nll = weighted_nll(panel, covs, theta, paths);
  if (lambda == 0.0) return nll;
  return nll + lambda * l1_norm(theta, l1_include_offsets);
}

}  // namespace fembv
