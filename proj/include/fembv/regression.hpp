#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fembv/data_model.hpp"
#include "fembv/gpd.hpp"
#include "fembv/switching.hpp"

namespace fembv {

// Theta: per regime k, affine models xi_k(u) = xi_k0 + sum_p xi_kp u_p and
// sigma_k(u) = sigma_k0 + sum_p sigma_kp u_p. Coefficient vectors are stored
// row-major with the offset first.
struct RegimeParameters {
  std::size_t K = 0;
  std::size_t P = 0;
  std::vector<double> xi;     // K x (P+1)
  std::vector<double> sigma;  // K x (P+1)

  static RegimeParameters zeros(std::size_t K, std::size_t P) {
    RegimeParameters t;
    t.K = K;
    t.P = P;
    t.xi.assign(K * (P + 1), 0.0);
    t.sigma.assign(K * (P + 1), 0.0);
    return t;
  }
  std::span<const double> xi_coeffs(std::size_t k) const {
    return {xi.data() + k * (P + 1), P + 1};
  }
  std::span<double> xi_coeffs(std::size_t k) {
    return {xi.data() + k * (P + 1), P + 1};
  }
  std::span<const double> sigma_coeffs(std::size_t k) const {
    return {sigma.data() + k * (P + 1), P + 1};
  }
  std::span<double> sigma_coeffs(std::size_t k) {
    return {sigma.data() + k * (P + 1), P + 1};
  }
};

// Affine combinations for one regime at covariate vector u. No clamping,
// no validation beyond the dimension check: the result may be infeasible.
GpdPoint eval_params(std::span<const double> xi_coeffs,
                     std::span<const double> sigma_coeffs,
                     std::span<const double> u);

inline GpdPoint eval_params(const RegimeParameters& theta, std::size_t k,
                            std::span<const double> u) {
  return eval_params(theta.xi_coeffs(k), theta.sigma_coeffs(k), u);
}

enum class ConstraintKind { xi_range, sigma_positive, support };

const char* constraint_name(ConstraintKind kind);

struct ConstraintViolation {
  std::size_t location = 0;
  std::int64_t time = 0;
  int regime = 0;
  ConstraintKind kind = ConstraintKind::xi_range;
};

struct FeasibilityReport {
  bool ok = true;
  std::optional<ConstraintViolation> first;
};

// Checks sigma_k(u) > 0, xi_k(u) in (-0.5, 0.5) and 1 + xi_k(u) y / sigma_k(u) > 0
// at every observed (s, t). With `assignment` present only each point's
// assigned regime is tested; otherwise all K regimes at all points.
FeasibilityReport feasibility_check(const RegimeParameters& theta,
                                    const ExcessPanel& panel,
                                    const CovariatePanel& covs,
                                    const SwitchingPath* assignment = nullptr);

}  // namespace fembv
