#include "fembv/regression.hpp"

#include <stdexcept>

#include "fembv/exceptions.hpp"

namespace fembv {

GpdPoint eval_params(std::span<const double> xi_coeffs,
                     std::span<const double> sigma_coeffs,
                     std::span<const double> u) {
  if (xi_coeffs.size() != u.size() + 1 || sigma_coeffs.size() != u.size() + 1)
    throw ValidationError("eval_params: coefficient/covariate dimension mismatch");
  GpdPoint out{xi_coeffs[0], sigma_coeffs[0]};
  for (std::size_t p = 0; p < u.size(); ++p) {
    out.xi += xi_coeffs[p + 1] * u[p];
    out.sigma += sigma_coeffs[p + 1] * u[p];
  }
  return out;
}

const char* constraint_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::xi_range:
      return "xi range";
    case ConstraintKind::sigma_positive:
      return "sigma positive";
    case ConstraintKind::support:
      return "support";
  }
  return "unknown";
}

namespace {

// nullopt when feasible, otherwise the violated constraint.
std::optional<ConstraintKind> check_point(double y, const GpdPoint& p) {
  if (!(p.xi > -kXiMax && p.xi < kXiMax)) return ConstraintKind::xi_range;
  if (!(p.sigma > 0.0)) return ConstraintKind::sigma_positive;
  if (1.0 + p.xi * y / p.sigma <= 0.0) return ConstraintKind::support;
  return std::nullopt;
}

}  // namespace

FeasibilityReport feasibility_check(const RegimeParameters& theta,
                                    const ExcessPanel& panel,
                                    const CovariatePanel& covs,
                                    const SwitchingPath* assignment) {
  FeasibilityReport report;
  for (std::size_t s = 0; s < panel.n_locations(); ++s) {
    for (std::size_t j = 0; j < panel.length(s); ++j) {
      const double y = panel.excesses[s][j];
      const auto u = covs.row(s, j);
      const int k_lo = assignment ? assignment->labels[s][j] : 0;
      const int k_hi = assignment ? k_lo + 1 : static_cast<int>(theta.K);
      for (int k = k_lo; k < k_hi; ++k) {
        const GpdPoint p = eval_params(theta, static_cast<std::size_t>(k), u);
        if (const auto violated = check_point(y, p)) {
          report.ok = false;
          report.first = ConstraintViolation{s, panel.times[s][j], k, *violated};
          return report;
        }
      }
    }
  }
  return report;
}

}  // namespace fembv
