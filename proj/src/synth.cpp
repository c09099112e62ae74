#include "fembv/synth.hpp"

#include <algorithm>
#include <cmath>

#include "fembv/exceptions.hpp"
#include "fembv/gpd.hpp"
#include "fembv/optimizer.hpp"
#include "fembv/rng.hpp"

namespace fembv {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double raw_covariate_value(const CovariateSpec& spec, std::int64_t t, Rng& rng) {
  switch (spec.generator) {
    case CovariateGenerator::uniform:
      return spec.kind == CovariateKind::local ? rng.uniform01()
                                               : rng.uniform(-1.0, 1.0);
    case CovariateGenerator::sinusoid: {
      const double s = std::sin(kTwoPi * static_cast<double>(t) / spec.period);
      return spec.kind == CovariateKind::local ? 0.5 * (1.0 + s) : s;
    }
  }
  return 0.0;
}

double apply_scaling(const CovariatePanel& covs, std::size_t s, std::size_t p,
                     double raw) {
  if (covs.kinds[p] == CovariateKind::global) {
    const auto& sc = covs.global_scaling[p];
    return std::clamp(2.0 * (raw - sc.min) / (sc.max - sc.min) - 1.0, -1.0, 1.0);
  }
  const auto& sc = covs.local_scaling[s * covs.P() + p];
  return std::clamp((raw - sc.min) / (sc.max - sc.min), 0.0, 1.0);
}

}  // namespace

SynthData gen_panel(const SynthScenario& scenario) {
  const std::size_t P = scenario.covariates.size();
  if (scenario.theta.K != static_cast<std::size_t>(scenario.K) ||
      scenario.theta.P != P)
    throw ValidationError("gen_panel: theta does not match scenario dimensions");
  if (scenario.S == 0 || scenario.T == 0)
    throw ValidationError("gen_panel: empty scenario");

  SynthData out;
  out.panel.locations.resize(scenario.S);
  out.panel.thresholds.assign(scenario.S, 0.0);
  out.panel.times.resize(scenario.S);
  out.panel.excesses.resize(scenario.S);
  out.truth.labels.resize(scenario.S);

  CovariatePanel covs;
  for (const auto& spec : scenario.covariates) {
    covs.names.push_back(spec.name);
    covs.kinds.push_back(spec.kind);
  }
  covs.times.resize(scenario.S);
  covs.values.resize(scenario.S);

  bool has_random_covariate = false;
  for (const auto& spec : scenario.covariates)
    if (spec.generator == CovariateGenerator::uniform) has_random_covariate = true;

  // Pass 1: truth paths and raw covariates, one rng stream per location.
  for (std::size_t s = 0; s < scenario.S; ++s) {
    Rng rng(scenario.seed, s + 1);
    out.panel.locations[s] = "loc" + std::to_string(s);
    out.truth.labels[s] = random_path_with_switches(
        scenario.T, scenario.K, scenario.switches_per_location, rng);
    covs.times[s].resize(scenario.T);
    covs.values[s].resize(scenario.T * P);
    out.panel.times[s].resize(scenario.T);
    for (std::size_t j = 0; j < scenario.T; ++j) {
      const std::int64_t t = static_cast<std::int64_t>(j) + 1;
      covs.times[s][j] = t;
      out.panel.times[s][j] = t;
      for (std::size_t p = 0; p < P; ++p)
        covs.values[s][j * P + p] = raw_covariate_value(scenario.covariates[p], t, rng);
    }
  }
  if (P > 0) covs = scale_covariates(std::move(covs));
  else {
    covs.scaled = true;
  }

  // Pass 2: excesses by inverting the GPD cdf at the true parameters;
  // infeasible covariate rows are redrawn (random generators only) and
  // zero excesses are rejected.
  for (std::size_t s = 0; s < scenario.S; ++s) {
    Rng rng(scenario.seed, 1000003 + s);
    out.panel.excesses[s].resize(scenario.T);
    for (std::size_t j = 0; j < scenario.T; ++j) {
      const int k = out.truth.labels[s][j];
      long attempts = 0;
      for (;;) {
        if (++attempts > 1000000)
          throw NumericalError("gen_panel: true theta infeasible for generated "
                               "covariates after 1e6 draws");
        const GpdPoint p = eval_params(scenario.theta, static_cast<std::size_t>(k),
                                       covs.row(s, j));
        const bool feasible =
            p.sigma > 0.0 && p.xi > -kXiMax && p.xi < kXiMax;
        if (!feasible) {
          if (!has_random_covariate)
            throw NumericalError("gen_panel: true theta infeasible at a "
                                 "deterministic covariate row");
          for (std::size_t p2 = 0; p2 < P; ++p2) {
            const auto& spec = scenario.covariates[p2];
            if (spec.generator != CovariateGenerator::uniform) continue;
            const double raw = raw_covariate_value(spec, covs.times[s][j], rng);
            covs.values[s][j * P + p2] = apply_scaling(covs, s, p2, raw);
          }
          continue;
        }
        const double y = gpd_quantile(rng.uniform01(), p);
        if (y > 0.0) {
          out.panel.excesses[s][j] = y;
          break;
        }
      }
    }
  }
  out.covariates = std::move(covs);
  return out;
}

SynthScenario default_recovery_scenario(std::uint64_t seed) {
  SynthScenario sc;
  sc.S = 5;
  sc.T = 400;
  sc.K = 2;
  sc.switches_per_location = 6;
  sc.seed = seed;
  sc.covariates = {{"season", CovariateKind::local, CovariateGenerator::sinusoid, 365.0}};
  sc.theta = RegimeParameters::zeros(2, 1);
  sc.theta.xi_coeffs(0)[0] = 0.1;
  sc.theta.sigma_coeffs(0)[0] = 1.0;
  sc.theta.sigma_coeffs(0)[1] = 0.5;
  sc.theta.xi_coeffs(1)[0] = -0.1;
  sc.theta.sigma_coeffs(1)[0] = 8.0;
  sc.theta.sigma_coeffs(1)[1] = 1.0;
  return sc;
}

SynthScenario noise_covariate_scenario(std::uint64_t seed) {
  SynthScenario sc = default_recovery_scenario(seed);
  sc.covariates.push_back({"noise", CovariateKind::local, CovariateGenerator::uniform, 0.0});
  RegimeParameters theta = RegimeParameters::zeros(2, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    theta.xi_coeffs(k)[0] = sc.theta.xi_coeffs(k)[0];
    theta.xi_coeffs(k)[1] = sc.theta.xi_coeffs(k)[1];
    theta.sigma_coeffs(k)[0] = sc.theta.sigma_coeffs(k)[0];
    theta.sigma_coeffs(k)[1] = sc.theta.sigma_coeffs(k)[1];
  }
  sc.theta = std::move(theta);
  return sc;
}

}  // namespace fembv
