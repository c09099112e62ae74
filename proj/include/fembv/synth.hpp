#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fembv/data_model.hpp"
#include "fembv/regression.hpp"
#include "fembv/switching.hpp"

namespace fembv {

enum class CovariateGenerator { uniform, sinusoid };

struct CovariateSpec {
  std::string name;
  CovariateKind kind = CovariateKind::local;
  CovariateGenerator generator = CovariateGenerator::uniform;
  double period = 365.0;  // sinusoid only
};

// Ground-truth generator scenario: S locations x T excesses each, K true
// regimes with exactly `switches_per_location` regime changes per location.
struct SynthScenario {
  std::size_t S = 5;
  std::size_t T = 400;
  int K = 2;
  RegimeParameters theta;  // truth, on the scaled covariate scale
  int switches_per_location = 6;
  std::vector<CovariateSpec> covariates;
  std::uint64_t seed = 0;
};

struct SynthData {
  ExcessPanel panel;
  CovariatePanel covariates;  // scaled
  SwitchingPath truth;
};

// Draws truth paths, covariates and excesses y = F^{-1}(u; theta_{r(t)}(U)).
// Zero excesses are redrawn; points where the true theta is infeasible are
// redrawn through their random covariates, with a hard attempt cap.
SynthData gen_panel(const SynthScenario& scenario);

// Well-separated two-regime scenario used by the recovery tests:
// S=5, T=400, one sinusoidal local covariate, sigma offsets 1 vs 8,
// 6 switches per location.
SynthScenario default_recovery_scenario(std::uint64_t seed);

// Same, plus one pure-noise uniform covariate with zero true coefficients.
SynthScenario noise_covariate_scenario(std::uint64_t seed);

}  // namespace fembv
