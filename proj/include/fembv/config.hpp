#pragma once

#include <cstdint>

namespace fembv {

// Knobs of the annealed random-walk used by the parameter step. The search
// makes componentwise Gaussian proposals whose scales adapt toward ~30%
// acceptance, under a geometrically decaying temperature; infeasible
// proposals are rejected outright and the best feasible point wins.
struct AnnealerSettings {
  int n_steps = 2000;               // proposals per regime per call
  double initial_step_scale = 0.1;  // relative to max(1, |coefficient|)
  double temperature_init = 1.0;
  double temperature_decay = 0.999;
  double step_floor = 1e-8;         // per-coefficient lower bound on proposal scale
};

struct ModelConfig {
  int K = 1;                    // number of regimes
  int C = 0;                    // switch budget per location
  double lambda = 0.0;          // L1 weight
  int restarts = 50;
  int max_ao_iterations = 1000;
  double ao_tolerance = 1e-3;
  std::uint64_t seed = 0;
  bool l1_include_offsets = true;
  AnnealerSettings annealer;
};

}  // namespace fembv
