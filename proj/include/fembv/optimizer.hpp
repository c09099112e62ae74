#pragma once

#include <cstdint>
#include <vector>

#include "fembv/config.hpp"
#include "fembv/data_model.hpp"
#include "fembv/objective.hpp"
#include "fembv/regression.hpp"
#include "fembv/rng.hpp"
#include "fembv/switching.hpp"

namespace fembv {

struct GammaStepResult {
  std::vector<int> labels;
  double cost = 0.0;  // sum of assigned losses, accumulated left to right
};

// Exact minimizer of sum_j L[j][r(j)] over label paths with at most
// `budget` switches, by dynamic programming over (time, regime, switches
// left). Ties resolve to the lexicographically smallest optimal path
// (lower label at the first divergence), which also means fewer switches
// are preferred when labels allow. Throws InfeasiblePointError if some row
// of the loss table has no finite entry.
GammaStepResult gamma_step(const LocationLoss& loss, int budget);

// Label path of length T with exactly n_switches changes: switch points
// drawn uniformly without replacement among the T-1 boundaries, segment
// labels uniform with no two adjacent segments equal.
std::vector<int> random_path_with_switches(std::size_t T, int K, int n_switches,
                                           Rng& rng);

// Draws the switch count uniformly from {0, ..., min(C, T-1)} first.
std::vector<int> random_feasible_path(std::size_t T, int K, int C, Rng& rng);

// Stochastic parameter step: per regime, an annealed random walk over the
// 2(P+1) coefficients minimizing the regime's penalized NLL at fixed paths.
// Regimes with no assigned points keep their warm-start coefficients.
// The result is never worse than the warm start.
RegimeParameters theta_step(const ExcessPanel& panel, const CovariatePanel& covs,
                            const SwitchingPath& paths, double lambda,
                            bool l1_include_offsets,
                            const RegimeParameters& warm_start,
                            const AnnealerSettings& settings, Rng& rng);

struct FitResult {
  RegimeParameters theta;
  SwitchingPath paths;
  double nll = 0.0;
  double penalized_nll = 0.0;
  ModelConfig config;
  std::uint64_t seed = 0;
  int ao_iterations = 0;
  int restart_index_of_best = 0;
  bool converged = false;
  // Penalized objective after every half-step (assignment, then parameters)
  // of the winning restart; nonincreasing by construction.
  std::vector<double> objective_history;
};

// Restarted alternating optimization: each restart seeds its own rng stream
// from (config.seed, restart index), draws a random feasible path and a
// random feasible Theta, then alternates the exact assignment step with the
// stochastic parameter step until the penalized objective stalls. Restarts
// run in parallel; the minimum objective wins, ties broken by the lowest
// restart index, so the result is bit-identical for any thread count.
FitResult fit(const ExcessPanel& panel, const CovariatePanel& covs,
              const ModelConfig& config, int threads = 0);

}  // namespace fembv
