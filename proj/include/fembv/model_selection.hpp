#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fembv/config.hpp"
#include "fembv/data_model.hpp"
#include "fembv/optimizer.hpp"

namespace fembv {

// Second-order Akaike information criterion:
//   2*nll + 2p + 2p(p+1)/(n - p - 1).
// Requires n > p + 1.
double aicc(double nll, std::size_t p, std::size_t n);

// Effective parameter count: K regimes x 2 coefficient vectors of length
// P+1, plus the capacity of the switching process, (C+1)(K-1) per location:
// its discretization grants C+1 segments with K-1 free indicator values
// each. The budget is clamped to T_s-1; a single regime needs no switching
// parameters. Charging the granted capacity rather than the realized
// switches keeps the assignment step from buying likelihood with switches
// that AICc would never repay.
std::size_t count_parameters(const FitResult& result);
std::size_t count_parameters(std::size_t K, std::size_t P, int C,
                             const std::function<std::size_t(std::size_t)>& length,
                             std::size_t S);

struct SelectionRecord {
  int K = 0;
  int C = 0;
  double lambda = 0.0;
  double nll = 0.0;
  double penalized_nll = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  double aicc = 0.0;  // +inf when n <= p+1 or the cell failed
  bool converged = false;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct GridResult {
  std::vector<SelectionRecord> records;  // one per grid cell, in grid order
  int best_index = -1;                   // -1 if every cell failed
  std::optional<FitResult> best_fit;
};

// Fits every (K, C, lambda) combination and scores it with AICc. Cell
// failures are recorded without aborting the rest. Best cell = smallest
// AICc, ties broken by smaller K, then smaller C, then larger lambda.
GridResult grid_search(const ExcessPanel& panel, const CovariatePanel& covs,
                       const std::vector<int>& K_values,
                       const std::vector<int>& C_values,
                       const std::vector<double>& lambda_values,
                       const ModelConfig& base_config, int threads = 0);

}  // namespace fembv
