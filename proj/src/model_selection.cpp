#include "fembv/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fembv/exceptions.hpp"
#include "fembv/parallel.hpp"

namespace fembv {

double aicc(double nll, std::size_t p, std::size_t n) {
  if (n <= p + 1) throw ValidationError("aicc: sample too small for AICc (n <= p+1)");
  const double pd = static_cast<double>(p);
  const double nd = static_cast<double>(n);
  return 2.0 * nll + 2.0 * pd + 2.0 * pd * (pd + 1.0) / (nd - pd - 1.0);
}

std::size_t count_parameters(const FitResult& result) {
  return count_parameters(result.theta.K, result.theta.P, result.config.C,
                          [&](std::size_t s) { return result.paths.labels[s].size(); },
                          result.paths.labels.size());
}

std::size_t count_parameters(std::size_t K, std::size_t P, int C,
                             const std::function<std::size_t(std::size_t)>& length,
                             std::size_t S) {
  std::size_t p = K * 2 * (P + 1);
  if (K < 2) return p;
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t T = length(s);
    if (T == 0) continue;
    const std::size_t budget =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(C, 0)), T - 1);
    p += (budget + 1) * (K - 1);
  }
  return p;
}

GridResult grid_search(const ExcessPanel& panel, const CovariatePanel& covs,
                       const std::vector<int>& K_values,
                       const std::vector<int>& C_values,
                       const std::vector<double>& lambda_values,
                       const ModelConfig& base_config, int threads) {
  if (K_values.empty() || C_values.empty() || lambda_values.empty())
    throw ValidationError("grid_search: empty grid");

  struct Cell {
    ModelConfig config;
    SelectionRecord record;
    std::optional<FitResult> fit_result;
  };
  std::vector<Cell> cells;
  for (const int K : K_values) {
    for (const int C : C_values) {
      for (const double lambda : lambda_values) {
        Cell cell;
        cell.config = base_config;
        cell.config.K = K;
        cell.config.C = C;
        cell.config.lambda = lambda;
        cells.push_back(std::move(cell));
      }
    }
  }

  const std::size_t n = panel.n_total();
  threads = resolve_threads(threads);
  // Cells and restarts share one worker budget; when several cells run
  // side by side each inner fit gets a proportional share.
  const int outer = static_cast<int>(
      std::min(cells.size(), static_cast<std::size_t>(threads)));
  const int inner = std::max(1, threads / std::max(1, outer));

  parallel_for(cells.size(), outer, [&](std::size_t i) {
    Cell& cell = cells[i];
    SelectionRecord& rec = cell.record;
    rec.K = cell.config.K;
    rec.C = cell.config.C;
    rec.lambda = cell.config.lambda;
    rec.seed = cell.config.seed;
    rec.n = n;
    try {
      FitResult fr = fit(panel, covs, cell.config, inner);
      rec.nll = fr.nll;
      rec.penalized_nll = fr.penalized_nll;
      rec.p = count_parameters(fr);
      rec.converged = fr.converged;
      rec.aicc = n > rec.p + 1 ? aicc(fr.nll, rec.p, n) : kInf;
      cell.fit_result = std::move(fr);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.nll = std::numeric_limits<double>::quiet_NaN();
      rec.penalized_nll = rec.nll;
      rec.p = 0;
      rec.aicc = kInf;
      rec.error = e.what();
    }
  });

  GridResult out;
  out.records.reserve(cells.size());
  for (auto& cell : cells) out.records.push_back(cell.record);

  // Smallest AICc wins; ties prefer smaller K, then smaller C, then larger
  // lambda. Failed cells never win.
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].record.failed) continue;
    if (out.best_index < 0) {
      out.best_index = static_cast<int>(i);
      continue;
    }
    const SelectionRecord& a = cells[i].record;
    const SelectionRecord& b = out.records[static_cast<std::size_t>(out.best_index)];
    const auto key = [](const SelectionRecord& r) {
      return std::tuple(r.aicc, r.K, r.C, -r.lambda);
    };
    if (key(a) < key(b)) out.best_index = static_cast<int>(i);
  }
  if (out.best_index >= 0)
    out.best_fit = std::move(cells[static_cast<std::size_t>(out.best_index)].fit_result);
  return out;
}

}  // namespace fembv
