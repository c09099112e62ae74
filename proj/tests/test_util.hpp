#pragma once

// Test-only oracles, deliberately independent of the library's optimized
// code paths: exhaustive path enumeration, adaptive quadrature, staged
// dense grid search and plain pair counting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fembv/data_model.hpp"
#include "fembv/gpd.hpp"
#include "fembv/objective.hpp"
#include "fembv/switching.hpp"

namespace testutil {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------
// Exhaustive best path: all K^T label paths, switch budget filter, cost
// accumulated left to right, ties resolved to the lexicographically
// smallest labels.
struct BrutePath {
  std::vector<int> labels;
  double cost = kInf;
};

inline BrutePath brute_force_best_path(const fembv::LocationLoss& loss, int budget) {
  const std::size_t T = loss.T;
  const std::size_t K = loss.K;
  BrutePath best;
  std::vector<int> labels(T, 0);
  for (;;) {
    int switches = 0;
    for (std::size_t j = 1; j < T; ++j)
      if (labels[j] != labels[j - 1]) ++switches;
    if (switches <= budget) {
      double cost = 0.0;
      for (std::size_t j = 0; j < T; ++j) cost += loss.at(j, labels[j]);
      if (cost < best.cost ||
          (cost == best.cost && (best.labels.empty() || labels < best.labels))) {
        best.cost = cost;
        best.labels = labels;
      }
    }
    // odometer increment
    std::size_t pos = T;
    while (pos-- > 0) {
      if (++labels[pos] < static_cast<int>(K)) break;
      labels[pos] = 0;
      if (pos == 0) return best;
    }
    if (pos == static_cast<std::size_t>(-1)) return best;
  }
}

// ---------------------------------------------------------------------
// Adaptive Simpson quadrature.
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-10, int depth = 40) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Integral of the GPD density over its support (should be 1).
inline double gpd_density_mass(double xi, double sigma) {
  const fembv::GpdPoint p{xi, sigma};
  auto density = [&](double y) {
    const double l = fembv::gpd_logpdf(y, p);
    return l == fembv::kNegInf ? 0.0 : std::exp(l);
  };
  if (xi < 0.0) {
    const double upper = sigma / -xi;
    return adaptive_simpson(density, 1e-14, upper * (1.0 - 1e-12));
  }
  // map the infinite tail through y = sigma * t / (1 - t)
  auto transformed = [&](double t) {
    const double one_minus = 1.0 - t;
    const double y = sigma * t / one_minus;
    return density(y) * sigma / (one_minus * one_minus);
  };
  return adaptive_simpson(transformed, 1e-14, 1.0 - 1e-9);
}

// ---------------------------------------------------------------------
// Dense grid-search oracle for the stationary (K=1, P=0) GPD MLE. The
// final grid step is 1e-3; coarse-to-fine stages only restrict where the
// dense grid is evaluated and every refinement window is checked to hold
// its argmin strictly in the interior.
struct GridOracle {
  double xi = 0.0;
  double sigma = 1.0;
  double nll = kInf;
};

inline double stationary_nll(const std::vector<double>& y, double xi, double sigma) {
  if (sigma <= 0.0) return kInf;
  const double n_log_sigma = static_cast<double>(y.size()) * std::log(sigma);
  if (std::abs(xi) < 1e-12) {
    double sum = 0.0;
    for (const double v : y) sum += v;
    return n_log_sigma + sum / sigma;
  }
  double sum = 0.0;
  const double slope = xi / sigma;
  for (const double v : y) {
    const double z = 1.0 + slope * v;
    if (z <= 0.0) return kInf;
    sum += std::log(z);
  }
  return n_log_sigma + (1.0 / xi + 1.0) * sum;
}

inline GridOracle grid_scan(const std::vector<double>& y, double xi_lo, double xi_hi,
                            double sg_lo, double sg_hi, double step) {
  GridOracle best;
  const int nx = static_cast<int>(std::floor((xi_hi - xi_lo) / step + 0.5)) + 1;
  const int ns = static_cast<int>(std::floor((sg_hi - sg_lo) / step + 0.5)) + 1;
  for (int i = 0; i < nx; ++i) {
    const double xi = xi_lo + i * step;
    for (int j = 0; j < ns; ++j) {
      const double sigma = sg_lo + j * step;
      const double nll = stationary_nll(y, xi, sigma);
      if (nll < best.nll) best = {xi, sigma, nll};
    }
  }
  return best;
}

// Staged refinement of the dense 1e-3 grid over the feasible box: each
// stage scans a window around the previous argmin at a 10x finer step and
// is accepted only when its argmin is strictly interior (or pinned at a
// box edge); otherwise the window doubles and the stage repeats. Under
// that check the final answer equals a full dense scan's argmin.
inline GridOracle gpd_mle_grid_oracle(const std::vector<double>& y) {
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());

  const double xi_lo = -0.499, xi_hi = 0.499;
  const double sg_lo = std::max(1e-3, 0.2 * mean), sg_hi = 4.0 * mean;

  GridOracle best = grid_scan(y, xi_lo, xi_hi, sg_lo, sg_hi, 0.04);
  for (const double step : {0.004, 0.001}) {
    double window = 2.5 * step * 10.0;  // covers the previous stage's cell
    for (int attempt = 0;; ++attempt) {
      const double fx_lo = std::max(xi_lo, best.xi - window);
      const double fx_hi = std::min(xi_hi, best.xi + window);
      const double fs_lo = std::max(sg_lo, best.sigma - window);
      const double fs_hi = std::min(sg_hi, best.sigma + window);
      const GridOracle fine = grid_scan(y, fx_lo, fx_hi, fs_lo, fs_hi, step);
      const bool interior =
          (fine.xi > fx_lo + step * 0.5 || fx_lo == xi_lo) &&
          (fine.xi < fx_hi - step * 0.5 || fx_hi == xi_hi) &&
          (fine.sigma > fs_lo + step * 0.5 || fs_lo == sg_lo) &&
          (fine.sigma < fs_hi - step * 0.5 || fs_hi == sg_hi);
      if (interior || attempt >= 4) {
        best = fine;
        break;
      }
      best = fine;
      window *= 2.0;
    }
  }
  return best;
}

// ---------------------------------------------------------------------
// Plain double-loop event synchronization (no shared code with the
// library implementation).
inline double brute_es_pair(const std::vector<std::int64_t>& a,
                            const std::vector<std::int64_t>& b, double tau_max) {
  auto count_following = [&](const std::vector<std::int64_t>& x,
                             const std::vector<std::int64_t>& z) {
    double c = 0.0;
    for (std::size_t l = 0; l < x.size(); ++l) {
      for (std::size_t m = 0; m < z.size(); ++m) {
        const double d = static_cast<double>(x[l]) - static_cast<double>(z[m]);
        if (d == 0.0) {
          c += 0.5;
          continue;
        }
        std::vector<double> gaps;
        if (l > 0) gaps.push_back(static_cast<double>(x[l] - x[l - 1]));
        if (l + 1 < x.size()) gaps.push_back(static_cast<double>(x[l + 1] - x[l]));
        if (m > 0) gaps.push_back(static_cast<double>(z[m] - z[m - 1]));
        if (m + 1 < z.size()) gaps.push_back(static_cast<double>(z[m + 1] - z[m]));
        double tau = tau_max;
        if (!gaps.empty())
          tau = std::min(tau_max, 0.5 * *std::min_element(gaps.begin(), gaps.end()));
        if (d > 0.0 && d <= tau) c += 1.0;
      }
    }
    return c;
  };
  const double denom = std::sqrt(static_cast<double>(a.size()) *
                                 static_cast<double>(b.size()));
  return std::clamp((count_following(a, b) + count_following(b, a)) / denom, 0.0, 1.0);
}

// ---------------------------------------------------------------------
// Small builders.
inline fembv::LocationLoss make_loss(const std::vector<std::vector<double>>& rows) {
  fembv::LocationLoss loss;
  loss.location = "test";
  loss.T = rows.size();
  loss.K = rows.empty() ? 0 : rows[0].size();
  for (std::size_t j = 0; j < rows.size(); ++j) {
    loss.times.push_back(static_cast<std::int64_t>(j) + 1);
    for (const double v : rows[j]) loss.cells.push_back(v);
  }
  return loss;
}

inline fembv::ExcessPanel single_location_panel(const std::vector<double>& excesses) {
  fembv::ExcessPanel panel;
  panel.locations = {"loc0"};
  panel.thresholds = {0.0};
  panel.times.emplace_back();
  for (std::size_t j = 0; j < excesses.size(); ++j)
    panel.times[0].push_back(static_cast<std::int64_t>(j) + 1);
  panel.excesses.push_back(excesses);
  return panel;
}

// One-sample Kolmogorov-Smirnov critical value (Stephens approximation).
inline double ks_critical(double alpha, std::size_t n) {
  const double c = alpha == 0.01 ? 1.628 : (alpha == 0.05 ? 1.358 : 1.224);
  const double sq = std::sqrt(static_cast<double>(n));
  return c / (sq + 0.12 + 0.11 / sq);
}

}  // namespace testutil
