#pragma once

#include <span>
#include <vector>

namespace fembv {

// Per-location regime label path r_s(t_j) in {0,...,K-1}; the one-hot
// switching process gamma_k(s,t_j) = [r_s(t_j) == k].
struct SwitchingPath {
  std::vector<std::vector<int>> labels;  // per location, length T_s

  std::size_t n_locations() const { return labels.size(); }
};

// Number of adjacent label changes of a path.
inline int switch_count(std::span<const int> labels) {
  int c = 0;
  for (std::size_t j = 1; j < labels.size(); ++j)
    if (labels[j] != labels[j - 1]) ++c;
  return c;
}

// BV seminorm of one binary component: count of adjacent flips.
inline int bv_norm(std::span<const int> gamma) {
  int c = 0;
  for (std::size_t j = 1; j < gamma.size(); ++j) {
    const int d = gamma[j] - gamma[j - 1];
    c += d < 0 ? -d : d;
  }
  return c;
}

// Indicator sequence gamma_k for one location's label path.
inline std::vector<int> gamma_component(std::span<const int> labels, int k) {
  std::vector<int> g(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) g[j] = labels[j] == k ? 1 : 0;
  return g;
}

}  // namespace fembv
