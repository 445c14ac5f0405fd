// Copyright 2026 The mlpa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "mlpa/errors.hpp"
#include "mlpa/rng.hpp"

namespace mlpa {

/// A beta-recursive tree on vertices 0..n (n edges).
struct TreeState {
  double beta = 0.0;
  int n = 0;
  std::vector<int> degrees;
  std::vector<int> parent;  // parent[0] = -1
};

/// Grows the tree from the single edge {0,1} to n edges; vertex m+1 attaches
/// to vertex i with probability (d_m(i) + beta) / (2m + beta (m+1)).
///
/// The edge endpoints are kept as a flat token array, so a token drawn
/// uniformly picks i with probability d(i)/2m. For beta >= 0 the law is the
/// mixture of a uniform vertex (weight beta (m+1)) and a uniform token
/// (weight 2m). For -1 < beta < 0 a token is kept with probability
/// (d(i) + beta) / d(i), which is at least 1 + beta since degrees are >= 1.
inline TreeState grow_tree(double beta, int n, RngStream& rng) {
  detail::require(beta > -1.0 && std::isfinite(beta), "grow_tree", "beta must exceed -1");
  detail::require(n >= 1, "grow_tree", "n must be >= 1");
  TreeState t{beta, n, std::vector<int>(static_cast<std::size_t>(n) + 1, 0),
              std::vector<int>(static_cast<std::size_t>(n) + 1, -1)};
  std::vector<int> tokens;
  tokens.reserve(2 * static_cast<std::size_t>(n));
  tokens = {0, 1};
  t.degrees[0] = t.degrees[1] = 1;
  t.parent[1] = 0;

  for (int m = 1; m < n; ++m) {
    const int vertices = m + 1;
    const double edge_ends = 2.0 * m;
    int target = -1;
    if (beta >= 0.0) {
      const double vertex_weight = beta * vertices;
      if (rng.uniform() * (vertex_weight + edge_ends) < vertex_weight) {
        target = std::min(static_cast<int>(rng.uniform() * vertices), vertices - 1);
      } else {
        target = tokens[std::min(static_cast<std::size_t>(rng.uniform() * edge_ends),
                                 tokens.size() - 1)];
      }
    } else {
      while (target < 0) {
        const int i = tokens[std::min(static_cast<std::size_t>(rng.uniform() * edge_ends),
                                      tokens.size() - 1)];
        const double d = t.degrees[i];
        if (rng.uniform() * d < d + beta) target = i;
      }
    }
    t.parent[m + 1] = target;
    ++t.degrees[target];
    t.degrees[m + 1] = 1;
    tokens.push_back(target);
    tokens.push_back(m + 1);
  }
  return t;
}

inline double degree_scale(const TreeState& t) {
  return std::pow(static_cast<double>(t.n), -1.0 / (2.0 + t.beta));
}

/// n^{-1/(2+beta)} (d(0), ..., d(r)).
inline std::vector<double> scaled_degrees(const TreeState& t, int r) {
  detail::require(r >= 0 && r <= t.n, "scaled_degrees", "need 0 <= r <= n");
  const double c = degree_scale(t);
  std::vector<double> out(static_cast<std::size_t>(r) + 1);
  for (int i = 0; i <= r; ++i) out[i] = c * t.degrees[i];
  return out;
}

/// n^{-1/(2+beta)} max_{i <= r_cap} d(i).
inline double max_scaled_degree(const TreeState& t, int r_cap) {
  detail::require(r_cap >= 0, "max_scaled_degree", "r_cap must be >= 0");
  const auto last = t.degrees.begin() + std::min(r_cap, t.n) + 1;
  return degree_scale(t) * *std::max_element(t.degrees.begin(), last);
}

/// Smallest vertex of maximal degree.
inline int argmax_degree(const TreeState& t) {
  return static_cast<int>(std::max_element(t.degrees.begin(), t.degrees.end()) -
                          t.degrees.begin());
}

inline void write_tree_csv(std::ostream& os, const TreeState& t) {
  os << "vertex,parent,degree\n";
  for (int i = 0; i <= t.n; ++i) os << i << ',' << t.parent[i] << ',' << t.degrees[i] << '\n';
}

}  // namespace mlpa
