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

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mlpa/errors.hpp"
#include "mlpa/rng.hpp"
#include "mlpa/samplers.hpp"
#include "mlpa/special_fn.hpp"

namespace mlpa {

/// A partition of [n]. Items are stored 0-based; blocks() reports them
/// 1-based.
struct PartitionState {
  int n = 0;
  std::vector<int> labels;  // block of each item
  std::vector<int> sizes;   // size of each block

  int K() const { return static_cast<int>(sizes.size()); }

  std::vector<std::vector<int>> blocks() const {
    std::vector<std::vector<int>> out(sizes.size());
    for (std::size_t b = 0; b < sizes.size(); ++b) out[b].reserve(sizes[b]);
    for (int i = 0; i < n; ++i) out[labels[i]].push_back(i + 1);
    return out;
  }
};

namespace detail {

// Seat customer `m` (0-based) at an existing table chosen with probability
// proportional to size - alpha: pick a seated customer uniformly and keep
// their table with probability (size - alpha) / size.
inline int pick_existing_table(const PartitionState& p, int m, double alpha,
                               RngStream& rng) {
  for (long it = 0; it < kRejectionCap; ++it) {
    const int who = static_cast<int>(rng.uniform() * m);
    const int table = p.labels[static_cast<std::size_t>(std::min(who, m - 1))];
    const double size = p.sizes[static_cast<std::size_t>(table)];
    if (alpha == 0.0 || rng.uniform() * size < size - alpha) return table;
  }
  throw NumericError("sample_crp: table choice exceeded rejection cap");
}

inline void seat(PartitionState& p, int m, int table) {
  if (table == p.K()) p.sizes.push_back(0);
  p.labels[static_cast<std::size_t>(m)] = table;
  ++p.sizes[static_cast<std::size_t>(table)];
}

}  // namespace detail

/// PD(alpha, theta) Chinese restaurant partition of [n].
inline PartitionState sample_crp(double alpha, double theta, int n, RngStream& rng) {
  detail::require_crp_params(alpha, theta, "sample_crp");
  detail::require(n >= 1, "sample_crp", "n must be >= 1");
  PartitionState p{n, std::vector<int>(static_cast<std::size_t>(n), 0), {}};
  detail::seat(p, 0, 0);
  for (int m = 1; m < n; ++m) {
    const double fresh = (theta + p.K() * alpha) / (theta + m);
    const int table = rng.uniform() < fresh ? p.K()
                                            : detail::pick_existing_table(p, m, alpha, rng);
    detail::seat(p, m, table);
  }
  return p;
}

struct Coagulation {
  PartitionState coarse;
  int merged = 0;  // number of blocks selected into A'
};

/// Merges the blocks with selected[b] set into one block labelled 0; the
/// other blocks keep their relative order. Selecting fewer than two blocks
/// leaves the partition unchanged.
inline Coagulation coagulate(const PartitionState& fine, const std::vector<char>& selected) {
  detail::require(static_cast<int>(selected.size()) == fine.K(), "coagulate",
                  "one indicator per block required");
  int merged = 0;
  for (char s : selected) merged += s ? 1 : 0;
  if (merged < 2) return {fine, merged};
  std::vector<int> relabel(selected.size());
  int next = 1;
  for (std::size_t b = 0; b < selected.size(); ++b) relabel[b] = selected[b] ? 0 : next++;
  PartitionState coarse{fine.n, std::vector<int>(fine.labels.size()),
                        std::vector<int>(static_cast<std::size_t>(next), 0)};
  for (std::size_t b = 0; b < selected.size(); ++b) coarse.sizes[relabel[b]] += fine.sizes[b];
  for (std::size_t i = 0; i < fine.labels.size(); ++i) {
    coarse.labels[i] = relabel[static_cast<std::size_t>(fine.labels[i])];
  }
  return {std::move(coarse), merged};
}

/// One coarsening step: every block joins the merged block independently
/// with probability 1 - b.
inline Coagulation merge_step(const PartitionState& fine, double b, RngStream& rng) {
  detail::require(b >= 0.0 && b <= 1.0, "merge_step", "b must lie in [0,1]");
  std::vector<char> pick(static_cast<std::size_t>(fine.K()));
  for (auto& s : pick) s = rng.uniform() >= b ? 1 : 0;
  return coagulate(fine, pick);
}

/// Law of B_j in the nested scheme. At alpha = 0 the beta degenerates to the
/// constant (theta + j - 1) / (theta + j).
inline double nested_beta(double alpha, double theta, int j, RngStream& rng) {
  if (alpha == 0.0) return (theta + j - 1.0) / (theta + j);
  return sample_beta((theta + alpha + j - 1.0) / alpha, (1.0 - alpha) / alpha, rng);
}

struct NestedRecord {
  double alpha = 0.0;
  double theta = 0.0;
  int r = 0;
  std::vector<PartitionState> partitions;  // level j = 0..r
  std::vector<double> betas;               // betas[j-1] = B_j
  std::vector<int> merged_sizes;           // merged_sizes[j] = |A'_{1,j}|, j < r
  std::vector<int> xi;                     // xi_{n,0..r}

  int K(int j) const { return partitions.at(static_cast<std::size_t>(j)).K(); }
};

/// Nested PD(alpha, theta) partitions of [n] at levels 0..r. The level-r
/// partition is a PD(alpha, theta + r) restaurant; going from level j to
/// j - 1 every block independently joins the merged block with probability
/// 1 - B_j.
inline NestedRecord nested_scheme(double alpha, double theta, int r, int n, RngStream& rng) {
  detail::require_crp_params(alpha, theta, "nested_scheme");
  detail::require(r >= 1, "nested_scheme", "r must be >= 1");
  detail::require(n >= 1, "nested_scheme", "n must be >= 1");
  NestedRecord rec;
  rec.alpha = alpha;
  rec.theta = theta;
  rec.r = r;
  rec.partitions.resize(static_cast<std::size_t>(r) + 1);
  rec.betas.resize(static_cast<std::size_t>(r));
  rec.merged_sizes.resize(static_cast<std::size_t>(r));
  rec.xi.assign(static_cast<std::size_t>(r) + 1, 0);

  rec.partitions[r] = sample_crp(alpha, theta + r, n, rng);
  for (int j = r; j >= 1; --j) {
    const double b = nested_beta(alpha, theta, j, rng);
    rec.betas[j - 1] = b;
    Coagulation c = merge_step(rec.partitions[j], b, rng);
    rec.merged_sizes[j - 1] = c.merged;
    rec.partitions[j - 1] = std::move(c.coarse);
    rec.xi[j] = rec.K(j) - rec.K(j - 1);
  }
  rec.xi[0] = rec.merged_sizes[0] >= 2 ? rec.K(0) : 0;
  return rec;
}

/// One JSON line per level of a nested record.
inline void write_nested_jsonl(std::ostream& os, const NestedRecord& rec, long replicate) {
  for (int j = 0; j <= rec.r; ++j) {
    nlohmann::json line;
    line["replicate"] = replicate;
    line["level"] = j;
    line["blocks"] = rec.partitions[j].blocks();
    line["K"] = rec.K(j);
    line["xi"] = rec.xi;
    os << line.dump() << '\n';
  }
}

struct MergerKernelQuery {
  double alpha;
  double theta;
  int b;
  int ell;

  MergerKernelQuery(double alpha_in, double theta_in, int b_in, int ell_in)
      : alpha(alpha_in), theta(theta_in), b(b_in), ell(ell_in) {
    detail::require_crp_params(alpha, theta, "merger_pmf");
    detail::require(b >= 1, "merger_pmf", "b must be >= 1");
    detail::require(ell >= 0 && ell <= b, "merger_pmf", "ell must lie in 0..b");
  }
};

/// P(|A'_{1,0}| = ell | K_{n,1} = b): Binomial(b, 1 - B_1) mixed over
/// 1 - B_1 ~ Beta((1-a)/a, (theta+a)/a); Binomial(b, 1/(theta+1)) at a = 0.
inline double merger_pmf(const MergerKernelQuery& q) {
  const double a = q.alpha;
  const double b = q.b;
  const double l = q.ell;
  if (a == 0.0) {
    const double p = 1.0 / (q.theta + 1.0);
    return std::exp(ln_binomial(b, l) + l * std::log(p) + (b - l) * std::log1p(-p));
  }
  const double top = (q.theta + a) / a;
  return std::exp(ln_binomial(b, l) + ln_gamma((1.0 + q.theta) / a) +
                  ln_gamma(top + b - l) + ln_gamma(1.0 / a + l - 1.0) - ln_gamma(top) -
                  ln_gamma((1.0 - a) / a) - ln_gamma((1.0 + q.theta) / a + b));
}

/// merger_pmf conditioned on at least two blocks merging; support 2..b.
inline double conditioned_merger_pmf(const MergerKernelQuery& q) {
  detail::require(q.b >= 2 && q.ell >= 2, "conditioned_merger_pmf",
                  "need b >= 2 and 2 <= ell <= b");
  const double p0 = merger_pmf({q.alpha, q.theta, q.b, 0});
  const double p1 = merger_pmf({q.alpha, q.theta, q.b, 1});
  return merger_pmf(q) / (1.0 - p0 - p1);
}

struct SplittingValue {
  double merger;    // p_{a,1-2a}(ell | b)
  double splitting; // merger kernel renormalised to 1..b-1
  double aldous;    // Aldous beta-splitting kernel, beta = 1/a - 2
};

/// At theta = 1 - 2 alpha the merger kernel restricted to 1..b-1 is Aldous'
/// beta-splitting rule with beta = 1/alpha - 2.
inline SplittingValue beta_splitting_pmf(double alpha, int b, int ell) {
  detail::require(alpha > 0.0 && alpha < 1.0, "beta_splitting_pmf",
                  "alpha must lie in (0,1)");
  detail::require(b >= 2 && ell >= 1 && ell <= b - 1, "beta_splitting_pmf",
                  "need b >= 2 and 1 <= ell <= b-1");
  const double theta = 1.0 - 2.0 * alpha;
  const double beta = 1.0 / alpha - 2.0;
  double inner = 0.0;
  double aldous_norm = 0.0;
  auto log_aldous = [&](int l) {
    return ln_gamma(beta + l + 1.0) + ln_gamma(beta + b - l + 1.0) - ln_gamma(l + 1.0) -
           ln_gamma(b - l + 1.0);
  };
  const double shift = log_aldous(b / 2);
  for (int l = 1; l < b; ++l) {
    inner += merger_pmf({alpha, theta, b, l});
    aldous_norm += std::exp(log_aldous(l) - shift);
  }
  const double p = merger_pmf({alpha, theta, b, ell});
  return {p, p / inner, std::exp(log_aldous(ell) - shift) / aldous_norm};
}

/// W_{n,b} = Gamma(n) Gamma(theta+1) Gamma((theta+b a)/a)
///           / (Gamma(theta+n) Gamma(b) Gamma((theta+a)/a)).
inline double w_nb(double alpha, double theta, int n, int b) {
  const AlphaTheta p(alpha, theta);
  detail::require(n >= 1 && b >= 1 && b <= n, "w_nb", "need 1 <= b <= n");
  return std::exp(ln_gamma(n) + ln_gamma(theta + 1.0) + ln_gamma((theta + b * alpha) / alpha) -
                  ln_gamma(theta + n) - ln_gamma(b) - ln_gamma((theta + alpha) / alpha));
}

/// Sigma_{a,n}(theta + b a) = S_{a,theta+b a} / B_{(theta+b a, n-b a)}.
inline double sample_sigma(double alpha, double theta, int n, int b, RngStream& rng) {
  detail::require(n >= 1 && b >= 1 && b <= n, "sample_sigma", "need 1 <= b <= n");
  const AlphaTheta p(alpha, theta + b * alpha);
  detail::require(p.theta > 0.0, "sample_sigma", "theta + b alpha must be positive");
  const double s = sample_tilted_stable(p, rng);
  return s / sample_beta(p.theta, n - b * alpha, rng);
}

/// The same law through S_{a,n+theta} B^{-1/a}_{(theta/a+b, n/a-b)}.
inline double sample_sigma_alt(double alpha, double theta, int n, int b, RngStream& rng) {
  detail::require(n >= 1 && b >= 1 && b <= n, "sample_sigma_alt", "need 1 <= b <= n");
  const AlphaTheta p(alpha, n + theta);
  detail::require(theta + b * alpha > 0.0, "sample_sigma_alt",
                  "theta + b alpha must be positive");
  const double s = sample_tilted_stable(p, rng);
  const double beta = sample_beta(theta / alpha + b, n / alpha - b, rng);
  return s * std::exp(-std::log(beta) / alpha);
}

/// Y_{a,n}(b) = B^{-1/a}_{(1,(1-a)/a)} Sigma_{a,n}(1 + b a).
inline double sample_y(double alpha, int n, int b, RngStream& rng) {
  detail::require(alpha > 0.0 && alpha < 1.0, "sample_y", "alpha must lie in (0,1)");
  const double beta = sample_beta(1.0, (1.0 - alpha) / alpha, rng);
  return std::exp(-std::log(beta) / alpha) * sample_sigma(alpha, 1.0, n, b, rng);
}

/// Monte Carlo estimate of W_{n,b} = E[h(Sigma_{a,n}(b a))] for a general
/// mixing weight h; the closed form w_nb covers h(t) = c t^{-theta}.
inline double w_nb_monte_carlo(double alpha, int n, int b,
                               const std::function<double(double)>& h, long draws,
                               RngStream& rng) {
  detail::require(draws >= 1, "w_nb_monte_carlo", "draws must be >= 1");
  double acc = 0.0;
  for (long i = 0; i < draws; ++i) acc += h(sample_sigma(alpha, 0.0, n, b, rng));
  return acc / static_cast<double>(draws);
}

/// Joint law of (K_{n,1} = k, V_1 in dv) given T_{1/2,0} = t:
///   P_{1/2,0}(K_n = k) Gamma(n) / (2 Gamma(k)) t^{-(k+1)/2} v^{-(k+2)}
///   exp(-(1-v^2)/(4 t v^2)) U(n - k/2 - 1/2, 1/2, 1/(4 t v^2)).
inline double joint_k_v_given_t_half(int n, int k, double v, double t) {
  detail::require(n >= 1 && k >= 1 && k <= n, "joint_k_v_given_t_half",
                  "need 1 <= k <= n");
  detail::require(t > 0.0 && std::isfinite(t), "joint_k_v_given_t_half",
                  "t must be positive");
  if (!(v > 0.0 && v < 1.0)) return 0.0;
  const double z = 1.0 / (4.0 * t * v * v);
  const double log_u = log_kummer_u(n - 0.5 * k - 0.5, 0.5, z);
  return std::exp(std::log(kn_closed_form_half(n, k)) + ln_gamma(n) - std::log(2.0) -
                  ln_gamma(k) - 0.5 * (k + 1.0) * std::log(t) - (k + 2.0) * std::log(v) -
                  (1.0 - v * v) * z + log_u);
}

/// P(K_n = k | T_{1/2} = s) for k = 1..n (index 0 unused).
inline std::vector<double> kn_pmf_given_t_half(int n, double s) {
  detail::require(n >= 1, "kn_pmf_given_t_half", "n must be >= 1");
  detail::require(s > 0.0 && std::isfinite(s), "kn_pmf_given_t_half", "s must be positive");
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  const double z = 0.25 / s;
  for (int k = 1; k <= n; ++k) {
    out[k] = std::exp(std::log(kn_closed_form_half(n, k)) + ln_gamma(n) - ln_gamma(k) +
                      0.5 * (1.0 - k) * std::log(s) +
                      log_kummer_u(n - 0.5 * (k + 1.0), 0.5, z));
  }
  return out;
}

/// Chinese restaurant for PD(1/2 | s): the Gibbs partition of [n] whose
/// weights are V_{m,k}(s) = 2^{1-k} s^{(1-k)/2} U(m - (k+1)/2, 1/2, 1/(4s)).
/// With a = m - (k+1)/2, customer m+1 opens a table with probability
/// U(a+1/2)/(2 sqrt(s) U(a)) and otherwise joins a table with weight
/// proportional to size - 1/2. U is tabulated on the half-integer grid
/// 0..n-1 by two backward recurrence ladders.
class HalfConditionedCrp {
 public:
  HalfConditionedCrp(int n, double s) : n_(n), s_(s) {
    detail::require(n >= 1, "HalfConditionedCrp", "n must be >= 1");
    detail::require(s > 0.0 && std::isfinite(s), "HalfConditionedCrp", "s must be positive");
    const double z = 0.25 / s;
    // log_u_[i] = log U(i/2, 1/2, z), i = 0..2(n-1).
    log_u_.assign(static_cast<std::size_t>(2 * (n - 1) + 1), 0.0);
    if (n >= 2) {
      const auto whole = log_kummer_u_ladder(n - 1.0, 0.5, z, n);
      for (int j = 0; j < n; ++j) log_u_[2 * (n - 1 - j)] = whole[j];
      const auto half = log_kummer_u_ladder(n - 1.5, 0.5, z, n - 1);
      for (int j = 0; j < n - 1; ++j) log_u_[2 * (n - 1 - j) - 1] = half[j];
    }
  }

  /// Probability that customer m+1 opens a new table when m customers sit
  /// at k tables.
  double new_table_probability(int m, int k) const {
    const int a2 = 2 * m - k - 1;  // 2a
    return 0.5 / std::sqrt(s_) * std::exp(log_u_[a2 + 1] - log_u_[a2]);
  }

  PartitionState operator()(RngStream& rng) const {
    PartitionState p{n_, std::vector<int>(static_cast<std::size_t>(n_), 0), {}};
    detail::seat(p, 0, 0);
    for (int m = 1; m < n_; ++m) {
      const int table = rng.uniform() < new_table_probability(m, p.K())
                            ? p.K()
                            : detail::pick_existing_table(p, m, 0.5, rng);
      detail::seat(p, m, table);
    }
    return p;
  }

 private:
  int n_;
  double s_;
  std::vector<double> log_u_;
};

struct KVDraw {
  int k;
  double v;
};

/// (K_{n,1}, V_1) given T_{1/2,0} = t: V_1 = (4 t e + 1)^{-1/2}, then the
/// level-1 partition is a PD(1/2 | t V_1^2) restaurant.
inline KVDraw sample_k_v_given_t_half(int n, double t, RngStream& rng) {
  detail::require(t > 0.0 && std::isfinite(t), "sample_k_v_given_t_half",
                  "t must be positive");
  const double v = 1.0 / std::sqrt(4.0 * t * sample_exponential(rng) + 1.0);
  const HalfConditionedCrp crp(n, t * v * v);
  return {crp(rng).K(), v};
}

}  // namespace mlpa
