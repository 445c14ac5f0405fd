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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "mlpa/crp.hpp"
#include "mlpa/errors.hpp"
#include "mlpa/ml_chain.hpp"
#include "mlpa/pa_sim.hpp"
#include "mlpa/rng.hpp"
#include "mlpa/samplers.hpp"
#include "mlpa/special_fn.hpp"
#include "mlpa/stats.hpp"

namespace mlpa {

enum class CheckKind { ks, chi2, moment, exact };
// at_least: pass when statistic >= threshold (seed pass rates);
// at_most: pass when statistic <= threshold (errors, rejection rates).
enum class Rule { at_least, at_most };

inline const char* to_string(CheckKind k) {
  switch (k) {
    case CheckKind::ks: return "ks";
    case CheckKind::chi2: return "chi2";
    case CheckKind::moment: return "moment";
    case CheckKind::exact: return "exact";
  }
  return "?";
}

struct VerifyReport {
  int criterion = 0;
  std::string name;
  CheckKind kind = CheckKind::exact;
  Rule rule = Rule::at_most;
  double statistic = 0.0;
  double threshold = 0.0;
  std::vector<long> n_samples;
  std::vector<std::uint64_t> seeds;
  bool pass = false;
  bool underpowered = false;
  nlohmann::json details = nlohmann::json::object();
  double elapsed_seconds = 0.0;  // not part of the canonical report

  bool failed() const { return !pass && !underpowered; }
};

struct SuiteConfig {
  std::string suite = "default";  // "default" or "quick"
  std::uint64_t seed = 0;
  int seeds = 20;
  double significance = 0.01;
  double pass_rate = 0.95;
  int jobs = 1;
  long samples = 0;              // overrides every per-check sample size when > 0
  std::vector<int> only;         // criteria to run; empty runs all
};

inline nlohmann::json config_json(const SuiteConfig& c) {
  return {{"suite", c.suite},         {"seed", c.seed},   {"seeds", c.seeds},
          {"significance", c.significance}, {"pass_rate", c.pass_rate},
          {"samples", c.samples},     {"only", c.only}};
}

inline nlohmann::json report_json(const VerifyReport& r, bool with_timing = false) {
  nlohmann::json j = {{"criterion", r.criterion},
                      {"name", r.name},
                      {"kind", to_string(r.kind)},
                      {"rule", r.rule == Rule::at_least ? ">=" : "<="},
                      {"statistic", r.statistic},
                      {"threshold", r.threshold},
                      {"n_samples", r.n_samples},
                      {"seeds", r.seeds},
                      {"pass", r.pass},
                      {"underpowered", r.underpowered},
                      {"details", r.details}};
  if (with_timing) j["elapsed_seconds"] = r.elapsed_seconds;
  return j;
}

/// {"suite", "checks", "config"}. The canonical form omits timings so that
/// reruns with the same seed are byte-identical.
inline nlohmann::json suite_json(const std::vector<VerifyReport>& reports, const SuiteConfig& c,
                                 bool with_timing = false) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : reports) checks.push_back(report_json(r, with_timing));
  return {{"suite", c.suite}, {"checks", checks}, {"config", config_json(c)}};
}

inline void write_summary_csv(std::ostream& os, const std::vector<VerifyReport>& reports) {
  os << "criterion,name,kind,statistic,threshold,pass,underpowered\n";
  for (const auto& r : reports) {
    os << r.criterion << ',' << r.name << ',' << to_string(r.kind) << ',' << r.statistic << ','
       << r.threshold << ',' << (r.pass ? 1 : 0) << ',' << (r.underpowered ? 1 : 0) << '\n';
  }
}

inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(i) for i in [0, count) on `jobs` threads in contiguous chunks.
/// Callers write results by index, so output never depends on `jobs`.
template <class F>
void parallel_for(long count, int jobs, const F& f) {
  jobs = static_cast<int>(std::min<long>(std::max(jobs, 1), std::max(count, 1L)));
  if (jobs == 1) {
    for (long i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  const long chunk = (count + jobs - 1) / jobs;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        const long lo = w * chunk;
        const long hi = std::min(count, lo + chunk);
        for (long i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// count draws of gen(rng); replicate i always uses stream (seed, i).
template <class G>
std::vector<double> draw_samples(long count, std::uint64_t seed, int jobs, const G& gen) {
  std::vector<double> out(static_cast<std::size_t>(count));
  parallel_for(count, jobs, [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = gen(rng);
  });
  return out;
}

namespace detail {

struct SuiteContext {
  const SuiteConfig& config;

  bool quick() const { return config.suite == "quick"; }
  int jobs() const { return resolve_jobs(config.jobs); }
  int seed_count() const { return std::max(1, quick() ? std::min(config.seeds, 5) : config.seeds); }

  // Sample size for a check with default size `full`; underpowered when it
  // falls below full / 20.
  long size(long full, bool& underpowered) const {
    long n = config.samples > 0 ? config.samples : (quick() ? full / 10 : full);
    n = std::max(n, 1L);
    underpowered = underpowered || n < full / 20;
    return n;
  }

  std::uint64_t seed_for(int check_id, int index) const {
    return mix_seed(config.seed, static_cast<std::uint64_t>(check_id) * 4096u +
                                     static_cast<std::uint64_t>(index));
  }
};

// Runs one p-value producing trial per seed and applies the pass-rate rule.
template <class Trial>
VerifyReport multi_seed(const SuiteContext& ctx, int criterion, int check_id, std::string name,
                        CheckKind kind, std::vector<long> sizes, bool underpowered,
                        const Trial& trial) {
  VerifyReport r;
  r.criterion = criterion;
  r.name = std::move(name);
  r.kind = kind;
  r.rule = Rule::at_least;
  r.threshold = ctx.config.pass_rate;
  r.n_samples = std::move(sizes);
  r.underpowered = underpowered;
  std::vector<double> p_values, stats;
  int passed = 0;
  for (int s = 0; s < ctx.seed_count(); ++s) {
    const std::uint64_t seed = ctx.seed_for(check_id, s);
    r.seeds.push_back(seed);
    const TestResult t = trial(seed);
    p_values.push_back(t.p_value);
    stats.push_back(t.statistic);
    if (t.p_value > ctx.config.significance) ++passed;
  }
  r.statistic = static_cast<double>(passed) / static_cast<double>(p_values.size());
  r.pass = r.statistic >= r.threshold;
  r.details = {{"significance", ctx.config.significance},
               {"seeds_passed", passed},
               {"p_values", p_values},
               {"statistics", stats}};
  return r;
}

inline TestResult as_test(const Chi2Result& c) { return {c.statistic, c.p_value}; }

inline std::vector<long> histogram(const std::vector<int>& values, int cells) {
  std::vector<long> h(static_cast<std::size_t>(cells), 0);
  for (int v : values) {
    if (v >= 0 && v < cells) ++h[static_cast<std::size_t>(v)];
  }
  return h;
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline VerifyReport moment_report(int criterion, std::string name, double estimate,
                                  double target, double tolerance, long n,
                                  std::uint64_t seed, bool underpowered) {
  VerifyReport r;
  r.criterion = criterion;
  r.name = std::move(name);
  r.kind = CheckKind::moment;
  r.rule = Rule::at_most;
  r.statistic = std::abs(estimate / target - 1.0);
  r.threshold = tolerance;
  r.n_samples = {n};
  r.seeds = {seed};
  r.underpowered = underpowered;
  r.pass = r.statistic <= r.threshold;
  r.details = {{"estimate", estimate}, {"target", target}};
  return r;
}

// --- 1, 2: degree limits of the beta = 0 tree -------------------------------

struct TreeDegrees {
  std::vector<double> d0, d1;
};

inline TreeDegrees tree_degrees(long trees, int n, std::uint64_t seed, int jobs) {
  TreeDegrees out{std::vector<double>(static_cast<std::size_t>(trees)),
                  std::vector<double>(static_cast<std::size_t>(trees))};
  parallel_for(trees, jobs, [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    const TreeState t = grow_tree(0.0, n, rng);
    const auto s = scaled_degrees(t, 1);
    out.d0[static_cast<std::size_t>(i)] = s[0];
    out.d1[static_cast<std::size_t>(i)] = s[1];
  });
  return out;
}

inline void check_mori_moments(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long trees = ctx.size(2000, under);
  const int n = 20000;
  const std::uint64_t seed = ctx.seed_for(1, 0);
  const TreeDegrees d = tree_degrees(trees, n, seed, ctx.jobs());
  std::vector<double> sq(d.d0.size());
  std::transform(d.d0.begin(), d.d0.end(), sq.begin(), [](double x) { return x * x; });
  out.push_back(moment_report(1, "mori_degree_mean", mean(d.d0), neg_moment(0.5, 0.0, 0.5),
                              0.03, trees, seed, under));
  out.push_back(moment_report(1, "mori_degree_second_moment", mean(sq),
                              neg_moment(0.5, 0.0, 1.0), 0.06, trees, seed, under));
}

inline void check_mori_joint(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long trees = ctx.size(2000, under);
  const long paths = ctx.size(10000, under);
  const ChainSampler chain(mori_params(0.0), 1);
  out.push_back(multi_seed(ctx, 2, 2, "mori_joint_law_ks", CheckKind::ks, {trees, paths}, under,
                           [&](std::uint64_t seed) {
                             const TreeDegrees d = tree_degrees(trees, 20000, seed, ctx.jobs());
                             const auto xi1 = draw_samples(
                                 paths, mix_seed(seed, 1), ctx.jobs(), [&](RngStream& rng) {
                                   return spacings(chain(rng)).xi[1];
                                 });
                             return ks_two_sample(d.d1, xi1);
                           }));
}

// --- 3: beta recursion ------------------------------------------------------

inline void check_beta_recursion(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long n = ctx.size(100000, under);
  const TiltedStableSampler direct(AlphaTheta(0.5, 0.5));
  const TiltedStableSampler lifted(AlphaTheta(0.5, 1.5));
  const BetaParams beta(2.0, 1.0);
  out.push_back(multi_seed(ctx, 3, 3, "beta_recursion_ks", CheckKind::ks, {n, n}, under,
                           [&](std::uint64_t seed) {
                             const auto x = draw_samples(n, seed, ctx.jobs(), [&](RngStream& rng) {
                               return 1.0 / std::sqrt(direct(rng));
                             });
                             const auto y = draw_samples(
                                 n, mix_seed(seed, 1), ctx.jobs(), [&](RngStream& rng) {
                                   return sample_beta(beta, rng) / std::sqrt(lifted(rng));
                                 });
                             return ks_two_sample(x, y);
                           }));
}

// --- 4, 5: nested scheme ----------------------------------------------------

inline void check_nested_marginal(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long reps = ctx.size(100000, under);
  const int n = 50;
  const auto pmf = exact_kn_pmf(0.5, 1.0, n);
  const std::vector<double> cells(pmf.begin() + 1, pmf.end());
  out.push_back(multi_seed(ctx, 4, 4, "nested_marginal_chi2", CheckKind::chi2, {reps}, under,
                           [&](std::uint64_t seed) {
                             std::vector<int> k(static_cast<std::size_t>(reps));
                             parallel_for(reps, ctx.jobs(), [&](long i) {
                               RngStream rng(seed, static_cast<std::uint64_t>(i));
                               k[static_cast<std::size_t>(i)] =
                                   nested_scheme(0.5, 0.0, 2, n, rng).K(1) - 1;
                             });
                             return as_test(chi2_pmf_test(histogram(k, n), cells));
                           }));
}

inline void check_merger_kernel(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long reps = ctx.size(100000, under);
  const int n = 12;
  const int b_lo = 3, b_hi = 8;
  out.push_back(multi_seed(
      ctx, 5, 5, "merger_kernel_chi2", CheckKind::chi2, {reps}, under, [&](std::uint64_t seed) {
        std::vector<int> k(static_cast<std::size_t>(reps)), merged(k.size());
        parallel_for(reps, ctx.jobs(), [&](long i) {
          RngStream rng(seed, static_cast<std::uint64_t>(i));
          const NestedRecord rec = nested_scheme(0.5, 0.0, 1, n, rng);
          k[static_cast<std::size_t>(i)] = rec.K(1);
          merged[static_cast<std::size_t>(i)] = rec.merged_sizes[0];
        });
        std::vector<Chi2Result> parts;
        for (int b = b_lo; b <= b_hi; ++b) {
          std::vector<long> obs(static_cast<std::size_t>(b) + 1, 0);
          for (std::size_t i = 0; i < k.size(); ++i) {
            if (k[i] == b) ++obs[static_cast<std::size_t>(merged[i])];
          }
          if (std::accumulate(obs.begin(), obs.end(), 0L) == 0) continue;
          std::vector<double> pmf(obs.size());
          for (int l = 0; l <= b; ++l) pmf[l] = merger_pmf({0.5, 0.0, b, l});
          parts.push_back(chi2_pmf_test(obs, pmf));
        }
        return as_test(chi2_combine(parts));
      }));
}

// --- 6: closed form of the (1/2, 0) block count ------------------------------

inline void check_kn_closed_form(std::vector<VerifyReport>& out) {
  double err_lower_n_minus_1 = 0.0, err_lower_n = 0.0;
  for (int n = 1; n <= 50; ++n) {
    const auto pmf = exact_kn_pmf(0.5, 0.0, n);
    for (int k = 1; k <= n; ++k) {
      err_lower_n_minus_1 =
          std::max(err_lower_n_minus_1, std::abs(pmf[k] - kn_closed_form_half(n, k)));
      err_lower_n = std::max(err_lower_n, std::abs(pmf[k] - kn_closed_form_half_lower_n(n, k)));
    }
  }
  VerifyReport r;
  r.criterion = 6;
  r.name = "kn_closed_form_exact";
  r.kind = CheckKind::exact;
  r.statistic = err_lower_n_minus_1;
  r.threshold = 1e-12;
  r.n_samples = {50};
  r.pass = r.statistic <= r.threshold;
  r.details = {{"max_error_lower_index_n_minus_1", err_lower_n_minus_1},
               {"max_error_lower_index_n", err_lower_n},
               {"matching_variant", err_lower_n_minus_1 < err_lower_n ? "n-1" : "n"}};
  out.push_back(r);
}

// --- 7, 8: conditioned chains ------------------------------------------------

inline void check_conditioned_half(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long n = ctx.size(100000, under);
  const double t = 1.0;
  out.push_back(multi_seed(ctx, 7, 7, "conditioned_half_increment_ks", CheckKind::ks, {n}, under,
                           [&](std::uint64_t seed) {
                             const auto x = draw_samples(n, seed, ctx.jobs(), [&](RngStream& rng) {
                               const auto c = sample_conditioned_chain_half(t, 1, rng);
                               return 1.0 / (4.0 * c.tvalues[1]) - 1.0 / (4.0 * t);
                             });
                             return ks_one_sample(x, [](double e) { return -std::expm1(-e); });
                           }));

  // Expected bin masses from the density of V_1 given T_0 = t by quadrature.
  const int bins = 50;
  std::vector<double> mass(bins);
  auto density = [t](double u) {
    return u <= 0.0 ? 0.0
                    : 0.5 / t * std::pow(u, -3.0) * std::exp(-(1.0 - u * u) / (4.0 * t * u * u));
  };
  for (int i = 0; i < bins; ++i) {
    mass[i] = integrate(density, double(i) / bins, double(i + 1) / bins, 1e-10,
                        "conditioned_half_v1");
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (auto& m : mass) m /= total;
  out.push_back(multi_seed(ctx, 7, 8, "conditioned_half_v1_chi2", CheckKind::chi2, {n}, under,
                           [&](std::uint64_t seed) {
                             std::vector<int> cell(static_cast<std::size_t>(n));
                             parallel_for(n, ctx.jobs(), [&](long i) {
                               RngStream rng(seed, static_cast<std::uint64_t>(i));
                               const double v = sample_conditioned_chain_half(t, 1, rng).vratios[0];
                               cell[static_cast<std::size_t>(i)] =
                                   std::min(bins - 1, static_cast<int>(v * bins));
                             });
                             return as_test(chi2_pmf_test(histogram(cell, bins), mass));
                           }));
  out.back().details["mass_before_renormalising"] = total;
}

inline void check_conditioned_step(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long n = ctx.size(10000, under);
  int id = 9;
  for (double t : {0.5, 1.0, 2.0}) {
    const ConditionedStepSampler step(0.5, t);
    std::ostringstream name;
    name << "conditioned_step_ks_t" << t;
    out.push_back(multi_seed(ctx, 8, id++, name.str(), CheckKind::ks, {n, n}, under,
                             [&](std::uint64_t seed) {
                               const auto x = draw_samples(n, seed, ctx.jobs(), [&](RngStream& rng) {
                                 return step(rng).s;
                               });
                               const auto y = draw_samples(
                                   n, mix_seed(seed, 1), ctx.jobs(), [&](RngStream& rng) {
                                     return sample_conditioned_chain_half(t, 1, rng).tvalues[1];
                                   });
                               return ks_two_sample(x, y);
                             }));
  }
}

// --- 9: cross-alpha coagulation ---------------------------------------------

inline void check_coag_identity(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long n = ctx.size(100000, under);
  const double alpha = 0.8, delta = 0.625, theta = 0.4;
  const CoagIdentitySampler pair(alpha, delta, theta);
  out.push_back(multi_seed(ctx, 9, 12, "coag_identity_ks", CheckKind::ks, {n, n}, under,
                           [&](std::uint64_t seed) {
                             const auto x = draw_samples(n, seed, ctx.jobs(), [&](RngStream& rng) {
                               return 2.0 * std::sqrt(sample_gamma(0.9, rng));
                             });
                             const auto y = draw_samples(
                                 n, mix_seed(seed, 1), ctx.jobs(),
                                 [&](RngStream& rng) { return pair(rng).rhs; });
                             return ks_two_sample(x, y);
                           }));
}

// --- 10: Dirichlet boundary -------------------------------------------------

inline void check_dirichlet(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const long reps = ctx.size(100, under);
  const int n = 100000;
  const double theta = 2.0;
  const std::uint64_t seed = ctx.seed_for(13, 0);
  std::vector<double> k0(static_cast<std::size_t>(reps)), xi1(k0.size()), xi2(k0.size());
  parallel_for(reps, ctx.jobs(), [&](long i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    const NestedRecord rec = nested_scheme(0.0, theta, 2, n, rng);
    const double ln = std::log(static_cast<double>(n));
    k0[static_cast<std::size_t>(i)] = rec.K(0) / ln;
    xi1[static_cast<std::size_t>(i)] = rec.xi[1] / ln;
    xi2[static_cast<std::size_t>(i)] = rec.xi[2] / ln;
  });
  out.push_back(moment_report(10, "dirichlet_kn_log_scaling", mean(k0), theta, 0.15, reps, seed,
                              under));
  out.push_back(moment_report(10, "dirichlet_xi1_log_scaling", mean(xi1), 1.0, 0.20, reps, seed,
                              under));
  out.push_back(moment_report(10, "dirichlet_xi2_log_scaling", mean(xi2), 1.0, 0.20, reps, seed,
                              under));
}

// --- 11: Gibbs normalisation and Sigma representations ----------------------

inline void check_gibbs(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  double worst = 0.0;
  for (double theta : {0.5, 1.0, 2.0}) {
    for (int n = 1; n <= 20; ++n) {
      const auto pmf = exact_kn_pmf(0.5, 0.0, n);
      double sum = 0.0;
      for (int b = 1; b <= n; ++b) sum += pmf[b] * w_nb(0.5, theta, n, b);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  VerifyReport r;
  r.criterion = 11;
  r.name = "gibbs_normalisation_exact";
  r.kind = CheckKind::exact;
  r.statistic = worst;
  r.threshold = 1e-10;
  r.n_samples = {20};
  r.pass = worst <= r.threshold;
  out.push_back(r);

  bool under = false;
  const long n = ctx.size(100000, under);
  out.push_back(multi_seed(ctx, 11, 14, "sigma_double_representation_ks", CheckKind::ks, {n, n},
                           under, [&](std::uint64_t seed) {
                             const auto x = draw_samples(n, seed, ctx.jobs(), [](RngStream& rng) {
                               return sample_sigma(0.5, 0.0, 10, 3, rng);
                             });
                             const auto y = draw_samples(
                                 n, mix_seed(seed, 1), ctx.jobs(), [](RngStream& rng) {
                                   return sample_sigma_alt(0.5, 0.0, 10, 3, rng);
                                 });
                             return ks_two_sample(x, y);
                           }));
}

// --- 12: joint law of (K_{n,1}, V_1) given T_{1/2,0} = t --------------------

inline void check_joint_half(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  const int n = 5;
  const double t = 1.0;
  const int vbins = 10;
  // Bin edges at quantiles of the V_1 marginal, P(V_1 <= u) = exp(-(u^-2 - 1)/(4t)).
  std::vector<double> edges(vbins + 1);
  edges[0] = 0.0;
  edges[vbins] = 1.0;
  for (int i = 1; i < vbins; ++i) {
    const double q = double(i) / vbins;
    edges[i] = 1.0 / std::sqrt(1.0 - 4.0 * t * std::log(q));
  }
  std::vector<double> mass(static_cast<std::size_t>(n * vbins));
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    for (int i = 0; i < vbins; ++i) {
      const double m = integrate([&](double v) { return joint_k_v_given_t_half(n, k, v, t); },
                                 edges[i], edges[i + 1], 1e-10, "joint_k_v_given_t_half");
      mass[static_cast<std::size_t>((k - 1) * vbins + i)] = m;
      total += m;
    }
  }
  VerifyReport r;
  r.criterion = 12;
  r.name = "joint_half_normalisation_exact";
  r.kind = CheckKind::exact;
  r.statistic = std::abs(total - 1.0);
  r.threshold = 1e-4;
  r.n_samples = {n};
  r.pass = r.statistic <= r.threshold;
  r.details = {{"total_mass", total}};
  out.push_back(r);

  for (auto& m : mass) m /= total;
  bool under = false;
  const long reps = ctx.size(10000, under);
  out.push_back(multi_seed(
      ctx, 12, 15, "joint_half_simulation_chi2", CheckKind::chi2, {reps}, under,
      [&](std::uint64_t seed) {
        std::vector<int> cell(static_cast<std::size_t>(reps));
        parallel_for(reps, ctx.jobs(), [&](long i) {
          RngStream rng(seed, static_cast<std::uint64_t>(i));
          const KVDraw d = sample_k_v_given_t_half(n, t, rng);
          const int vb = static_cast<int>(std::upper_bound(edges.begin() + 1, edges.end() - 1, d.v) -
                                          (edges.begin() + 1));
          cell[static_cast<std::size_t>(i)] = (d.k - 1) * vbins + vb;
        });
        return as_test(chi2_pmf_test(histogram(cell, n * vbins), mass));
      }));
}

// --- 13: calibration under the null -----------------------------------------

inline void check_calibration(const SuiteContext& ctx, std::vector<VerifyReport>& out) {
  bool under = false;
  const int trials = ctx.quick() ? 20 : 100;
  const long n_ks = ctx.size(10000, under);
  const long n_chi = ctx.size(100000, under);

  auto rate_report = [&](std::string name, CheckKind kind, std::vector<long> sizes,
                         const std::vector<double>& p) {
    VerifyReport r;
    r.criterion = 13;
    r.name = std::move(name);
    r.kind = kind;
    r.rule = Rule::at_most;
    long rejected = 0;
    for (double v : p) rejected += v <= ctx.config.significance ? 1 : 0;
    r.statistic = static_cast<double>(rejected) / static_cast<double>(p.size());
    r.threshold = 0.03;
    r.n_samples = std::move(sizes);
    r.underpowered = under;
    r.pass = r.statistic <= r.threshold;
    r.details = {{"trials", p.size()}, {"rejected", rejected},
                 {"significance", ctx.config.significance}};
    return r;
  };

  std::vector<double> p_ks, p_chi;
  std::vector<std::uint64_t> seeds_ks, seeds_chi;
  for (int s = 0; s < trials; ++s) {
    const std::uint64_t seed = ctx.seed_for(16, s);
    seeds_ks.push_back(seed);
    const auto x = draw_samples(n_ks, seed, ctx.jobs(), [](RngStream& rng) { return rng.uniform(); });
    const auto y = draw_samples(n_ks, mix_seed(seed, 1), ctx.jobs(),
                                [](RngStream& rng) { return rng.uniform(); });
    p_ks.push_back(ks_two_sample(x, y).p_value);
  }
  out.push_back(rate_report("calibration_ks_null", CheckKind::ks, {n_ks, n_ks}, p_ks));
  out.back().seeds = seeds_ks;

  const auto pmf_full = exact_kn_pmf(0.5, 0.0, 50);
  const std::vector<double> pmf(pmf_full.begin() + 1, pmf_full.end());
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  for (int s = 0; s < trials; ++s) {
    const std::uint64_t seed = ctx.seed_for(17, s);
    seeds_chi.push_back(seed);
    std::vector<int> cell(static_cast<std::size_t>(n_chi));
    parallel_for(n_chi, ctx.jobs(), [&](long i) {
      RngStream rng(seed, static_cast<std::uint64_t>(i));
      const double u = rng.uniform() * cdf.back();
      cell[static_cast<std::size_t>(i)] = static_cast<int>(
          std::min<std::ptrdiff_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(pmf.size()) - 1));
    });
    p_chi.push_back(chi2_pmf_test(histogram(cell, static_cast<int>(pmf.size())), pmf).p_value);
  }
  out.push_back(rate_report("calibration_chi2_null", CheckKind::chi2, {n_chi}, p_chi));
  out.back().seeds = seeds_chi;
}

}  // namespace detail

inline constexpr int kCriteria = 13;

/// Runs the acceptance checks in criterion order. A check that throws is
/// recorded as failed with the error message; it does not stop the suite.
inline std::vector<VerifyReport> run_suite(const SuiteConfig& config,
                                           const std::function<void(const VerifyReport&)>& on_report = {}) {
  detail::require(config.suite == "default" || config.suite == "quick", "run_suite",
                  "suite must be 'default' or 'quick'");
  detail::require(config.seeds >= 1, "run_suite", "seeds must be >= 1");
  detail::require(config.significance > 0.0 && config.significance < 1.0, "run_suite",
                  "significance must lie in (0,1)");
  detail::require(config.pass_rate > 0.0 && config.pass_rate <= 1.0, "run_suite",
                  "pass_rate must lie in (0,1]");
  const detail::SuiteContext ctx{config};
  using Check = std::function<void(std::vector<VerifyReport>&)>;
  const std::vector<std::pair<int, Check>> checks = {
      {1, [&](auto& out) { detail::check_mori_moments(ctx, out); }},
      {2, [&](auto& out) { detail::check_mori_joint(ctx, out); }},
      {3, [&](auto& out) { detail::check_beta_recursion(ctx, out); }},
      {4, [&](auto& out) { detail::check_nested_marginal(ctx, out); }},
      {5, [&](auto& out) { detail::check_merger_kernel(ctx, out); }},
      {6, [&](auto& out) { detail::check_kn_closed_form(out); }},
      {7, [&](auto& out) { detail::check_conditioned_half(ctx, out); }},
      {8, [&](auto& out) { detail::check_conditioned_step(ctx, out); }},
      {9, [&](auto& out) { detail::check_coag_identity(ctx, out); }},
      {10, [&](auto& out) { detail::check_dirichlet(ctx, out); }},
      {11, [&](auto& out) { detail::check_gibbs(ctx, out); }},
      {12, [&](auto& out) { detail::check_joint_half(ctx, out); }},
      {13, [&](auto& out) { detail::check_calibration(ctx, out); }},
  };
  std::vector<VerifyReport> reports;
  for (const auto& [criterion, run] : checks) {
    if (!config.only.empty() &&
        std::find(config.only.begin(), config.only.end(), criterion) == config.only.end()) {
      continue;
    }
    std::vector<VerifyReport> local;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(local);
    } catch (const std::exception& e) {
      VerifyReport r;
      r.criterion = criterion;
      r.name = "criterion_" + std::to_string(criterion) + "_error";
      r.details = {{"error", e.what()}};
      local.push_back(r);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : local) {
      r.elapsed_seconds = secs / static_cast<double>(local.size());
      if (on_report) on_report(r);
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

}  // namespace mlpa
