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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mlpa/errors.hpp"
#include "mlpa/rng.hpp"
#include "mlpa/samplers.hpp"
#include "mlpa/special_fn.hpp"

namespace mlpa {

/// One draw of (S^{-a}_{a,theta+j})_{j=0..r}.
///
/// values[j] realises S^{-a}_{a,theta+j}; betas[j-1] realises
/// B_j = values[j-1] / values[j] ~ Beta((theta+a+j-1)/a, (1-a)/a).
/// values[j-1] is stored as values[j] * betas[j-1], so the ratio is exact.
struct MLChainPath {
  AlphaTheta params;
  int r = 0;
  std::vector<double> values;
  std::vector<double> betas;

  double beta(int j) const { return betas.at(static_cast<std::size_t>(j - 1)); }
};

/// xi[0] = values[0], xi[j] = values[j] - values[j-1].
struct SpacingVector {
  std::vector<double> xi;
};

/// Samples chain paths for fixed (alpha, theta, r). Top-down: the level-r
/// variable first, then independent betas multiply downwards.
class ChainSampler {
 public:
  ChainSampler(AlphaTheta p, int r)
      : p_(p), r_(r), top_(checked_top(p, r)) {
    const double a = p.alpha;
    for (int j = 1; j <= r; ++j) {
      betas_.emplace_back((p.theta + a + j - 1.0) / a, (1.0 - a) / a);
    }
  }

  MLChainPath operator()(RngStream& rng) const {
    MLChainPath path{p_, r_, std::vector<double>(r_ + 1), std::vector<double>(r_)};
    const double s = top_(rng);
    path.values[r_] = std::exp(-p_.alpha * std::log(s));
    for (int j = r_; j >= 1; --j) {
      const double b = sample_beta(betas_[j - 1], rng);
      path.betas[j - 1] = b;
      path.values[j - 1] = path.values[j] * b;
    }
    return path;
  }

 private:
  static TiltedStableSampler checked_top(AlphaTheta p, int r) {
    detail::require(r >= 0, "sample_chain", "r must be non-negative");
    return TiltedStableSampler(AlphaTheta(p.alpha, p.theta + r));
  }

  AlphaTheta p_;
  int r_;
  TiltedStableSampler top_;
  std::vector<BetaParams> betas_;
};

inline MLChainPath sample_chain(const AlphaTheta& p, int r, RngStream& rng) {
  return ChainSampler(p, r)(rng);
}

inline SpacingVector spacings(const MLChainPath& path) {
  SpacingVector s;
  s.xi.resize(path.values.size());
  if (path.values.empty()) return s;
  s.xi[0] = path.values[0];
  for (std::size_t j = 1; j < path.values.size(); ++j) {
    s.xi[j] = path.values[j] - path.values[j - 1];
  }
  return s;
}

/// (alpha, theta) of the PD(alpha, 1 - 2 alpha) chain whose spacings are the
/// scaled degree limits of the beta-recursive tree: alpha = 1/(2+beta).
inline AlphaTheta mori_params(double beta) {
  detail::require(beta > -1.0 && std::isfinite(beta), "mori_chain",
                  "beta must exceed -1");
  const double alpha = 1.0 / (2.0 + beta);
  return AlphaTheta(alpha, 1.0 - 2.0 * alpha);
}

inline MLChainPath mori_chain(double beta, int r, RngStream& rng) {
  return sample_chain(mori_params(beta), r, rng);
}

/// Chain conditioned on T_{a,0} = t: tvalues[k] = T_{a,k} (tvalues[0] = t),
/// vratios[k-1] = V_k with T_{a,k-1} = T_{a,k} V_k^{-1/a}.
struct ConditionedChain {
  double alpha = 0.5;
  double t = 1.0;
  int r = 0;
  std::vector<double> tvalues;
  std::vector<double> vratios;
};

/// alpha = 1/2: given T_0 = t the T_k are the points of a Poisson process,
/// T_k = 1/(4 (e_1 + ... + e_k) + 1/t).
inline ConditionedChain sample_conditioned_chain_half(double t, int r, RngStream& rng) {
  detail::require(t > 0.0 && std::isfinite(t), "sample_conditioned_chain_half",
                  "t must be positive");
  detail::require(r >= 0, "sample_conditioned_chain_half", "r must be >= 0");
  ConditionedChain c{0.5, t, r, std::vector<double>(r + 1), std::vector<double>(r)};
  c.tvalues[0] = t;
  double acc = 1.0 / t;
  for (int k = 1; k <= r; ++k) {
    acc += 4.0 * sample_exponential(rng);
    c.tvalues[k] = 1.0 / acc;
    c.vratios[k - 1] = std::sqrt(c.tvalues[k] / c.tvalues[k - 1]);
  }
  return c;
}

/// Density of V_1 given T_{a,0} = t:
///   a/Gamma((1-a)/a) (1-v)^{(1-a)/a - 1} f_a(v^{1/a} t) / (t f_a(t)).
inline double conditioned_step_density(double alpha, double t, double v) {
  detail::require(alpha > 0.0 && alpha < 1.0, "conditioned_step_density",
                  "alpha must lie in (0,1)");
  detail::require(t > 0.0, "conditioned_step_density", "t must be positive");
  if (!(v > 0.0 && v < 1.0)) return 0.0;
  const double c = (1.0 - alpha) / alpha;
  const double s = std::exp(std::log(v) / alpha) * t;
  return std::exp(std::log(alpha) - ln_gamma(c) + (c - 1.0) * std::log1p(-v) +
                  log_stable_pdf(alpha, s) - std::log(t) - log_stable_pdf(alpha, t));
}

struct ConditionedStep {
  double s;  // T_{a,1}
  double v;  // V_1 = (s/t)^a
};

/// One transition T_{a,0} = t -> T_{a,1} for general alpha.
///
/// Proposals v ~ Beta(1, (1-a)/a) are accepted with probability
/// f_a(v^{1/a} t) / M(t), where M(t) bounds f_a on (0, t]. M(t) is the grid
/// maximum refined by golden section and inflated by 1.1; a proposal that
/// exceeds it raises NumericError instead of biasing the output.
class ConditionedStepSampler {
 public:
  static constexpr double kSafety = 1.1;

  ConditionedStepSampler(double alpha, double t) : alpha_(alpha), t_(t) {
    detail::require(alpha > 0.0 && alpha < 1.0, "sample_conditioned_step_general",
                    "alpha must lie in (0,1)");
    detail::require(t > 0.0 && std::isfinite(t), "sample_conditioned_step_general",
                    "t must be positive");
    log_bound_ = std::log(kSafety) + log_sup_density();
  }

  double log_bound() const { return log_bound_; }

  ConditionedStep operator()(RngStream& rng) const {
    const double c = (1.0 - alpha_) / alpha_;
    for (long it = 0; it < kRejectionCap; ++it) {
      // Beta(1, c) by inversion: v = 1 - U^{1/c}.
      const double v = -std::expm1(std::log(rng.uniform()) / c);
      if (!(v > 0.0)) continue;
      const double s = t_ * std::exp(std::log(v) / alpha_);
      const double log_f = log_stable_pdf(alpha_, s);
      if (log_f > log_bound_) {
        throw NumericError("sample_conditioned_step_general: density exceeds "
                           "envelope at s=" + std::to_string(s));
      }
      if (std::log(rng.uniform()) < log_f - log_bound_) return {s, v};
    }
    throw NumericError("sample_conditioned_step_general: rejection cap exceeded");
  }

 private:
  double log_sup_density() const {
    constexpr int kGrid = 64;
    const double lo = std::log(t_) - 30.0;
    const double hi = std::log(t_);
    auto g = [&](double x) { return log_stable_pdf(alpha_, std::exp(x)); };
    int best = kGrid;
    double best_val = g(hi);
    for (int i = 0; i < kGrid; ++i) {
      const double x = lo + (hi - lo) * i / kGrid;
      const double val = g(x);
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    // Golden-section refinement on the bracketing cells.
    const double h = (hi - lo) / kGrid;
    double a = std::max(lo, lo + (best - 1) * h);
    double b = std::min(hi, lo + (best + 1) * h);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 60; ++i) {
      const double x1 = b - gr * (b - a);
      const double x2 = a + gr * (b - a);
      if (g(x1) < g(x2)) a = x1; else b = x2;
    }
    return std::max(best_val, g(0.5 * (a + b)));
  }

  double alpha_;
  double t_;
  double log_bound_ = 0.0;
};

inline ConditionedStep sample_conditioned_step_general(double alpha, double t,
                                                       RngStream& rng) {
  return ConditionedStepSampler(alpha, t)(rng);
}

struct IdentityPair {
  double lhs;
  double rhs;
};

namespace detail {

inline void require_coag(double alpha, double delta, double theta, const char* who) {
  require(alpha > 0.0 && alpha < 1.0, who, "alpha must lie in (0,1)");
  require(delta > 0.0 && delta <= 1.0, who, "delta must lie in (0,1]");
  require(std::isfinite(theta) && theta > -alpha * delta, who,
          "theta must exceed -alpha*delta");
}

// S_{d,theta}^{-d}, with the d = 1 law degenerate at 1.
inline std::optional<TiltedStableSampler> gml_factor(double d, double theta) {
  if (d == 1.0) return std::nullopt;
  return TiltedStableSampler(AlphaTheta(d, theta));
}

inline double draw_gml(const std::optional<TiltedStableSampler>& s, RngStream& rng) {
  if (!s) return 1.0;
  return std::exp(-s->params().alpha * std::log((*s)(rng)));
}

}  // namespace detail

/// Draws both sides of S^{-ad}_{ad,theta} = S^{-ad}_{a,theta} S^{-d}_{d,theta/a}
/// with the right-hand factors independent.
class CoagIdentitySampler {
 public:
  CoagIdentitySampler(double alpha, double delta, double theta)
      : alpha_(alpha), delta_(delta) {
    detail::require_coag(alpha, delta, theta, "coag_identity_pair");
    lhs_ = detail::gml_factor(alpha * delta, theta);
    outer_.emplace(AlphaTheta(alpha, theta));
    inner_ = detail::gml_factor(delta, theta / alpha);
  }

  IdentityPair operator()(RngStream& rng) const {
    IdentityPair out{};
    out.lhs = lhs_ ? detail::draw_gml(lhs_, rng)
                   : std::exp(-alpha_ * std::log((*outer_)(rng)));
    const double outer = std::exp(-alpha_ * delta_ * std::log((*outer_)(rng)));
    out.rhs = outer * detail::draw_gml(inner_, rng);
    return out;
  }

 private:
  double alpha_;
  double delta_;
  std::optional<TiltedStableSampler> lhs_;
  std::optional<TiltedStableSampler> outer_;
  std::optional<TiltedStableSampler> inner_;
};

inline IdentityPair coag_identity_pair(double alpha, double delta, double theta,
                                       RngStream& rng) {
  return CoagIdentitySampler(alpha, delta, theta)(rng);
}

/// Both sides of
///   S^{-d}_{d,theta/a+d} B^d_{((theta+ad)/a, (1-ad)/a)}
///     = S^{-d}_{d,(1+theta)/a} B_{((theta+ad)/(ad), (1-ad)/(ad))}
/// with independent factors on each side.
class CoagBetaIdentitySampler {
 public:
  CoagBetaIdentitySampler(double alpha, double delta, double theta)
      : delta_(delta),
        lhs_beta_((theta + alpha * delta) / alpha, (1.0 - alpha * delta) / alpha),
        rhs_beta_((theta + alpha * delta) / (alpha * delta),
                  (1.0 - alpha * delta) / (alpha * delta)) {
    detail::require_coag(alpha, delta, theta, "coag_beta_identity_pair");
    lhs_s_ = detail::gml_factor(delta, theta / alpha + delta);
    rhs_s_ = detail::gml_factor(delta, (1.0 + theta) / alpha);
  }

  IdentityPair operator()(RngStream& rng) const {
    IdentityPair out{};
    out.lhs = detail::draw_gml(lhs_s_, rng) *
              std::exp(delta_ * std::log(sample_beta(lhs_beta_, rng)));
    out.rhs = detail::draw_gml(rhs_s_, rng) * sample_beta(rhs_beta_, rng);
    return out;
  }

  /// Exact means of both sides from the Gamma-ratio moment formula.
  static IdentityPair means(double alpha, double delta, double theta) {
    detail::require_coag(alpha, delta, theta, "coag_beta_identity_pair");
    const double ad = alpha * delta;
    auto gml_mean = [&](double th) {
      return delta == 1.0 ? 1.0 : neg_moment(delta, th, delta);
    };
    return {gml_mean(theta / alpha + delta) *
                beta_moment((theta + ad) / alpha, (1.0 - ad) / alpha, delta),
            gml_mean((1.0 + theta) / alpha) *
                beta_moment((theta + ad) / ad, (1.0 - ad) / ad, 1.0)};
  }

 private:
  double delta_;
  BetaParams lhs_beta_;
  BetaParams rhs_beta_;
  std::optional<TiltedStableSampler> lhs_s_;
  std::optional<TiltedStableSampler> rhs_s_;
};

inline IdentityPair coag_beta_identity_pair(double alpha, double delta, double theta,
                                            RngStream& rng) {
  return CoagBetaIdentitySampler(alpha, delta, theta)(rng);
}

}  // namespace mlpa
