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
#include <memory>
#include <optional>
#include <numbers>
#include <random>
#include <string>

#include "mlpa/errors.hpp"
#include "mlpa/rng.hpp"
#include "mlpa/special_fn.hpp"

namespace mlpa {

struct BetaParams {
  double a;
  double b;

  BetaParams(double a_in, double b_in) : a(a_in), b(b_in) {
    detail::require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                    "BetaParams", "shape parameters must be positive");
  }
};

inline constexpr long kRejectionCap = 1'000'000;

inline double sample_exponential(RngStream& rng) { return -std::log(rng.uniform()); }

inline double sample_gamma(double shape, RngStream& rng) {
  detail::require(shape > 0.0 && std::isfinite(shape), "sample_gamma",
                  "shape must be positive");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

namespace detail {

// log of a unit gamma variate; small shapes go through
// G_a = G_{a+1} U^{1/a} so the result never underflows.
inline double sample_log_gamma(double shape, RngStream& rng) {
  if (shape >= 1.0) return std::log(sample_gamma(shape, rng));
  return std::log(sample_gamma(shape + 1.0, rng)) + std::log(rng.uniform()) / shape;
}

}  // namespace detail

inline double sample_beta(const BetaParams& p, RngStream& rng) {
  const double lx = detail::sample_log_gamma(p.a, rng);
  const double ly = detail::sample_log_gamma(p.b, rng);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

inline double sample_beta(double a, double b, RngStream& rng) {
  return sample_beta(BetaParams(a, b), rng);
}

/// Positive alpha-stable variate, E exp(-w S) = exp(-w^alpha), by Kanter's
/// form of the Chambers-Mallows-Stuck transform: S = (A(U)/E)^{(1-a)/a}.
inline double sample_stable(double alpha, RngStream& rng) {
  detail::require(alpha > 0.0 && alpha < 1.0, "sample_stable",
                  "alpha must lie in (0,1)");
  const double u = std::numbers::pi * rng.uniform();
  const double e = sample_exponential(rng);
  return std::exp((1.0 - alpha) / alpha * (detail::log_kanter(alpha, u) - std::log(e)));
}

/// Exact sampler for S_{alpha,theta}, density c t^{-theta} f_alpha(t).
///
/// theta > 0: tilting Kanter's representation by S^{-theta} factorises, so
/// S = (A(U)/G)^{(1-a)/a} with G ~ Gamma(1 + c), c = theta (1-a)/a, and U on
/// (0, pi) with density proportional to A(u)^{-c}. Since log A is convex and
/// increasing, U is drawn by rejection from a flat-then-exponential envelope
/// built on the tangent where c (log A - log A(0)) = 1.
/// theta in (-alpha, 0): S_{a,theta} = S_{a,theta+1} B^{-1/a} with
/// B ~ Beta((theta+a)/a, (1-a)/a) independent.
/// theta = 0: plain stable draw.
class TiltedStableSampler {
 public:
  explicit TiltedStableSampler(AlphaTheta p) : p_(p) {
    const double a = p.alpha;
    if (p.theta > 0.0) {
      tilt_ = p.theta * (1.0 - a) / a;
      log_a0_ = detail::log_kanter_at_zero(a);
      u0_ = detail::kanter_inverse(a, log_a0_ + 1.0 / tilt_);
      rate_ = tilt_ * detail::log_kanter_slope(a, u0_);
      const double span = std::numbers::pi - u0_;
      tail_norm_ = -std::expm1(-rate_ * span);
      const double tail_mass = std::exp(-1.0) * tail_norm_ / rate_;
      flat_share_ = u0_ / (u0_ + tail_mass);
    } else if (p.theta < 0.0) {
      lifted_ = std::make_shared<TiltedStableSampler>(AlphaTheta(a, p.theta + 1.0));
      lift_beta_ = BetaParams((p.theta + a) / a, (1.0 - a) / a);
    }
  }

  const AlphaTheta& params() const { return p_; }

  double operator()(RngStream& rng) const {
    const double a = p_.alpha;
    if (p_.theta == 0.0) return sample_stable(a, rng);
    if (p_.theta < 0.0) {
      const double s = (*lifted_)(rng);
      const double b = sample_beta(*lift_beta_, rng);
      return s * std::exp(-std::log(b) / a);
    }
    const double u = sample_angle(rng);
    const double lg = detail::sample_log_gamma(1.0 + tilt_, rng);
    return std::exp((1.0 - a) / a * (detail::log_kanter(a, u) - lg));
  }

 private:
  double sample_angle(RngStream& rng) const {
    const double a = p_.alpha;
    for (long it = 0; it < kRejectionCap; ++it) {
      double u, log_envelope;
      if (rng.uniform() < flat_share_) {
        u = u0_ * rng.uniform();
        log_envelope = 0.0;
      } else {
        u = u0_ - std::log1p(-rng.uniform() * tail_norm_) / rate_;
        if (u >= std::numbers::pi) continue;
        log_envelope = -1.0 - rate_ * (u - u0_);
      }
      const double log_target = -tilt_ * detail::log_kanter_excess(a, u);
      if (std::log(rng.uniform()) < log_target - log_envelope) return u;
    }
    throw NumericError("sample_tilted_stable: rejection cap exceeded for alpha=" +
                       std::to_string(a) + " theta=" + std::to_string(p_.theta));
  }

  AlphaTheta p_;
  double tilt_ = 0.0;
  double log_a0_ = 0.0;
  double u0_ = 0.0;
  double rate_ = 0.0;
  double tail_norm_ = 0.0;
  double flat_share_ = 1.0;
  std::shared_ptr<const TiltedStableSampler> lifted_;
  std::optional<BetaParams> lift_beta_;
};

inline double sample_tilted_stable(const AlphaTheta& p, RngStream& rng) {
  return TiltedStableSampler(p)(rng);
}

/// Generalized Mittag-Leffler variate S_{alpha,theta}^{-alpha}.
inline double sample_gml(const AlphaTheta& p, RngStream& rng) {
  return std::exp(-p.alpha * std::log(sample_tilted_stable(p, rng)));
}

}  // namespace mlpa
