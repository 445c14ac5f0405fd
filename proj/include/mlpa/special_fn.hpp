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

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mlpa/errors.hpp"

namespace mlpa {

/// Stable index and polynomial tilt of the law S_{alpha,theta}.
struct AlphaTheta {
  double alpha;
  double theta;

  AlphaTheta(double alpha_in, double theta_in)
      : alpha(alpha_in), theta(theta_in) {
    detail::require(alpha > 0.0 && alpha < 1.0, "AlphaTheta",
                    "alpha must lie in (0,1), got " + std::to_string(alpha));
    detail::require(std::isfinite(theta) && theta + alpha > 0.0, "AlphaTheta",
                    "theta must exceed -alpha, got theta=" +
                        std::to_string(theta));
  }
};

/// Exponent delta of the negative moment E[S_{alpha,theta}^{-delta}].
struct MomentQuery {
  AlphaTheta params;
  double delta;

  MomentQuery(AlphaTheta p, double delta_in) : params(p), delta(delta_in) {
    detail::require(std::isfinite(delta) &&
                        delta + params.theta + params.alpha > 0.0,
                    "MomentQuery", "delta + theta must exceed -alpha");
  }
};

inline double ln_gamma(double x) {
  detail::require(x > 0.0 && std::isfinite(x), "ln_gamma",
                  "argument must be positive and finite");
  return boost::math::lgamma(x);
}

/// ln C(n, k) for real arguments with 0 <= k <= n.
inline double ln_binomial(double n, double k) {
  return ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
}

/// E[S_{alpha,theta}^{-delta}], evaluated as a log-space Gamma ratio.
inline double neg_moment(const MomentQuery& q) {
  const double a = q.params.alpha;
  const double th = q.params.theta;
  const double d = q.delta;
  return std::exp(ln_gamma((th + d) / a + 1.0) + ln_gamma(th + 1.0) -
                  ln_gamma(th + d + 1.0) - ln_gamma(th / a + 1.0));
}

inline double neg_moment(double alpha, double theta, double delta) {
  return neg_moment(MomentQuery(AlphaTheta(alpha, theta), delta));
}

/// E[B^s] for B ~ Beta(a, b), valid when a + s > 0.
inline double beta_moment(double a, double b, double s) {
  detail::require(a > 0.0 && b > 0.0 && a + s > 0.0, "beta_moment",
                  "need a>0, b>0, a+s>0");
  return std::exp(ln_gamma(a + s) + ln_gamma(a + b) - ln_gamma(a) -
                  ln_gamma(a + b + s));
}

namespace detail {

/// Adaptive 61-point Gauss-Kronrod on [lo, hi]. The recursion depth is
/// raised step by step: on very narrow intervals Boost's error estimate is
/// dominated by rounding and grows with depth, so the shallowest result that
/// meets the tolerance wins. Throws NumericError if none does.
template <class F>
double integrate(F&& f, double lo, double hi, double rel_tol,
                 const char* who) {
  if (!(hi > lo)) return 0.0;
  // Integrate over [0, 1]; Boost's error estimate misbehaves on intervals
  // whose width is many orders below one.
  const double width = hi - lo;
  auto unit = [&](double u) { return f(lo + width * u); };
  double best = 0.0;
  double best_rel = std::numeric_limits<double>::infinity();
  for (unsigned depth : {0u, 3u, 6u, 10u, 15u, 20u}) {
    double err = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            unit, 0.0, 1.0, depth, rel_tol, &err, &l1) * width;
    if (!std::isfinite(value)) continue;
    const double rel = l1 > 0.0 ? err / l1 : 0.0;
    if (rel < best_rel) {
      best_rel = rel;
      best = value;
    }
    if (rel <= 10.0 * rel_tol) return value;
  }
  if (!(best_rel <= 100.0 * rel_tol)) {
    std::ostringstream os;
    os << who << ": quadrature did not converge on [" << lo << ", " << hi
       << "], best relative error estimate " << best_rel;
    throw NumericError(os.str());
  }
  return best;
}

/// Integrates exp(log_f) over [lo, hi] (either end may be infinite) for a
/// unimodal log-integrand with known mode. Returns the log of the integral.
/// The range is clipped where log_f falls `drop` below its peak.
template <class LogF>
double log_integrate_unimodal(LogF&& log_f, double lo, double mode, double hi,
                              double rel_tol, const char* who,
                              double drop = 50.0) {
  const double peak = log_f(mode);
  if (!std::isfinite(peak)) {
    throw NumericError(std::string(who) + ": non-finite peak of integrand");
  }
  const double floor = peak - drop;

  // Walks from the mode towards `end` (dir = +1 or -1) until log_f drops
  // below the floor, then bisects the crossing.
  auto cutoff = [&](double end, double dir) {
    if (std::isfinite(end) && log_f(end) >= floor) return end;
    double inside = mode;
    double step = std::max(std::abs(mode), 1.0) * 1e-3;
    double outside = mode + dir * step;
    while (log_f(outside) >= floor) {
      if (std::isfinite(end) && dir * (outside - end) >= 0.0) return end;
      inside = outside;
      step *= 2.0;
      outside = mode + dir * step;
      if (step > 1e300) throw NumericError(std::string(who) + ": no tail cutoff");
    }
    if (std::isfinite(end) && dir * (outside - end) > 0.0) outside = end;
    // Stop once the crossing is pinned relative to its distance from the
    // mode, or at rounding level.
    for (int i = 0; i < 400; ++i) {
      const double gap = std::abs(outside - inside);
      if (gap <= 1e-3 * std::abs(inside - mode) ||
          gap <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(inside)) {
        break;
      }
      const double m = 0.5 * (inside + outside);
      (log_f(m) < floor ? outside : inside) = m;
    }
    return outside;
  };

  const double left = mode > lo ? cutoff(lo, -1.0) : lo;
  const double right = mode < hi ? cutoff(hi, 1.0) : hi;

  auto g = [&](double x) {
    const double v = log_f(x) - peak;
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  const double total = integrate(g, left, mode, rel_tol, who) +
                       integrate(g, mode, right, rel_tol, who);
  return peak + std::log(total);
}

// log(sin(x)/x), accurate as x -> 0.
inline double log_sinc(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return -x2 / 6.0 - x2 * x2 / 180.0 - x2 * x2 * x2 / 2835.0;
  }
  return std::log(std::sin(x) / x);
}

inline double log_kanter_at_zero(double alpha) {
  return alpha / (1.0 - alpha) * std::log(alpha) + std::log1p(-alpha);
}

/// log A(phi) - log A(0), where A is Kanter's function
///   A(phi) = sin(a phi)^{a/(1-a)} sin((1-a) phi) / sin(phi)^{1/(1-a)}.
/// Written through sinc factors so that small angles keep full relative
/// accuracy. A is increasing and log-convex on (0, pi).
inline double log_kanter_excess(double alpha, double phi) {
  return alpha / (1.0 - alpha) * log_sinc(alpha * phi) +
         log_sinc((1.0 - alpha) * phi) - log_sinc(phi) / (1.0 - alpha);
}

inline double log_kanter(double alpha, double phi) {
  return log_kanter_at_zero(alpha) + log_kanter_excess(alpha, phi);
}

/// d/dphi log A(phi).
inline double log_kanter_slope(double alpha, double phi) {
  const double b = 1.0 - alpha;
  return alpha * alpha / b / std::tan(alpha * phi) + b / std::tan(b * phi) -
         1.0 / (b * std::tan(phi));
}

/// Solves log_kanter(alpha, phi) = level on (0, pi); level must exceed the
/// value at zero.
inline double kanter_inverse(double alpha, double level) {
  double a = 0.0, b = std::numbers::pi;
  for (int i = 0; i < 60; ++i) {
    const double m = 0.5 * (a + b);
    (log_kanter(alpha, m) < level ? a : b) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline constexpr double kStableSeriesCut = 3.0;

namespace detail {

inline double log_stable_tail_series(double alpha, double t) {
  const double pi = std::numbers::pi;
  const double lt = std::log(t);
  const double lead = boost::math::lgamma(alpha + 1.0) - (alpha + 1.0) * lt;
  double sum = 0.0;
  for (int k = 1; k <= 60; ++k) {
    const double lmag = boost::math::lgamma(k * alpha + 1.0) - boost::math::lgamma(k + 1.0) -
                        (k * alpha + 1.0) * lt - lead;
    const double term = std::exp(lmag) * std::sin(k * pi * alpha);
    sum += (k % 2 ? term : -term);
    if (lmag < -40.0) break;
  }
  return lead + std::log(sum / pi);
}

}  // namespace detail

/// Log density of the positive alpha-stable law with Laplace transform
/// exp(-w^alpha), from Zolotarev's integral
///   f(t) = a/(1-a) t^{-1/(1-a)} (1/pi) int_0^pi A(phi) exp(-t^{-a/(1-a)} A(phi)) dphi.
inline double log_stable_pdf(double alpha, double t) {
  detail::require(alpha > 0.0 && alpha < 1.0, "stable_pdf",
                  "alpha must lie in (0,1)");
  detail::require(t > 0.0, "stable_pdf", "t must be positive");
  if (std::isinf(t)) return -std::numeric_limits<double>::infinity();

  // Far tail: the integrand piles up against phi = pi, while the series
  // f(t) = 1/pi sum_k (-1)^{k+1} Gamma(k a + 1)/k! sin(k pi a) t^{-k a - 1}
  // converges geometrically in t^{-a}.
  if (alpha * std::log(t) > kStableSeriesCut) return detail::log_stable_tail_series(alpha, t);

  const double k = alpha / (1.0 - alpha);
  const double log_c = -k * std::log(t);
  const double la0 = detail::log_kanter_at_zero(alpha);
  const double ca0 = std::exp(log_c + la0);
  const double pi = std::numbers::pi;
  if (std::isinf(ca0)) return -std::numeric_limits<double>::infinity();

  // log of A(phi) exp(-c A(phi)) relative to its value at phi = 0.
  auto log_integrand = [&](double phi) {
    if (phi <= 0.0) return 0.0;
    if (phi >= pi) return -std::numeric_limits<double>::infinity();
    const double d = detail::log_kanter_excess(alpha, phi);
    if (log_c + la0 + d > 709.0) return -std::numeric_limits<double>::infinity();
    return d - ca0 * std::expm1(d);
  };

  // Peak where c A = 1, or at phi = 0 when c A(0) >= 1.
  const double mode = (la0 + log_c >= 0.0)
                          ? 0.0
                          : detail::kanter_inverse(alpha, -log_c);
  const double log_i = detail::log_integrate_unimodal(
      log_integrand, 0.0, mode, pi, 1e-10, "stable_pdf", 45.0);
  return std::log(k) - std::log(t) / (1.0 - alpha) - std::log(pi) + la0 - ca0 +
         log_i;
}

inline double stable_pdf(double alpha, double t) {
  return std::exp(log_stable_pdf(alpha, t));
}

/// Closed form of the alpha = 1/2 stable density.
inline double stable_pdf_half_closed(double t) {
  return std::pow(t, -1.5) * std::exp(-0.25 / t) /
         (2.0 * std::sqrt(std::numbers::pi));
}

/// log U(a, b, z), the confluent hypergeometric function of the second kind,
/// for z > 0 and a >= 0 (negative a is mapped through
/// U(a,b,z) = z^{1-b} U(1+a-b, 2-b, z) when that makes a positive).
/// Evaluated from the Laplace integral
///   U = 1/Gamma(a) int_0^inf e^{-zs} s^{a-1} (1+s)^{b-a-1} ds
/// in the variable y = log s, where the integrand is smooth and unimodal for
/// every a > 0 and z.
inline double log_kummer_u(double a, double b, double z) {
  detail::require(z > 0.0 && std::isfinite(z), "kummer_u",
                  "z must be positive and finite");
  detail::require(std::isfinite(a) && std::isfinite(b), "kummer_u",
                  "a and b must be finite");
  if (a == 0.0) return 0.0;
  if (a < 0.0) {
    detail::require(1.0 + a - b > 0.0, "kummer_u",
                    "a < 0 is supported only when 1 + a - b > 0");
    return (1.0 - b) * std::log(z) + log_kummer_u(1.0 + a - b, 2.0 - b, z);
  }
  const double c = b - a - 1.0;
  auto log_f = [=](double y) {
    const double s = std::exp(y);
    return -z * s + a * y + c * std::log1p(s);
  };
  // Stationary point: z s^2 + (z - c) s - a = 0, s > 0.
  const double p = z - c;
  const double disc = std::sqrt(p * p + 4.0 * z * a);
  const double s_mode = p > 0.0 ? 2.0 * a / (p + disc) : (disc - p) / (2.0 * z);
  const double inf = std::numeric_limits<double>::infinity();
  return detail::log_integrate_unimodal(log_f, -inf, std::log(s_mode), inf,
                                        1e-10, "kummer_u") -
         ln_gamma(a);
}

inline double kummer_u(double a, double b, double z) {
  return std::exp(log_kummer_u(a, b, z));
}

/// log U(a_top - j, b, z) for j = 0..count-1, a_top - count + 1 >= 0.
/// Two quadratures seed the top of the ladder; the rest follow from the
/// three-term recurrence U(a-1) = (2a - b + z) U(a) - a(a - b + 1) U(a+1),
/// which is stable in the direction of decreasing a.
inline std::vector<double> log_kummer_u_ladder(double a_top, double b, double z,
                                               int count) {
  detail::require(count >= 1 && a_top - (count - 1) >= 0.0, "kummer_u_ladder",
                  "ladder must stay at a >= 0");
  std::vector<double> out(static_cast<std::size_t>(count));
  out[0] = log_kummer_u(a_top, b, z);
  if (count == 1) return out;
  out[1] = log_kummer_u(a_top - 1.0, b, z);
  // ratio = U(a+1)/U(a) at a = a_top - 1.
  double ratio = std::exp(out[0] - out[1]);
  for (int j = 2; j < count; ++j) {
    const double a = a_top - (j - 1);
    const double down = (2.0 * a - b + z) - a * (a - b + 1.0) * ratio;
    if (!(down > 0.0)) {
      throw NumericError("kummer_u_ladder: recurrence lost positivity");
    }
    out[j] = out[j - 1] + std::log(down);
    ratio = 1.0 / down;
  }
  return out;
}

namespace detail {

inline void require_crp_params(double alpha, double theta, const char* who) {
  require(alpha >= 0.0 && alpha < 1.0, who, "alpha must lie in [0,1)");
  require(std::isfinite(theta) && theta > -alpha, who,
          "theta must exceed -alpha");
  require(alpha > 0.0 || theta > 0.0, who, "alpha = 0 requires theta > 0");
}

}  // namespace detail

/// Exact law of the block count K_n of an (alpha, theta) Chinese restaurant
/// partition of [n]. Result has size n + 1 with result[k] = P(K_n = k)
/// (result[0] = 0). Dynamic program over (customers seated, tables).
inline std::vector<double> exact_kn_pmf(double alpha, double theta, int n) {
  detail::require_crp_params(alpha, theta, "exact_kn_pmf");
  detail::require(n >= 1, "exact_kn_pmf", "n must be >= 1");
  std::vector<double> cur(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> next(cur.size(), 0.0);
  cur[1] = 1.0;
  for (int m = 1; m < n; ++m) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int k = 1; k <= m; ++k) {
      const double p = cur[k];
      if (p == 0.0) continue;
      const double fresh = (theta + k * alpha) / (theta + m);
      next[k + 1] += p * fresh;
      next[k] += p * (1.0 - fresh);
    }
    std::swap(cur, next);
  }
  return cur;
}

/// P(K_n = k) for a (1/2, 0) partition: C(2n-k-1, n-1) 2^{k+1-2n}.
///
/// The commonly quoted form with lower binomial index n disagrees with the
/// exact recursion (it gives P(K_n = n) = 0); this is the variant that the
/// recursion confirms.
inline double kn_closed_form_half(int n, int k) {
  detail::require(n >= 1 && k >= 1 && k <= n, "kn_closed_form_half",
                  "need 1 <= k <= n");
  const double top = 2.0 * n - k - 1.0;
  return std::exp(ln_binomial(top, n - 1.0) +
                  (k + 1.0 - 2.0 * n) * std::numbers::ln2);
}

/// The lower-index-n variant C(2n-k-1, n) 2^{k+1-2n}, kept for comparison.
inline double kn_closed_form_half_lower_n(int n, int k) {
  detail::require(n >= 1 && k >= 1 && k <= n, "kn_closed_form_half",
                  "need 1 <= k <= n");
  const double top = 2.0 * n - k - 1.0;
  if (top < n) return 0.0;
  return std::exp(ln_binomial(top, n) + (k + 1.0 - 2.0 * n) * std::numbers::ln2);
}

}  // namespace mlpa
