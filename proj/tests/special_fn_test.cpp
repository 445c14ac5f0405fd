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


#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mlpa/special_fn.hpp"

namespace mlpa {
namespace {

// Series for the positive stable density; good for t >= 1 and alpha near 1.
double stable_series(double alpha, double t) {
  double sum = 0.0;
  for (int k = 1; k < 2000; ++k) {
    const double lmag = std::lgamma(k * alpha + 1.0) - std::lgamma(k + 1.0) -
                        (k * alpha + 1.0) * std::log(t);
    const double term = std::exp(lmag) * std::sin(k * std::numbers::pi * alpha);
    sum += (k % 2 ? term : -term);
    if (lmag < -40.0 && k > 10) break;
  }
  return sum / std::numbers::pi;
}

// Kummer M by its power series.
double kummer_m(double a, double b, double z) {
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 500; ++k) {
    term *= (a + k) / (b + k) * z / (k + 1.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// U from M for non-integer b.
double kummer_u_from_m(double a, double b, double z) {
  return std::tgamma(1.0 - b) / std::tgamma(a - b + 1.0) * kummer_m(a, b, z) +
         std::tgamma(b - 1.0) / std::tgamma(a) * std::pow(z, 1.0 - b) *
             kummer_m(a - b + 1.0, 2.0 - b, z);
}

// Sum of a positive function over (0, inf) in log-variable, unit pieces.
template <class F>
double integrate_log_axis(F f, double lo, double hi) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  for (double y = lo; y < hi; y += 1.0) {
    total += GK::integrate([&](double x) { return std::exp(x) * f(std::exp(x)); }, y,
                           std::min(hi, y + 1.0), 8, 1e-13);
  }
  return total;
}

// P(K_n = k) by enumerating every seating sequence (block sizes tracked).
void enumerate_seatings(double alpha, double theta, std::vector<int>& sizes, int m, int n,
                        double prob, std::map<int, double>& out) {
  if (m == n) {
    out[static_cast<int>(sizes.size())] += prob;
    return;
  }
  const int k = static_cast<int>(sizes.size());
  for (int b = 0; b < k; ++b) {
    const double p = (sizes[b] - alpha) / (theta + m);
    ++sizes[b];
    enumerate_seatings(alpha, theta, sizes, m + 1, n, prob * p, out);
    --sizes[b];
  }
  sizes.push_back(1);
  enumerate_seatings(alpha, theta, sizes, m + 1, n, prob * (theta + k * alpha) / (theta + m), out);
  sizes.pop_back();
}

TEST(LnGamma, KnownValues) {
  EXPECT_DOUBLE_EQ(ln_gamma(1.0), 0.0);
  EXPECT_NEAR(ln_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
  EXPECT_NEAR(ln_gamma(10.0), std::log(362880.0), 1e-13);
  EXPECT_THROW(ln_gamma(0.0), std::domain_error);
  EXPECT_THROW(ln_gamma(-1.5), std::domain_error);
}

TEST(NegMoment, GammaRatioValues) {
  // E[S^{-1/2}_{1/2,1}] = Gamma(4) Gamma(2) / (Gamma(5/2) Gamma(3)).
  EXPECT_NEAR(neg_moment(0.5, 1.0, 0.5), 6.0 / (0.75 * std::sqrt(std::numbers::pi) * 2.0),
              1e-13);
  // E[S^{-alpha}_{alpha,0}] = 1 / Gamma(1 + alpha).
  for (double a : {0.1, 0.3, 0.5, 0.9}) {
    EXPECT_NEAR(neg_moment(a, 0.0, a), 1.0 / std::tgamma(1.0 + a), 1e-13) << a;
  }
}

TEST(NegMoment, ZeroExponentIsOne) {
  for (double a : {0.2, 0.5, 0.8}) {
    for (double th : {-0.1, 0.0, 1.0, 7.5}) {
      EXPECT_NEAR(neg_moment(a, th, 0.0), 1.0, 1e-14);
    }
  }
}

TEST(NegMoment, RejectsBadDomain) {
  EXPECT_THROW(neg_moment(0.5, -0.5, 0.1), std::domain_error);
  EXPECT_THROW(neg_moment(1.0, 0.0, 0.1), std::domain_error);
  EXPECT_THROW(neg_moment(0.5, 0.0, -0.6), std::domain_error);
}

TEST(BetaMoment, MatchesDirectIntegral) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double a = 2.5, b = 1.5, s = 0.7;
  const double direct = GK::integrate(
      [&](double x) { return std::pow(x, a + s - 1.0) * std::pow(1.0 - x, b - 1.0); }, 0.0, 1.0,
      15, 1e-12) / std::beta(a, b);
  EXPECT_NEAR(beta_moment(a, b, s), direct, 1e-10);
}

TEST(StablePdf, HalfMatchesClosedForm) {
  for (double t = 1e-3; t <= 1e3; t *= 1.7) {
    const double exact = stable_pdf_half_closed(t);
    EXPECT_NEAR(stable_pdf(0.5, t) / exact, 1.0, 1e-9) << "t=" << t;
  }
}

TEST(StablePdf, SeriesAtAlphaNinePointNine) {
  for (double t : {1.0, 1.5, 2.0, 5.0, 20.0, 100.0, 1e4}) {
    EXPECT_NEAR(stable_pdf(0.9, t) / stable_series(0.9, t), 1.0, 1e-8) << "t=" << t;
  }
}

TEST(StablePdf, ContinuousAcrossTailSwitch) {
  for (double a : {0.1, 0.4, 0.8, 0.97}) {
    const double t_cut = std::exp(kStableSeriesCut / a);
    for (double f : {0.999, 0.9999999, 1.0000001, 1.001}) {
      const double t = t_cut * f;
      EXPECT_NEAR(stable_pdf(a, t) / stable_series(a, t), 1.0, 1e-9) << a << ' ' << f;
    }
  }
}

TEST(StablePdf, HalfClosedFormDeepLeftTail) {
  // log densities around -1e10; compare in relative terms.
  for (double t : {1e-6, 1e-9, 1e-11}) {
    const double exact = -1.5 * std::log(t) - 0.25 / t - std::log(2.0 * std::sqrt(std::numbers::pi));
    EXPECT_NEAR(log_stable_pdf(0.5, t) / exact, 1.0, 1e-12) << t;
  }
}

TEST(StablePdf, IntegratesToOne) {
  for (double a : {0.3, 0.5, 0.7, 0.9}) {
    const double mass = integrate_log_axis([&](double t) { return stable_pdf(a, t); }, -30.0, 80.0);
    EXPECT_NEAR(mass, 1.0, 1e-6) << "alpha=" << a;
  }
}

TEST(StablePdf, ExtremeArguments) {
  EXPECT_EQ(stable_pdf(0.5, 1e-300), 0.0);
  EXPECT_EQ(stable_pdf(0.7, std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_TRUE(std::isfinite(log_stable_pdf(0.3, 1e-6)));
  EXPECT_TRUE(std::isfinite(log_stable_pdf(0.9, 1e12)));
  EXPECT_THROW(stable_pdf(0.5, 0.0), std::domain_error);
  EXPECT_THROW(stable_pdf(1.0, 1.0), std::domain_error);
}

TEST(KummerU, TrivialCases) {
  EXPECT_DOUBLE_EQ(kummer_u(0.0, 0.5, 3.0), 1.0);
  // U(1, 1, z) = e^z E_1(z); U(a, a+1, z) = z^{-a}.
  for (double z : {0.1, 1.0, 10.0, 200.0}) {
    EXPECT_NEAR(kummer_u(2.5, 3.5, z) * std::pow(z, 2.5), 1.0, 1e-9) << z;
  }
  EXPECT_NEAR(kummer_u(1.0, 1.0, 1.0), std::exp(1.0) * 0.21938393439552027, 1e-10);
}

TEST(KummerU, AgreesWithSeriesRepresentation) {
  for (double a : {0.3, 1.0, 2.5, 5.0}) {
    for (double b : {0.5, 1.5, -0.3}) {
      for (double z : {0.2, 1.0, 3.0}) {
        const double ref = kummer_u_from_m(a, b, z);
        EXPECT_NEAR(kummer_u(a, b, z) / ref, 1.0, 1e-8) << a << ' ' << b << ' ' << z;
      }
    }
  }
}

TEST(KummerU, LargeParameterReferenceValues) {
  // log U computed to 20 digits with an arbitrary precision library.
  EXPECT_NEAR(log_kummer_u(200.0, 0.5, 0.01), -862.8315075038971821, 1e-9 * 862.8);
  EXPECT_NEAR(log_kummer_u(150.5, 0.5, 2.0), -638.13768640804795341, 1e-9 * 638.1);
  EXPECT_NEAR(log_kummer_u(3.0, 0.5, 1e-4), -0.66179445167635264408, 1e-9);
  EXPECT_NEAR(log_kummer_u(0.25, 0.5, 50.0), -0.98168366810055390204, 1e-9);
}

TEST(KummerU, RecurrencesHold) {
  const double b = 0.5;
  for (double a : {1.7, 3.0, 12.5, 60.0}) {
    for (double z : {0.05, 1.0, 40.0}) {
      // U(a-1) = (2a - b + z) U(a) - a (a - b + 1) U(a+1)
      const double lhs = kummer_u(a - 1.0, b, z);
      const double rhs = (2.0 * a - b + z) * kummer_u(a, b, z) -
                         a * (a - b + 1.0) * kummer_u(a + 1.0, b, z);
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-7) << a << ' ' << z;
      // Kummer transformation.
      EXPECT_NEAR(log_kummer_u(a, b, z),
                  (1.0 - b) * std::log(z) + log_kummer_u(1.0 + a - b, 2.0 - b, z),
                  1e-9 * (1.0 + std::abs(log_kummer_u(a, b, z))));
    }
  }
}

TEST(KummerU, LadderMatchesDirectEvaluation) {
  for (double z : {0.01, 0.3, 5.0}) {
    const auto ladder = log_kummer_u_ladder(40.5, 0.5, z, 41);
    for (int j : {0, 1, 2, 10, 25, 40}) {
      EXPECT_NEAR(ladder[j], log_kummer_u(40.5 - j, 0.5, z), 1e-9 * (1.0 + std::abs(ladder[j])))
          << z << ' ' << j;
    }
  }
  EXPECT_THROW(log_kummer_u_ladder(3.0, 0.5, 1.0, 5), std::domain_error);
}

TEST(ExactKnPmf, MatchesEnumeration) {
  for (auto [a, th] : {std::pair{0.5, 0.0}, {0.3, 1.2}, {0.0, 2.0}, {0.7, -0.4}}) {
    for (int n = 1; n <= 7; ++n) {
      std::map<int, double> ref;
      std::vector<int> sizes{1};
      enumerate_seatings(a, th, sizes, 1, n, 1.0, ref);
      const auto pmf = exact_kn_pmf(a, th, n);
      ASSERT_EQ(pmf.size(), static_cast<std::size_t>(n) + 1);
      EXPECT_EQ(pmf[0], 0.0);
      for (int k = 1; k <= n; ++k) EXPECT_NEAR(pmf[k], ref[k], 1e-14) << a << ' ' << n << ' ' << k;
    }
  }
}

TEST(ExactKnPmf, SumsToOneAndKnownValues) {
  for (int n : {1, 10, 200, 1000}) {
    const auto pmf = exact_kn_pmf(0.4, 0.6, n);
    EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
  }
  // alpha = 0: P(K_n = n) = theta^n / theta^{(n)} (rising factorial).
  const auto p = exact_kn_pmf(0.0, 1.0, 5);
  EXPECT_NEAR(p[5], 1.0 / 120.0, 1e-15);
  EXPECT_NEAR(p[1], 24.0 / 120.0, 1e-15);
  EXPECT_THROW(exact_kn_pmf(0.0, 0.0, 3), std::domain_error);
  EXPECT_THROW(exact_kn_pmf(0.5, -0.5, 3), std::domain_error);
  EXPECT_THROW(exact_kn_pmf(0.5, 0.0, 0), std::domain_error);
}

TEST(KnClosedFormHalf, MatchesRecursion) {
  for (int n = 1; n <= 60; ++n) {
    const auto pmf = exact_kn_pmf(0.5, 0.0, n);
    for (int k = 1; k <= n; ++k) EXPECT_NEAR(kn_closed_form_half(n, k), pmf[k], 1e-13);
  }
  EXPECT_DOUBLE_EQ(kn_closed_form_half(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(kn_closed_form_half(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(kn_closed_form_half(2, 2), 0.5);
}

TEST(KnClosedFormHalf, LowerIndexVariantDiffers) {
  EXPECT_EQ(kn_closed_form_half_lower_n(4, 4), 0.0);
  EXPECT_GT(kn_closed_form_half(4, 4), 0.0);
  double total = 0.0;
  for (int k = 1; k <= 10; ++k) total += kn_closed_form_half_lower_n(10, k);
  EXPECT_LT(total, 0.99);
  EXPECT_THROW(kn_closed_form_half(3, 4), std::domain_error);
}

}  // namespace
}  // namespace mlpa
