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

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "mlpa/samplers.hpp"
#include "mlpa/stats.hpp"

namespace mlpa {
namespace {

std::vector<double> draw(long n, std::uint64_t seed, const std::function<double(RngStream&)>& g) {
  RngStream rng(seed, 0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = g(rng);
  return out;
}

struct Moments {
  double mean;
  double se;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

#define EXPECT_WITHIN_SE(sample_moments, target, k)                                  \
  EXPECT_NEAR((sample_moments).mean, (target), (k) * (sample_moments).se)

TEST(RngStream, DeterministicAndStreamSeparated) {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<std::uint64_t> xa, xb, xc, xd;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a());
    xb.push_back(b());
    xc.push_back(c());
    xd.push_back(d());
  }
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
  EXPECT_NE(xa, xd);
  EXPECT_EQ(std::set<std::uint64_t>(xa.begin(), xa.end()).size(), xa.size());
}

TEST(RngStream, PhiloxKnownAnswer) {
  // Random123 kat_vectors, philox4x32 R=10, zero counter and key.
  RngStream r(0, 0);
  EXPECT_EQ(r(), 0xe169c58d6627e8d5ull);
  EXPECT_EQ(r(), 0x9b00dbd8bc57ac4cull);
}

TEST(RngStream, UniformOpenIntervalAndUnbiased) {
  const auto u = draw(200000, 1, [](RngStream& r) { return r.uniform(); });
  for (double v : u) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  EXPECT_GT(ks_one_sample(u, [](double x) { return x; }).p_value, 1e-3);
}

TEST(MixSeed, Spreads) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(7, 9), mix_seed(7, 9));
}

TEST(SampleGamma, MeanAndVariance) {
  for (double shape : {0.3, 2.5, 40.0}) {
    const auto x = draw(100000, 2, [&](RngStream& r) { return sample_gamma(shape, r); });
    EXPECT_WITHIN_SE(moments(x), shape, 4.0) << shape;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    EXPECT_WITHIN_SE(moments(sq), shape * (shape + 1.0), 4.0) << shape;
  }
  RngStream rng(1, 1);
  EXPECT_THROW(sample_gamma(0.0, rng), std::domain_error);
}

TEST(SampleBeta, UniformCase) {
  const auto x = draw(50000, 3, [](RngStream& r) { return sample_beta(1.0, 1.0, r); });
  EXPECT_GT(ks_one_sample(x, [](double v) { return v; }).p_value, 1e-3);
}

TEST(SampleBeta, CdfAgainstIncompleteBeta) {
  for (auto [a, b] : {std::pair{0.4, 2.0}, {3.0, 0.7}, {25.0, 5.0}}) {
    const auto x = draw(50000, 4, [&](RngStream& r) { return sample_beta(a, b, r); });
    const double p =
        ks_one_sample(x, [&](double v) { return boost::math::ibeta(a, b, v); }).p_value;
    EXPECT_GT(p, 1e-3) << a << ' ' << b;
  }
}

TEST(SampleBeta, TinyShapesStayInsideUnitInterval) {
  const auto x = draw(20000, 5, [](RngStream& r) { return sample_beta(0.01, 0.02, r); });
  for (double v : x) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_FALSE(std::isnan(v));
  }
  EXPECT_THROW(BetaParams(0.0, 1.0), std::domain_error);
}

TEST(SampleStable, HalfMatchesLevyCdf) {
  const auto x = draw(100000, 6, [](RngStream& r) { return sample_stable(0.5, r); });
  // P(S <= t) = erfc(1 / (2 sqrt t)).
  const double p = ks_one_sample(x, [](double t) {
                     return boost::math::erfc(0.5 / std::sqrt(t));
                   }).p_value;
  EXPECT_GT(p, 1e-3);
}

TEST(SampleStable, HalfAgreesWithInverseGamma) {
  const auto x = draw(100000, 15, [](RngStream& r) { return sample_stable(0.5, r); });
  const auto y = draw(100000, 16, [](RngStream& r) { return 0.25 / sample_gamma(0.5, r); });
  EXPECT_GT(ks_two_sample(x, y).p_value, 1e-3);
}

TEST(SampleBeta, ReflectionSwapsShapes) {
  // 1 - B_{a,b} has law B_{b,a}; with a = b the law is reflection invariant.
  for (auto [a, b] : {std::pair{1.0, 1.0}, {2.5, 2.5}, {1.0, 1.0 / 3.0}}) {
    const auto x = draw(100000, 17, [&](RngStream& r) { return sample_beta(a, b, r); });
    const auto y = draw(100000, 18, [&](RngStream& r) { return 1.0 - sample_beta(b, a, r); });
    EXPECT_GT(ks_two_sample(x, y).p_value, 1e-3) << a << ' ' << b;
  }
  const auto m = moments(draw(100000, 19, [](RngStream& r) { return sample_beta(2.0, 1.0, r); }));
  EXPECT_WITHIN_SE(m, 2.0 / 3.0, 4.0);
}

TEST(SampleStable, LaplaceTransform) {
  for (double a : {0.2, 0.6, 0.9}) {
    for (double w : {0.5, 1.0, 3.0}) {
      const auto x = draw(100000, 7, [&](RngStream& r) { return std::exp(-w * sample_stable(a, r)); });
      EXPECT_WITHIN_SE(moments(x), std::exp(-std::pow(w, a)), 4.0) << a << ' ' << w;
    }
  }
}

TEST(TiltedStable, HalfIsInverseGamma) {
  // S_{1/2,theta} = 1 / (4 G_{theta+1/2}).
  for (double th : {-0.3, 0.5, 1.0, 4.0}) {
    const TiltedStableSampler s(AlphaTheta(0.5, th));
    const auto x = draw(50000, 8, [&](RngStream& r) { return s(r); });
    const double p = ks_one_sample(x, [&](double t) {
                       return boost::math::gamma_q(th + 0.5, 0.25 / t);
                     }).p_value;
    EXPECT_GT(p, 1e-3) << th;
  }
}

TEST(TiltedStable, NegativeMomentsMatchGammaRatio) {
  for (auto [a, th] : {std::pair{0.3, 0.0}, {0.3, 2.0}, {0.6, -0.3}, {0.6, 1.0}, {0.8, 5.0},
                       {0.95, 0.5}, {0.1, 10.0}}) {
    const TiltedStableSampler s(AlphaTheta(a, th));
    const auto x = draw(100000, 9, [&](RngStream& r) { return s(r); });
    for (double d : {a / 2.0, a, 2.0 * a}) {
      std::vector<double> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(x[i], -d);
      EXPECT_WITHIN_SE(moments(y), neg_moment(a, th, d), 4.0) << a << ' ' << th << ' ' << d;
    }
  }
}

TEST(TiltedStable, ZeroTiltIsPlainStable) {
  RngStream r1(11, 2), r2(11, 2);
  const TiltedStableSampler s(AlphaTheta(0.4, 0.0));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(s(r1), sample_stable(0.4, r2));
}

TEST(TiltedStable, TiltReweightsPlainStable) {
  // P(S_{a,th} <= x) = E[S^{-th} 1{S <= x}] / E[S^{-th}] under the plain law.
  const double a = 0.7, th = 1.5;
  const auto plain = draw(400000, 12, [&](RngStream& r) { return sample_stable(a, r); });
  const auto tilted = draw(100000, 13, [&](RngStream& r) { return sample_tilted_stable({a, th}, r); });
  const double norm = neg_moment(a, 0.0, th);
  for (double x : {0.3, 0.7, 1.5, 4.0}) {
    double w = 0.0;
    for (double s : plain) w += s <= x ? std::pow(s, -th) : 0.0;
    const double ref = w / static_cast<double>(plain.size()) / norm;
    double hit = 0.0;
    for (double s : tilted) hit += s <= x ? 1.0 : 0.0;
    EXPECT_NEAR(hit / static_cast<double>(tilted.size()), ref, 0.01) << x;
  }
}

TEST(SampleGml, MeanAndRange) {
  for (auto [a, th] : {std::pair{0.5, 0.0}, {0.25, 1.0}, {0.75, -0.5}}) {
    const auto x = draw(100000, 14, [&](RngStream& r) { return sample_gml({a, th}, r); });
    for (double v : x) ASSERT_GT(v, 0.0);
    EXPECT_WITHIN_SE(moments(x), neg_moment(a, th, a), 4.0) << a << ' ' << th;
  }
}

TEST(Samplers, RejectBadParameters) {
  RngStream rng(1, 0);
  EXPECT_THROW(sample_stable(0.0, rng), std::domain_error);
  EXPECT_THROW(sample_stable(1.0, rng), std::domain_error);
  EXPECT_THROW(AlphaTheta(0.5, -0.5), std::domain_error);
  EXPECT_THROW(AlphaTheta(0.5, std::nan("")), std::domain_error);
}

}  // namespace
}  // namespace mlpa
