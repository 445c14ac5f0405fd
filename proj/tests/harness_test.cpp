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

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mlpa/harness.hpp"
#include "mlpa/samplers.hpp"

namespace mlpa {
namespace {

// Alternating series, summed far past convergence.
double kolmogorov_q_series(double lambda) {
  double sum = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? term : -term);
  }
  return 2.0 * sum;
}

std::vector<double> uniforms(std::uint64_t seed, int n, double shift = 0.0) {
  RngStream rng(seed, 0);
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(rng.uniform() + shift);
  return v;
}

TEST(Kolmogorov, MatchesSeries) {
  for (double l : {0.4, 0.6, 0.9, 1.17, 1.19, 1.36, 2.0, 3.0}) {
    EXPECT_NEAR(kolmogorov_q(l), kolmogorov_q_series(l), 1e-12) << l;
  }
  EXPECT_NEAR(kolmogorov_q(1.36), 0.0494, 5e-4);
  EXPECT_DOUBLE_EQ(kolmogorov_q(0.0), 1.0);
  EXPECT_LT(kolmogorov_q(0.1), 1.0 + 1e-15);
}

TEST(KsTest, IdenticalSamplesHaveZeroDistance) {
  const auto x = uniforms(1, 500);
  const auto r = ks_two_sample(x, x);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(KsTest, DetectsShift) {
  EXPECT_LT(ks_two_sample(uniforms(1, 2000), uniforms(2, 2000, 0.15)).p_value, 1e-6);
  EXPECT_GT(ks_two_sample(uniforms(1, 2000), uniforms(2, 2000)).p_value, 1e-3);
  const auto u = uniforms(3, 2000);
  EXPECT_GT(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 1e-3);
  EXPECT_LT(ks_one_sample(u, [](double x) { return std::clamp(x * x, 0.0, 1.0); }).p_value, 1e-6);
}

TEST(KsTest, OneSampleStatisticByHand) {
  // Points at 0.1 .. 1.0 in steps of 0.01: largest gap to the uniform cdf is 0.1 at x = 0.1.
  std::vector<double> x;
  for (int i = 0; i < 100; ++i) x.push_back(0.1 + 0.9 * (i + 1) / 100.0 - 0.009);
  const auto r = ks_one_sample(x, [](double v) { return v; });
  double d = 0.0;
  for (int i = 0; i < 100; ++i) d = std::max({d, (i + 1) / 100.0 - x[i], x[i] - i / 100.0});
  EXPECT_DOUBLE_EQ(r.statistic, d);
}

TEST(KsTest, RejectsSmallSamples) {
  EXPECT_THROW(ks_two_sample(uniforms(1, 99), uniforms(2, 500)), std::domain_error);
  EXPECT_THROW(ks_one_sample(uniforms(1, 50), [](double v) { return v; }), std::domain_error);
}

TEST(Chi2, SingleCellIsVacuous) {
  const auto r = chi2_pmf_test({10}, {1.0});
  EXPECT_EQ(r.df, 0);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(Chi2, StatisticAndPooling) {
  // Expected 25 each; statistic (5^2 + 5^2 + 0 + 0) / 25 = 2 on 3 df.
  const auto r = chi2_pmf_test({30, 20, 25, 25}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_EQ(r.df, 3);
  EXPECT_NEAR(r.statistic, 2.0, 1e-12);
  // P(chi2_3 > 2) = erfc(1) + 2 exp(-1) / sqrt(pi) ... closed form for odd df.
  const double p = std::erfc(1.0) + std::sqrt(2.0 / std::numbers::pi) * std::sqrt(2.0) * std::exp(-1.0);
  EXPECT_NEAR(r.p_value, p, 1e-10);
  // Small tail cells fold into their left neighbour.
  const auto pooled = chi2_pmf_test({50, 46, 3, 1}, {0.5, 0.46, 0.03, 0.01});
  EXPECT_EQ(pooled.df, 1);
  EXPECT_THROW(chi2_pmf_test({1, 2}, {0.5, 0.4}), std::domain_error);
  EXPECT_THROW(chi2_pmf_test({1, 2}, {1.0}), std::domain_error);
}

TEST(Chi2, CombineAddsDegreesOfFreedom) {
  const auto c = chi2_combine({{2.0, 0.0, 3}, {1.0, 0.0, 1}, {0.0, 1.0, 0}});
  EXPECT_EQ(c.df, 4);
  EXPECT_DOUBLE_EQ(c.statistic, 3.0);
  // P(chi2_4 > 3) = exp(-1.5)(1 + 1.5).
  EXPECT_NEAR(c.p_value, std::exp(-1.5) * 2.5, 1e-12);
  EXPECT_DOUBLE_EQ(chi2_combine({}).p_value, 1.0);
}

TEST(Parallel, OutputIndependentOfJobs) {
  auto gen = [](RngStream& rng) { return sample_gamma(2.5, rng); };
  const auto a = draw_samples(1001, 42, 1, gen);
  const auto b = draw_samples(1001, 42, 3, gen);
  EXPECT_EQ(a, b);
  std::atomic<long> hits{0};
  parallel_for(37, 4, [&](long) { ++hits; });
  EXPECT_EQ(hits.load(), 37);
  parallel_for(0, 4, [&](long) { ++hits; });
  EXPECT_EQ(hits.load(), 37);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](long i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Suite, ExactCriterionIsDeterministic) {
  SuiteConfig c;
  c.seed = 11;
  c.only = {6};
  const auto a = run_suite(c);
  const auto b = run_suite(c);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].criterion, 6);
  EXPECT_TRUE(a[0].pass);
  EXPECT_EQ(suite_json(a, c).dump(), suite_json(b, c).dump());
}

TEST(Suite, StochasticCriterionRepeatsAcrossJobs) {
  SuiteConfig c;
  c.seed = 5;
  c.seeds = 3;
  c.samples = 400;
  c.only = {9};
  c.jobs = 1;
  const auto a = suite_json(run_suite(c), c).dump();
  c.jobs = 3;
  const auto b = suite_json(run_suite(c), c).dump();
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  ASSERT_FALSE(j["checks"].empty());
  EXPECT_EQ(j["checks"][0]["seeds"].size(), 3u);
  EXPECT_FALSE(j["checks"][0].contains("elapsed_seconds"));
}

TEST(Suite, TinySamplesAreUnderpoweredNotFailed) {
  SuiteConfig c;
  c.seed = 3;
  c.seeds = 2;
  c.samples = 100;
  c.only = {7};
  const auto reports = run_suite(c);
  ASSERT_FALSE(reports.empty());
  for (const auto& r : reports) {
    EXPECT_TRUE(r.underpowered) << r.name;
    EXPECT_FALSE(r.failed()) << r.name;
  }
}

TEST(Suite, OnlyFiltersAndOrders) {
  SuiteConfig c;
  c.samples = 200;
  c.seeds = 1;
  c.only = {6, 9};
  const auto reports = run_suite(c);
  ASSERT_GE(reports.size(), 2u);
  EXPECT_EQ(reports.front().criterion, 6);
  for (std::size_t i = 1; i < reports.size(); ++i) EXPECT_EQ(reports[i].criterion, 9);
}

TEST(Suite, RejectsInvalidConfig) {
  SuiteConfig c;
  c.suite = "full";
  EXPECT_THROW(run_suite(c), std::domain_error);
  c = {};
  c.seeds = 0;
  EXPECT_THROW(run_suite(c), std::domain_error);
  c = {};
  c.significance = 1.0;
  EXPECT_THROW(run_suite(c), std::domain_error);
  c = {};
  c.pass_rate = 0.0;
  EXPECT_THROW(run_suite(c), std::domain_error);
}

TEST(Suite, SummaryCsv) {
  VerifyReport r;
  r.criterion = 4;
  r.name = "x";
  r.kind = CheckKind::ks;
  r.statistic = 0.5;
  r.threshold = 0.95;
  r.underpowered = true;
  std::ostringstream os;
  write_summary_csv(os, {r});
  EXPECT_EQ(os.str(),
            "criterion,name,kind,statistic,threshold,pass,underpowered\n4,x,ks,0.5,0.95,0,1\n");
}

}  // namespace
}  // namespace mlpa
