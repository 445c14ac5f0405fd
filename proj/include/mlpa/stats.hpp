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
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mlpa/errors.hpp"

namespace mlpa {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  const double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi theta form, fast for small lambda.
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 15; k += 2) sum += std::pow(y, k * k);
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace detail {

// Asymptotic p-value with Stephens' small-sample correction.
inline double ks_p_value(double d, double effective_n) {
  const double en = std::sqrt(effective_n);
  return kolmogorov_q((en + 0.12 + 0.11 / en) * d);
}

}  // namespace detail

inline constexpr std::size_t kMinKsSample = 100;

/// Two-sample Kolmogorov-Smirnov test.
inline TestResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
  detail::require(x.size() >= kMinKsSample && y.size() >= kMinKsSample, "ks_two_sample",
                  "each sample needs at least 100 values");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  return {d, detail::ks_p_value(d, nx * ny / (nx + ny))};
}

/// One-sample Kolmogorov-Smirnov test against a continuous cdf.
inline TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  detail::require(x.size() >= kMinKsSample, "ks_one_sample",
                  "sample needs at least 100 values");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, detail::ks_p_value(d, n)};
}

struct Chi2Result {
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
};

/// Pearson chi-square of observed counts against a pmf over the same cells.
/// Adjacent cells are pooled left to right until each pooled cell expects at
/// least `min_expected` counts; a short remainder joins the last pooled cell.
inline Chi2Result chi2_pmf_test(const std::vector<long>& observed, const std::vector<double>& pmf,
                                double min_expected = 5.0) {
  detail::require(!observed.empty() && observed.size() == pmf.size(), "chi2_pmf_test",
                  "observed and expected must cover the same non-empty cells");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double mass = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  detail::require(total > 0.0 && mass > 0.0, "chi2_pmf_test", "no observations or no mass");
  detail::require(std::abs(mass - 1.0) < 1e-6, "chi2_pmf_test", "pmf must sum to 1");

  std::vector<double> obs, expc;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    o += observed[i];
    e += total * pmf[i] / mass;
    if (e >= min_expected) {
      obs.push_back(o);
      expc.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (obs.empty()) {
      obs.push_back(o);
      expc.push_back(e);
    } else {
      obs.back() += o;
      expc.back() += e;
    }
  }
  if (obs.size() < 2) return {0.0, 1.0, 0};
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    stat += (obs[i] - expc[i]) * (obs[i] - expc[i]) / expc[i];
  }
  const int df = static_cast<int>(obs.size()) - 1;
  const boost::math::chi_squared dist(df);
  return {stat, boost::math::cdf(boost::math::complement(dist, stat)), df};
}

/// Sum of independent chi-square tests (statistics and degrees of freedom add).
inline Chi2Result chi2_combine(const std::vector<Chi2Result>& parts) {
  Chi2Result out;
  for (const auto& p : parts) {
    out.statistic += p.statistic;
    out.df += p.df;
  }
  if (out.df == 0) return {0.0, 1.0, 0};
  const boost::math::chi_squared dist(out.df);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace mlpa
