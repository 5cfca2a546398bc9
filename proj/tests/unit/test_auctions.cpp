// Copyright 2026 The diffmech Authors.
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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "diffmech/auctions.hpp"

using namespace diffmech;
using doctest::Approx;

namespace {

// Direct sum with binomial coefficients built by multiplication; fine for
// small n in long double.
// Returns p * E[min(m, X)^power], X ~ Bin(n, 1 - p).
long double direct_moment(int n, int m, long double p, int power) {
  long double total = 0.0L;
  long double choose = 1.0L;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) choose = choose * (n - j + 1) / j;
    const long double prob = choose * std::pow(1.0L - p, j) * std::pow(p, n - j);
    total += prob * std::pow(static_cast<long double>(std::min(j, m)), power);
  }
  return std::pow(p, power) * total;
}

long double direct_expected(int n, int m, long double p) { return direct_moment(n, m, p, 1); }

}  // namespace

TEST_CASE("run_fp_auction examples") {
  Rng rng(1);
  const std::vector<double> v{0.2, 0.6, 0.9};
  CHECK(run_fp_auction({3, 1, 1.0}, v, rng).revenue == 0.0);

  int second = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto r = run_fp_auction({3, 1, 0.5}, v, rng);
    CHECK(r.revenue == 0.5);
    REQUIRE(r.winners.size() == 1);
    CHECK(r.winners[0] != 0);
    second += r.winners[0] == 1;
  }
  CHECK(second > 900);
  CHECK(second < 1100);

  const std::vector<double> high{0.6, 0.7, 0.8, 0.9};
  CHECK(run_fp_auction({4, 4, 0.5}, high, rng).revenue == 2.0);
  CHECK(run_fp_auction({4, 9, 0.5}, high, rng).revenue == 2.0);
  // Strict interest: value equal to the price does not buy.
  const std::vector<double> tie{0.5};
  CHECK(run_fp_auction({1, 1, 0.5}, tie, rng).revenue == 0.0);

  CHECK_THROWS_AS(run_fp_auction({3, 1, 1.5}, v, rng), std::invalid_argument);
  CHECK_THROWS_AS(run_fp_auction({2, 1, 0.5}, v, rng), std::invalid_argument);
}

TEST_CASE("expected_fp_revenue examples") {
  CHECK(expected_fp_revenue(1, 1, 0.5) == Approx(0.25).epsilon(1e-14));
  CHECK(expected_fp_revenue(2, 1, 0.5) == Approx(0.375).epsilon(1e-14));
  CHECK(expected_fp_revenue(10, 10, 0.5) == Approx(2.5).epsilon(1e-13));
  CHECK(expected_fp_revenue(10, 0, 0.5) == 0.0);
  CHECK(expected_fp_revenue(10, 3, 1.0) == 0.0);
  CHECK_THROWS_AS(expected_fp_revenue(10, 3, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(expected_fp_revenue(10, 3, 1.1), std::invalid_argument);
}

TEST_CASE("expected_fp_revenue matches the direct sum") {
  for (int n = 1; n <= 60; n += 3) {
    for (int m : {1, 2, 5, 17, 60}) {
      for (double p : {0.001, 0.1, 0.37, 0.5, 0.77, 0.999}) {
        const double want = static_cast<double>(direct_expected(n, m, p));
        CHECK(expected_fp_revenue(n, m, p) == Approx(want).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("expected_fp_revenue stays finite at large n") {
  const double r = expected_fp_revenue(1000000, 1000, 0.5);
  CHECK(std::isfinite(r));
  CHECK(r == Approx(500.0).epsilon(1e-9));
  const double uncapped = expected_fp_revenue(1000000, 1000000, 0.3);
  CHECK(uncapped == Approx(0.3 * 0.7 * 1e6).epsilon(1e-9));
  // m near the mean: the min() bites on half the mass.
  const double near = expected_fp_revenue(100000, 50000, 0.5);
  CHECK(near < 25000.0);
  CHECK(near > 25000.0 - 0.5 * 200.0);
}

TEST_CASE("single_item_optimal_price") {
  CHECK(single_item_optimal_price(1) == Approx(0.5).epsilon(1e-15));
  CHECK(single_item_optimal_price(3) == Approx(0.6299605249474366).epsilon(1e-14));
  double prev = 0.0;
  for (int n = 1; n < 5000; n += 13) {
    const double p = single_item_optimal_price(n);
    CHECK(p > prev);
    CHECK(p < 1.0);
    prev = p;
  }
  CHECK_THROWS_AS(single_item_optimal_price(0), std::invalid_argument);
}

TEST_CASE("optimal_fp_price") {
  auto one = optimal_fp_price(1, 1);
  CHECK(one.price == Approx(0.5).epsilon(1e-7));
  CHECK(one.expected_revenue == Approx(0.25).epsilon(1e-12));
  CHECK(optimal_fp_price(3, 1).price == Approx(0.6299605249).epsilon(1e-7));
  auto ten = optimal_fp_price(10, 10);
  CHECK(std::abs(ten.price - 0.5) < 1e-7);
  CHECK(ten.expected_revenue == Approx(2.5).epsilon(1e-12));
  for (int n = 1; n <= 100; ++n) {
    CHECK(std::abs(optimal_fp_price(n, 1).price - single_item_optimal_price(n)) < 1e-6);
  }
  // No neighbouring price does better.
  for (auto [n, m] : {std::pair{30, 4}, {200, 10}, {1000, 50}}) {
    const auto pt = optimal_fp_price(n, m);
    for (double d : {-1e-4, 1e-4}) {
      CHECK(expected_fp_revenue(n, m, pt.price + d) <= pt.expected_revenue);
    }
  }
  const auto big = optimal_fp_price(10000, 1);
  CHECK(big.expected_revenue == Approx(0.999).epsilon(1e-3));
  CHECK_THROWS_AS(optimal_fp_price(0, 1), std::invalid_argument);

  OptimalPriceCache cache;
  CHECK(cache.get(30, 4).price == optimal_fp_price(30, 4).price);
  CHECK(cache.get(30, 4).price == optimal_fp_price(30, 4).price);
}

TEST_CASE("Monte-Carlo agrees with expected_fp_revenue") {
  Rng rng(31);
  for (int triple = 0; triple < 20; ++triple) {
    const auto n = 1 + static_cast<std::int64_t>(rng() % 30);
    const auto m = 1 + static_cast<std::int64_t>(rng() % n);
    const double p = uniform01(rng);
    const int samples = 20000;
    double sum = 0.0;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int s = 0; s < samples; ++s) {
      for (auto& x : v) x = uniform01(rng);
      sum += run_fp_auction({n, m, p}, v, rng).revenue;
    }
    // Exact standard error; the sample variance collapses when the revenue
    // is almost surely constant.
    const auto ni = static_cast<int>(n), mi = static_cast<int>(m);
    const long double mu = direct_moment(ni, mi, p, 1);
    const double sd = static_cast<double>(std::sqrt(direct_moment(ni, mi, p, 2) - mu * mu));
    const double se = sd / std::sqrt(double(samples));
    CHECK(std::abs(sum / samples - expected_fp_revenue(n, m, p)) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("baseline and optimal revenue structure") {
  const auto path = path_tree(4);  // S - A - B - C
  Rng rng(4);
  // R_0 auctions A alone at price 0.5.
  CHECK(baseline_revenue(path, 1, ValuationProfile({NAN, 0.9, 0.0, 0.0}), rng) ==
        Approx(0.5).epsilon(1e-7));
  CHECK(baseline_revenue(path, 1, ValuationProfile({NAN, 0.3, 0.99, 0.99}), rng) == 0.0);
  // R_opt auctions all three at (1/4)^(1/3).
  CHECK(optimal_revenue(path, 1, ValuationProfile({NAN, 0.0, 0.0, 0.9}), rng) ==
        Approx(0.6299605249).epsilon(1e-7));

  // On a star both auctions see the same buyers.
  const auto star = star_tree(8);
  Rng a(9), b(9);
  const auto values = ValuationProfile::uniform(8, a);
  b.discard(7);
  CHECK(baseline_revenue(star, 2, values, a) == optimal_revenue(star, 2, values, b));
}
