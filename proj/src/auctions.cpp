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

#include "diffmech/auctions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace diffmech {

void FixedPriceConfig::validate() const {
  if (buyer_count < 0) throw std::invalid_argument("buyer count must be non-negative");
  if (item_count < 0) throw std::invalid_argument("item count must be non-negative");
  if (!(price >= 0.0 && price <= 1.0)) throw std::invalid_argument("price must lie in [0, 1]");
}

FixedPriceResult run_fp_auction(const FixedPriceConfig& config, std::span<const double> values,
                                Rng& rng) {
  config.validate();
  if (values.size() != static_cast<std::size_t>(config.buyer_count)) {
    throw std::invalid_argument("valuation count does not match buyer count");
  }
  FixedPriceResult out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > config.price) out.winners.push_back(i);
  }
  const auto m = static_cast<std::size_t>(config.item_count);
  if (out.winners.size() > m) {
    // Partial Fisher-Yates: the first m slots become a uniform m-subset.
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, out.winners.size() - 1);
      std::swap(out.winners[i], out.winners[pick(rng)]);
    }
    out.winners.resize(m);
    std::sort(out.winners.begin(), out.winners.end());
  }
  out.revenue = config.price * static_cast<double>(out.winners.size());
  return out;
}

double expected_fp_revenue(std::int64_t buyer_count, std::int64_t item_count, double price) {
  if (!(price >= 0.0 && price <= 1.0)) throw std::invalid_argument("price must lie in [0, 1]");
  if (buyer_count < 0 || item_count < 0) {
    throw std::invalid_argument("counts must be non-negative");
  }
  if (price == 0.0 || price == 1.0 || buyer_count == 0 || item_count == 0) return 0.0;

  const auto n = static_cast<double>(buyer_count);
  const double log_q = std::log1p(-price);  // interest probability 1 - p
  const double log_p = std::log(price);
  const double log_ratio = log_q - log_p;

  auto capped = [&](std::int64_t j) {
    return static_cast<double>(std::min(j, item_count));
  };

  auto mode = static_cast<std::int64_t>(std::floor((n + 1.0) * (1.0 - price)));
  mode = std::clamp<std::int64_t>(mode, 0, buyer_count);
  const double log_mode = std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(mode) + 1.0) -
                          std::lgamma(n - static_cast<double>(mode) + 1.0) +
                          static_cast<double>(mode) * log_q + (n - static_cast<double>(mode)) * log_p;
  // Terms more than e^-745 below the mode underflow to zero.
  const double cutoff = log_mode - 745.0;

  double sum = capped(mode) * std::exp(log_mode);
  double lt = log_mode;
  for (std::int64_t j = mode; j < buyer_count; ++j) {
    lt += std::log(n - static_cast<double>(j)) - std::log(static_cast<double>(j) + 1.0) + log_ratio;
    if (lt < cutoff) break;
    sum += capped(j + 1) * std::exp(lt);
  }
  lt = log_mode;
  for (std::int64_t j = mode; j > 0; --j) {
    lt += std::log(static_cast<double>(j)) - std::log(n - static_cast<double>(j) + 1.0) - log_ratio;
    if (lt < cutoff) break;
    sum += capped(j - 1) * std::exp(lt);
  }
  return price * sum;
}

double single_item_optimal_price(std::int64_t buyer_count) {
  if (buyer_count <= 0) throw std::invalid_argument("buyer count must be positive");
  const auto n = static_cast<double>(buyer_count);
  return std::exp(-std::log1p(n) / n);
}

PricePoint optimal_fp_price(std::int64_t buyer_count, std::int64_t item_count) {
  if (buyer_count < 1 || item_count < 1) {
    throw std::invalid_argument("optimal price needs at least one buyer and one item");
  }
  constexpr int kGrid = 1000;
  int best = 0;
  double best_value = -1.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = expected_fp_revenue(buyer_count, item_count, i / double(kGrid));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = std::max(0, best - 1) / double(kGrid);
  const double hi = std::min(kGrid, best + 1) / double(kGrid);
  auto negated = [&](double p) { return -expected_fp_revenue(buyer_count, item_count, p); };
  const auto [p, neg] = boost::math::tools::brent_find_minima(
      negated, lo, hi, std::numeric_limits<double>::digits / 2 + 4);
  if (-neg >= best_value) return {p, -neg};
  return {best / double(kGrid), best_value};
}

PricePoint OptimalPriceCache::get(std::int64_t buyer_count, std::int64_t item_count) {
  const auto key = std::make_pair(buyer_count, item_count);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  // Computed outside the lock; a duplicate computation is harmless.
  const auto point = optimal_fp_price(buyer_count, item_count);
  std::lock_guard lock(mu_);
  return memo_.emplace(key, point).first->second;
}

namespace {

double fp_revenue_over(std::span<const NodeId> buyers, std::int64_t item_count,
                       const ValuationProfile& values, Rng& rng, OptimalPriceCache* cache) {
  if (buyers.empty() || item_count < 1) return 0.0;
  const auto n = static_cast<std::int64_t>(buyers.size());
  const PricePoint point = cache ? cache->get(n, item_count) : optimal_fp_price(n, item_count);
  std::vector<double> v(buyers.size());
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    if (!values.has(buyers[i])) throw std::invalid_argument("missing valuation");
    v[i] = values[buyers[i]];
  }
  return run_fp_auction({n, item_count, point.price}, v, rng).revenue;
}

}  // namespace

double baseline_revenue(const SocialTree& tree, std::int64_t item_count,
                        const ValuationProfile& values, Rng& rng, OptimalPriceCache* cache) {
  return fp_revenue_over(tree.children(kSeller), item_count, values, rng, cache);
}

double optimal_revenue(const SocialTree& tree, std::int64_t item_count,
                       const ValuationProfile& values, Rng& rng, OptimalPriceCache* cache) {
  std::vector<NodeId> all(tree.buyer_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i + 1);
  return fp_revenue_over(all, item_count, values, rng, cache);
}

}  // namespace diffmech
