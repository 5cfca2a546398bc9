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

// Fixed-price (posted-price) auctions of m identical items to n unit-demand
// buyers with i.i.d. U[0,1] valuations.

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "diffmech/network.hpp"
#include "diffmech/random.hpp"

namespace diffmech {

struct FixedPriceConfig {
  std::int64_t buyer_count = 0;
  std::int64_t item_count = 0;
  double price = 0.0;

  void validate() const;
};

struct FixedPriceResult {
  double revenue = 0.0;
  /// Indices into the valuation span.
  std::vector<std::size_t> winners;
};

/// Buyers with value > price are interested; if more than item_count are,
/// winners are a uniform random subset. Revenue is price * #winners.
FixedPriceResult run_fp_auction(const FixedPriceConfig& config, std::span<const double> values,
                                Rng& rng);

/// p * E[min(m, X)], X ~ Binomial(n, 1 - p). Summed in log space outward from
/// the mode, so it stays finite for n up to 10^6 and beyond.
double expected_fp_revenue(std::int64_t buyer_count, std::int64_t item_count, double price);

/// (1 / (1 + n))^(1 / n).
double single_item_optimal_price(std::int64_t buyer_count);

struct PricePoint {
  double price = 0.0;
  double expected_revenue = 0.0;
};

/// Ex-ante revenue-maximising fixed price: grid of step 1e-3 over [0, 1], then
/// Brent refinement inside the best grid cell.
PricePoint optimal_fp_price(std::int64_t buyer_count, std::int64_t item_count);

/// Thread-safe memo for optimal_fp_price.
class OptimalPriceCache {
 public:
  PricePoint get(std::int64_t buyer_count, std::int64_t item_count);

 private:
  std::mutex mu_;
  std::map<std::pair<std::int64_t, std::int64_t>, PricePoint> memo_;
};

/// Fixed-price auction at the optimal price among the seller's direct
/// neighbours (R_0). Uses the valuations in `values` for those buyers.
double baseline_revenue(const SocialTree& tree, std::int64_t item_count,
                        const ValuationProfile& values, Rng& rng,
                        OptimalPriceCache* cache = nullptr);

/// Fixed-price auction at the optimal price among every buyer (R_opt).
double optimal_revenue(const SocialTree& tree, std::int64_t item_count,
                       const ValuationProfile& values, Rng& rng,
                       OptimalPriceCache* cache = nullptr);

}  // namespace diffmech
