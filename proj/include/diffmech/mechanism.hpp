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

// The multi-item diffusion mechanism.
//
// Each branch b (subtree of one of the seller's children) is offered a fixed
// price that depends only on the number of participants outside b and the
// number of branches, and a quota of items apportioned by branch size. Within
// a branch the quota goes to interested buyers ranked by depth, then by
// number of reachable children, then by a random key. Every ancestor of a
// winner (excluding the seller) is paid price * alpha * 2^-depth.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "diffmech/network.hpp"
#include "diffmech/random.hpp"

namespace diffmech {

struct MechanismParams {
  std::int64_t item_count = 0;
  double reward_factor = 0.01;

  /// Throws std::invalid_argument unless item_count >= 0 and 0 <= alpha < 1.
  void validate() const;
};

struct BranchPlan {
  NodeId branch_root = 0;
  double price = 0.0;
  std::int64_t quota = 0;

  friend bool operator==(const BranchPlan&, const BranchPlan&) = default;
};

struct MechanismOutcome {
  /// Per node label, 1 if the node received an item.
  std::vector<std::uint8_t> allocation;
  /// Per node label; negative values are net rewards received.
  std::vector<double> net_payment;
  std::vector<BranchPlan> branch_plans;
  /// Sum of prices paid by winners.
  double gross_revenue = 0.0;
  double rewards_paid = 0.0;
  /// gross_revenue - rewards_paid.
  double seller_revenue = 0.0;

  std::vector<NodeId> winners() const;
  std::int64_t winner_count() const;

  friend bool operator==(const MechanismOutcome&, const MechanismOutcome&) = default;
};

class MissingValuation : public std::invalid_argument {
 public:
  explicit MissingValuation(NodeId v);
  NodeId node() const noexcept { return node_; }

 private:
  NodeId node_;
};

/// (1 + t)^(-1/t) with t = k_minus_i / x; e^-1 at k_minus_i = 0.
double branch_price(std::int64_t k_minus_i, std::int64_t branch_count);

/// Base quota floor(m * k_i / k); the min(m, k) - sum leftover items go one
/// each to the branches with the largest remainder (m * k_i) mod k, ties to
/// the lower index. Index order is ascending branch-root label when sizes come
/// from an EffectiveMarket. Sizes must all be >= 1.
std::vector<std::int64_t> allocate_quotas(std::int64_t item_count,
                                          std::span<const std::int64_t> branch_sizes);

/// Prices and quotas for every branch of `market`. Deterministic.
std::vector<BranchPlan> plan_branches(const EffectiveMarket& market,
                                      std::int64_t item_count);

/// One uniform 64-bit key per node label, used to break ranking ties.
std::vector<std::uint64_t> draw_tie_keys(std::size_t node_count, Rng& rng);

/// Allocation and settlement with reusable scratch buffers. Not thread-safe;
/// use one instance per worker.
class MechanismKernel {
 public:
  /// Marks winners in `allocation` (resized to node_count). `values` and
  /// `tie_keys` are indexed by node label.
  void allocate(const EffectiveMarket& market, std::span<const BranchPlan> plans,
                std::span<const double> values, std::span<const std::uint64_t> tie_keys,
                std::vector<std::uint8_t>& allocation);

  /// Fills payments and revenue of `out` from `out.allocation`.
  void settle(const EffectiveMarket& market, std::span<const BranchPlan> plans,
              double reward_factor, MechanismOutcome& out);

  void run(const EffectiveMarket& market, std::span<const BranchPlan> plans,
           std::span<const double> values, std::span<const std::uint64_t> tie_keys,
           double reward_factor, MechanismOutcome& out);

 private:
  std::vector<std::size_t> bucket_offset_;
  std::vector<NodeId> bucket_;
  std::vector<std::int64_t> below_;
};

/// Full execution. Draws node_count tie keys from `rng` (in label order)
/// regardless of how many ties occur, so the generator's consumption depends
/// only on the tree size. Throws MissingValuation if a participant has no
/// valuation.
MechanismOutcome run_mechanism(const EffectiveMarket& market, const ValuationProfile& values,
                               const MechanismParams& params, Rng& rng);

/// Same, with caller-supplied tie keys.
MechanismOutcome run_mechanism(const EffectiveMarket& market, const ValuationProfile& values,
                               const MechanismParams& params,
                               std::span<const std::uint64_t> tie_keys);

/// pi_i * v_i - p_i. Throws std::out_of_range for an unknown label or the
/// seller.
double buyer_utility(const MechanismOutcome& outcome, const ValuationProfile& values,
                     NodeId buyer);

}  // namespace diffmech
