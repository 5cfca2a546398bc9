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

#include "diffmech/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace diffmech {

void MechanismParams::validate() const {
  if (item_count < 0) throw std::invalid_argument("item count must be non-negative");
  if (!(reward_factor >= 0.0 && reward_factor < 1.0)) {
    throw std::invalid_argument("reward factor must lie in [0, 1)");
  }
}

std::vector<NodeId> MechanismOutcome::winners() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < allocation.size(); ++v) {
    if (allocation[v]) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

std::int64_t MechanismOutcome::winner_count() const {
  return std::count(allocation.begin(), allocation.end(), std::uint8_t{1});
}

MissingValuation::MissingValuation(NodeId v)
    : std::invalid_argument("no valuation for participant " + std::to_string(v)), node_(v) {}

double branch_price(std::int64_t k_minus_i, std::int64_t branch_count) {
  if (branch_count <= 0) throw std::invalid_argument("branch count must be positive");
  if (k_minus_i < 0) throw std::invalid_argument("k_minus_i must be non-negative");
  if (k_minus_i == 0) return std::exp(-1.0);
  const double t = static_cast<double>(k_minus_i) / static_cast<double>(branch_count);
  // log1p keeps precision when t is small.
  return std::exp(-std::log1p(t) / t);
}

std::vector<std::int64_t> allocate_quotas(std::int64_t item_count,
                                          std::span<const std::int64_t> branch_sizes) {
  if (item_count < 0) throw std::invalid_argument("item count must be non-negative");
  const std::int64_t k = std::accumulate(branch_sizes.begin(), branch_sizes.end(),
                                         std::int64_t{0});
  std::vector<std::int64_t> quota(branch_sizes.begin(), branch_sizes.end());
  if (item_count >= k) return quota;

  std::vector<std::int64_t> remainder(branch_sizes.size());
  std::int64_t assigned = 0;
  for (std::size_t b = 0; b < branch_sizes.size(); ++b) {
    if (branch_sizes[b] < 1) throw std::invalid_argument("branch sizes must be positive");
    const std::int64_t scaled = item_count * branch_sizes[b];
    quota[b] = scaled / k;  // < k_b because item_count < k
    remainder[b] = scaled % k;
    assigned += quota[b];
  }
  const auto leftover = static_cast<std::size_t>(item_count - assigned);
  if (leftover == 0) return quota;

  std::vector<std::size_t> order(branch_sizes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger_remainder = [&](std::size_t a, std::size_t b) {
    return remainder[a] != remainder[b] ? remainder[a] > remainder[b] : a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(leftover) - 1,
                   order.end(), larger_remainder);
  for (std::size_t i = 0; i < leftover; ++i) ++quota[order[i]];
  return quota;
}

std::vector<BranchPlan> plan_branches(const EffectiveMarket& market, std::int64_t item_count) {
  const auto branches = market.branches();
  std::vector<std::int64_t> sizes(branches.size());
  for (std::size_t b = 0; b < branches.size(); ++b) sizes[b] = branches[b].size;
  const auto quotas = allocate_quotas(item_count, sizes);

  std::vector<BranchPlan> plans(branches.size());
  for (std::size_t b = 0; b < branches.size(); ++b) {
    plans[b] = {branches[b].root, branch_price(market.size_outside(b), market.branch_count()),
                quotas[b]};
  }
  return plans;
}

std::vector<std::uint64_t> draw_tie_keys(std::size_t node_count, Rng& rng) {
  std::vector<std::uint64_t> keys(node_count);
  for (auto& k : keys) k = rng();
  return keys;
}

void MechanismKernel::allocate(const EffectiveMarket& market, std::span<const BranchPlan> plans,
                               std::span<const double> values,
                               std::span<const std::uint64_t> tie_keys,
                               std::vector<std::uint8_t>& allocation) {
  const std::size_t n = market.node_count();
  const std::size_t x = plans.size();
  allocation.assign(n, 0);

  // Bucket interested participants by branch (counting sort).
  bucket_offset_.assign(x + 1, 0);
  const auto participants = market.participants();
  for (NodeId v : participants) {
    const auto b = static_cast<std::size_t>(market.branch_index(v));
    if (values[static_cast<std::size_t>(v)] > plans[b].price) ++bucket_offset_[b + 1];
  }
  for (std::size_t b = 0; b < x; ++b) bucket_offset_[b + 1] += bucket_offset_[b];
  bucket_.resize(bucket_offset_[x]);
  {
    // below_ doubles as the fill cursor here.
    below_.assign(bucket_offset_.begin(), bucket_offset_.end() - 1);
    for (NodeId v : participants) {
      const auto b = static_cast<std::size_t>(market.branch_index(v));
      if (values[static_cast<std::size_t>(v)] > plans[b].price) {
        bucket_[static_cast<std::size_t>(below_[b]++)] = v;
      }
    }
  }

  auto ranks_before = [&](NodeId a, NodeId b) {
    if (market.depth(a) != market.depth(b)) return market.depth(a) < market.depth(b);
    if (market.child_count(a) != market.child_count(b)) {
      return market.child_count(a) > market.child_count(b);
    }
    const auto ka = tie_keys[static_cast<std::size_t>(a)];
    const auto kb = tie_keys[static_cast<std::size_t>(b)];
    return ka != kb ? ka < kb : a < b;
  };

  for (std::size_t b = 0; b < x; ++b) {
    auto first = bucket_.begin() + static_cast<std::ptrdiff_t>(bucket_offset_[b]);
    auto last = bucket_.begin() + static_cast<std::ptrdiff_t>(bucket_offset_[b + 1]);
    const auto interested = static_cast<std::int64_t>(last - first);
    const std::int64_t quota = plans[b].quota;
    if (quota <= 0) continue;
    if (interested > quota) {
      std::nth_element(first, first + quota - 1, last, ranks_before);
      last = first + quota;
    }
    for (auto it = first; it != last; ++it) allocation[static_cast<std::size_t>(*it)] = 1;
  }
}

void MechanismKernel::settle(const EffectiveMarket& market, std::span<const BranchPlan> plans,
                             double reward_factor, MechanismOutcome& out) {
  const std::size_t n = market.node_count();
  const auto participants = market.participants();
  out.net_payment.assign(n, 0.0);
  out.branch_plans.assign(plans.begin(), plans.end());

  below_.assign(plans.size(), 0);  // winners per branch
  for (NodeId v : participants) {
    if (out.allocation[static_cast<std::size_t>(v)]) {
      const auto b = static_cast<std::size_t>(market.branch_index(v));
      out.net_payment[static_cast<std::size_t>(v)] = plans[b].price;
      ++below_[b];
    }
  }
  double gross = 0.0;
  for (std::size_t b = 0; b < plans.size(); ++b) {
    gross += plans[b].price * static_cast<double>(below_[b]);
  }

  double rewards = 0.0;
  if (reward_factor > 0.0) {
    // below_[v] = winners strictly inside v's subtree; reverse BFS order visits
    // children before parents.
    below_.assign(n, 0);
    for (auto it = participants.rbegin(); it != participants.rend(); ++it) {
      const NodeId v = *it;
      const auto vi = static_cast<std::size_t>(v);
      const std::int64_t count = below_[vi];
      if (count > 0) {
        const double price = plans[static_cast<std::size_t>(market.branch_index(v))].price;
        const double reward = price * reward_factor *
                              std::ldexp(1.0, -market.depth(v)) * static_cast<double>(count);
        out.net_payment[vi] -= reward;
        rewards += reward;
      }
      const NodeId p = market.parent(v);
      if (p != kSeller) {
        below_[static_cast<std::size_t>(p)] += count + out.allocation[vi];
      }
    }
  }
  out.gross_revenue = gross;
  out.rewards_paid = rewards;
  out.seller_revenue = gross - rewards;
}

void MechanismKernel::run(const EffectiveMarket& market, std::span<const BranchPlan> plans,
                          std::span<const double> values,
                          std::span<const std::uint64_t> tie_keys, double reward_factor,
                          MechanismOutcome& out) {
  allocate(market, plans, values, tie_keys, out.allocation);
  settle(market, plans, reward_factor, out);
}

namespace {

void require_valuations(const EffectiveMarket& market, const ValuationProfile& values) {
  for (NodeId v : market.participants()) {
    if (!values.has(v)) throw MissingValuation(v);
  }
}

}  // namespace

MechanismOutcome run_mechanism(const EffectiveMarket& market, const ValuationProfile& values,
                               const MechanismParams& params,
                               std::span<const std::uint64_t> tie_keys) {
  params.validate();
  require_valuations(market, values);
  if (tie_keys.size() < market.node_count()) {
    throw std::invalid_argument("need one tie key per node");
  }
  const auto plans = plan_branches(market, params.item_count);
  MechanismKernel kernel;
  MechanismOutcome out;
  kernel.run(market, plans, values.values(), tie_keys, params.reward_factor, out);
  return out;
}

MechanismOutcome run_mechanism(const EffectiveMarket& market, const ValuationProfile& values,
                               const MechanismParams& params, Rng& rng) {
  params.validate();
  require_valuations(market, values);
  const auto keys = draw_tie_keys(market.node_count(), rng);
  return run_mechanism(market, values, params, keys);
}

double buyer_utility(const MechanismOutcome& outcome, const ValuationProfile& values,
                     NodeId buyer) {
  if (buyer <= 0 || static_cast<std::size_t>(buyer) >= outcome.net_payment.size()) {
    throw std::out_of_range("unknown buyer " + std::to_string(buyer));
  }
  const auto i = static_cast<std::size_t>(buyer);
  const double won = outcome.allocation[i] ? values[buyer] : 0.0;
  return won - outcome.net_payment[i];
}

}  // namespace diffmech
