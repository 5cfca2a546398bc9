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

#include "diffmech/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "diffmech/io.hpp"

namespace diffmech {

std::vector<IrViolation> ir_violations(const MechanismOutcome& outcome,
                                       const ValuationProfile& values) {
  std::vector<IrViolation> out;
  for (std::size_t v = 1; v < outcome.net_payment.size(); ++v) {
    const auto id = static_cast<NodeId>(v);
    const double won = outcome.allocation[v] ? values[id] : 0.0;
    const double u = won - outcome.net_payment[v];
    if (u < 0.0) out.push_back({id, u});
  }
  return out;
}

std::vector<IrViolation> check_ir(const EffectiveMarket& market, const ValuationProfile& values,
                                  const MechanismParams& params, Rng& rng) {
  return ir_violations(run_mechanism(market, values, params, rng), values);
}

bool check_feasibility(const MechanismOutcome& outcome, const EffectiveMarket& market,
                       std::int64_t item_count) {
  if (outcome.allocation.size() != market.node_count()) return false;
  if (outcome.allocation[0] != 0) return false;
  std::int64_t total = 0;
  for (std::size_t v = 1; v < outcome.allocation.size(); ++v) {
    if (outcome.allocation[v] == 0) continue;
    if (outcome.allocation[v] != 1 || !market.participates(static_cast<NodeId>(v))) return false;
    ++total;
  }
  return total <= item_count;
}

bool respects_quotas(const MechanismOutcome& outcome, const EffectiveMarket& market) {
  std::vector<std::int64_t> won(outcome.branch_plans.size(), 0);
  for (NodeId v : market.participants()) {
    if (outcome.allocation[static_cast<std::size_t>(v)]) {
      ++won[static_cast<std::size_t>(market.branch_index(v))];
    }
  }
  for (std::size_t b = 0; b < won.size(); ++b) {
    if (won[b] > outcome.branch_plans[b].quota) return false;
  }
  return true;
}

InstanceSweepResult ir_feasibility_sweep(std::int64_t instances, std::int64_t max_buyers,
                                         std::uint64_t master_seed,
                                         const ExecutionOptions& exec) {
  if (instances < 0 || max_buyers < 1) {
    throw std::invalid_argument("need instances >= 0 and max_buyers >= 1");
  }
  constexpr double kAlphas[] = {0.0, 0.01, 0.1};
  std::vector<std::optional<InstanceViolation>> found(static_cast<std::size_t>(instances));
  std::vector<std::pair<bool, bool>> flags(found.size());
  parallel_for(found.size(), exec, [&](std::size_t i, int) {
    const auto seed = stream_seed(master_seed, 0x1e, i);
    Rng rng(seed);
    const auto n = std::uniform_int_distribution<std::int64_t>(1, max_buyers)(rng);
    const auto m = std::uniform_int_distribution<std::int64_t>(1, n)(rng);
    const double alpha = kAlphas[i % 3];
    const auto tree = random_tree(static_cast<std::size_t>(n) + 1, rng);
    auto actions = full_diffusion(tree);
    for (std::size_t v = 1; v < tree.node_count(); ++v) {
      for (NodeId c : tree.children(static_cast<NodeId>(v))) {
        actions.set_informs(tree, static_cast<NodeId>(v), c, uniform01(rng) < 0.8);
      }
    }
    const auto market = effective_market(tree, actions);
    const auto values = ValuationProfile::uniform(tree.node_count(), rng);
    const auto outcome = run_mechanism(market, values, {m, alpha}, rng);
    const bool ir_ok = ir_violations(outcome, values).empty();
    const bool feasible =
        check_feasibility(outcome, market, m) && respects_quotas(outcome, market);
    flags[i] = {!ir_ok, !feasible};
    if (!ir_ok || !feasible) {
      found[i] = InstanceViolation{ir_ok ? "feasibility" : "individual_rationality", tree, seed,
                                   m, alpha};
    }
  });

  InstanceSweepResult out;
  out.instances = instances;
  for (std::size_t i = 0; i < found.size(); ++i) {
    out.ir_violations += flags[i].first;
    out.feasibility_violations += flags[i].second;
    if (found[i]) out.violations.push_back(std::move(*found[i]));
  }
  return out;
}

nlohmann::json violation_json(const InstanceViolation& v) {
  return {{"kind", v.kind},
          {"tree", tree_to_json(v.tree)},
          {"seed", v.seed},
          {"m", v.item_count},
          {"alpha", v.alpha}};
}

namespace {

ActionProfile deviation_for_mask(const SocialTree& tree, NodeId buyer, std::uint64_t mask) {
  auto profile = ActionProfile::full_diffusion(tree);
  const auto children = tree.children(buyer);
  for (std::size_t i = 0; i < children.size(); ++i) {
    profile.set_informs(tree, buyer, children[i], (mask >> i) & 1U);
  }
  return profile;
}

}  // namespace

std::vector<ActionProfile> enumerate_deviations(const SocialTree& tree, NodeId buyer) {
  if (buyer <= 0 || static_cast<std::size_t>(buyer) >= tree.node_count()) {
    throw std::out_of_range("unknown buyer " + std::to_string(buyer));
  }
  const std::size_t c = tree.children(buyer).size();
  if (c > 20) throw TreeTooLarge("buyer has too many children to enumerate deviations");
  std::vector<ActionProfile> out;
  const std::uint64_t full = (std::uint64_t{1} << c) - 1;
  out.reserve(full);
  for (std::uint64_t mask = 0; mask < full; ++mask) {
    out.push_back(deviation_for_mask(tree, buyer, mask));
  }
  return out;
}

namespace {

struct Arm {
  NodeId buyer;
  std::vector<NodeId> informed;
  EffectiveMarket market;
  std::vector<BranchPlan> plans;
};

struct PairedStats {
  double sum_truthful = 0.0;
  double sum_deviating = 0.0;
  double sum_diff = 0.0;
  double sum_diff2 = 0.0;
};

}  // namespace

std::vector<DeviationReport> check_dic(const SocialTree& tree, std::int64_t item_count,
                                       std::span<const double> alphas,
                                       std::int64_t sample_count, std::uint64_t seed) {
  const std::size_t n = tree.node_count();
  if (n > kMaxDicNodes) {
    throw TreeTooLarge("tree has " + std::to_string(n) + " nodes; exhaustive deviation check "
                       "supports at most " + std::to_string(kMaxDicNodes));
  }
  if (sample_count < 1) throw std::invalid_argument("sample count must be positive");
  for (double a : alphas) MechanismParams{item_count, a}.validate();

  const auto truthful = effective_market(tree);
  const auto truthful_plans = plan_branches(truthful, item_count);

  std::vector<Arm> arms;
  for (std::size_t v = 1; v < n; ++v) {
    const auto buyer = static_cast<NodeId>(v);
    const auto deviations = enumerate_deviations(tree, buyer);
    for (const auto& profile : deviations) {
      auto market = effective_market(tree, profile);
      auto plans = plan_branches(market, item_count);
      arms.push_back({buyer, profile.informs(tree, buyer), std::move(market), std::move(plans)});
    }
  }
  if (arms.empty()) return {};

  const std::size_t na = alphas.size();
  std::vector<PairedStats> stats(arms.size() * na);
  std::vector<double> values(n, 0.0);
  std::vector<std::uint64_t> keys(n);
  std::vector<double> truthful_utility(n * na);
  MechanismKernel kernel;
  MechanismOutcome outcome;
  Rng rng(seed);

  for (std::int64_t s = 0; s < sample_count; ++s) {
    for (std::size_t v = 1; v < n; ++v) values[v] = uniform01(rng);
    for (auto& k : keys) k = rng();

    kernel.allocate(truthful, truthful_plans, values, keys, outcome.allocation);
    for (std::size_t a = 0; a < na; ++a) {
      kernel.settle(truthful, truthful_plans, alphas[a], outcome);
      for (std::size_t v = 1; v < n; ++v) {
        truthful_utility[v * na + a] =
            (outcome.allocation[v] ? values[v] : 0.0) - outcome.net_payment[v];
      }
    }
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const Arm& arm = arms[i];
      const auto b = static_cast<std::size_t>(arm.buyer);
      kernel.allocate(arm.market, arm.plans, values, keys, outcome.allocation);
      for (std::size_t a = 0; a < na; ++a) {
        kernel.settle(arm.market, arm.plans, alphas[a], outcome);
        const double ud = (outcome.allocation[b] ? values[b] : 0.0) - outcome.net_payment[b];
        const double ut = truthful_utility[b * na + a];
        auto& st = stats[i * na + a];
        st.sum_truthful += ut;
        st.sum_deviating += ud;
        st.sum_diff += ut - ud;
        st.sum_diff2 += (ut - ud) * (ut - ud);
      }
    }
  }

  const auto count = static_cast<double>(sample_count);
  std::vector<DeviationReport> reports;
  reports.reserve(stats.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    for (std::size_t a = 0; a < na; ++a) {
      const auto& st = stats[i * na + a];
      DeviationReport r;
      r.buyer = arms[i].buyer;
      r.informed = arms[i].informed;
      r.item_count = item_count;
      r.alpha = alphas[a];
      r.mean_utility_truthful = st.sum_truthful / count;
      r.mean_utility_deviating = st.sum_deviating / count;
      const double mean_diff = st.sum_diff / count;
      const double var =
          sample_count > 1
              ? std::max(0.0, (st.sum_diff2 - count * mean_diff * mean_diff) / (count - 1.0))
              : 0.0;
      r.std_error = std::sqrt(var / count);
      r.sample_count = sample_count;
      r.seed = seed;
      r.flagged = r.mean_utility_deviating > r.mean_utility_truthful + 3.0 * r.std_error;
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

std::vector<SocialTree> rooted_tree_shapes(std::size_t node_count) {
  if (node_count == 0) return {};
  // Level sequences in reverse lexicographic order, starting from the path;
  // the successor step copies the subtree preceding the last non-leaf-level
  // entry (Beyer & Hedetniemi).
  std::vector<int> level(node_count);
  std::iota(level.begin(), level.end(), 0);
  std::vector<SocialTree> out;
  std::vector<NodeId> parent(node_count);
  std::vector<NodeId> last_at_level(node_count);
  for (;;) {
    parent[0] = kNoParent;
    last_at_level[0] = 0;
    for (std::size_t i = 1; i < node_count; ++i) {
      parent[i] = last_at_level[static_cast<std::size_t>(level[i] - 1)];
      last_at_level[static_cast<std::size_t>(level[i])] = static_cast<NodeId>(i);
    }
    out.push_back(SocialTree::from_parents(parent));

    std::size_t p = node_count;
    for (std::size_t i = node_count; i-- > 1;) {
      if (level[i] > 1) {
        p = i;
        break;
      }
    }
    if (p == node_count) break;
    std::size_t q = p;
    while (level[q] != level[p] - 1) --q;
    for (std::size_t i = p; i < node_count; ++i) level[i] = level[i - (p - q)];
  }
  return out;
}

DicSweepResult dic_sweep(const DicSweepConfig& config, const ExecutionOptions& exec) {
  std::vector<SocialTree> shapes;
  for (std::size_t nodes = 2; nodes <= config.max_nodes; ++nodes) {
    auto s = rooted_tree_shapes(nodes);
    shapes.insert(shapes.end(), std::make_move_iterator(s.begin()),
                  std::make_move_iterator(s.end()));
  }
  const std::size_t nm = config.item_counts.size();
  std::vector<std::vector<DeviationReport>> results(shapes.size() * nm);
  parallel_for(results.size(), exec, [&](std::size_t task, int) {
    const std::size_t shape = task / nm;
    const std::int64_t m = config.item_counts[task % nm];
    const auto seed = stream_seed(config.master_seed, shape, static_cast<std::uint64_t>(m));
    results[task] = check_dic(shapes[shape], m, config.alphas, config.sample_count, seed);
  });

  DicSweepResult out;
  out.tree_count = shapes.size();
  for (std::size_t task = 0; task < results.size(); ++task) {
    out.comparison_count += results[task].size();
    for (auto& r : results[task]) {
      if (r.flagged) out.flagged.emplace_back(shapes[task / nm], std::move(r));
    }
  }
  return out;
}

nlohmann::json counterexample_json(const SocialTree& tree, const DeviationReport& report) {
  return {{"tree", tree_to_json(tree)},
          {"seed", report.seed},
          {"buyer", report.buyer},
          {"deviation", report.informed},
          {"m", report.item_count},
          {"alpha", report.alpha},
          {"means",
           {{"truthful", report.mean_utility_truthful},
            {"deviating", report.mean_utility_deviating}}},
          {"stderr", report.std_error},
          {"samples", report.sample_count}};
}

namespace {

SocialTree make_shape(TreeShape shape, std::size_t node_count, Rng& rng) {
  switch (shape) {
    case TreeShape::kStar: return star_tree(node_count);
    case TreeShape::kPath: return path_tree(node_count);
    case TreeShape::kRandom: return random_tree(node_count, rng);
  }
  throw std::invalid_argument("unknown tree shape");
}

}  // namespace

ComplexityReport measure_complexity(std::span<const std::int64_t> node_counts, TreeShape shape,
                                    Rng& rng, int repetitions) {
  using Clock = std::chrono::steady_clock;
  ComplexityReport report;
  MechanismKernel kernel;
  for (const std::int64_t n : node_counts) {
    if (n < 2) throw std::invalid_argument("complexity sizes must be at least 2");
    const auto tree = make_shape(shape, static_cast<std::size_t>(n), rng);
    const auto values = ValuationProfile::uniform(tree.node_count(), rng);
    const auto keys = draw_tie_keys(tree.node_count(), rng);
    const auto actions = full_diffusion(tree);
    const std::int64_t m = std::max<std::int64_t>(1, n / 20);

    double best = std::numeric_limits<double>::infinity();
    MechanismOutcome outcome;
    for (int r = 0; r < std::max(1, repetitions); ++r) {
      const auto start = Clock::now();
      const auto market = effective_market(tree, actions);
      const auto plans = plan_branches(market, m);
      kernel.run(market, plans, values.values(), keys, 0.01, outcome);
      const std::chrono::duration<double> took = Clock::now() - start;
      best = std::min(best, took.count());
    }
    TimingRow row{n, best, 0.0};
    if (!report.rows.empty()) row.ratio_to_previous = best / report.rows.back().seconds;
    report.rows.push_back(row);
  }

  const auto k = static_cast<double>(report.rows.size());
  if (k >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : report.rows) {
      const auto x = static_cast<double>(r.node_count);
      sx += x;
      sy += r.seconds;
      sxx += x * x;
      sxy += x * r.seconds;
    }
    report.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    report.intercept = (sy - report.slope * sx) / k;
    double ss = 0;
    for (const auto& r : report.rows) {
      const double e = r.seconds - (report.intercept + report.slope * static_cast<double>(r.node_count));
      ss += e * e;
    }
    report.relative_residual = std::sqrt(ss / k) / (sy / k);
  }
  return report;
}

}  // namespace diffmech
