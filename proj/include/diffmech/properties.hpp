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

// Executable checks of the mechanism's claimed properties: individual
// rationality, feasibility, diffusion incentive compatibility (by exhaustive
// unilateral deviation) and linear running time.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffmech/mechanism.hpp"
#include "diffmech/network.hpp"
#include "diffmech/parallel.hpp"
#include "diffmech/random.hpp"

namespace diffmech {

struct IrViolation {
  NodeId buyer;
  double utility;
};

/// Runs the mechanism and returns every buyer whose utility is negative.
std::vector<IrViolation> check_ir(const EffectiveMarket& market, const ValuationProfile& values,
                                  const MechanismParams& params, Rng& rng);

std::vector<IrViolation> ir_violations(const MechanismOutcome& outcome,
                                       const ValuationProfile& values);

/// Non-participants unallocated and total winners in {0, ..., m}.
bool check_feasibility(const MechanismOutcome& outcome, const EffectiveMarket& market,
                       std::int64_t item_count);

/// Winners per branch never exceed the branch quota.
bool respects_quotas(const MechanismOutcome& outcome, const EffectiveMarket& market);

struct InstanceViolation {
  std::string kind;  // "individual_rationality" or "feasibility"
  SocialTree tree;
  std::uint64_t seed = 0;
  std::int64_t item_count = 0;
  double alpha = 0.0;
};

struct InstanceSweepResult {
  std::int64_t instances = 0;
  std::int64_t ir_violations = 0;
  std::int64_t feasibility_violations = 0;
  std::vector<InstanceViolation> violations;
};

/// Instance i uses stream_seed(master, 0x1e, i) to draw n in [1, max_buyers],
/// m in [1, n], a uniform random tree on n + 1 nodes, an action profile in
/// which each buyer-to-child edge is informed with probability 0.8, and
/// valuations; alpha cycles through {0, 0.01, 0.1}. IR, feasibility and the
/// branch quotas are checked exactly on each outcome.
InstanceSweepResult ir_feasibility_sweep(std::int64_t instances, std::int64_t max_buyers,
                                         std::uint64_t master_seed,
                                         const ExecutionOptions& exec = {});

nlohmann::json violation_json(const InstanceViolation& v);

/// Every action profile where `buyer` informs a proper subset of its children
/// and everyone else diffuses fully, ordered by the bitmask of informed
/// children (bit i = i-th child in ascending label order). 2^c - 1 entries.
std::vector<ActionProfile> enumerate_deviations(const SocialTree& tree, NodeId buyer);

class TreeTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxDicNodes = 16;

struct DeviationReport {
  NodeId buyer = 0;
  /// Children the buyer informs under the deviation.
  std::vector<NodeId> informed;
  std::int64_t item_count = 0;
  double alpha = 0.0;
  double mean_utility_truthful = 0.0;
  double mean_utility_deviating = 0.0;
  /// Standard error of the paired difference.
  double std_error = 0.0;
  std::int64_t sample_count = 0;
  /// Seed of the stream that produced this comparison.
  std::uint64_t seed = 0;
  /// mean_deviating > mean_truthful + 3 * std_error.
  bool flagged = false;
};

/// Paired Monte-Carlo comparison of truthful versus every unilateral
/// deviation. All comparisons on one tree share a single stream seeded with
/// `seed`; each sample draws one valuation and one tie key per node and
/// reuses them for both arms. One report per (buyer, deviation, alpha), in
/// buyer order, then deviation mask, then alpha.
std::vector<DeviationReport> check_dic(const SocialTree& tree, std::int64_t item_count,
                                       std::span<const double> alphas,
                                       std::int64_t sample_count, std::uint64_t seed);

inline std::vector<DeviationReport> check_dic(const SocialTree& tree,
                                              const MechanismParams& params,
                                              std::int64_t sample_count, Rng& rng) {
  const double alpha[] = {params.reward_factor};
  return check_dic(tree, params.item_count, alpha, sample_count, rng());
}

/// Every rooted unlabeled tree on node_count nodes, once each, labeled in
/// preorder of its canonical level sequence (root = 0).
std::vector<SocialTree> rooted_tree_shapes(std::size_t node_count);

struct DicSweepConfig {
  std::size_t max_nodes = 10;
  std::vector<std::int64_t> item_counts{1, 2, 3};
  std::vector<double> alphas{0.0, 0.01};
  std::int64_t sample_count = 20000;
  std::uint64_t master_seed = 0;
};

struct DicSweepResult {
  std::size_t tree_count = 0;
  std::size_t comparison_count = 0;
  /// Flagged reports together with the tree they came from.
  std::vector<std::pair<SocialTree, DeviationReport>> flagged;
};

/// check_dic over every rooted shape with 2..max_nodes nodes and every item
/// count. Task (shape index, m) uses stream_seed(master, shape index, m).
DicSweepResult dic_sweep(const DicSweepConfig& config, const ExecutionOptions& exec = {});

/// {tree, seed, buyer, deviation, m, alpha, means, stderr, samples}.
nlohmann::json counterexample_json(const SocialTree& tree, const DeviationReport& report);

enum class TreeShape { kStar, kPath, kRandom };

struct TimingRow {
  std::int64_t node_count = 0;
  double seconds = 0.0;
  /// Time relative to the previous row; 0 for the first row.
  double ratio_to_previous = 0.0;
};

struct ComplexityReport {
  std::vector<TimingRow> rows;
  /// Least-squares fit seconds = intercept + slope * node_count.
  double slope = 0.0;
  double intercept = 0.0;
  /// RMS residual divided by mean time.
  double relative_residual = 0.0;
};

/// Times effective_market + planning + allocation + settlement (m =
/// max(1, n/20), alpha = 0.01) on one tree per size; the minimum over
/// `repetitions` runs is kept.
ComplexityReport measure_complexity(std::span<const std::int64_t> node_counts, TreeShape shape,
                                    Rng& rng, int repetitions = 5);

}  // namespace diffmech
