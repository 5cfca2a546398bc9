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

// Monte-Carlo revenue comparisons between the diffusion mechanism (R_D), the
// optimal fixed-price auction among the seller's neighbours (R_0) and the
// optimal fixed-price auction among all buyers (R_opt).
//
// Every trial draws from its own stream stream_seed(master, group, trial) and
// results are reduced in trial order, so serial and parallel runs agree bit
// for bit.

#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffmech/auctions.hpp"
#include "diffmech/network.hpp"
#include "diffmech/parallel.hpp"
#include "diffmech/random.hpp"

namespace diffmech {

struct TrialResult {
  /// Buyers in the tree.
  std::int64_t n = 0;
  std::int64_t m = 0;
  double alpha = 0.0;
  double rd = 0.0;
  double r0 = 0.0;
  double ropt = 0.0;
  /// Seed that reproduces this trial via run_trial(n, m, alpha, Rng(seed)).
  std::uint64_t seed = 0;
  std::int64_t branch_count = 0;
  double mean_depth = 0.0;
};

/// One uniform random tree on n + 1 nodes, one valuation draw shared by all
/// three auctions, R_D under full diffusion.
TrialResult run_trial(std::int64_t n, std::int64_t m, double alpha, Rng& rng,
                      OptimalPriceCache* cache = nullptr);

/// Running sums for ratio-of-sums estimators. merge() is plain addition, so a
/// fixed merge order gives bit-identical results.
struct RatioAccumulator {
  std::int64_t trials = 0;
  double sum_rd = 0.0, sum_r0 = 0.0, sum_ropt = 0.0;
  double sum_rd2 = 0.0, sum_r02 = 0.0, sum_ropt2 = 0.0;
  double sum_rd_r0 = 0.0, sum_rd_ropt = 0.0;
  double sum_depth = 0.0;
  double sum_branches = 0.0;

  void add(const TrialResult& t);
  void merge(const RatioAccumulator& other);

  /// sum R_D / sum R_0.
  double ratio_r0() const;
  double ratio_ropt() const;
  /// Delta-method standard errors of the two ratios.
  double stderr_r0() const;
  double stderr_ropt() const;
  double mean_rd() const { return trials ? sum_rd / static_cast<double>(trials) : 0.0; }

  friend bool operator==(const RatioAccumulator&, const RatioAccumulator&) = default;
};

struct RatioReport {
  /// "n=100" or "branches=5,size=200".
  std::string key;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double alpha = 0.0;
  double mean_branch_count = 0.0;
  double mean_branch_size = 0.0;
  std::uint64_t master_seed = 0;
  RatioAccumulator acc;
  /// Filled only when trial detail is requested.
  std::vector<TrialResult> trials;
};

using ItemRule = std::function<std::int64_t(std::int64_t)>;

/// m = max(1, floor(n / 20)).
std::int64_t default_item_rule(std::int64_t n);

struct TableOptions {
  std::int64_t trials = 1000;
  std::uint64_t master_seed = 0;
  double alpha = 0.01;
  bool keep_trials = false;
  ExecutionOptions exec;
};

/// One report per size; group g uses stream_seed(master, n, trial).
std::vector<RatioReport> ratio_table(std::span<const std::int64_t> sizes, const ItemRule& rule,
                                     const TableOptions& options);

/// Seller with 1 + Poisson(mean_branch_count - 1) branches; round(count *
/// size) buyers split as 1 each plus a uniform multinomial remainder; each
/// branch interior is a uniform labeled tree rooted at its lowest label.
SocialTree branch_controlled_tree(double mean_branch_count, double mean_branch_size, Rng& rng);

struct BranchConfig {
  double mean_branch_count = 1.0;
  double mean_branch_size = 1.0;
};

TrialResult run_branch_trial(const BranchConfig& config, std::int64_t m, double alpha, Rng& rng,
                             OptimalPriceCache* cache = nullptr);

/// One report per config at a fixed item count.
std::vector<RatioReport> branch_table(std::span<const BranchConfig> configs, std::int64_t m,
                                      const TableOptions& options);

struct WorstCaseReport {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  double branch_price = 0.0;
  double mean_rd = 0.0;
  double mean_ropt = 0.0;
  /// sum R_D / sum R_opt and its standard error.
  double ratio = 0.0;
  double std_error = 0.0;
};

/// Star with n buyers, one item.
WorstCaseReport worst_case_star(std::int64_t n, std::int64_t trials, std::uint64_t master_seed,
                                const ExecutionOptions& exec = {});

struct AlphaRow {
  double alpha = 0.0;
  double mean_rd = 0.0;
  double std_error = 0.0;
  /// mean_rd / mean_rd at the first alpha - 1.
  double relative_change = 0.0;
};

/// Same trees, valuations and tie keys for every alpha.
std::vector<AlphaRow> alpha_sweep(std::int64_t n, std::int64_t m, std::span<const double> alphas,
                                  std::int64_t trials, std::uint64_t master_seed,
                                  const ExecutionOptions& exec = {});

/// CSV: n,m,alpha,trials,rd_r0_ratio,rd_r0_stderr,rd_ropt_ratio,rd_ropt_stderr,
/// mean_rd,mean_depth,seed (table 2 adds mean_branches,mean_branch_size,
/// realized_branches).
void write_ratio_csv(std::ostream& out, std::span<const RatioReport> reports, bool branch_columns);
nlohmann::json ratio_json(std::span<const RatioReport> reports);

}  // namespace diffmech
