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

#include "diffmech/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "diffmech/mechanism.hpp"

namespace diffmech {

namespace {

double ratio_stderr(std::int64_t trials, double sd, double so, double sdd, double soo,
                    double sdo) {
  if (trials < 2 || so <= 0.0) return 0.0;
  const auto n = static_cast<double>(trials);
  const double r = sd / so;
  const double ss = std::max(0.0, sdd - 2.0 * r * sdo + r * r * soo);
  const double mean_o = so / n;
  return std::sqrt(ss / (n * (n - 1.0))) / mean_o;
}

double mean_participant_depth(const EffectiveMarket& market) {
  double sum = 0.0;
  for (NodeId v : market.participants()) sum += market.depth(v);
  return market.total_size() ? sum / static_cast<double>(market.total_size()) : 0.0;
}

// R_D, R_0 and R_opt on one tree with one valuation draw.
TrialResult evaluate_tree(const SocialTree& tree, std::int64_t m, double alpha, Rng& rng,
                          OptimalPriceCache* cache) {
  const auto values = ValuationProfile::uniform(tree.node_count(), rng);
  const auto keys = draw_tie_keys(tree.node_count(), rng);
  const auto market = effective_market(tree);
  const auto plans = plan_branches(market, m);
  MechanismKernel kernel;
  MechanismOutcome outcome;
  kernel.run(market, plans, values.values(), keys, alpha, outcome);

  TrialResult t;
  t.n = static_cast<std::int64_t>(tree.buyer_count());
  t.m = m;
  t.alpha = alpha;
  t.rd = outcome.seller_revenue;
  t.r0 = baseline_revenue(tree, m, values, rng, cache);
  t.ropt = optimal_revenue(tree, m, values, rng, cache);
  t.branch_count = market.branch_count();
  t.mean_depth = mean_participant_depth(market);
  return t;
}

}  // namespace

TrialResult run_trial(std::int64_t n, std::int64_t m, double alpha, Rng& rng,
                      OptimalPriceCache* cache) {
  if (n < 1) throw std::invalid_argument("a trial needs at least one buyer");
  if (m < 1) throw std::invalid_argument("a trial needs at least one item");
  MechanismParams{m, alpha}.validate();
  const auto tree = random_tree(static_cast<std::size_t>(n) + 1, rng);
  return evaluate_tree(tree, m, alpha, rng, cache);
}

void RatioAccumulator::add(const TrialResult& t) {
  ++trials;
  sum_rd += t.rd;
  sum_r0 += t.r0;
  sum_ropt += t.ropt;
  sum_rd2 += t.rd * t.rd;
  sum_r02 += t.r0 * t.r0;
  sum_ropt2 += t.ropt * t.ropt;
  sum_rd_r0 += t.rd * t.r0;
  sum_rd_ropt += t.rd * t.ropt;
  sum_depth += t.mean_depth;
  sum_branches += static_cast<double>(t.branch_count);
}

void RatioAccumulator::merge(const RatioAccumulator& o) {
  trials += o.trials;
  sum_rd += o.sum_rd;
  sum_r0 += o.sum_r0;
  sum_ropt += o.sum_ropt;
  sum_rd2 += o.sum_rd2;
  sum_r02 += o.sum_r02;
  sum_ropt2 += o.sum_ropt2;
  sum_rd_r0 += o.sum_rd_r0;
  sum_rd_ropt += o.sum_rd_ropt;
  sum_depth += o.sum_depth;
  sum_branches += o.sum_branches;
}

double RatioAccumulator::ratio_r0() const { return sum_r0 > 0.0 ? sum_rd / sum_r0 : 0.0; }
double RatioAccumulator::ratio_ropt() const { return sum_ropt > 0.0 ? sum_rd / sum_ropt : 0.0; }
double RatioAccumulator::stderr_r0() const {
  return ratio_stderr(trials, sum_rd, sum_r0, sum_rd2, sum_r02, sum_rd_r0);
}
double RatioAccumulator::stderr_ropt() const {
  return ratio_stderr(trials, sum_rd, sum_ropt, sum_rd2, sum_ropt2, sum_rd_ropt);
}

std::int64_t default_item_rule(std::int64_t n) { return std::max<std::int64_t>(1, n / 20); }

namespace {

template <class TrialFn>
RatioReport run_group(std::int64_t group_id, const TableOptions& options, TrialFn&& trial) {
  std::vector<TrialResult> results(static_cast<std::size_t>(options.trials));
  parallel_for(results.size(), options.exec, [&](std::size_t t, int) {
    const auto seed = stream_seed(options.master_seed, static_cast<std::uint64_t>(group_id), t);
    Rng rng(seed);
    results[t] = trial(rng);
    results[t].seed = seed;
  });
  RatioReport report;
  report.master_seed = options.master_seed;
  report.alpha = options.alpha;
  for (const auto& r : results) report.acc.add(r);
  if (options.keep_trials) report.trials = std::move(results);
  return report;
}

}  // namespace

std::vector<RatioReport> ratio_table(std::span<const std::int64_t> sizes, const ItemRule& rule,
                                     const TableOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be positive");
  OptimalPriceCache cache;
  std::vector<RatioReport> out;
  for (const std::int64_t n : sizes) {
    const std::int64_t m = rule(n);
    auto report = run_group(n, options, [&](Rng& rng) {
      return run_trial(n, m, options.alpha, rng, &cache);
    });
    report.key = "n=" + std::to_string(n);
    report.n = n;
    report.m = m;
    out.push_back(std::move(report));
  }
  return out;
}

SocialTree branch_controlled_tree(double mean_branch_count, double mean_branch_size, Rng& rng) {
  if (!(mean_branch_count >= 1.0) || !(mean_branch_size >= 1.0)) {
    throw std::invalid_argument("branch means must be at least 1");
  }
  std::int64_t branches = 1;
  if (mean_branch_count > 1.0) {
    branches += std::poisson_distribution<std::int64_t>(mean_branch_count - 1.0)(rng);
  }
  const auto total = std::max<std::int64_t>(
      branches, std::llround(mean_branch_count * mean_branch_size));

  // Multinomial split of the remainder via sequential binomials.
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(branches), 1);
  std::int64_t left = total - branches;
  for (std::int64_t b = 0; b < branches && left > 0; ++b) {
    if (b == branches - 1) {
      sizes[static_cast<std::size_t>(b)] += left;
      break;
    }
    const double p = 1.0 / static_cast<double>(branches - b);
    const auto take = std::binomial_distribution<std::int64_t>(left, p)(rng);
    sizes[static_cast<std::size_t>(b)] += take;
    left -= take;
  }

  std::vector<NodeId> parent(static_cast<std::size_t>(total) + 1);
  parent[0] = kNoParent;
  NodeId offset = 1;
  for (const std::int64_t size : sizes) {
    parent[static_cast<std::size_t>(offset)] = kSeller;
    if (size >= 2) {
      const auto interior = random_tree(static_cast<std::size_t>(size), rng);
      for (std::size_t v = 1; v < interior.node_count(); ++v) {
        parent[static_cast<std::size_t>(offset) + v] =
            offset + interior.parent(static_cast<NodeId>(v));
      }
    }
    offset += static_cast<NodeId>(size);
  }
  return SocialTree::from_parents(std::move(parent));
}

TrialResult run_branch_trial(const BranchConfig& config, std::int64_t m, double alpha, Rng& rng,
                             OptimalPriceCache* cache) {
  if (m < 1) throw std::invalid_argument("a trial needs at least one item");
  MechanismParams{m, alpha}.validate();
  const auto tree = branch_controlled_tree(config.mean_branch_count, config.mean_branch_size, rng);
  return evaluate_tree(tree, m, alpha, rng, cache);
}

std::vector<RatioReport> branch_table(std::span<const BranchConfig> configs, std::int64_t m,
                                      const TableOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be positive");
  OptimalPriceCache cache;
  std::vector<RatioReport> out;
  for (std::size_t g = 0; g < configs.size(); ++g) {
    const auto& config = configs[g];
    auto report = run_group(static_cast<std::int64_t>(g), options, [&](Rng& rng) {
      return run_branch_trial(config, m, options.alpha, rng, &cache);
    });
    std::ostringstream key;
    key << "branches=" << config.mean_branch_count << ",size=" << config.mean_branch_size;
    report.key = key.str();
    report.n = std::llround(config.mean_branch_count * config.mean_branch_size);
    report.m = m;
    report.mean_branch_count = config.mean_branch_count;
    report.mean_branch_size = config.mean_branch_size;
    out.push_back(std::move(report));
  }
  return out;
}

WorstCaseReport worst_case_star(std::int64_t n, std::int64_t trials, std::uint64_t master_seed,
                                const ExecutionOptions& exec) {
  if (n < 1 || trials < 1) throw std::invalid_argument("need n >= 1 and trials >= 1");
  const auto tree = star_tree(static_cast<std::size_t>(n) + 1);
  const auto market = effective_market(tree);
  const auto plans = plan_branches(market, 1);
  const PricePoint opt = optimal_fp_price(n, 1);
  // Every branch is a single buyer, so within-branch ranking never needs a
  // tie key.
  const std::vector<std::uint64_t> keys(tree.node_count(), 0);

  std::vector<std::pair<double, double>> revenue(static_cast<std::size_t>(trials));
  std::vector<MechanismKernel> kernels(static_cast<std::size_t>(worker_count(exec)));
  parallel_for(revenue.size(), exec, [&](std::size_t t, int worker) {
    Rng rng = make_stream(master_seed, static_cast<std::uint64_t>(n), t);
    const auto values = ValuationProfile::uniform(tree.node_count(), rng);
    MechanismOutcome outcome;
    kernels[static_cast<std::size_t>(worker)].run(market, plans, values.values(), keys, 0.0,
                                                  outcome);
    const auto buyers = values.values().subspan(1);
    const double ropt = run_fp_auction({n, 1, opt.price}, buyers, rng).revenue;
    revenue[t] = {outcome.seller_revenue, ropt};
  });

  RatioAccumulator acc;
  for (const auto& [rd, ropt] : revenue) {
    TrialResult r;
    r.rd = rd;
    r.ropt = ropt;
    acc.add(r);
  }
  WorstCaseReport report;
  report.n = n;
  report.trials = trials;
  report.branch_price = plans.front().price;
  report.mean_rd = acc.mean_rd();
  report.mean_ropt = acc.sum_ropt / static_cast<double>(trials);
  report.ratio = acc.ratio_ropt();
  report.std_error = acc.stderr_ropt();
  return report;
}

std::vector<AlphaRow> alpha_sweep(std::int64_t n, std::int64_t m, std::span<const double> alphas,
                                  std::int64_t trials, std::uint64_t master_seed,
                                  const ExecutionOptions& exec) {
  if (alphas.empty()) throw std::invalid_argument("alpha list is empty");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 0.5)) throw std::invalid_argument("alphas must lie in [0, 0.5]");
  }
  if (n < 1 || m < 1 || trials < 1) throw std::invalid_argument("need n, m, trials >= 1");

  const std::size_t na = alphas.size();
  std::vector<double> revenue(static_cast<std::size_t>(trials) * na);
  std::vector<MechanismKernel> kernels(static_cast<std::size_t>(worker_count(exec)));
  parallel_for(static_cast<std::size_t>(trials), exec, [&](std::size_t t, int worker) {
    Rng rng = make_stream(master_seed, static_cast<std::uint64_t>(n), t);
    const auto tree = random_tree(static_cast<std::size_t>(n) + 1, rng);
    const auto values = ValuationProfile::uniform(tree.node_count(), rng);
    const auto keys = draw_tie_keys(tree.node_count(), rng);
    const auto market = effective_market(tree);
    const auto plans = plan_branches(market, m);
    auto& kernel = kernels[static_cast<std::size_t>(worker)];
    MechanismOutcome outcome;
    kernel.allocate(market, plans, values.values(), keys, outcome.allocation);
    for (std::size_t a = 0; a < na; ++a) {
      kernel.settle(market, plans, alphas[a], outcome);
      revenue[t * na + a] = outcome.seller_revenue;
    }
  });

  std::vector<AlphaRow> rows(na);
  const auto count = static_cast<double>(trials);
  for (std::size_t a = 0; a < na; ++a) {
    double s = 0.0, s2 = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
      const double r = revenue[static_cast<std::size_t>(t) * na + a];
      s += r;
      s2 += r * r;
    }
    const double mean = s / count;
    const double var = trials > 1 ? std::max(0.0, (s2 - count * mean * mean) / (count - 1.0)) : 0.0;
    rows[a] = {alphas[a], mean, std::sqrt(var / count), 0.0};
  }
  for (auto& row : rows) {
    row.relative_change = rows[0].mean_rd > 0.0 ? row.mean_rd / rows[0].mean_rd - 1.0 : 0.0;
  }
  return rows;
}

void write_ratio_csv(std::ostream& out, std::span<const RatioReport> reports, bool branch_columns) {
  out << "n,m,alpha,trials,rd_r0_ratio,rd_r0_stderr,rd_ropt_ratio,rd_ropt_stderr,mean_rd,"
         "mean_depth,seed";
  if (branch_columns) out << ",mean_branches,mean_branch_size,realized_branches";
  out << '\n';
  out << std::setprecision(10);
  for (const auto& r : reports) {
    const auto t = static_cast<double>(r.acc.trials);
    out << r.n << ',' << r.m << ',' << r.alpha << ',' << r.acc.trials << ','
        << r.acc.ratio_r0() << ',' << r.acc.stderr_r0() << ',' << r.acc.ratio_ropt() << ','
        << r.acc.stderr_ropt() << ',' << r.acc.mean_rd() << ','
        << (t > 0 ? r.acc.sum_depth / t : 0.0) << ',' << r.master_seed;
    if (branch_columns) {
      out << ',' << r.mean_branch_count << ',' << r.mean_branch_size << ','
          << (t > 0 ? r.acc.sum_branches / t : 0.0);
    }
    out << '\n';
  }
}

nlohmann::json ratio_json(std::span<const RatioReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row = {{"key", r.key},
                          {"n", r.n},
                          {"m", r.m},
                          {"alpha", r.alpha},
                          {"trials", r.acc.trials},
                          {"rd_r0_ratio", r.acc.ratio_r0()},
                          {"rd_r0_stderr", r.acc.stderr_r0()},
                          {"rd_ropt_ratio", r.acc.ratio_ropt()},
                          {"rd_ropt_stderr", r.acc.stderr_ropt()},
                          {"mean_rd", r.acc.mean_rd()},
                          {"mean_depth", r.acc.trials ? r.acc.sum_depth / double(r.acc.trials) : 0.0},
                          {"realized_branches",
                           r.acc.trials ? r.acc.sum_branches / double(r.acc.trials) : 0.0},
                          {"seed", r.master_seed}};
    if (r.mean_branch_count > 0.0) {
      row["mean_branches"] = r.mean_branch_count;
      row["mean_branch_size"] = r.mean_branch_size;
    }
    if (!r.trials.empty()) {
      nlohmann::json detail = nlohmann::json::array();
      for (const auto& t : r.trials) {
        detail.push_back({{"n", t.n}, {"m", t.m}, {"alpha", t.alpha}, {"rd", t.rd},
                          {"r0", t.r0}, {"ropt", t.ropt}, {"seed", t.seed},
                          {"branch_count", t.branch_count}, {"mean_depth", t.mean_depth}});
      }
      row["trials"] = std::move(detail);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace diffmech
