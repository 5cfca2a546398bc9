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

// diffmech: command-line front end.
//
// Exit status: 0 success, 1 a property violation was found by `verify`,
// 2 usage error (bad flags, malformed input, out-of-range parameters).

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffmech/auctions.hpp"
#include "diffmech/experiments.hpp"
#include "diffmech/io.hpp"
#include "diffmech/mechanism.hpp"
#include "diffmech/network.hpp"
#include "diffmech/properties.hpp"

namespace {

using namespace diffmech;
using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240601;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

std::string invocation(int argc, char** argv) {
  std::ostringstream out;
  out << "diffmech";
  for (int i = 1; i < argc; ++i) out << ' ' << argv[i];
  return out.str();
}

ExecutionOptions exec_options(int jobs) {
  ExecutionOptions exec;
  exec.jobs = jobs;
  exec.mode = jobs == 1 ? Execution::kSerial : Execution::kParallel;
  return exec;
}

struct Common {
  std::uint64_t seed = kDefaultSeed;
  std::string format = "csv";
  std::string output;
  int jobs = 0;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_gen_tree(std::int64_t n, const std::string& pruefer_file, const std::string& format,
                 const Common& c) {
  Output out(c.output);
  require(format == "json" || format == "pruefer", "--format must be json or pruefer");
  std::vector<SocialTree> trees;
  if (!pruefer_file.empty()) {
    std::ifstream in(pruefer_file);
    if (!in) throw FormatError("cannot open Prüfer file " + pruefer_file);
    for (const auto& seq : read_pruefer_lines(in)) {
      trees.push_back(decode_pruefer(seq, seq.size() + 2));
    }
  } else {
    require(n >= 2, "--n must be at least 2");
    Rng rng(c.seed);
    trees.push_back(random_tree(static_cast<std::size_t>(n), rng));
  }
  for (const auto& t : trees) {
    if (format == "json") {
      out.stream() << tree_to_json(t).dump() << '\n';
    } else {
      write_pruefer_line(out.stream(), encode_pruefer(t));
    }
  }
  return 0;
}

int cmd_run(const std::string& tree_file, std::int64_t n, std::int64_t m, double alpha,
            const std::vector<double>& given_values, const Common& c, const std::string& cmdline) {
  require(m >= 0, "--m must be non-negative");
  require(alpha >= 0.0 && alpha < 1.0, "--alpha must lie in [0, 1)");
  Rng rng(c.seed);
  SocialTree tree = tree_file.empty() ? (require(n >= 2, "give --tree or --n >= 2"),
                                         random_tree(static_cast<std::size_t>(n), rng))
                                      : read_tree_file(tree_file);
  ValuationProfile values;
  if (!given_values.empty()) {
    require(given_values.size() == tree.buyer_count(),
            "--values needs " + std::to_string(tree.buyer_count()) + " entries (labels 1.." +
                std::to_string(tree.buyer_count()) + ")");
    std::vector<double> v{0.0};
    v.insert(v.end(), given_values.begin(), given_values.end());
    try {
      values = ValuationProfile(std::move(v));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    values = ValuationProfile::uniform(tree.node_count(), rng);
  }
  const auto market = effective_market(tree);
  const auto outcome = run_mechanism(market, values, {m, alpha}, rng);

  json j = outcome_to_json(outcome);
  json utility = json::array();
  for (std::size_t v = 1; v < tree.node_count(); ++v) {
    utility.push_back(buyer_utility(outcome, values, static_cast<NodeId>(v)));
  }
  j["utilities"] = std::move(utility);
  j["values"] = std::vector<double>(values.values().begin() + 1, values.values().end());
  j["tree"] = tree_to_json(tree);
  j["m"] = m;
  j["alpha"] = alpha;
  j["seed"] = c.seed;
  j["command"] = cmdline;
  Output out(c.output);
  out.stream() << std::setprecision(17) << j.dump(2) << '\n';
  return 0;
}

struct VerifyFlags {
  std::size_t n_max = 10;
  std::int64_t samples = 20000;
  std::int64_t m_max = 3;
  std::vector<double> alphas{0.0, 0.01};
  std::int64_t ir_instances = 10000;
  std::int64_t ir_n_max = 50;
  bool skip_dic = false;
};

int cmd_verify(const VerifyFlags& f, const Common& c) {
  require(f.n_max >= 2 && f.n_max <= kMaxDicNodes,
          "--n-max must lie in [2, " + std::to_string(kMaxDicNodes) + "]");
  require(f.samples >= 1 && f.m_max >= 1 && f.ir_instances >= 0 && f.ir_n_max >= 1,
          "sample, item and instance counts must be positive");
  for (double a : f.alphas) require(a >= 0.0 && a < 1.0, "alphas must lie in [0, 1)");

  json violations = json::array();
  const auto instances = ir_feasibility_sweep(f.ir_instances, f.ir_n_max, c.seed,
                                              exec_options(c.jobs));
  for (const auto& v : instances.violations) violations.push_back(violation_json(v));
  const auto ir_bad = instances.ir_violations;
  const auto feas_bad = instances.feasibility_violations;

  std::size_t trees = 0, comparisons = 0;
  if (!f.skip_dic) {
    DicSweepConfig config;
    config.max_nodes = f.n_max;
    config.item_counts.clear();
    for (std::int64_t m = 1; m <= f.m_max; ++m) config.item_counts.push_back(m);
    config.alphas = f.alphas;
    config.sample_count = f.samples;
    config.master_seed = c.seed;
    const auto sweep = dic_sweep(config, exec_options(c.jobs));
    trees = sweep.tree_count;
    comparisons = sweep.comparison_count;
    for (const auto& [tree, report] : sweep.flagged) {
      auto j = counterexample_json(tree, report);
      j["kind"] = "diffusion_incentive_compatibility";
      violations.push_back(std::move(j));
    }
  }

  json summary = {{"ir_instances", f.ir_instances},
                  {"ir_violations", ir_bad},
                  {"feasibility_violations", feas_bad},
                  {"dic_trees", trees},
                  {"dic_comparisons", comparisons},
                  {"dic_flagged", violations.size() - instances.violations.size()},
                  {"seed", c.seed},
                  {"violations", violations}};
  Output out(c.output);
  out.stream() << summary.dump(2) << '\n';
  return violations.empty() ? 0 : kExitViolation;
}

void emit_reports(const std::vector<RatioReport>& reports, bool branch_columns, const Common& c,
                  const std::string& cmdline) {
  Output out(c.output);
  if (c.format == "json") {
    json j = {{"command", cmdline}, {"groups", ratio_json(reports)}};
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "# " << cmdline << '\n';
    write_ratio_csv(out.stream(), reports, branch_columns);
  }
}

void require_format(const Common& c) {
  require(c.format == "csv" || c.format == "json", "--format must be csv or json");
}

int cmd_table1(const std::vector<std::int64_t>& sizes, std::int64_t fixed_m, std::int64_t divisor,
               std::int64_t trials, double alpha, bool full, const Common& c,
               const std::string& cmdline) {
  require_format(c);
  require(!sizes.empty(), "--sizes is empty");
  for (auto n : sizes) require(n >= 1, "sizes must be positive");
  require(trials >= 1, "--trials must be positive");
  require(divisor >= 1, "--m-divisor must be positive");
  require(alpha >= 0.0 && alpha < 1.0, "--alpha must lie in [0, 1)");
  ItemRule rule = fixed_m > 0 ? ItemRule([fixed_m](std::int64_t) { return fixed_m; })
                              : ItemRule([divisor](std::int64_t n) {
                                  return std::max<std::int64_t>(1, n / divisor);
                                });
  TableOptions opt{trials, c.seed, alpha, full, exec_options(c.jobs)};
  emit_reports(ratio_table(sizes, rule, opt), false, c, cmdline);
  return 0;
}

int cmd_table2(const std::vector<std::string>& specs, std::int64_t m, std::int64_t trials,
               double alpha, bool full, const Common& c, const std::string& cmdline) {
  require_format(c);
  require(m >= 1, "--m must be positive");
  require(trials >= 1, "--trials must be positive");
  require(alpha >= 0.0 && alpha < 1.0, "--alpha must lie in [0, 1)");
  std::vector<BranchConfig> configs;
  for (const auto& s : specs) {
    const auto x = s.find('x');
    require(x != std::string::npos, "config must look like <branches>x<size>: " + s);
    BranchConfig bc;
    try {
      bc.mean_branch_count = std::stod(s.substr(0, x));
      bc.mean_branch_size = std::stod(s.substr(x + 1));
    } catch (const std::exception&) {
      throw UsageError("config must look like <branches>x<size>: " + s);
    }
    require(bc.mean_branch_count >= 1 && bc.mean_branch_size >= 1, "branch means must be >= 1");
    configs.push_back(bc);
  }
  TableOptions opt{trials, c.seed, alpha, full, exec_options(c.jobs)};
  emit_reports(branch_table(configs, m, opt), true, c, cmdline);
  return 0;
}

int cmd_worst_case(std::int64_t n, std::int64_t trials, const Common& c,
                   const std::string& cmdline) {
  require_format(c);
  require(n >= 1 && trials >= 1, "--n and --trials must be positive");
  const auto r = worst_case_star(n, trials, c.seed, exec_options(c.jobs));
  Output out(c.output);
  if (c.format == "json") {
    json j = {{"command", cmdline},   {"n", r.n},
              {"trials", r.trials},   {"branch_price", r.branch_price},
              {"mean_rd", r.mean_rd}, {"mean_ropt", r.mean_ropt},
              {"rd_ropt_ratio", r.ratio}, {"rd_ropt_stderr", r.std_error},
              {"seed", c.seed}};
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "# " << cmdline << '\n'
                 << "n,m,trials,branch_price,mean_rd,mean_ropt,rd_ropt_ratio,rd_ropt_stderr,seed\n"
                 << std::setprecision(10) << r.n << ",1," << r.trials << ',' << r.branch_price
                 << ',' << r.mean_rd << ',' << r.mean_ropt << ',' << r.ratio << ','
                 << r.std_error << ',' << c.seed << '\n';
  }
  return 0;
}

int cmd_alpha_sweep(std::int64_t n, std::int64_t m, const std::vector<double>& alphas,
                    std::int64_t trials, const Common& c, const std::string& cmdline) {
  require_format(c);
  require(n >= 1 && trials >= 1, "--n and --trials must be positive");
  const std::int64_t items = m > 0 ? m : default_item_rule(n);
  for (double a : alphas) require(a >= 0.0 && a <= 0.5, "alphas must lie in [0, 0.5]");
  const auto rows = alpha_sweep(n, items, alphas, trials, c.seed, exec_options(c.jobs));
  Output out(c.output);
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"alpha", r.alpha}, {"mean_rd", r.mean_rd}, {"stderr", r.std_error},
                     {"relative_change", r.relative_change}});
    }
    out.stream() << json{{"command", cmdline}, {"n", n}, {"m", items}, {"trials", trials},
                         {"seed", c.seed}, {"rows", arr}}.dump(2)
                 << '\n';
  } else {
    out.stream() << "# " << cmdline << '\n'
                 << "n,m,alpha,trials,mean_rd,stderr,relative_change,seed\n"
                 << std::setprecision(10);
    for (const auto& r : rows) {
      out.stream() << n << ',' << items << ',' << r.alpha << ',' << trials << ',' << r.mean_rd
                   << ',' << r.std_error << ',' << r.relative_change << ',' << c.seed << '\n';
    }
  }
  return 0;
}

int cmd_bench(const std::string& shape_name, const std::vector<std::int64_t>& sizes, int reps,
              const Common& c, const std::string& cmdline) {
  TreeShape shape;
  if (shape_name == "star") shape = TreeShape::kStar;
  else if (shape_name == "path") shape = TreeShape::kPath;
  else if (shape_name == "random") shape = TreeShape::kRandom;
  else throw UsageError("--shape must be star, path or random");
  for (auto n : sizes) require(n >= 2, "sizes must be at least 2");
  require(reps >= 1, "--reps must be positive");
  Rng rng(c.seed);
  const auto report = measure_complexity(sizes, shape, rng, reps);
  Output out(c.output);
  out.stream() << "# " << cmdline << '\n'
               << "# linear fit: seconds = " << report.intercept << " + " << report.slope
               << " * n, relative residual " << report.relative_residual << '\n'
               << "n,seconds,ratio_to_previous\n"
               << std::setprecision(6);
  for (const auto& r : report.rows) {
    out.stream() << r.node_count << ',' << r.seconds << ',' << r.ratio_to_previous << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion mechanism simulation and verification"};
  app.require_subcommand(1);
  const std::string cmdline = invocation(argc, argv);

  Common c;
  auto add_common = [&c](CLI::App* sub, bool with_format) {
    sub->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
    sub->add_option("-o,--output", c.output, "Write to file instead of stdout");
    sub->add_option("--jobs", c.jobs, "Worker threads (0 = all, 1 = serial reference)");
    if (with_format) sub->add_option("--format", c.format, "csv or json")->capture_default_str();
  };

  std::int64_t n = 0, m = 1, trials = 1000, divisor = 20, fixed_m = 0;
  double alpha = 0.01;
  std::string tree_file, pruefer_file, shape = "path";
  std::vector<double> values;
  std::vector<double> alphas{0.0, 0.001, 0.005, 0.01, 0.05, 0.1};
  std::vector<std::int64_t> sizes;
  std::vector<std::string> configs{"5x200", "10x100", "20x50", "50x20", "100x10"};
  bool full = false;
  int reps = 5;
  VerifyFlags vf;

  auto* gen = app.add_subcommand("gen-tree", "Generate a uniform random tree or decode Prüfer sequences");
  gen->add_option("--n", n, "Node count (seller included)");
  gen->add_option("--pruefer-file", pruefer_file, "Decode sequences from file, one per line");
  add_common(gen, false);
  std::string gen_format = "json";
  gen->add_option("--format", gen_format, "json or pruefer")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run the mechanism once and print the outcome as JSON");
  run->add_option("--tree", tree_file, "Tree JSON file");
  run->add_option("--n", n, "Random tree with this many nodes when --tree is absent");
  run->add_option("--m", m, "Items")->capture_default_str();
  run->add_option("--alpha", alpha, "Reward factor")->capture_default_str();
  run->add_option("--values", values, "Valuations of labels 1..n-1, comma separated")
      ->delimiter(',');
  add_common(run, false);

  auto* verify = app.add_subcommand("verify", "Check IR, feasibility and DIC");
  verify->add_option("--n-max", vf.n_max, "Largest tree (nodes) for the DIC sweep")
      ->capture_default_str();
  verify->add_option("--samples", vf.samples, "Paired samples per comparison")
      ->capture_default_str();
  verify->add_option("--m-max", vf.m_max, "Items 1..m-max in the DIC sweep")->capture_default_str();
  verify->add_option("--alphas", vf.alphas, "Reward factors in the DIC sweep")->delimiter(',');
  verify->add_option("--ir-instances", vf.ir_instances, "Random IR/feasibility instances")
      ->capture_default_str();
  verify->add_option("--ir-n-max", vf.ir_n_max, "Largest buyer count for IR instances")
      ->capture_default_str();
  verify->add_flag("--skip-dic", vf.skip_dic, "Only run IR and feasibility");
  add_common(verify, false);

  auto* t1 = app.add_subcommand("table1", "Revenue ratios over uniform random trees by size");
  t1->add_option("--sizes", sizes, "Buyer counts")->delimiter(',');
  t1->add_option("--m", fixed_m, "Fixed item count (overrides --m-divisor)");
  t1->add_option("--m-divisor", divisor, "m = max(1, n / divisor)")->capture_default_str();
  t1->add_option("--trials", trials, "Trials per size")->capture_default_str();
  t1->add_option("--alpha", alpha, "Reward factor")->capture_default_str();
  t1->add_flag("--full", full, "Include per-trial detail (JSON)");
  add_common(t1, true);

  std::int64_t t2_m = 1, t2_trials = 500;
  auto* t2 = app.add_subcommand("table2", "Revenue ratios over branch-controlled trees");
  t2->add_option("--configs", configs, "<mean branches>x<mean branch size> list")->delimiter(',');
  t2->add_option("--m", t2_m, "Items")->capture_default_str();
  t2->add_option("--trials", t2_trials, "Trials per config")->capture_default_str();
  t2->add_option("--alpha", alpha, "Reward factor")->capture_default_str();
  t2->add_flag("--full", full, "Include per-trial detail (JSON)");
  add_common(t2, true);

  std::int64_t wc_n = 10000, wc_trials = 100000;
  auto* wc = app.add_subcommand("worst-case", "Star with one item: R_D / R_opt");
  wc->add_option("--n", wc_n, "Buyers")->capture_default_str();
  wc->add_option("--trials", wc_trials, "Trials")->capture_default_str();
  add_common(wc, true);

  std::int64_t as_n = 100, as_m = 0, as_trials = 2000;
  auto* as = app.add_subcommand("alpha-sweep", "Mean R_D as a function of the reward factor");
  as->add_option("--n", as_n, "Buyers")->capture_default_str();
  as->add_option("--m", as_m, "Items (default max(1, n/20))");
  as->add_option("--alphas", alphas, "Reward factors in [0, 0.5]")->delimiter(',');
  as->add_option("--trials", as_trials, "Trials")->capture_default_str();
  add_common(as, true);

  std::vector<std::int64_t> bench_sizes{10000, 20000, 40000, 80000, 160000, 320000, 640000};
  auto* bench = app.add_subcommand("bench", "Mechanism running time versus tree size");
  bench->add_option("--shape", shape, "star, path or random")->capture_default_str();
  bench->add_option("--sizes", bench_sizes, "Node counts")->delimiter(',');
  bench->add_option("--reps", reps, "Repetitions per size (minimum kept)")->capture_default_str();
  add_common(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_tree(n, pruefer_file, gen_format, c);
    if (*run) return cmd_run(tree_file, n, m, alpha, values, c, cmdline);
    if (*verify) return cmd_verify(vf, c);
    if (*t1) {
      if (sizes.empty()) sizes = {10, 100, 1000, 10000};
      return cmd_table1(sizes, fixed_m, divisor, trials, alpha, full, c, cmdline);
    }
    if (*t2) return cmd_table2(configs, t2_m, t2_trials, alpha, full, c, cmdline);
    if (*wc) return cmd_worst_case(wc_n, wc_trials, c, cmdline);
    if (*as) return cmd_alpha_sweep(as_n, as_m, alphas, as_trials, c, cmdline);
    if (*bench) return cmd_bench(shape, bench_sizes, reps, c, cmdline);
  } catch (const UsageError& e) {
    std::cerr << "diffmech: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "diffmech: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TreeError& e) {
    std::cerr << "diffmech: invalid tree: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "diffmech: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
