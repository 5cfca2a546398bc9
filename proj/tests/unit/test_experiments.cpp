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
#include <sstream>
#include <vector>

#include "diffmech/experiments.hpp"
#include "diffmech/mechanism.hpp"

using namespace diffmech;

TEST_CASE("run_trial") {
  Rng a(10), b(10);
  const auto t1 = run_trial(50, 3, 0.01, a);
  const auto t2 = run_trial(50, 3, 0.01, b);
  CHECK(t1.rd == t2.rd);
  CHECK(t1.r0 == t2.r0);
  CHECK(t1.ropt == t2.ropt);
  CHECK(t1.n == 50);
  CHECK(t1.m == 3);
  CHECK(t1.rd >= 0.0);

  // A single buyer: one branch with k_{-i} = 0, price e^-1; R_0 = R_opt.
  Rng rng(3);
  int sold = 0;
  for (int i = 0; i < 200; ++i) {
    const auto t = run_trial(1, 1, 0.01, rng);
    CHECK(t.branch_count == 1);
    CHECK(t.r0 == t.ropt);
    CHECK((t.rd == 0.0 || std::abs(t.rd - std::exp(-1.0)) < 1e-15));
    sold += t.rd > 0.0;
  }
  CHECK(sold > 100);  // P(v > e^-1) = 0.63
}

TEST_CASE("ratio accumulator") {
  RatioAccumulator a, b, c;
  Rng rng(1);
  std::vector<TrialResult> trials;
  for (int i = 0; i < 30; ++i) trials.push_back(run_trial(20, 1, 0.01, rng));
  for (int i = 0; i < 10; ++i) a.add(trials[i]);
  for (int i = 10; i < 20; ++i) b.add(trials[i]);
  for (int i = 20; i < 30; ++i) c.add(trials[i]);
  RatioAccumulator all;
  for (const auto& t : trials) all.add(t);

  RatioAccumulator left = a;
  left.merge(b);
  left.merge(c);
  CHECK(left.trials == 30);
  CHECK(left.ratio_ropt() == doctest::Approx(all.ratio_ropt()).epsilon(1e-14));
  CHECK(left.stderr_ropt() > 0.0);
  CHECK(RatioAccumulator{}.ratio_r0() == 0.0);

  double rd = 0.0, ropt = 0.0;
  for (const auto& t : trials) {
    rd += t.rd;
    ropt += t.ropt;
  }
  CHECK(all.ratio_ropt() == rd / ropt);
}

TEST_CASE("ratio_table: serial and parallel agree bit for bit") {
  const std::int64_t sizes[] = {10, 60};
  TableOptions serial;
  serial.trials = 150;
  serial.master_seed = 77;
  serial.keep_trials = true;
  serial.exec = {Execution::kSerial, 1};
  TableOptions parallel = serial;
  parallel.exec = {Execution::kParallel, 4};
  const auto s = ratio_table(sizes, default_item_rule, serial);
  const auto p = ratio_table(sizes, default_item_rule, parallel);
  REQUIRE(s.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(s[i].acc == p[i].acc);
    CHECK(s[i].trials.size() == 150);
    for (std::size_t t = 0; t < s[i].trials.size(); ++t) CHECK(s[i].trials[t].rd == p[i].trials[t].rd);
  }
  CHECK(s[1].m == 3);

  // A recorded trial seed reproduces the trial.
  const auto& rec = s[1].trials[17];
  Rng rng(rec.seed);
  const auto again = run_trial(rec.n, rec.m, rec.alpha, rng);
  CHECK(again.rd == rec.rd);
  CHECK(again.ropt == rec.ropt);
}

TEST_CASE("default item rule") {
  CHECK(default_item_rule(10) == 1);
  CHECK(default_item_rule(39) == 1);
  CHECK(default_item_rule(100) == 5);
  CHECK(default_item_rule(10000) == 500);
}

TEST_CASE("branch_controlled_tree") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto t = branch_controlled_tree(1.0, 40.0, rng);
    CHECK(t.children(0).size() == 1);
    CHECK(t.buyer_count() == 40);
  }
  double branches = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = branch_controlled_tree(5.0, 200.0, rng);
    CHECK(t.buyer_count() == 1000);
    branches += static_cast<double>(t.children(0).size());
  }
  CHECK(std::abs(branches / 1000.0 - 5.0) < 0.25);

  const auto many = branch_controlled_tree(100.0, 10.0, rng);
  const auto market = effective_market(many);
  std::int64_t total = 0;
  for (const auto& b : market.branches()) {
    CHECK(b.size >= 1);
    total += b.size;
  }
  CHECK(total == 1000);
  CHECK_THROWS_AS(branch_controlled_tree(0.5, 10.0, rng), std::invalid_argument);
}

TEST_CASE("branch_table determinism") {
  const BranchConfig configs[] = {{3.0, 10.0}, {10.0, 3.0}};
  TableOptions o;
  o.trials = 60;
  o.master_seed = 4;
  o.exec = {Execution::kSerial, 1};
  const auto s = branch_table(configs, 1, o);
  o.exec = {Execution::kParallel, 3};
  const auto p = branch_table(configs, 1, o);
  CHECK(s[0].acc == p[0].acc);
  CHECK(s[1].acc == p[1].acc);
  CHECK(s[0].mean_branch_count > 0.0);
}

TEST_CASE("worst_case_star") {
  const auto r = worst_case_star(1000, 4000, 1, {Execution::kSerial, 1});
  CHECK(r.n == 1000);
  CHECK(r.trials == 4000);
  CHECK(r.branch_price == doctest::Approx(branch_price(999, 1000)));
  CHECK(std::abs(r.ratio - 0.25) < 5.0 * r.std_error + 0.01);
  const auto p = worst_case_star(1000, 4000, 1, {Execution::kParallel, 4});
  CHECK(p.ratio == r.ratio);
  CHECK(p.mean_rd == r.mean_rd);
}

TEST_CASE("alpha_sweep") {
  const double alphas[] = {0.0, 0.01, 0.1, 0.5};
  const auto rows = alpha_sweep(60, 3, alphas, 300, 2, {Execution::kSerial, 1});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].relative_change == 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].mean_rd < rows[i - 1].mean_rd);
    CHECK(rows[i].relative_change < 0.0);
    CHECK(rows[i].relative_change > -0.5);  // rewards never exceed alpha * gross
  }
  const double bad[] = {0.6};
  CHECK_THROWS_AS(alpha_sweep(60, 3, bad, 10, 2), std::invalid_argument);
}

TEST_CASE("CSV and JSON output") {
  const std::int64_t sizes[] = {10};
  TableOptions o;
  o.trials = 20;
  o.master_seed = 1;
  const auto reports = ratio_table(sizes, default_item_rule, o);
  std::ostringstream out;
  write_ratio_csv(out, reports, false);
  const auto text = out.str();
  CHECK(text.rfind("n,m,alpha,trials,rd_r0_ratio,rd_r0_stderr,rd_ropt_ratio,rd_ropt_stderr", 0) ==
        0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const auto j = ratio_json(reports);
  REQUIRE(j.is_array());
  CHECK(j[0]["n"] == 10);
  CHECK(j[0]["trials"] == 20);
}
