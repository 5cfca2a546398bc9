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

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>
#include <vector>

#include "diffmech/network.hpp"

using namespace diffmech;

namespace {

TreeError::Code error_code(std::vector<Edge> edges, NodeId root = 0) {
  try {
    SocialTree::from_edges(edges, root);
  } catch (const TreeError& e) {
    return e.code();
  }
  FAIL("expected TreeError");
  return TreeError::Code::kCycle;
}

std::vector<NodeId> ids(std::span<const NodeId> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("from_edges orients away from the root") {
  const std::vector<Edge> one{{0, 1}};
  const auto t1 = SocialTree::from_edges(one);
  CHECK(t1.node_count() == 2);
  CHECK(t1.buyer_count() == 1);
  CHECK(t1.parent(1) == 0);
  CHECK(effective_market(t1).depth(1) == 1);

  const std::vector<Edge> two{{0, 1}, {1, 2}, {0, 3}};
  const auto t2 = SocialTree::from_edges(two);
  const auto m = effective_market(t2);
  REQUIRE(m.branch_count() == 2);
  CHECK(m.branches()[0].size == 2);
  CHECK(m.branches()[1].size == 1);

  // Edge direction in the input does not matter.
  const std::vector<Edge> flipped{{3, 0}, {2, 1}, {1, 0}};
  CHECK(SocialTree::from_edges(flipped) == t2);
  CHECK(ids(t2.children(0)) == std::vector<NodeId>{1, 3});
}

TEST_CASE("from_edges rejects malformed input with distinct errors") {
  CHECK(error_code({{0, 1}, {1, 2}, {2, 0}}) == TreeError::Code::kCycle);
  CHECK(error_code({{0, 1}, {2, 3}}) == TreeError::Code::kDisconnected);
  CHECK(error_code({{0, 1}, {1, 0}}) == TreeError::Code::kDuplicateEdge);
  CHECK(error_code({{1, 2}, {2, 3}}) == TreeError::Code::kRootAbsent);
  CHECK(error_code({{0, 1}}, 5) == TreeError::Code::kBadLabel);
  CHECK(error_code({{0, -1}}) == TreeError::Code::kBadLabel);
}

TEST_CASE("from_parents validates") {
  CHECK(SocialTree::from_parents({kNoParent, 0, 1}) == path_tree(3));
  CHECK_THROWS_AS(SocialTree::from_parents({kNoParent, 2, 1}), TreeError);
  CHECK_THROWS_AS(SocialTree::from_parents({0, 0}), TreeError);
}

TEST_CASE("Pruefer decoding examples") {
  const auto t2 = decode_pruefer({}, 2);
  CHECK(t2.edges() == std::vector<Edge>{{0, 1}});

  const std::vector<NodeId> star{0, 0};
  CHECK(decode_pruefer(star, 4) == star_tree(4));
  const std::vector<NodeId> path{1, 2};
  CHECK(decode_pruefer(path, 4) == path_tree(4));

  CHECK(encode_pruefer(star_tree(4)) == star);
  CHECK(encode_pruefer(path_tree(4)) == path);

  const std::vector<NodeId> bad{0};
  CHECK_THROWS_AS(decode_pruefer(bad, 4), TreeError);
  const std::vector<NodeId> out_of_range{0, 4};
  CHECK_THROWS_AS(decode_pruefer(out_of_range, 4), TreeError);
  CHECK_THROWS_AS(encode_pruefer(SocialTree::from_parents({kNoParent})), TreeError);
}

TEST_CASE("Pruefer round trip is a bijection for n <= 7") {
  for (std::size_t n = 2; n <= 7; ++n) {
    const std::size_t len = n - 2;
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= n;
    std::set<std::vector<NodeId>> trees;
    std::vector<NodeId> seq(len, 0);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < len; ++i, c /= n) seq[i] = static_cast<NodeId>(c % n);
      const auto tree = decode_pruefer(seq, n);
      REQUIRE(encode_pruefer(tree) == seq);
      // Label i appears deg(i) - 1 times.
      for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) {
        const auto deg = tree.children(v).size() + (v == 0 ? 0 : 1);
        CHECK(static_cast<std::size_t>(std::count(seq.begin(), seq.end(), v)) == deg - 1);
      }
      trees.insert(tree.parents());
    }
    CHECK(trees.size() == total);  // Cayley: n^(n-2)
  }
}

TEST_CASE("random_tree is uniform over labeled trees (n = 5)") {
  Rng rng(12345);
  std::vector<double> counts(125, 0.0);
  const int samples = 200000;
  for (int s = 0; s < samples; ++s) {
    const auto seq = encode_pruefer(random_tree(5, rng));
    counts[static_cast<std::size_t>(seq[0] * 25 + seq[1] * 5 + seq[2])] += 1.0;
  }
  const double expected = samples / 125.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(124);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("random_tree basics") {
  Rng a(7), b(7);
  CHECK(random_tree(50, a) == random_tree(50, b));
  Rng r(1);
  for (int i = 0; i < 10; ++i) CHECK(random_tree(2, r) == path_tree(2));
  CHECK_THROWS_AS(random_tree(1, r), TreeError);
}

TEST_CASE("full diffusion and action profiles") {
  const auto path = path_tree(3);
  const auto full = full_diffusion(path);
  CHECK(full.informs(path, 1) == std::vector<NodeId>{2});
  const auto star = star_tree(5);
  for (NodeId v = 1; v < 5; ++v) CHECK(full_diffusion(star).informs(star, v).empty());

  auto profile = full_diffusion(path);
  CHECK_THROWS_AS(profile.set_informs(path, 0, 1, false), std::invalid_argument);
  CHECK_THROWS_AS(profile.set_informs(path, 1, 1, false), std::invalid_argument);
}

TEST_CASE("effective_market on S->{A,B}, A->{C,D}") {
  // S=0, A=1, B=2, C=3, D=4.
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 3}, {1, 4}};
  const auto tree = SocialTree::from_edges(edges);
  const auto m = effective_market(tree);
  CHECK(m.branch_count() == 2);
  CHECK(m.total_size() == 4);
  CHECK(m.branches()[0].root == 1);
  CHECK(m.branches()[0].size == 3);
  CHECK(m.branches()[1].size == 1);
  CHECK(m.size_outside(0) == 1);
  CHECK(m.size_outside(1) == 3);
  CHECK(m.depth(3) == 2);
  CHECK(m.child_count(1) == 2);
  CHECK(m.branch_root(4) == 1);
  CHECK(ids(m.participants()) == std::vector<NodeId>{1, 2, 3, 4});

  auto actions = full_diffusion(tree);
  actions.set_informs(tree, 1, 3, false);
  actions.set_informs(tree, 1, 4, false);
  const auto cut = effective_market(tree, actions);
  CHECK(cut.total_size() == 2);
  CHECK(cut.branches()[0].size == 1);
  CHECK(cut.branches()[1].size == 1);
  CHECK_FALSE(cut.participates(3));
  CHECK(cut.branch_index(3) == -1);
  CHECK(cut.depth(4) == -1);
  CHECK(cut.child_count(1) == 0);
}

TEST_CASE("withholding never grows the market") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto tree = random_tree(2 + rng() % 30, rng);
    auto actions = full_diffusion(tree);
    const auto before = effective_market(tree, actions);
    for (NodeId v = 1; v < static_cast<NodeId>(tree.node_count()); ++v) {
      for (NodeId c : tree.children(v)) {
        if (rng() % 3 == 0) actions.set_informs(tree, v, c, false);
      }
    }
    const auto after = effective_market(tree, actions);
    CHECK(after.total_size() <= before.total_size());
    CHECK(after.branch_count() == before.branch_count());  // depth-1 always participate
    for (NodeId v : after.participants()) {
      CHECK(before.participates(v));
      CHECK(after.depth(v) == before.depth(v));
    }
  }
}

TEST_CASE("ValuationProfile") {
  CHECK_THROWS_AS(ValuationProfile({0.0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(ValuationProfile({0.0, -0.1}), std::invalid_argument);
  const ValuationProfile v({NAN, 0.5, NAN});
  CHECK(v.has(1));
  CHECK_FALSE(v.has(2));
  Rng a(3), b(3);
  const auto u = ValuationProfile::uniform(10, a);
  CHECK(u.values().size() == 10);
  for (NodeId i = 1; i < 10; ++i) CHECK((u[i] >= 0.0 && u[i] < 1.0));
  CHECK(std::equal(u.values().begin() + 1, u.values().end(),
                   ValuationProfile::uniform(10, b).values().begin() + 1));
}
