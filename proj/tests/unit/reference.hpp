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

// Deliberately naive re-implementation of the mechanism used as a test
// oracle: reachability by walking to the root, quotas by stable sort, ranking
// by full sort, rewards by walking each winner's ancestor path. Quadratic in
// the worst case; only for small trees.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "diffmech/network.hpp"

namespace reference {

using diffmech::NodeId;

struct Outcome {
  std::vector<int> allocation;
  std::vector<double> net_payment;
  std::vector<double> price;  // per branch, ascending root label
  std::vector<std::int64_t> quota;
  double seller_revenue = 0.0;
};

inline Outcome run(const diffmech::SocialTree& tree, const diffmech::ActionProfile& actions,
                   const std::vector<double>& values, const std::vector<std::uint64_t>& keys,
                   std::int64_t m, double alpha) {
  const auto n = static_cast<NodeId>(tree.node_count());
  std::vector<int> in(n, 0), depth(n, 0);
  std::vector<NodeId> top(n, -1);
  for (NodeId v = 1; v < n; ++v) {
    bool ok = true;
    int d = 0;
    NodeId u = v, last = v;
    while (u != 0) {
      if (tree.parent(u) != 0 && !actions.informed(u)) ok = false;
      last = u;
      u = tree.parent(u);
      ++d;
    }
    in[v] = ok;
    depth[v] = d;
    top[v] = last;
  }
  std::vector<NodeId> roots;
  for (NodeId c : tree.children(0)) roots.push_back(c);
  std::sort(roots.begin(), roots.end());
  const auto x = static_cast<std::int64_t>(roots.size());
  std::vector<std::int64_t> size(roots.size(), 0);
  std::int64_t k = 0;
  for (NodeId v = 1; v < n; ++v) {
    if (!in[v]) continue;
    ++k;
    for (std::size_t b = 0; b < roots.size(); ++b) size[b] += top[v] == roots[b];
  }

  Outcome out;
  out.allocation.assign(n, 0);
  out.net_payment.assign(n, 0.0);
  for (std::size_t b = 0; b < roots.size(); ++b) {
    const double t = static_cast<double>(k - size[b]) / static_cast<double>(x);
    out.price.push_back(t == 0.0 ? std::exp(-1.0) : std::pow(1.0 + t, -1.0 / t));
  }

  // Quotas.
  out.quota.assign(roots.size(), 0);
  if (m >= k) {
    out.quota = size;
  } else {
    std::int64_t given = 0;
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < roots.size(); ++b) {
      out.quota[b] = m * size[b] / k;
      given += out.quota[b];
      order.push_back(b);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (m * size[a]) % k > (m * size[b]) % k;
    });
    for (std::int64_t i = 0; i < m - given; ++i) ++out.quota[order[static_cast<std::size_t>(i)]];
  }

  auto kids = [&](NodeId v) {
    int c = 0;
    for (NodeId w : tree.children(v)) c += in[w];
    return c;
  };
  for (std::size_t b = 0; b < roots.size(); ++b) {
    std::vector<NodeId> cand;
    for (NodeId v = 1; v < n; ++v) {
      if (in[v] && top[v] == roots[b] && values[v] > out.price[b]) cand.push_back(v);
    }
    std::sort(cand.begin(), cand.end(), [&](NodeId a, NodeId c) {
      if (depth[a] != depth[c]) return depth[a] < depth[c];
      if (kids(a) != kids(c)) return kids(a) > kids(c);
      if (keys[a] != keys[c]) return keys[a] < keys[c];
      return a < c;
    });
    for (std::size_t i = 0; i < cand.size() && static_cast<std::int64_t>(i) < out.quota[b]; ++i) {
      const NodeId w = cand[i];
      out.allocation[w] = 1;
      out.net_payment[w] += out.price[b];
      for (NodeId a = tree.parent(w); a != 0; a = tree.parent(a)) {
        out.net_payment[a] -= out.price[b] * alpha * std::pow(0.5, depth[a]);
      }
    }
  }
  for (NodeId v = 1; v < n; ++v) out.seller_revenue += out.net_payment[v];
  return out;
}

}  // namespace reference
