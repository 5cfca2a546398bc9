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

#include "diffmech/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace diffmech {

namespace {

std::string label_str(NodeId v) { return std::to_string(v); }

}  // namespace

SocialTree::SocialTree(std::vector<NodeId> parent) : parent_(std::move(parent)) {
  const std::size_t n = parent_.size();
  child_offset_.assign(n + 1, 0);
  for (std::size_t v = 1; v < n; ++v) {
    ++child_offset_[static_cast<std::size_t>(parent_[v]) + 1];
  }
  for (std::size_t v = 0; v < n; ++v) child_offset_[v + 1] += child_offset_[v];
  child_list_.resize(n == 0 ? 0 : n - 1);
  std::vector<std::size_t> fill(child_offset_.begin(), child_offset_.end() - 1);
  // Ascending v gives ascending children.
  for (std::size_t v = 1; v < n; ++v) {
    child_list_[fill[static_cast<std::size_t>(parent_[v])]++] = static_cast<NodeId>(v);
  }
}

SocialTree SocialTree::from_edges(std::span<const Edge> edges, NodeId root) {
  if (root != kSeller) {
    throw TreeError(TreeError::Code::kBadLabel,
                    "root must be label 0 (the seller), got " + label_str(root));
  }
  NodeId max_label = root;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0) {
      throw TreeError(TreeError::Code::kBadLabel, "negative node label in edge list");
    }
    max_label = std::max({max_label, u, v});
  }
  const std::size_t n = static_cast<std::size_t>(max_label) + 1;

  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<std::vector<NodeId>> adj(n);
  bool root_present = edges.empty();
  for (const auto& [u, v] : edges) {
    if (u == v) {
      throw TreeError(TreeError::Code::kCycle, "self loop at node " + label_str(u));
    }
    auto key = std::minmax(u, v);
    if (!seen.insert({key.first, key.second}).second) {
      throw TreeError(TreeError::Code::kDuplicateEdge,
                      "duplicate edge (" + label_str(u) + "," + label_str(v) + ")");
    }
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
    root_present = root_present || u == root || v == root;
  }
  if (!root_present) {
    throw TreeError(TreeError::Code::kRootAbsent,
                    "root " + label_str(root) + " does not appear in any edge");
  }

  std::vector<NodeId> parent(n, kNoParent);
  std::vector<std::uint8_t> visited(n, 0);
  std::vector<NodeId> queue{root};
  visited[static_cast<std::size_t>(root)] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    NodeId u = queue[head];
    for (NodeId w : adj[static_cast<std::size_t>(u)]) {
      if (w == parent[static_cast<std::size_t>(u)]) continue;
      if (visited[static_cast<std::size_t>(w)]) {
        throw TreeError(TreeError::Code::kCycle,
                        "cycle through edge (" + label_str(u) + "," + label_str(w) + ")");
      }
      visited[static_cast<std::size_t>(w)] = 1;
      parent[static_cast<std::size_t>(w)] = u;
      queue.push_back(w);
    }
  }
  if (queue.size() != n) {
    throw TreeError(TreeError::Code::kDisconnected,
                    "graph is disconnected: " + std::to_string(n - queue.size()) +
                        " of " + std::to_string(n) + " labels unreachable from root");
  }
  return SocialTree(std::move(parent));
}

SocialTree SocialTree::from_parents(std::vector<NodeId> parent) {
  std::vector<Edge> edges;
  edges.reserve(parent.size());
  for (std::size_t v = 0; v < parent.size(); ++v) {
    if (v == 0) {
      if (parent[0] != kNoParent) {
        throw TreeError(TreeError::Code::kBadLabel, "seller must not have a parent");
      }
      continue;
    }
    if (parent[v] < 0 || static_cast<std::size_t>(parent[v]) >= parent.size()) {
      throw TreeError(TreeError::Code::kBadLabel,
                      "parent of " + std::to_string(v) + " out of range");
    }
    edges.emplace_back(parent[v], static_cast<NodeId>(v));
  }
  if (parent.empty()) throw TreeError(TreeError::Code::kTooSmall, "empty parent array");
  auto tree = from_edges(edges);
  if (tree.node_count() != parent.size()) {
    throw TreeError(TreeError::Code::kDisconnected, "parent array is disconnected");
  }
  return tree;
}

std::vector<Edge> SocialTree::edges() const {
  std::vector<Edge> out;
  out.reserve(node_count() - 1);
  for (std::size_t v = 1; v < node_count(); ++v) {
    out.emplace_back(parent_[v], static_cast<NodeId>(v));
  }
  return out;
}

SocialTree decode_pruefer(std::span<const NodeId> seq, std::size_t node_count) {
  if (node_count < 2) {
    throw TreeError(TreeError::Code::kTooSmall, "Prüfer decoding needs at least 2 nodes");
  }
  if (seq.size() != node_count - 2) {
    throw TreeError(TreeError::Code::kBadPrueferLength,
                    "Prüfer sequence for " + std::to_string(node_count) +
                        " nodes must have length " + std::to_string(node_count - 2) +
                        ", got " + std::to_string(seq.size()));
  }
  const auto n = static_cast<NodeId>(node_count);
  std::vector<std::int32_t> degree(node_count, 1);
  for (NodeId a : seq) {
    if (a < 0 || a >= n) {
      throw TreeError(TreeError::Code::kBadLabel,
                      "Prüfer label " + label_str(a) + " outside [0, " +
                          label_str(n - 1) + "]");
    }
    ++degree[static_cast<std::size_t>(a)];
  }

  // Linear-time decoding: `ptr` scans for the smallest leaf; a freshly
  // created leaf smaller than ptr is consumed immediately.
  std::vector<Edge> edges;
  edges.reserve(node_count - 1);
  NodeId ptr = 0;
  while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
  NodeId leaf = ptr;
  for (NodeId a : seq) {
    edges.emplace_back(leaf, a);
    if (--degree[static_cast<std::size_t>(a)] == 1 && a < ptr) {
      leaf = a;
    } else {
      ++ptr;
      while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
      leaf = ptr;
    }
  }
  edges.emplace_back(leaf, n - 1);
  return SocialTree::from_edges(edges);
}

std::vector<NodeId> encode_pruefer(const SocialTree& tree) {
  const std::size_t n = tree.node_count();
  if (n < 2) {
    throw TreeError(TreeError::Code::kTooSmall, "Prüfer encoding needs at least 2 nodes");
  }
  // Unrooted view: neighbour of a leaf v is parent(v) unless v is the root,
  // whose only neighbour is its single child.
  std::vector<std::int32_t> degree(n, 0);
  for (std::size_t v = 1; v < n; ++v) {
    ++degree[v];
    ++degree[static_cast<std::size_t>(tree.parent(static_cast<NodeId>(v)))];
  }
  std::vector<std::uint8_t> removed(n, 0);
  auto neighbour = [&](NodeId v) -> NodeId {
    NodeId p = tree.parent(v);
    if (p != kNoParent && !removed[static_cast<std::size_t>(p)]) return p;
    for (NodeId c : tree.children(v)) {
      if (!removed[static_cast<std::size_t>(c)]) return c;
    }
    return kNoParent;
  };

  std::vector<NodeId> seq;
  seq.reserve(n - 2);
  NodeId ptr = 0;
  while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
  NodeId leaf = ptr;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    NodeId next = neighbour(leaf);
    seq.push_back(next);
    removed[static_cast<std::size_t>(leaf)] = 1;
    if (--degree[static_cast<std::size_t>(next)] == 1 && next < ptr) {
      leaf = next;
    } else {
      ++ptr;
      while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
      leaf = ptr;
    }
  }
  return seq;
}

SocialTree random_tree(std::size_t node_count, Rng& rng) {
  if (node_count < 2) {
    throw TreeError(TreeError::Code::kTooSmall, "random_tree needs at least 2 nodes");
  }
  std::uniform_int_distribution<NodeId> label(0, static_cast<NodeId>(node_count) - 1);
  std::vector<NodeId> seq(node_count - 2);
  for (auto& a : seq) a = label(rng);
  return decode_pruefer(seq, node_count);
}

SocialTree star_tree(std::size_t node_count) {
  std::vector<NodeId> parent(node_count, kSeller);
  parent[0] = kNoParent;
  return SocialTree::from_parents(std::move(parent));
}

SocialTree path_tree(std::size_t node_count) {
  std::vector<NodeId> parent(node_count);
  for (std::size_t v = 0; v < node_count; ++v) parent[v] = static_cast<NodeId>(v) - 1;
  return SocialTree::from_parents(std::move(parent));
}

ActionProfile ActionProfile::full_diffusion(const SocialTree& tree) {
  ActionProfile a;
  a.informed_.assign(tree.node_count(), 1);
  a.informed_[0] = 0;
  return a;
}

void ActionProfile::set_informs(const SocialTree& tree, NodeId buyer, NodeId child,
                                bool value) {
  if (buyer == kSeller) {
    throw std::invalid_argument("the seller always informs its children");
  }
  if (child <= 0 || static_cast<std::size_t>(child) >= informed_.size() ||
      tree.parent(child) != buyer) {
    throw std::invalid_argument("node " + std::to_string(child) +
                                " is not a child of buyer " + std::to_string(buyer));
  }
  informed_[static_cast<std::size_t>(child)] = value ? 1 : 0;
}

std::vector<NodeId> ActionProfile::informs(const SocialTree& tree, NodeId buyer) const {
  std::vector<NodeId> out;
  for (NodeId c : tree.children(buyer)) {
    if (informed(c)) out.push_back(c);
  }
  return out;
}

ActionProfile full_diffusion(const SocialTree& tree) {
  return ActionProfile::full_diffusion(tree);
}

EffectiveMarket effective_market(const SocialTree& tree, const ActionProfile& actions) {
  const std::size_t n = tree.node_count();
  EffectiveMarket m;
  m.parent_ = tree.parents();
  m.branch_index_.assign(n, -1);
  m.depth_.assign(n, -1);
  m.child_count_.assign(n, 0);
  m.participants_.reserve(n - 1);
  m.depth_[0] = 0;

  for (NodeId c : tree.children(kSeller)) {
    m.branch_index_[static_cast<std::size_t>(c)] = static_cast<std::int32_t>(m.branches_.size());
    m.branches_.push_back({c, 0});
    m.depth_[static_cast<std::size_t>(c)] = 1;
    m.participants_.push_back(c);
  }
  m.child_count_[0] = static_cast<std::int32_t>(m.branches_.size());
  for (std::size_t head = 0; head < m.participants_.size(); ++head) {
    const NodeId u = m.participants_[head];
    const auto bu = m.branch_index_[static_cast<std::size_t>(u)];
    ++m.branches_[static_cast<std::size_t>(bu)].size;
    for (NodeId c : tree.children(u)) {
      if (!actions.informed(c)) continue;
      m.branch_index_[static_cast<std::size_t>(c)] = bu;
      m.depth_[static_cast<std::size_t>(c)] = m.depth_[static_cast<std::size_t>(u)] + 1;
      ++m.child_count_[static_cast<std::size_t>(u)];
      m.participants_.push_back(c);
    }
  }
  return m;
}

ValuationProfile::ValuationProfile(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t v = 1; v < values_.size(); ++v) {
    double x = values_[v];
    if (!std::isnan(x) && (x < 0.0 || x > 1.0)) {
      throw std::invalid_argument("valuation of node " + std::to_string(v) +
                                  " outside [0, 1]: " + std::to_string(x));
    }
  }
}

ValuationProfile ValuationProfile::uniform(std::size_t node_count, Rng& rng) {
  std::vector<double> v(node_count, 0.0);
  for (std::size_t i = 1; i < node_count; ++i) v[i] = uniform01(rng);
  ValuationProfile out;
  out.values_ = std::move(v);
  return out;
}

bool ValuationProfile::has(NodeId v) const {
  return v >= 0 && static_cast<std::size_t>(v) < values_.size() &&
         !std::isnan(values_[static_cast<std::size_t>(v)]);
}

}  // namespace diffmech
