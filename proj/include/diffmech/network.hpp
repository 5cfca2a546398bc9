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

// Tree-structured markets: the social tree itself, the buyers' diffusion
// decisions, and the market that is reachable once those decisions are made.
//
// Nodes are dense integer labels 0..node_count-1 and label 0 is always the
// seller. Children lists are kept in ascending label order so every
// downstream tie-break is reproducible.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diffmech/random.hpp"

namespace diffmech {

using NodeId = std::int32_t;
inline constexpr NodeId kSeller = 0;
inline constexpr NodeId kNoParent = -1;

using Edge = std::pair<NodeId, NodeId>;

class TreeError : public std::invalid_argument {
 public:
  enum class Code {
    kCycle,
    kDisconnected,
    kDuplicateEdge,
    kRootAbsent,
    kBadLabel,
    kBadPrueferLength,
    kTooSmall,
  };

  TreeError(Code code, const std::string& what)
      : std::invalid_argument(what), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Rooted labeled tree. The root (label 0) is the seller; every other node is
/// a buyer. Immutable once built.
class SocialTree {
 public:
  /// Orients `edges` away from `root`. Labels must be dense in [0, max label];
  /// node_count is max label + 1. Throws TreeError on cycles, disconnected
  /// input, duplicate edges, or an absent root.
  static SocialTree from_edges(std::span<const Edge> edges, NodeId root = kSeller);

  /// Parent array form; parent[root] == kNoParent. Validates like from_edges.
  static SocialTree from_parents(std::vector<NodeId> parent);

  std::size_t node_count() const noexcept { return parent_.size(); }
  std::size_t buyer_count() const noexcept { return parent_.size() - 1; }
  NodeId root() const noexcept { return kSeller; }

  NodeId parent(NodeId v) const { return parent_[static_cast<std::size_t>(v)]; }
  std::span<const NodeId> children(NodeId v) const {
    auto b = child_offset_[static_cast<std::size_t>(v)];
    auto e = child_offset_[static_cast<std::size_t>(v) + 1];
    return {child_list_.data() + b, e - b};
  }
  const std::vector<NodeId>& parents() const noexcept { return parent_; }

  /// Undirected edge list, (parent, child), ordered by child label.
  std::vector<Edge> edges() const;

  friend bool operator==(const SocialTree& a, const SocialTree& b) {
    return a.parent_ == b.parent_;
  }

 private:
  explicit SocialTree(std::vector<NodeId> parent);

  std::vector<NodeId> parent_;
  std::vector<std::size_t> child_offset_;
  std::vector<NodeId> child_list_;
};

/// Decodes a Prüfer sequence of length node_count - 2 into the labeled tree on
/// node_count nodes, rooted at label 0.
SocialTree decode_pruefer(std::span<const NodeId> seq, std::size_t node_count);

/// Inverse of decode_pruefer. Requires at least two nodes.
std::vector<NodeId> encode_pruefer(const SocialTree& tree);

/// Uniformly random labeled tree on node_count nodes (root = label 0), drawn
/// by decoding a uniform Prüfer sequence.
SocialTree random_tree(std::size_t node_count, Rng& rng);

SocialTree star_tree(std::size_t node_count);
SocialTree path_tree(std::size_t node_count);

/// Which buyers forward the sale to which of their children. Stored per edge:
/// informed(c) says whether parent(c) told c. The seller always informs its
/// children, so only buyer-to-child edges are free choices.
class ActionProfile {
 public:
  /// Every buyer informs every child.
  static ActionProfile full_diffusion(const SocialTree& tree);

  /// Sets whether `buyer` informs `child`. Throws std::invalid_argument if
  /// `child` is not a child of `buyer` or `buyer` is the seller.
  void set_informs(const SocialTree& tree, NodeId buyer, NodeId child, bool value);

  bool informed(NodeId child) const {
    return informed_[static_cast<std::size_t>(child)] != 0;
  }

  /// The subset of `buyer`'s children it informs.
  std::vector<NodeId> informs(const SocialTree& tree, NodeId buyer) const;

  std::size_t node_count() const noexcept { return informed_.size(); }

  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;

 private:
  std::vector<std::uint8_t> informed_;
};

ActionProfile full_diffusion(const SocialTree& tree);

struct Branch {
  NodeId root;
  std::int64_t size;
};

/// The reachable part of a tree under an action profile, decomposed into
/// branches (subtrees of the seller's reachable children). All per-node arrays
/// are indexed by label and sized node_count; non-participants carry
/// branch index -1, depth -1 and child count 0.
class EffectiveMarket {
 public:
  std::size_t node_count() const noexcept { return parent_.size(); }

  bool participates(NodeId v) const { return branch_index(v) >= 0; }
  /// Index into branches() of the branch containing v, -1 for non-participants
  /// and the seller.
  std::int32_t branch_index(NodeId v) const {
    return branch_index_[static_cast<std::size_t>(v)];
  }
  NodeId branch_root(NodeId v) const {
    return branches_[static_cast<std::size_t>(branch_index(v))].root;
  }
  std::int32_t depth(NodeId v) const { return depth_[static_cast<std::size_t>(v)]; }
  /// Number of reachable direct children.
  std::int32_t child_count(NodeId v) const {
    return child_count_[static_cast<std::size_t>(v)];
  }
  NodeId parent(NodeId v) const { return parent_[static_cast<std::size_t>(v)]; }

  /// Participating buyers in breadth-first order (parents precede children).
  std::span<const NodeId> participants() const noexcept { return participants_; }
  std::span<const Branch> branches() const noexcept { return branches_; }

  /// x: number of branches.
  std::int64_t branch_count() const noexcept {
    return static_cast<std::int64_t>(branches_.size());
  }
  /// k: total number of participants.
  std::int64_t total_size() const noexcept {
    return static_cast<std::int64_t>(participants_.size());
  }
  /// k_{-i}: participants outside branch b.
  std::int64_t size_outside(std::size_t b) const {
    return total_size() - branches_[b].size;
  }

  const std::vector<NodeId>& parents() const noexcept { return parent_; }

 private:
  friend EffectiveMarket effective_market(const SocialTree&, const ActionProfile&);

  std::vector<NodeId> parent_;
  std::vector<std::int32_t> branch_index_;
  std::vector<std::int32_t> depth_;
  std::vector<std::int32_t> child_count_;
  std::vector<NodeId> participants_;
  std::vector<Branch> branches_;
};

/// One breadth-first pass from the seller following informed edges.
EffectiveMarket effective_market(const SocialTree& tree, const ActionProfile& actions);

inline EffectiveMarket effective_market(const SocialTree& tree) {
  return effective_market(tree, full_diffusion(tree));
}

/// Private valuations, one per node label. Entry 0 (the seller) is unused.
/// NaN marks a missing valuation.
class ValuationProfile {
 public:
  ValuationProfile() = default;
  /// Throws std::invalid_argument if any present value lies outside [0, 1].
  explicit ValuationProfile(std::vector<double> values);

  /// Independent U[0,1) draws for labels 1..node_count-1.
  static ValuationProfile uniform(std::size_t node_count, Rng& rng);

  bool has(NodeId v) const;
  double operator[](NodeId v) const { return values_[static_cast<std::size_t>(v)]; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

}  // namespace diffmech
