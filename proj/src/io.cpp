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

#include "diffmech/io.hpp"

#include <fstream>
#include <sstream>

namespace diffmech {

using nlohmann::json;

json tree_to_json(const SocialTree& tree) {
  json edges = json::array();
  for (const auto& [u, v] : tree.edges()) edges.push_back({u, v});
  return {{"n", tree.node_count()}, {"root", tree.root()}, {"edges", std::move(edges)}};
}

SocialTree tree_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("tree JSON must be an object");
  for (const char* key : {"n", "edges"}) {
    if (!j.contains(key)) throw FormatError(std::string("tree JSON missing \"") + key + "\"");
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    throw FormatError("\"n\" must be a positive integer");
  }
  if (j.contains("root") && (!j["root"].is_number_integer() || j["root"].get<long long>() != 0)) {
    throw FormatError("\"root\" must be 0");
  }
  if (!j["edges"].is_array()) throw FormatError("\"edges\" must be an array");
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw FormatError("each edge must be a pair of integers");
    }
    edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
  }
  auto tree = SocialTree::from_edges(edges, kSeller);
  const auto n = j["n"].get<std::size_t>();
  if (tree.node_count() != n) {
    throw FormatError("\"n\" is " + std::to_string(n) + " but edges span " +
                      std::to_string(tree.node_count()) + " nodes");
  }
  return tree;
}

SocialTree read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open tree file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON in " + path + ": " + e.what());
  }
  return tree_from_json(j);
}

std::vector<std::vector<NodeId>> read_pruefer_lines(std::istream& in) {
  std::vector<std::vector<NodeId>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<NodeId> seq;
    std::string token;
    bool any = false;
    while (ls >> token) {
      any = true;
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw FormatError("not an integer label: " + token);
      seq.push_back(static_cast<NodeId>(v));
    }
    // Blank lines are skipped, so the 2-node tree (empty sequence) has no text
    // form.
    if (any) out.push_back(std::move(seq));
  }
  return out;
}

void write_pruefer_line(std::ostream& out, const std::vector<NodeId>& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out << ' ';
    out << seq[i];
  }
  out << '\n';
}

json outcome_to_json(const MechanismOutcome& outcome) {
  json plans = json::array();
  for (const auto& p : outcome.branch_plans) {
    plans.push_back({{"branch_root", p.branch_root}, {"price", p.price}, {"quota", p.quota}});
  }
  return {{"branch_plans", std::move(plans)},
          {"winners", outcome.winners()},
          {"net_payments", outcome.net_payment},
          {"gross_revenue", outcome.gross_revenue},
          {"rewards_paid", outcome.rewards_paid},
          {"seller_revenue", outcome.seller_revenue}};
}

}  // namespace diffmech
