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

// Serialization.
//
//   tree JSON:     {"n": <node count>, "root": 0, "edges": [[u, v], ...]}
//                  ("root" may be omitted; it must be 0 if present)
//   Prüfer text:   whitespace-separated labels, one sequence per line; the
//                  node count is the sequence length + 2.
//   outcome JSON:  {"branch_plans": [...], "winners": [...],
//                   "net_payments": [...], "seller_revenue": r, ...}

#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffmech/mechanism.hpp"
#include "diffmech/network.hpp"

namespace diffmech {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json tree_to_json(const SocialTree& tree);
/// Throws FormatError on schema problems, TreeError on invalid trees.
SocialTree tree_from_json(const nlohmann::json& j);
SocialTree read_tree_file(const std::string& path);

/// One sequence per non-blank line. Throws FormatError on non-integer tokens.
std::vector<std::vector<NodeId>> read_pruefer_lines(std::istream& in);
void write_pruefer_line(std::ostream& out, const std::vector<NodeId>& seq);

nlohmann::json outcome_to_json(const MechanismOutcome& outcome);

}  // namespace diffmech
