// Copyright 2026 lmplan Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmplan/model_shape.hpp"

namespace lmplan {

struct MixtureSource {
  std::string name;
  double weight = 0.0;  // in (0, 1]
};

struct MixtureSpec {
  std::vector<MixtureSource> sources;
  Count pattern_length = 10'000;
};

/// Throws unless at least one source, every weight in (0, 1], and the sum
/// is 1 within 1e-9.
void validate(const MixtureSpec& spec);

/// Largest-remainder (Hamilton) apportionment of `length` slots across the
/// weights; ties between equal remainders go to the lower index.
std::vector<Count> largest_remainder_quotas(std::span<const double> weights, Count length);

struct MixturePattern {
  std::vector<int> sequence;  // source index per slot
  std::vector<Count> counts;  // per-source totals: the largest-remainder quotas
};

/// Deterministic interleaving whose every prefix tracks the target weights
/// within one sample: each source receives its largest-remainder quota of
/// slots, and slot assignment is earliest-deadline-first over the per-unit
/// windows implied by |count_i(t) - w_i * t| < 1.
MixturePattern mixture_pattern(const MixtureSpec& spec);

/// One source index per line.
std::string format_mixture_pattern(const MixturePattern& pattern);

struct TreeNode {
  std::string id;
  std::optional<std::string> parent;  // nullopt for the root
  Count token_count = 0;
};

/// Reply tree; node order fixes sibling order during serialization.
struct ConversationTree {
  std::vector<TreeNode> nodes;
};

/// Line-oriented format: `id parent_id token_count`, root parent is `-`.
/// Blank lines and `#` comments are skipped.
ConversationTree load_tree(const std::filesystem::path& path);
ConversationTree read_tree(std::istream& in);

/// Per-token node depths in depth-first order; doubles as the position
/// sequence for embeddings.
using DepthSequence = std::vector<Count>;

/// Depth-first walk from the root, emitting each node's depth token_count
/// times. Throws on cycles or a root count other than one.
DepthSequence serialize_tree(const ConversationTree& tree);

/// Square boolean mask, true == masked (query row j may not read key
/// column i). Self-attention is always permitted.
class AttentionMask {
 public:
  explicit AttentionMask(Count n) : n_(n), masked_(static_cast<std::size_t>(n * n), 1) {}

  Count size() const { return n_; }
  bool masked(Count query, Count key) const {
    return masked_[static_cast<std::size_t>(query * n_ + key)] != 0;
  }
  void set_masked(Count query, Count key, bool value) {
    masked_[static_cast<std::size_t>(query * n_ + key)] = value ? 1 : 0;
  }
  bool operator==(const AttentionMask& other) const = default;

  /// Row-major bit rows, '1' = masked, one row per line.
  std::string to_bit_rows() const;
  /// JSON with "allow" polarity and an explicit polarity field.
  std::string to_json() const;

 private:
  Count n_ = 0;
  std::vector<std::uint8_t> masked_;
};

/// Depth-to-mask conversion, transcribed rule: walking keys i, a running
/// flag turns on at j == i+1 and stays on only while depths[j] > depths[i];
/// row j masks column i whenever the flag is off and i != j.
AttentionMask tree_attention_mask(const DepthSequence& depths);

/// Equivalent closed form: j attends to i iff i == j, or i < j and every
/// depth in (i, j] exceeds depths[i] (i lies on j's serialized ancestor
/// path).
AttentionMask tree_attention_mask_ancestor(const DepthSequence& depths);

}  // namespace lmplan
