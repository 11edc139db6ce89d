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
#include <string>
#include <string_view>
#include <vector>

#include "lmplan/errors.hpp"

namespace lmplan {

using Count = std::int64_t;
using Bytes = std::int64_t;

/// Layer/width/attention description of a decoder-only transformer.
/// No linear biases, GeLU MLP; layer norms keep weight and bias.
struct ModelShape {
  Count n_layer = 0;
  Count d_model = 0;
  Count d_head = 0;
  Count n_q = 0;   // query heads
  Count n_kv = 0;  // key/value heads
  Count d_vocab = 0;
  Count seq_len = 0;  // training sequence length, tokens
  bool tied_embeddings = true;
  double mlp_expansion = 4.0;
  bool parallel_blocks = true;
  // Single unified layer norm per decoder block instead of two.
  bool single_layer_norm = false;
};

/// Throws ValidationError unless: d_model, d_head, n_q, d_vocab, seq_len >= 1;
/// n_layer >= 0; 1 <= n_kv <= n_q.
void validate(const ModelShape& shape);

/// Built-in shapes: "falcon-7b", "falcon-40b", "falcon-180b".
ModelShape preset_shape(std::string_view name);
const std::vector<std::string>& preset_names();
bool is_preset(std::string_view name);

/// Training-token budget associated with a preset (used by the compute
/// estimate when the config does not override it).
Count preset_training_tokens(std::string_view name);

/// Key/value head layout of the attention module. Multigroup(1) computes
/// identically to Multiquery, Multigroup(n_q) identically to Vanilla.
struct AttentionScheme {
  enum class Kind { Vanilla, Multiquery, Multigroup };

  Kind kind = Kind::Vanilla;
  Count kv = 0;  // Multigroup only

  static AttentionScheme vanilla() { return {Kind::Vanilla, 0}; }
  static AttentionScheme multiquery() { return {Kind::Multiquery, 0}; }
  static AttentionScheme multigroup(Count kv_heads) { return {Kind::Multigroup, kv_heads}; }

  /// Number of K/V head pairs under this scheme: n_q, 1, or kv.
  /// Throws ValidationError for Multigroup with kv < 1 or kv > n_q.
  Count kv_heads(const ModelShape& shape) const;

  std::string name() const;
};

struct ParamCountBreakdown {
  Count embeddings = 0;
  Count attention = 0;   // Wq + Wkv + Wo over all layers
  Count mlp = 0;         // both MLP matrices over all layers
  Count layer_norm = 0;  // norm weights and biases over all layers
  Count total() const { return embeddings + attention + mlp + layer_norm; }
};

/// Exact parameter count: embeddings (once when tied, twice otherwise) plus
/// per layer Wq + Wkv + Wo + two MLP matrices + layer-norm weights/biases
/// (one norm per block when single_layer_norm, two otherwise).
Count param_count(const ModelShape& shape);
ParamCountBreakdown param_count_breakdown(const ModelShape& shape);

/// The coarse n_layer * d_model^2 estimate.
Count param_count_approx(const ModelShape& shape);

/// Whole-replica K,V-cache size for one sequence of `seq` tokens:
/// n_layer * 2 * kv_heads * d_head * seq * bytes_per_element.
/// bytes_per_element must be 2 or 4; seq >= 0.
Bytes kv_cache_bytes(const ModelShape& shape, const AttentionScheme& scheme, Count seq,
                     Count bytes_per_element);

/// Per-tensor-parallel-rank share of a whole-replica cache total.
Bytes kv_cache_bytes_per_tp_rank(Bytes total, Count tp);

/// Training compute of the 6*N*T matmul rule, in PF-days:
/// 6 * params * tokens / (1e15 * 86400).
double training_compute_pf_days(Count params, Count tokens);

}  // namespace lmplan
