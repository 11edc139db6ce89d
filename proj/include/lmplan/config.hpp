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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lmplan/model_shape.hpp"
#include "lmplan/parallel_sim.hpp"
#include "lmplan/topology.hpp"

namespace lmplan {

/// Everything a planning run needs, read from one config file.
struct PlanConfig {
  ModelShape model;
  std::string model_preset;  // empty for fully custom shapes
  Count training_tokens = 0;  // 0 = not specified
  ParallelismConfig parallelism;
  std::optional<ClusterTopology> cluster;
  Bytes gpu_mem_bytes = 40'000'000'000;
  Count dtype_bytes = 2;
};

/// INI-style sections:
///
///   [model]        preset = falcon-180b, or explicit n_layer/d_model/
///                  d_head/n_q/n_kv/d_vocab/seq_len (+ optional
///                  tied_embeddings/mlp_expansion/parallel_blocks/
///                  single_layer_norm/training_tokens); explicit keys
///                  override preset fields
///   [parallelism]  tp, pp, dp (required); world_size (defaults to the
///                  product), n_microbatches, microbatch_tokens,
///                  scatter_gather, parallel_blocks, interleaved
///   [hardware]     optional: gpu_mem_bytes (default 40e9), dtype_bytes
///                  (default 2)
///   [cluster]      optional: nodes, gpus_per_node, bandwidth_file
///                  (path relative to the config file)
///
/// Unknown sections or keys are errors; syntax errors carry line numbers.
PlanConfig parse_config(const std::filesystem::path& path);

/// Same, from in-memory text; `base_dir` resolves relative file references.
PlanConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = ".");

}  // namespace lmplan
