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

#include "lmplan/model_shape.hpp"
#include "lmplan/parallel_sim.hpp"

namespace lmplan {

/// Bytes per parameter of each training-state buffer: bfloat16 model
/// param/grad, float32 optimizer param/grad and the two Adam moments.
struct TrainingStateLayout {
  int model_param = 2;
  int model_grad = 2;
  int opt_param = 4;
  int opt_grad = 4;
  int exp_avg = 4;
  int exp_avg_sq = 4;
  int total() const {
    return model_param + model_grad + opt_param + opt_grad + exp_avg + exp_avg_sq;
  }
};

/// Unsharded weights+grads+optimizer footprint: 20 bytes per parameter.
Bytes full_state_bytes(Count params);

/// Bytes per parameter with the optimizer state sharded dp ways: 4 + 16/dp.
/// dp = 1 degenerates to the full 20.
double zero1_bytes_per_param(Count dp);

inline constexpr double kDefaultActivationCoeff = 16.0;

/// Decoder-block activation footprint for one microbatch:
/// n_layer * microbatch_tokens * d_model * bytes_per_element * coeff,
/// halved exactly when selective recomputation is on.
Bytes activation_bytes(const ModelShape& shape, Count microbatch_tokens, Count bytes_per_element,
                       bool recompute, double coeff = kDefaultActivationCoeff);

struct MemoryReport {
  Count params = 0;
  Bytes full_state_bytes = 0;
  double zero1_bytes_per_param = 0.0;
  Bytes replica_bytes = 0;  // weights+grads+state per replica at the given dp
  Count min_gpus_per_replica = 0;
  Bytes activation_bytes_per_microbatch = 0;  // reported separately, not in replica_bytes
};

struct MemoryReportOptions {
  Count bytes_per_element = 2;
  bool recompute = true;
  double activation_coeff = kDefaultActivationCoeff;
};

/// Report from an explicit parameter count (activation term omitted).
MemoryReport replica_memory_report(Count params, const ParallelismConfig& cfg,
                                   Bytes gpu_mem_bytes);

/// Report for a full shape, including the per-microbatch activation term.
MemoryReport replica_memory_report(const ModelShape& shape, const ParallelismConfig& cfg,
                                   Bytes gpu_mem_bytes, const MemoryReportOptions& opts = {});

}  // namespace lmplan
