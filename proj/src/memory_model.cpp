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

#include "lmplan/memory_model.hpp"

#include <cmath>

namespace lmplan {

Bytes full_state_bytes(Count params) {
  if (params < 0) throw ValidationError("full_state_bytes: params must be >= 0");
  return static_cast<Bytes>(TrainingStateLayout{}.total()) * params;
}

double zero1_bytes_per_param(Count dp) {
  if (dp < 1) throw ValidationError("zero1_bytes_per_param: dp must be >= 1");
  return 4.0 + 16.0 / static_cast<double>(dp);
}

Bytes activation_bytes(const ModelShape& shape, Count microbatch_tokens, Count bytes_per_element,
                       bool recompute, double coeff) {
  validate(shape);
  if (microbatch_tokens < 0)
    throw ValidationError("activation_bytes: microbatch_tokens must be >= 0");
  if (bytes_per_element < 1)
    throw ValidationError("activation_bytes: bytes_per_element must be >= 1");
  if (coeff < 0) throw ValidationError("activation_bytes: coeff must be >= 0");
  const double base = static_cast<double>(shape.n_layer) * static_cast<double>(microbatch_tokens) *
                      static_cast<double>(shape.d_model) * static_cast<double>(bytes_per_element) *
                      coeff;
  return static_cast<Bytes>(std::llround(recompute ? base / 2.0 : base));
}

MemoryReport replica_memory_report(Count params, const ParallelismConfig& cfg,
                                   Bytes gpu_mem_bytes) {
  validate_config(cfg);
  if (params < 0) throw ValidationError("replica_memory_report: params must be >= 0");
  if (gpu_mem_bytes <= 0)
    throw ValidationError("replica_memory_report: gpu_mem_bytes must be positive");

  MemoryReport report;
  report.params = params;
  report.full_state_bytes = full_state_bytes(params);
  report.zero1_bytes_per_param = zero1_bytes_per_param(cfg.dp);
  // 4 bytes/param replicated plus the 16-byte fp32 state partitioned dp ways.
  report.replica_bytes =
      4 * params + static_cast<Bytes>(std::llround(16.0 * static_cast<double>(params) /
                                                   static_cast<double>(cfg.dp)));
  report.min_gpus_per_replica =
      params == 0 ? 1 : (report.replica_bytes + gpu_mem_bytes - 1) / gpu_mem_bytes;
  if (report.min_gpus_per_replica < 1) report.min_gpus_per_replica = 1;
  return report;
}

MemoryReport replica_memory_report(const ModelShape& shape, const ParallelismConfig& cfg,
                                   Bytes gpu_mem_bytes, const MemoryReportOptions& opts) {
  MemoryReport report = replica_memory_report(param_count(shape), cfg, gpu_mem_bytes);
  report.activation_bytes_per_microbatch = activation_bytes(
      shape, cfg.microbatch_tokens, opts.bytes_per_element, opts.recompute, opts.activation_coeff);
  return report;
}

}  // namespace lmplan
