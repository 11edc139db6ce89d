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

#include <string>
#include <string_view>
#include <vector>

#include "lmplan/model_shape.hpp"

namespace lmplan {

/// Degrees of the 3D parallelism grid plus microbatching and the two
/// communication optimizations. tp * pp * dp must equal world_size.
struct ParallelismConfig {
  Count tp = 1;
  Count pp = 1;
  Count dp = 1;
  Count world_size = 1;
  Count n_microbatches = 1;
  Count microbatch_tokens = 2048;
  bool scatter_gather = true;
  bool parallel_blocks = true;
  bool interleaved = false;  // accepted in config, rejected by validate_config
};

/// Returns cfg unchanged when consistent; throws ValidationError naming the
/// violated constraint otherwise. Interleaved-1F1B is not supported.
ParallelismConfig validate_config(ParallelismConfig cfg);

/// Per-preset training grids: falcon-7b 1/2/192, falcon-40b 8/4/12,
/// falcon-180b 8/8/64.
ParallelismConfig preset_parallelism(std::string_view preset);

/// Per-microbatch stage timings, in microseconds. All stages share the same
/// compute cost; p2p_us is the inter-stage activation transfer.
struct StageTiming {
  double fwd_us = 0.0;
  double bwd_us = 0.0;
  double p2p_us = 0.0;

  /// Backward defaults to twice forward (the 2:1 matmul ratio).
  static StageTiming from_forward(double fwd_us, double p2p_us = 0.0) {
    return {fwd_us, 2.0 * fwd_us, p2p_us};
  }
};

/// Transfer time for a payload over a link: latency + size / bandwidth.
double p2p_time_us(Bytes bytes, double bandwidth_gbps, double latency_us = 0.0);

enum class EventKind { Forward, Backward };

struct ScheduleEvent {
  Count stage = 0;
  EventKind kind = EventKind::Forward;
  Count microbatch = 0;
  double start_us = 0.0;
  double end_us = 0.0;
};

struct ScheduleTimeline {
  std::vector<ScheduleEvent> events;  // grouped by stage, time-ordered within
  Count pp = 1;
  Count n_microbatches = 1;
  double total_time_us = 0.0;
  double bubble_fraction = 0.0;  // (total - m*(fwd+bwd)) / total
};

/// Event-driven simulation of the 1F1B (PipeDream-Flush) schedule.
/// Stage s runs min(m, pp-1-s) warmup forwards, then alternates one forward
/// with one backward, then drains the remaining backwards. Forward i at
/// stage s waits for forward i at stage s-1 plus p2p; backward i at stage s
/// waits for backward i at stage s+1 plus p2p and for its own forward.
ScheduleTimeline simulate_1f1b(const ParallelismConfig& cfg, const StageTiming& timing);

/// Timeline as a Chrome-trace JSON event array (one "X" record per event,
/// timestamps and durations in microseconds, tid = stage).
std::string chrome_trace_json(const ScheduleTimeline& timeline);

/// Per-step collective payloads implied by a (shape, config) pair.
struct CommVolumeReport {
  Bytes tp_allreduce_bytes_per_layer = 0;
  Count tp_allreduces_per_layer = 0;  // per direction: 1 with parallel blocks, 2 without
  Bytes pp_p2p_bytes_per_microbatch_boundary = 0;
  Bytes dp_sync_bytes_per_rank = 0;  // plain all_reduce equivalent
  Bytes zero1_reduce_scatter_bytes = 0;
  Bytes zero1_all_gather_bytes = 0;
};

CommVolumeReport comm_volume_report(const ModelShape& shape, const ParallelismConfig& cfg,
                                    Count bytes_per_element);

/// Ring-collective volumes per rank per optimizer step. The modeled step is
/// reduce_scatter of half-precision grads, a local optimizer step on the
/// 1/dp shard, then all_gather of the updated params; the two transfers sum
/// exactly to the plain gradient all_reduce they replace.
struct Zero1StepVolumes {
  Bytes reduce_scatter_bytes = 0;
  Bytes all_gather_bytes = 0;
  Bytes plain_allreduce_bytes = 0;
};

Zero1StepVolumes zero1_step_volumes(Count params, Count dp, Count bytes_per_element);

}  // namespace lmplan
