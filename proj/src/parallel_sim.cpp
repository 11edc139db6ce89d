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

#include "lmplan/parallel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace lmplan {

ParallelismConfig validate_config(ParallelismConfig cfg) {
  if (cfg.tp < 1 || cfg.pp < 1 || cfg.dp < 1)
    throw ValidationError("invalid parallelism: all degrees must be >= 1 (tp=" +
                          std::to_string(cfg.tp) + ", pp=" + std::to_string(cfg.pp) +
                          ", dp=" + std::to_string(cfg.dp) + ")");
  if (cfg.tp * cfg.pp * cfg.dp != cfg.world_size)
    throw ValidationError("invalid parallelism: tp*pp*dp = " + std::to_string(cfg.tp) + "*" +
                          std::to_string(cfg.pp) + "*" + std::to_string(cfg.dp) + " = " +
                          std::to_string(cfg.tp * cfg.pp * cfg.dp) + " does not equal world_size " +
                          std::to_string(cfg.world_size));
  if (cfg.n_microbatches < 1)
    throw ValidationError("invalid parallelism: n_microbatches must be >= 1");
  if (cfg.microbatch_tokens < 0)
    throw ValidationError("invalid parallelism: microbatch_tokens must be >= 0");
  if (cfg.interleaved)
    throw ValidationError("interleaved 1F1B is not supported");
  return cfg;
}

ParallelismConfig preset_parallelism(std::string_view preset) {
  ParallelismConfig cfg;
  if (preset == "falcon-7b") {
    cfg.tp = 1;
    cfg.pp = 2;
    cfg.dp = 192;
  } else if (preset == "falcon-40b") {
    cfg.tp = 8;
    cfg.pp = 4;
    cfg.dp = 12;
  } else if (preset == "falcon-180b") {
    cfg.tp = 8;
    cfg.pp = 8;
    cfg.dp = 64;
  } else {
    throw ValidationError("unknown parallelism preset '" + std::string(preset) + "'");
  }
  cfg.world_size = cfg.tp * cfg.pp * cfg.dp;
  return cfg;
}

double p2p_time_us(Bytes bytes, double bandwidth_gbps, double latency_us) {
  if (bytes < 0) throw ValidationError("p2p_time_us: bytes must be >= 0");
  if (bandwidth_gbps <= 0) throw ValidationError("p2p_time_us: bandwidth must be positive");
  // bytes -> bits, Gbps -> bits/us.
  return latency_us + static_cast<double>(bytes) * 8.0 / (bandwidth_gbps * 1e3);
}

namespace {

struct StageOp {
  EventKind kind;
  Count microbatch;
};

// Per-stage 1F1B operation order: warmup forwards, steady 1F1B pairs,
// backward drain.
std::vector<StageOp> stage_order(Count pp, Count stage, Count m) {
  const Count warmup = std::min(m, pp - 1 - stage);
  std::vector<StageOp> ops;
  ops.reserve(static_cast<std::size_t>(2 * m));
  for (Count i = 0; i < warmup; ++i) ops.push_back({EventKind::Forward, i});
  for (Count i = warmup; i < m; ++i) {
    ops.push_back({EventKind::Forward, i});
    ops.push_back({EventKind::Backward, i - warmup});
  }
  for (Count i = m - warmup; i < m; ++i) ops.push_back({EventKind::Backward, i});
  return ops;
}

}  // namespace

ScheduleTimeline simulate_1f1b(const ParallelismConfig& cfg, const StageTiming& timing) {
  validate_config(cfg);
  if (timing.fwd_us < 0 || timing.bwd_us < 0 || timing.p2p_us < 0)
    throw ValidationError("simulate_1f1b: timings must be non-negative");

  const Count pp = cfg.pp;
  const Count m = cfg.n_microbatches;
  constexpr double kPending = -1.0;

  std::vector<std::vector<StageOp>> ops(static_cast<std::size_t>(pp));
  for (Count s = 0; s < pp; ++s) ops[static_cast<std::size_t>(s)] = stage_order(pp, s, m);

  auto grid = [&] {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(pp),
                                            std::vector<double>(static_cast<std::size_t>(m), kPending));
  };
  auto f_end = grid();
  auto b_end = grid();

  std::vector<std::size_t> cursor(static_cast<std::size_t>(pp), 0);
  std::vector<double> stage_free(static_cast<std::size_t>(pp), 0.0);
  std::vector<std::vector<ScheduleEvent>> per_stage(static_cast<std::size_t>(pp));

  // Greedy event loop: run each stage's next op as soon as its dependencies
  // are met. Every sweep completes at least one op, so the loop terminates.
  Count remaining = 2 * m * pp;
  while (remaining > 0) {
    bool progressed = false;
    for (Count s = 0; s < pp; ++s) {
      auto si = static_cast<std::size_t>(s);
      while (cursor[si] < ops[si].size()) {
        const StageOp op = ops[si][cursor[si]];
        const auto mi = static_cast<std::size_t>(op.microbatch);
        double ready = 0.0;
        if (op.kind == EventKind::Forward) {
          if (s > 0) {
            const double up = f_end[si - 1][mi];
            if (up == kPending) break;
            ready = up + timing.p2p_us;
          }
        } else {
          const double own_fwd = f_end[si][mi];
          if (own_fwd == kPending) break;
          ready = own_fwd;
          if (s < pp - 1) {
            const double down = b_end[si + 1][mi];
            if (down == kPending) break;
            ready = std::max(ready, down + timing.p2p_us);
          }
        }
        const double start = std::max(stage_free[si], ready);
        const double dur = op.kind == EventKind::Forward ? timing.fwd_us : timing.bwd_us;
        const double end = start + dur;
        (op.kind == EventKind::Forward ? f_end : b_end)[si][mi] = end;
        per_stage[si].push_back({s, op.kind, op.microbatch, start, end});
        stage_free[si] = end;
        ++cursor[si];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed)
      throw std::logic_error("simulate_1f1b: schedule deadlocked");  // unreachable for 1F1B order
  }

  ScheduleTimeline timeline;
  timeline.pp = pp;
  timeline.n_microbatches = m;
  for (auto& stage_events : per_stage)
    timeline.events.insert(timeline.events.end(), stage_events.begin(), stage_events.end());
  double total = 0.0;
  for (const auto& ev : timeline.events) total = std::max(total, ev.end_us);
  timeline.total_time_us = total;
  const double busy = static_cast<double>(m) * (timing.fwd_us + timing.bwd_us);
  timeline.bubble_fraction = total > 0.0 ? (total - busy) / total : 0.0;
  return timeline;
}

std::string chrome_trace_json(const ScheduleTimeline& timeline) {
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& ev : timeline.events) {
    const bool fwd = ev.kind == EventKind::Forward;
    nlohmann::ordered_json rec;
    rec["name"] = (fwd ? "F " : "B ") + std::to_string(ev.microbatch);
    rec["cat"] = fwd ? "forward" : "backward";
    rec["ph"] = "X";
    rec["ts"] = ev.start_us;
    rec["dur"] = ev.end_us - ev.start_us;
    rec["pid"] = 0;
    rec["tid"] = ev.stage;
    rec["args"] = {{"microbatch", ev.microbatch}};
    events.push_back(std::move(rec));
  }
  return events.dump(2);
}

CommVolumeReport comm_volume_report(const ModelShape& shape, const ParallelismConfig& cfg,
                                    Count bytes_per_element) {
  validate(shape);
  validate_config(cfg);
  if (bytes_per_element < 1)
    throw ValidationError("comm_volume_report: bytes_per_element must be >= 1");

  CommVolumeReport report;
  const Bytes activation = cfg.microbatch_tokens * shape.d_model * bytes_per_element;
  report.tp_allreduce_bytes_per_layer = activation;
  report.tp_allreduces_per_layer = cfg.parallel_blocks ? 1 : 2;
  report.pp_p2p_bytes_per_microbatch_boundary =
      cfg.scatter_gather ? activation / cfg.tp : activation;

  // DP sync volumes are per rank, over that rank's parameter shard.
  const Count params_per_rank = param_count(shape) / (cfg.tp * cfg.pp);
  const Zero1StepVolumes z = zero1_step_volumes(params_per_rank, cfg.dp, bytes_per_element);
  report.dp_sync_bytes_per_rank = z.plain_allreduce_bytes;
  report.zero1_reduce_scatter_bytes = z.reduce_scatter_bytes;
  report.zero1_all_gather_bytes = z.all_gather_bytes;
  return report;
}

Zero1StepVolumes zero1_step_volumes(Count params, Count dp, Count bytes_per_element) {
  if (dp < 1) throw ValidationError("zero1_step_volumes: dp must be >= 1");
  if (params < 0) throw ValidationError("zero1_step_volumes: params must be >= 0");
  if (bytes_per_element < 1)
    throw ValidationError("zero1_step_volumes: bytes_per_element must be >= 1");

  // Ring algorithms move (dp-1) chunks of ceil(params/dp) elements per rank;
  // an all_reduce is a reduce_scatter followed by an all_gather, so the
  // equality below is structural.
  const Count chunk = (params + dp - 1) / dp;
  const Bytes one_pass = (dp - 1) * chunk * bytes_per_element;
  return {one_pass, one_pass, 2 * one_pass};
}

}  // namespace lmplan
