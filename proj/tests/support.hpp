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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lmplan/parallel_sim.hpp"

namespace lmplan::testing {

inline double rel_err(double actual, double expected) {
  if (expected == 0.0) return std::abs(actual);
  return std::abs(actual - expected) / std::abs(expected);
}

/// Checks every ScheduleTimeline invariant: per-stage events non-overlapping
/// and time-ordered, one F and one B per (stage, microbatch), the three
/// dependency edges, and the min(m, pp - s) in-flight activation bound.
/// Returns an empty string when the timeline is sound.
inline std::string check_timeline(const ScheduleTimeline& timeline, const StageTiming& timing) {
  const Count pp = timeline.pp;
  const Count m = timeline.n_microbatches;
  const double eps = 1e-9;

  std::map<std::pair<Count, Count>, const ScheduleEvent*> fwd, bwd;
  std::vector<double> last_end(static_cast<std::size_t>(pp), -1.0);
  std::vector<const ScheduleEvent*> prev(static_cast<std::size_t>(pp), nullptr);
  for (const auto& ev : timeline.events) {
    if (ev.stage < 0 || ev.stage >= pp) return "event stage out of range";
    if (ev.microbatch < 0 || ev.microbatch >= m) return "event microbatch out of range";
    if (ev.end_us < ev.start_us) return "event ends before it starts";
    auto& slot = (ev.kind == EventKind::Forward ? fwd : bwd)[{ev.stage, ev.microbatch}];
    if (slot != nullptr) return "duplicate event for (stage, kind, microbatch)";
    slot = &ev;
    auto& end = last_end[static_cast<std::size_t>(ev.stage)];
    if (ev.start_us < end - eps) return "overlapping or out-of-order events within a stage";
    end = ev.end_us;
    prev[static_cast<std::size_t>(ev.stage)] = &ev;
  }
  if (static_cast<Count>(fwd.size()) != pp * m || static_cast<Count>(bwd.size()) != pp * m)
    return "missing events";

  for (Count s = 0; s < pp; ++s) {
    for (Count i = 0; i < m; ++i) {
      const auto* f = fwd[{s, i}];
      const auto* b = bwd[{s, i}];
      if (s > 0 && f->start_us + eps < fwd[{s - 1, i}]->end_us + timing.p2p_us)
        return "forward violates previous-stage dependency";
      if (b->start_us + eps < f->end_us) return "backward starts before its own forward ends";
      if (s < pp - 1 && b->start_us + eps < bwd[{s + 1, i}]->end_us + timing.p2p_us)
        return "backward violates next-stage dependency";
    }
  }

  // In-flight bound: forwards completed but not yet backward-completed.
  for (Count s = 0; s < pp; ++s) {
    const Count bound = std::min(m, pp - s);
    std::vector<std::pair<double, int>> deltas;
    for (Count i = 0; i < m; ++i) {
      deltas.emplace_back(fwd[{s, i}]->end_us, +1);
      deltas.emplace_back(bwd[{s, i}]->end_us, -1);
    }
    std::sort(deltas.begin(), deltas.end());
    Count live = 0;
    for (const auto& [time, delta] : deltas) {
      live += delta;
      if (live > bound) return "in-flight activation bound exceeded at stage " + std::to_string(s);
    }
  }
  return {};
}

}  // namespace lmplan::testing
