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
#include <utility>
#include <variant>
#include <vector>

#include "lmplan/config.hpp"
#include "lmplan/memory_model.hpp"
#include "lmplan/parallel_sim.hpp"

namespace lmplan {

/// A named number with an explicit unit. Byte and count quantities stay
/// integers end to end.
struct Quantity {
  std::variant<Bytes, double> value;
  std::string unit;

  static Quantity integer(Bytes v, std::string unit) { return {v, std::move(unit)}; }
  static Quantity real(double v, std::string unit) { return {v, std::move(unit)}; }
  bool operator==(const Quantity&) const = default;
};

struct ReportSection {
  std::string name;
  std::vector<std::pair<std::string, Quantity>> entries;

  void add(std::string key, Quantity q) { entries.emplace_back(std::move(key), std::move(q)); }
  bool operator==(const ReportSection&) const = default;
};

struct Report {
  std::vector<ReportSection> sections;

  bool operator==(const Report&) const = default;
};

inline constexpr std::string_view kReportSchema = "lmplan-report/1";

enum class ReportFormat { Human, Json };

/// Accepts "human" or "json"; anything else is a ValidationError.
ReportFormat parse_report_format(std::string_view name);

/// Human format: aligned per-section tables. Json format: one document with
/// a schema marker and sections in insertion order; rendering is
/// deterministic, and parse_report_json inverts it exactly.
std::string render_report(const Report& report, ReportFormat format);
Report parse_report_json(const std::string& text);

/// Memory, K,V-cache, compute, and communication sections for a plan.
Report plan_report(const PlanConfig& cfg);

/// Summary section for a simulated timeline.
Report schedule_report(const ScheduleTimeline& timeline, const StageTiming& timing);

}  // namespace lmplan
