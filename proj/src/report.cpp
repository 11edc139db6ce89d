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

#include "lmplan/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lmplan {

ReportFormat parse_report_format(std::string_view name) {
  if (name == "human") return ReportFormat::Human;
  if (name == "json") return ReportFormat::Json;
  throw ValidationError("unknown report format '" + std::string(name) +
                        "' (expected human or json)");
}

namespace {

std::string value_string(const Quantity& q) {
  if (std::holds_alternative<Bytes>(q.value)) return std::to_string(std::get<Bytes>(q.value));
  std::ostringstream out;
  out << std::setprecision(12) << std::get<double>(q.value);
  return out.str();
}

std::string render_human(const Report& report) {
  std::ostringstream out;
  for (const auto& section : report.sections) {
    out << '[' << section.name << "]\n";
    std::size_t key_width = 0;
    std::size_t value_width = 0;
    for (const auto& [key, q] : section.entries) {
      key_width = std::max(key_width, key.size());
      value_width = std::max(value_width, value_string(q).size());
    }
    for (const auto& [key, q] : section.entries) {
      out << "  " << std::left << std::setw(static_cast<int>(key_width) + 2) << key << std::right
          << std::setw(static_cast<int>(value_width)) << value_string(q);
      if (!q.unit.empty()) out << "  " << q.unit;
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

std::string render_json(const Report& report) {
  nlohmann::ordered_json doc;
  doc["schema"] = kReportSchema;
  nlohmann::ordered_json sections = nlohmann::ordered_json::object();
  for (const auto& section : report.sections) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::object();
    for (const auto& [key, q] : section.entries) {
      nlohmann::ordered_json item;
      if (std::holds_alternative<Bytes>(q.value))
        item["value"] = std::get<Bytes>(q.value);
      else
        item["value"] = std::get<double>(q.value);
      item["unit"] = q.unit;
      entries[key] = std::move(item);
    }
    sections[section.name] = std::move(entries);
  }
  doc["sections"] = std::move(sections);
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Human:
      return render_human(report);
    case ReportFormat::Json:
      return render_json(report);
  }
  throw ValidationError("unknown report format");
}

Report parse_report_json(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(std::string("report: ") + err.what());
  }
  if (!doc.contains("schema") || doc["schema"] != kReportSchema)
    throw ParseError("report: missing or unsupported schema marker");
  Report report;
  for (const auto& [name, entries] : doc.at("sections").items()) {
    ReportSection section;
    section.name = name;
    for (const auto& [key, item] : entries.items()) {
      Quantity q;
      const auto& value = item.at("value");
      if (value.is_number_integer())
        q.value = value.get<Bytes>();
      else
        q.value = value.get<double>();
      q.unit = item.at("unit").get<std::string>();
      section.entries.emplace_back(key, std::move(q));
    }
    report.sections.push_back(std::move(section));
  }
  return report;
}

Report plan_report(const PlanConfig& cfg) {
  Report report;
  const Count params = param_count(cfg.model);
  const MemoryReportOptions mem_opts{.bytes_per_element = cfg.dtype_bytes};
  const MemoryReport mem =
      replica_memory_report(cfg.model, cfg.parallelism, cfg.gpu_mem_bytes, mem_opts);

  ReportSection memory{"memory", {}};
  memory.add("params", Quantity::integer(mem.params, "parameters"));
  memory.add("full_state_bytes", Quantity::integer(mem.full_state_bytes, "bytes"));
  memory.add("zero1_bytes_per_param", Quantity::real(mem.zero1_bytes_per_param, "bytes/parameter"));
  memory.add("replica_bytes", Quantity::integer(mem.replica_bytes, "bytes"));
  memory.add("min_gpus_per_replica", Quantity::integer(mem.min_gpus_per_replica, "gpus"));
  memory.add("activation_bytes_per_microbatch",
             Quantity::integer(mem.activation_bytes_per_microbatch, "bytes"));
  report.sections.push_back(std::move(memory));

  ReportSection kv{"kv_cache", {}};
  const Count seq = cfg.model.seq_len;
  kv.add("seq_len", Quantity::integer(seq, "tokens"));
  kv.add("vanilla_bytes", Quantity::integer(kv_cache_bytes(cfg.model, AttentionScheme::vanilla(),
                                                           seq, cfg.dtype_bytes),
                                            "bytes"));
  kv.add("multiquery_bytes",
         Quantity::integer(kv_cache_bytes(cfg.model, AttentionScheme::multiquery(), seq,
                                          cfg.dtype_bytes),
                           "bytes"));
  const Bytes multigroup = kv_cache_bytes(cfg.model, AttentionScheme::multigroup(cfg.model.n_kv),
                                          seq, cfg.dtype_bytes);
  kv.add("multigroup_bytes", Quantity::integer(multigroup, "bytes"));
  kv.add("multigroup_bytes_per_tp_rank",
         Quantity::integer(kv_cache_bytes_per_tp_rank(multigroup, cfg.parallelism.tp), "bytes"));
  report.sections.push_back(std::move(kv));

  ReportSection compute{"compute", {}};
  compute.add("params", Quantity::integer(params, "parameters"));
  compute.add("training_tokens", Quantity::integer(cfg.training_tokens, "tokens"));
  compute.add("pf_days",
              Quantity::real(training_compute_pf_days(params, cfg.training_tokens), "PF-days"));
  report.sections.push_back(std::move(compute));

  ReportSection comm{"comm_volumes", {}};
  const CommVolumeReport volumes =
      comm_volume_report(cfg.model, cfg.parallelism, cfg.dtype_bytes);
  comm.add("tp_allreduce_bytes_per_layer",
           Quantity::integer(volumes.tp_allreduce_bytes_per_layer, "bytes"));
  comm.add("tp_allreduces_per_layer",
           Quantity::integer(volumes.tp_allreduces_per_layer, "count"));
  comm.add("pp_p2p_bytes_per_microbatch_boundary",
           Quantity::integer(volumes.pp_p2p_bytes_per_microbatch_boundary, "bytes"));
  comm.add("dp_sync_bytes_per_rank", Quantity::integer(volumes.dp_sync_bytes_per_rank, "bytes"));
  comm.add("zero1_reduce_scatter_bytes",
           Quantity::integer(volumes.zero1_reduce_scatter_bytes, "bytes"));
  comm.add("zero1_all_gather_bytes",
           Quantity::integer(volumes.zero1_all_gather_bytes, "bytes"));
  report.sections.push_back(std::move(comm));

  return report;
}

Report schedule_report(const ScheduleTimeline& timeline, const StageTiming& timing) {
  Report report;
  ReportSection schedule{"schedule", {}};
  schedule.add("pipeline_stages", Quantity::integer(timeline.pp, "stages"));
  schedule.add("n_microbatches", Quantity::integer(timeline.n_microbatches, "count"));
  schedule.add("fwd_us", Quantity::real(timing.fwd_us, "us"));
  schedule.add("bwd_us", Quantity::real(timing.bwd_us, "us"));
  schedule.add("p2p_us", Quantity::real(timing.p2p_us, "us"));
  schedule.add("total_time_us", Quantity::real(timeline.total_time_us, "us"));
  schedule.add("bubble_fraction", Quantity::real(timeline.bubble_fraction, "ratio"));
  schedule.add("events", Quantity::integer(static_cast<Bytes>(timeline.events.size()), "count"));
  report.sections.push_back(std::move(schedule));
  return report;
}

}  // namespace lmplan
