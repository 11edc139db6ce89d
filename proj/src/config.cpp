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

#include "lmplan/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace lmplan {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return std::string(s.substr(begin, end - begin + 1));
}

struct ConfigEntry {
  std::string value;
  int line = 0;
  mutable bool consumed = false;
};

using Section = std::map<std::string, ConfigEntry>;

std::map<std::string, Section> tokenize(std::string_view text) {
  std::map<std::string, Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ParseError("empty section name", line_no);
      sections.try_emplace(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    if (current.empty()) throw ParseError("key outside any [section]", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (value.empty()) throw ParseError("empty value for key '" + key + "'", line_no);
    if (!sections[current].emplace(key, ConfigEntry{value, line_no}).second)
      throw ParseError("duplicate key '" + key + "'", line_no);
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(const std::map<std::string, Section>& sections, const std::string& name)
      : name_(name) {
    const auto it = sections.find(name);
    section_ = it == sections.end() ? nullptr : &it->second;
  }

  bool present() const { return section_ != nullptr; }
  bool has(const std::string& key) const { return section_ && section_->count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const {
    if (!section_) return std::nullopt;
    const auto it = section_->find(key);
    if (it == section_->end()) return std::nullopt;
    it->second.consumed = true;
    return it->second.value;
  }

  Count get_count(const std::string& key, Count fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const Count parsed = std::stoll(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return parsed;
    } catch (const std::exception&) {
      throw ParseError("[" + name_ + "] " + key + ": expected integer, got '" + *v + "'",
                       line_of(key));
    }
  }

  double get_real(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const double parsed = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return parsed;
    } catch (const std::exception&) {
      throw ParseError("[" + name_ + "] " + key + ": expected number, got '" + *v + "'",
                       line_of(key));
    }
  }

  bool get_flag(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::string lowered = *v;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "true" || lowered == "1" || lowered == "yes") return true;
    if (lowered == "false" || lowered == "0" || lowered == "no") return false;
    throw ParseError("[" + name_ + "] " + key + ": expected boolean, got '" + *v + "'",
                     line_of(key));
  }

  int line_of(const std::string& key) const {
    if (!section_) return 0;
    const auto it = section_->find(key);
    return it == section_->end() ? 0 : it->second.line;
  }

 private:
  const Section* section_;
  std::string name_;
};

void reject_unknown(const std::map<std::string, Section>& sections) {
  static const std::set<std::string> known = {"model", "parallelism", "hardware", "cluster"};
  for (const auto& [name, section] : sections) {
    if (!known.count(name))
      throw ParseError("unknown section [" + name + "]",
                       section.empty() ? 0 : section.begin()->second.line);
    for (const auto& [key, entry] : section)
      if (!entry.consumed) throw ParseError("unknown key '" + key + "' in [" + name + "]", entry.line);
  }
}

}  // namespace

PlanConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  const auto sections = tokenize(text);

  if (!sections.count("model") || !sections.count("parallelism"))
    throw ParseError(
        "config requires [model] (preset, or n_layer/d_model/d_head/n_q/n_kv/d_vocab/seq_len) "
        "and [parallelism] (tp, pp, dp)");

  PlanConfig cfg;

  SectionReader model(sections, "model");
  if (const auto preset = model.get("preset")) {
    cfg.model_preset = *preset;
    cfg.model = preset_shape(*preset);  // throws ValidationError on bad name
    cfg.training_tokens = preset_training_tokens(*preset);
  } else {
    const char* required[] = {"n_layer", "d_model", "d_head", "n_q", "n_kv", "d_vocab", "seq_len"};
    std::string missing;
    for (const char* key : required)
      if (!model.has(key)) missing += missing.empty() ? key : std::string(", ") + key;
    if (!missing.empty())
      throw ParseError("[model] requires a preset or explicit keys; missing: " + missing);
  }
  cfg.model.n_layer = model.get_count("n_layer", cfg.model.n_layer);
  cfg.model.d_model = model.get_count("d_model", cfg.model.d_model);
  cfg.model.d_head = model.get_count("d_head", cfg.model.d_head);
  cfg.model.n_q = model.get_count("n_q", cfg.model.n_q);
  cfg.model.n_kv = model.get_count("n_kv", cfg.model.n_kv);
  cfg.model.d_vocab = model.get_count("d_vocab", cfg.model.d_vocab);
  cfg.model.seq_len = model.get_count("seq_len", cfg.model.seq_len);
  cfg.model.tied_embeddings = model.get_flag("tied_embeddings", cfg.model.tied_embeddings);
  cfg.model.mlp_expansion = model.get_real("mlp_expansion", cfg.model.mlp_expansion);
  cfg.model.parallel_blocks = model.get_flag("parallel_blocks", cfg.model.parallel_blocks);
  cfg.model.single_layer_norm = model.get_flag("single_layer_norm", cfg.model.single_layer_norm);
  cfg.training_tokens = model.get_count("training_tokens", cfg.training_tokens);
  validate(cfg.model);

  SectionReader par(sections, "parallelism");
  for (const char* key : {"tp", "pp", "dp"})
    if (!par.has(key)) throw ParseError(std::string("[parallelism] missing required key '") + key + "'");
  cfg.parallelism.tp = par.get_count("tp", 1);
  cfg.parallelism.pp = par.get_count("pp", 1);
  cfg.parallelism.dp = par.get_count("dp", 1);
  cfg.parallelism.world_size = par.get_count(
      "world_size", cfg.parallelism.tp * cfg.parallelism.pp * cfg.parallelism.dp);
  cfg.parallelism.n_microbatches = par.get_count("n_microbatches", 1);
  cfg.parallelism.microbatch_tokens = par.get_count("microbatch_tokens", cfg.model.seq_len);
  cfg.parallelism.scatter_gather = par.get_flag("scatter_gather", true);
  cfg.parallelism.parallel_blocks = par.get_flag("parallel_blocks", cfg.model.parallel_blocks);
  cfg.parallelism.interleaved = par.get_flag("interleaved", false);
  validate_config(cfg.parallelism);

  SectionReader hardware(sections, "hardware");
  cfg.gpu_mem_bytes = hardware.get_count("gpu_mem_bytes", cfg.gpu_mem_bytes);
  cfg.dtype_bytes = hardware.get_count("dtype_bytes", cfg.dtype_bytes);
  if (cfg.gpu_mem_bytes <= 0) throw ValidationError("gpu_mem_bytes must be positive");
  if (cfg.dtype_bytes != 2 && cfg.dtype_bytes != 4)
    throw ValidationError("dtype_bytes must be 2 or 4");

  SectionReader cluster(sections, "cluster");
  if (cluster.present()) {
    ClusterTopology topo;
    topo.gpus_per_node = cluster.get_count("gpus_per_node", topo.gpus_per_node);
    topo.gpu_mem_bytes = cfg.gpu_mem_bytes;
    topo.nodes = cluster.get_count("nodes", 0);
    if (const auto file = cluster.get("bandwidth_file")) {
      const std::filesystem::path path = base_dir / *file;
      topo.bandwidth = load_bandwidth_csv(path);
      if (topo.nodes == 0) topo.nodes = topo.bandwidth->size();
      if (topo.nodes != topo.bandwidth->size())
        throw ValidationError("cluster nodes=" + std::to_string(topo.nodes) +
                              " does not match bandwidth matrix size " +
                              std::to_string(topo.bandwidth->size()));
    }
    if (topo.nodes <= 0)
      throw ValidationError("[cluster] requires nodes or a bandwidth_file");
    cfg.cluster = std::move(topo);
  }

  reject_unknown(sections);
  return cfg;
}

PlanConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace lmplan
