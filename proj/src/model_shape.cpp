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

#include "lmplan/model_shape.hpp"

#include <cmath>

namespace lmplan {

void validate(const ModelShape& shape) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError("invalid model shape: " + msg);
  };
  require(shape.n_layer >= 0, "n_layer must be >= 0");
  require(shape.d_model >= 1, "d_model must be >= 1");
  require(shape.d_head >= 1, "d_head must be >= 1");
  require(shape.n_q >= 1, "n_q must be >= 1");
  require(shape.d_vocab >= 1, "d_vocab must be >= 1");
  require(shape.seq_len >= 1, "seq_len must be >= 1");
  require(shape.n_kv >= 1 && shape.n_kv <= shape.n_q, "n_kv must satisfy 1 <= n_kv <= n_q");
  require(shape.mlp_expansion > 0.0, "mlp_expansion must be positive");
}

namespace {

ModelShape falcon_7b() {
  ModelShape s;
  s.n_layer = 32;
  s.d_model = 4544;
  s.d_head = 64;
  s.n_q = 71;
  s.n_kv = 1;
  s.d_vocab = 65024;
  s.seq_len = 2048;
  s.single_layer_norm = true;
  return s;
}

ModelShape falcon_40b() {
  ModelShape s;
  s.n_layer = 60;
  s.d_model = 8192;
  s.d_head = 64;
  s.n_q = 128;
  s.n_kv = 8;
  s.d_vocab = 65024;
  s.seq_len = 2048;
  return s;
}

ModelShape falcon_180b() {
  ModelShape s;
  s.n_layer = 80;
  s.d_model = 14848;
  s.d_head = 64;
  s.n_q = 232;
  s.n_kv = 8;
  s.d_vocab = 65024;
  s.seq_len = 2048;
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"falcon-7b", "falcon-40b", "falcon-180b"};
  return names;
}

bool is_preset(std::string_view name) {
  for (const auto& n : preset_names())
    if (n == name) return true;
  return false;
}

ModelShape preset_shape(std::string_view name) {
  if (name == "falcon-7b") return falcon_7b();
  if (name == "falcon-40b") return falcon_40b();
  if (name == "falcon-180b") return falcon_180b();
  throw ValidationError("unknown model preset '" + std::string(name) +
                        "' (expected falcon-7b, falcon-40b, or falcon-180b)");
}

Count preset_training_tokens(std::string_view name) {
  if (name == "falcon-7b") return 1'500'000'000'000;
  if (name == "falcon-40b") return 1'000'000'000'000;
  if (name == "falcon-180b") return 3'500'000'000'000;
  throw ValidationError("unknown model preset '" + std::string(name) + "'");
}

Count AttentionScheme::kv_heads(const ModelShape& shape) const {
  switch (kind) {
    case Kind::Vanilla:
      return shape.n_q;
    case Kind::Multiquery:
      return 1;
    case Kind::Multigroup:
      if (kv < 1 || kv > shape.n_q)
        throw ValidationError("invalid attention scheme: multigroup kv=" + std::to_string(kv) +
                              " must satisfy 1 <= kv <= n_q=" + std::to_string(shape.n_q));
      return kv;
  }
  throw ValidationError("invalid attention scheme kind");
}

std::string AttentionScheme::name() const {
  switch (kind) {
    case Kind::Vanilla:
      return "vanilla";
    case Kind::Multiquery:
      return "multiquery";
    case Kind::Multigroup:
      return "multigroup(" + std::to_string(kv) + ")";
  }
  return "?";
}

ParamCountBreakdown param_count_breakdown(const ModelShape& shape) {
  validate(shape);
  const Count d_attn = shape.n_q * shape.d_head;
  const Count d_mlp = static_cast<Count>(std::llround(shape.mlp_expansion * static_cast<double>(shape.d_model)));
  const Count wq = shape.d_model * d_attn;
  const Count wkv = shape.d_model * (2 * shape.n_kv * shape.d_head);
  const Count wo = d_attn * shape.d_model;
  const Count mlp = 2 * shape.d_model * d_mlp;
  const Count norms_per_layer = shape.single_layer_norm ? 1 : 2;
  const Count ln = norms_per_layer * 2 * shape.d_model;  // weight + bias

  ParamCountBreakdown b;
  b.embeddings = shape.d_vocab * shape.d_model * (shape.tied_embeddings ? 1 : 2);
  b.attention = shape.n_layer * (wq + wkv + wo);
  b.mlp = shape.n_layer * mlp;
  b.layer_norm = shape.n_layer * ln;
  return b;
}

Count param_count(const ModelShape& shape) { return param_count_breakdown(shape).total(); }

Count param_count_approx(const ModelShape& shape) {
  validate(shape);
  return shape.n_layer * shape.d_model * shape.d_model;
}

Bytes kv_cache_bytes(const ModelShape& shape, const AttentionScheme& scheme, Count seq,
                     Count bytes_per_element) {
  validate(shape);
  if (seq < 0) throw ValidationError("kv_cache_bytes: seq must be >= 0");
  if (bytes_per_element != 2 && bytes_per_element != 4)
    throw ValidationError("kv_cache_bytes: bytes_per_element must be 2 or 4");
  const Count heads = scheme.kv_heads(shape);
  return shape.n_layer * 2 * heads * shape.d_head * seq * bytes_per_element;
}

Bytes kv_cache_bytes_per_tp_rank(Bytes total, Count tp) {
  if (tp < 1) throw ValidationError("kv_cache_bytes_per_tp_rank: tp must be >= 1");
  return total / tp;
}

double training_compute_pf_days(Count params, Count tokens) {
  if (params < 0 || tokens < 0)
    throw ValidationError("training_compute_pf_days: params and tokens must be >= 0");
  return 6.0 * static_cast<double>(params) * static_cast<double>(tokens) / (1e15 * 86400.0);
}

}  // namespace lmplan
