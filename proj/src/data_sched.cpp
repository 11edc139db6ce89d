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

#include "lmplan/data_sched.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace lmplan {

void validate(const MixtureSpec& spec) {
  if (spec.sources.empty()) throw ValidationError("mixture: at least one source required");
  if (spec.pattern_length < 1) throw ValidationError("mixture: pattern_length must be >= 1");
  double sum = 0.0;
  for (const auto& src : spec.sources) {
    if (!(src.weight > 0.0) || src.weight > 1.0)
      throw ValidationError("mixture: weight of '" + src.name + "' must be in (0, 1]");
    sum += src.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("mixture: weights sum to " + std::to_string(sum) + ", expected 1");
}

std::vector<Count> largest_remainder_quotas(std::span<const double> weights, Count length) {
  const std::size_t k = weights.size();
  std::vector<Count> quota(k);
  std::vector<double> remainder(k);
  Count assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = weights[i] * static_cast<double>(length);
    quota[i] = static_cast<Count>(std::floor(exact));
    // Keep exact integer quotas out of the remainder pool despite fp noise.
    if (static_cast<double>(quota[i] + 1) <= exact) ++quota[i];
    remainder[i] = exact - static_cast<double>(quota[i]);
    assigned += quota[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  const Count extras = length - assigned;
  if (extras < 0 || extras > static_cast<Count>(k))
    throw std::logic_error("largest_remainder_quotas: inconsistent floor sum");
  for (Count e = 0; e < extras; ++e) ++quota[order[static_cast<std::size_t>(e)]];
  return quota;
}

namespace {

// Scheduling window of the k-th unit (1-based) of a source with weight w:
// placing it at slot t keeps count < w*t + 1 from t = release on, and the
// count stays > w*t - 1 up to t = deadline.
Count unit_release(Count k, double w) {
  return static_cast<Count>(std::floor(static_cast<double>(k - 1) / w)) + 1;
}

Count unit_deadline(Count k, double w, Count length) {
  const double x = static_cast<double>(k) / w;
  const double rounded = std::round(x);
  Count d;
  if (std::abs(x - rounded) < 1e-9 * std::max(1.0, std::abs(x)))
    d = static_cast<Count>(rounded);
  else
    d = static_cast<Count>(std::ceil(x));
  return std::min(d, length);
}

}  // namespace

MixturePattern mixture_pattern(const MixtureSpec& spec) {
  validate(spec);
  const std::size_t k = spec.sources.size();
  const Count length = spec.pattern_length;

  std::vector<double> weights(k);
  for (std::size_t i = 0; i < k; ++i) weights[i] = spec.sources[i].weight;
  const std::vector<Count> quotas = largest_remainder_quotas(weights, length);

  // Units bucketed by release slot, then dispatched earliest-deadline-first.
  struct Unit {
    Count deadline;
    int source;
  };
  std::vector<std::vector<Unit>> released(static_cast<std::size_t>(length) + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (Count unit = 1; unit <= quotas[i]; ++unit) {
      const Count release = std::min(unit_release(unit, weights[i]), length);
      released[static_cast<std::size_t>(release)].push_back(
          {unit_deadline(unit, weights[i], length), static_cast<int>(i)});
    }
  }

  using Entry = std::pair<Count, int>;  // (deadline, source)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  MixturePattern pattern;
  pattern.sequence.reserve(static_cast<std::size_t>(length));
  pattern.counts = quotas;
  for (Count t = 1; t <= length; ++t) {
    for (const Unit& u : released[static_cast<std::size_t>(t)]) ready.emplace(u.deadline, u.source);
    if (ready.empty())
      throw std::logic_error("mixture_pattern: no schedulable unit at slot " + std::to_string(t));
    pattern.sequence.push_back(ready.top().second);
    ready.pop();
  }
  return pattern;
}

std::string format_mixture_pattern(const MixturePattern& pattern) {
  std::ostringstream out;
  for (const int idx : pattern.sequence) out << idx << '\n';
  return out.str();
}

ConversationTree read_tree(std::istream& in) {
  ConversationTree tree;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    TreeNode node;
    std::string parent;
    long long tokens = 0;
    if (!(fields >> node.id >> parent >> tokens))
      throw ParseError("tree: expected 'id parent_id token_count'", line_no);
    std::string extra;
    if (fields >> extra) throw ParseError("tree: trailing content '" + extra + "'", line_no);
    if (tokens < 0) throw ParseError("tree: token_count must be >= 0", line_no);
    if (parent != "-") node.parent = parent;
    node.token_count = tokens;
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

ConversationTree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tree file '" + path.string() + "'");
  return read_tree(in);
}

DepthSequence serialize_tree(const ConversationTree& tree) {
  if (tree.nodes.empty()) throw ValidationError("tree: empty");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!index.emplace(tree.nodes[i].id, i).second)
      throw ValidationError("tree: duplicate node id '" + tree.nodes[i].id + "'");
  }

  std::vector<std::vector<std::size_t>> children(tree.nodes.size());
  std::size_t root = tree.nodes.size();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (!node.parent) {
      if (root != tree.nodes.size())
        throw ValidationError("tree: multiple roots ('" + tree.nodes[root].id + "' and '" +
                              node.id + "')");
      root = i;
      continue;
    }
    const auto it = index.find(*node.parent);
    if (it == index.end())
      throw ValidationError("tree: node '" + node.id + "' references unknown parent '" +
                            *node.parent + "'");
    if (it->second == i) throw ValidationError("tree: node '" + node.id + "' is its own parent");
    children[it->second].push_back(i);
  }
  if (root == tree.nodes.size()) throw ValidationError("tree: no root node");

  DepthSequence depths;
  // Explicit stack, children pushed in reverse to keep input sibling order.
  std::vector<std::pair<std::size_t, Count>> stack{{root, 0}};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    ++reached;
    depths.insert(depths.end(), static_cast<std::size_t>(tree.nodes[node].token_count), depth);
    for (auto it = children[node].rbegin(); it != children[node].rend(); ++it)
      stack.emplace_back(*it, depth + 1);
  }
  // Every node has at most one parent, so anything unreachable from the
  // root sits on a parent cycle.
  if (reached != tree.nodes.size())
    throw ValidationError("tree: cycle detected (" + std::to_string(tree.nodes.size() - reached) +
                          " node(s) unreachable from the root)");
  return depths;
}

std::string AttentionMask::to_bit_rows() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(n_ * (n_ + 1)));
  for (Count j = 0; j < n_; ++j) {
    for (Count i = 0; i < n_; ++i) out.push_back(masked(j, i) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

std::string AttentionMask::to_json() const {
  nlohmann::ordered_json doc;
  doc["polarity"] = "allow";
  doc["n"] = n_;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Count j = 0; j < n_; ++j) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Count i = 0; i < n_; ++i) row.push_back(!masked(j, i));
    rows.push_back(std::move(row));
  }
  doc["allow"] = std::move(rows);
  return doc.dump(2);
}

AttentionMask tree_attention_mask(const DepthSequence& depths) {
  if (depths.empty()) throw ValidationError("tree_attention_mask: empty depth sequence");
  const Count n = static_cast<Count>(depths.size());
  AttentionMask mask(n);
  for (Count i = 0; i < n; ++i) {
    bool attn = false;
    for (Count j = 0; j < n; ++j) {
      attn |= (i + 1) == j;
      attn &= depths[static_cast<std::size_t>(i)] < depths[static_cast<std::size_t>(j)];
      mask.set_masked(j, i, !attn && i != j);
    }
  }
  return mask;
}

AttentionMask tree_attention_mask_ancestor(const DepthSequence& depths) {
  if (depths.empty()) throw ValidationError("tree_attention_mask: empty depth sequence");
  const Count n = static_cast<Count>(depths.size());
  AttentionMask mask(n);
  for (Count j = 0; j < n; ++j) {
    mask.set_masked(j, j, false);
    // Scanning keys right-to-left keeps a running minimum of the depths in
    // (i, j]; i is an ancestor iff that minimum stays above depths[i].
    Count min_depth = depths[static_cast<std::size_t>(j)];
    for (Count i = j - 1; i >= 0; --i) {
      mask.set_masked(j, i, !(depths[static_cast<std::size_t>(i)] < min_depth));
      min_depth = std::min(min_depth, depths[static_cast<std::size_t>(i)]);
    }
  }
  return mask;
}

}  // namespace lmplan
