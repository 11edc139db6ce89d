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

#include "lmplan/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lmplan {

namespace {

bool is_power_of_two(Count n) { return n > 0 && (n & (n - 1)) == 0; }

// Cyclically roll `row` (a width-d slice of x) right by r, in place.
void roll_right(std::vector<Count>& x, Count row_start, Count d, Count r) {
  if (d <= 1) return;
  r %= d;
  if (r == 0) return;
  auto begin = x.begin() + row_start;
  std::rotate(begin, begin + (d - r), begin + d);
}

}  // namespace

MeasurementPlan measurement_plan(Count n) {
  if (!is_power_of_two(n) || n < 2)
    throw ValidationError("measurement_plan: n must be a power of two >= 2, got " +
                          std::to_string(n));

  std::vector<Count> x(static_cast<std::size_t>(n));
  for (Count i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = i;

  MeasurementPlan plan;
  plan.n = n;
  plan.rounds.reserve(static_cast<std::size_t>(n - 1));

  for (Count d = 1; d < n; d *= 2) {
    const Count n_rows = n / d;
    for (Count r = 0; r < d; ++r) {
      // The roll mutates x; later widths see the accumulated state.
      for (Count row = 1; row < n_rows; row += 2) roll_right(x, row * d, d, r);

      // Transposed flattening of the (n_rows x d) view, grouped into pairs.
      std::vector<std::pair<Count, Count>> round;
      round.reserve(static_cast<std::size_t>(n / 2));
      Count prev = -1;
      bool have_prev = false;
      for (Count col = 0; col < d; ++col) {
        for (Count row = 0; row < n_rows; ++row) {
          const Count value = x[static_cast<std::size_t>(row * d + col)];
          if (have_prev) {
            round.emplace_back(prev, value);
            have_prev = false;
          } else {
            prev = value;
            have_prev = true;
          }
        }
      }
      plan.rounds.push_back(std::move(round));
    }
  }
  return plan;
}

std::string format_measurement_plan(const MeasurementPlan& plan) {
  std::ostringstream out;
  for (const auto& round : plan.rounds) {
    for (std::size_t k = 0; k < round.size(); ++k) {
      if (k > 0) out << ',';
      out << round[k].first << '-' << round[k].second;
    }
    out << '\n';
  }
  return out.str();
}

void validate(const BandwidthMatrix& m) {
  const Count n = m.bw.rows();
  if (m.bw.cols() != n) throw ValidationError("bandwidth matrix must be square");
  for (Count i = 0; i < n; ++i) {
    if (m.bw(i, i) != 0.0)
      throw ValidationError("bandwidth matrix diagonal must be zero (row " + std::to_string(i) +
                            ")");
    for (Count j = 0; j < n; ++j) {
      if (m.bw(i, j) < 0.0)
        throw ValidationError("bandwidth matrix entries must be >= 0");
      if (m.bw(i, j) != m.bw(j, i))
        throw ValidationError("bandwidth matrix must be symmetric (entries " + std::to_string(i) +
                              "," + std::to_string(j) + ")");
    }
  }
}

BandwidthMatrix read_bandwidth_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("bandwidth csv: empty input", 1);
  if (header.rfind("n=", 0) != 0)
    throw ParseError("bandwidth csv: expected header 'n=<count>'", 1);
  Count n = 0;
  try {
    n = std::stoll(header.substr(2));
  } catch (const std::exception&) {
    throw ParseError("bandwidth csv: malformed header '" + header + "'", 1);
  }
  if (n < 1) throw ParseError("bandwidth csv: n must be >= 1", 1);

  BandwidthMatrix m;
  m.bw = Eigen::MatrixXd::Zero(n, n);
  for (Count i = 0; i < n; ++i) {
    std::string line;
    const int line_no = static_cast<int>(i) + 2;
    if (!std::getline(in, line))
      throw ParseError("bandwidth csv: expected " + std::to_string(n) + " rows", line_no);
    std::stringstream row(line);
    std::string cell;
    for (Count j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ','))
        throw ParseError("bandwidth csv: row has fewer than " + std::to_string(n) + " values",
                         line_no);
      try {
        m.bw(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError("bandwidth csv: bad value '" + cell + "'", line_no);
      }
    }
    if (std::getline(row, cell, ',') && !cell.empty())
      throw ParseError("bandwidth csv: row has more than " + std::to_string(n) + " values",
                       line_no);
  }
  validate(m);
  return m;
}

BandwidthMatrix load_bandwidth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open bandwidth file '" + path.string() + "'");
  return read_bandwidth_csv(in);
}

Eigen::MatrixXd bandwidth_to_distance(const BandwidthMatrix& m, double epsilon_gbps) {
  validate(m);
  if (epsilon_gbps <= 0) throw ValidationError("bandwidth_to_distance: epsilon must be positive");
  Eigen::MatrixXd dist = (m.bw.array() + epsilon_gbps).inverse();
  dist.diagonal().setZero();
  return dist;
}

Eigen::MatrixXd logical_distance_matrix(Count pp, Count dp_nodes, double lambda) {
  if (pp < 1 || dp_nodes < 1)
    throw ValidationError("logical_distance_matrix: grid dims must be >= 1");
  const Count n = pp * dp_nodes;
  Eigen::MatrixXd dist(n, n);
  for (Count a = 0; a < n; ++a) {
    const Count p1 = a / dp_nodes;
    const Count d1 = a % dp_nodes;
    for (Count b = 0; b < n; ++b) {
      const Count p2 = b / dp_nodes;
      const Count d2 = b % dp_nodes;
      dist(a, b) = static_cast<double>(std::abs(p1 - p2)) +
                   lambda * static_cast<double>(std::abs(d1 - d2));
    }
  }
  return dist;
}

Eigen::MatrixXd logical_distance_matrix(const ParallelismConfig& cfg, double lambda) {
  return logical_distance_matrix(cfg.pp, cfg.dp, lambda);
}

std::string format_placement(const Placement& placement) {
  std::ostringstream out;
  for (std::size_t i = 0; i < placement.perm.size(); ++i)
    out << i << ' ' << placement.perm[i] << '\n';
  return out.str();
}

double placement_cost(std::span<const Count> perm, const Eigen::MatrixXd& source_dist,
                      const Eigen::MatrixXd& target_dist) {
  const Count n = target_dist.rows();
  if (static_cast<Count>(perm.size()) != n)
    throw ValidationError("placement_cost: permutation size mismatch");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const Count v : perm) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
      throw ValidationError("placement_cost: perm is not a bijection on [0, n)");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  double total = 0.0;
  for (Count i = 0; i < n; ++i) {
    for (Count k = 0; k < n; ++k) {
      const double diff = source_dist(perm[static_cast<std::size_t>(i)],
                                      perm[static_cast<std::size_t>(k)]) -
                          target_dist(i, k);
      total += diff * diff;
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace lmplan
