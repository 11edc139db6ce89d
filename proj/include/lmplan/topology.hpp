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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lmplan/model_shape.hpp"
#include "lmplan/parallel_sim.hpp"

namespace lmplan {

/// Schedule for measuring bandwidth between all node pairs in n-1 parallel
/// rounds: each round is a perfect matching, and the union of rounds covers
/// every unordered pair exactly once (a 1-factorization of K_n).
struct MeasurementPlan {
  Count n = 0;
  std::vector<std::vector<std::pair<Count, Count>>> rounds;
};

/// Builds the plan for n nodes (n a power of two, n >= 2). The construction
/// walks widths d = 1, 2, 4, ... n/2; for each offset r < d it views the
/// node array as rows of width d, cyclically rolls every odd row right by r
/// in place, and emits the transposed flattening as consecutive pairs.
MeasurementPlan measurement_plan(Count n);

/// One round per line, pairs as `i-j` separated by commas.
std::string format_measurement_plan(const MeasurementPlan& plan);

/// Symmetric pairwise bandwidth in Gbps, zero diagonal.
struct BandwidthMatrix {
  Eigen::MatrixXd bw;

  Count size() const { return bw.rows(); }
};

/// Throws ValidationError unless square, symmetric, non-negative with a zero
/// diagonal.
void validate(const BandwidthMatrix& m);

/// CSV with a one-line header `n=<count>` followed by n rows of n values.
BandwidthMatrix load_bandwidth_csv(const std::filesystem::path& path);
BandwidthMatrix read_bandwidth_csv(std::istream& in);

/// Source distances for placement: d = 1 / (bw + epsilon), diagonal forced
/// to zero.
Eigen::MatrixXd bandwidth_to_distance(const BandwidthMatrix& m, double epsilon_gbps = 1e-6);

/// Target distances on the pipeline x data-parallel node grid, nodes ordered
/// (p, d) row-major: |p1-p2| + lambda*|d1-d2|.
Eigen::MatrixXd logical_distance_matrix(Count pp, Count dp_nodes, double lambda = 1.0);

/// Grid dims taken from cfg.pp and cfg.dp; valid when each (stage, replica)
/// cell occupies exactly one node (tp == GPUs per node).
Eigen::MatrixXd logical_distance_matrix(const ParallelismConfig& cfg, double lambda = 1.0);

struct ClusterTopology {
  Count nodes = 0;
  Count gpus_per_node = 8;
  Bytes gpu_mem_bytes = 40'000'000'000;
  std::optional<BandwidthMatrix> bandwidth;
};

/// Logical grid position -> physical node, with its objective value.
struct Placement {
  std::vector<Count> perm;
  double cost = 0.0;
};

/// One `logical_index physical_node` pair per line.
std::string format_placement(const Placement& placement);

struct GwParams {
  int max_iterations = 200;
  double tolerance = 1e-9;  // relative objective change
  // Restart 0 starts from the uniform outer product; the rest blend it with
  // seeded random permutation couplings to escape poor stationary points.
  int restarts = 32;
  std::uint64_t seed = 0;
  bool refine = true;  // pairwise-exchange polish of the extracted permutation
};

struct GwSolution {
  Placement placement;
  Eigen::MatrixXd coupling;  // best restart's final iterate
  double objective = 0.0;    // E(pi) of that iterate
  std::vector<double> objective_history;  // E(pi) per accepted iterate, best restart
  int iterations = 0;
  bool converged = true;  // false when the iteration cap was hit
};

/// Minimizes E(pi) = sum (D_src[i,k] - D_tgt[j,l])^2 pi[i,j] pi[k,l] over
/// couplings with uniform marginals by conditional gradient: the linear step
/// solves an exact assignment on the gradient -4 * D_src * pi * D_tgt, the
/// step size comes from exact line search. The permutation is extracted by
/// maximum-weight matching on the coupling.
GwSolution gw_place(const Eigen::MatrixXd& source_dist, const Eigen::MatrixXd& target_dist,
                    const GwParams& params = {});

/// Convenience overload: converts bandwidths to distances first.
GwSolution gw_place(const BandwidthMatrix& source, const Eigen::MatrixXd& target_dist,
                    const GwParams& params = {}, double epsilon_gbps = 1e-6);

/// QAP objective of a fixed assignment:
/// sum_{i,k} (D_src[perm(i),perm(k)] - D_tgt[i,k])^2 / n^2.
double placement_cost(std::span<const Count> perm, const Eigen::MatrixXd& source_dist,
                      const Eigen::MatrixXd& target_dist);

}  // namespace lmplan
