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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lmplan/assignment.hpp"
#include "lmplan/topology.hpp"

namespace lmplan {

namespace {

void check_symmetric(const Eigen::MatrixXd& m, const char* label) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw ValidationError(std::string("gw_place: ") + label + " matrix must be symmetric");
}

// E(pi) = const - 2 <pi, S pi T>, the const being the marginal-weighted
// squared norms of both distance matrices (fixed over the coupling polytope).
double gw_objective(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& src,
                    const Eigen::MatrixXd& tgt) {
  const double n = static_cast<double>(src.rows());
  const double c = (src.array().square().sum() + tgt.array().square().sum()) / (n * n);
  return c - 2.0 * (pi.array() * (src * pi * tgt).array()).sum();
}

struct FwOutcome {
  Eigen::MatrixXd coupling;
  double objective = 0.0;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
};

FwOutcome conditional_gradient(Eigen::MatrixXd pi, const Eigen::MatrixXd& src,
                               const Eigen::MatrixXd& tgt, const GwParams& params) {
  const Count n = src.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  double energy = gw_objective(pi, src, tgt);

  FwOutcome out;
  out.converged = false;
  out.history.push_back(energy);
  int it = 0;
  for (; it < params.max_iterations; ++it) {
    const Eigen::MatrixXd spt = src * pi * tgt;
    const Eigen::MatrixXd gradient = -4.0 * spt;
    const std::vector<int> cols = solve_assignment(gradient);

    Eigen::MatrixXd direction = -pi;
    for (Count i = 0; i < n; ++i) direction(i, cols[static_cast<std::size_t>(i)]) += inv_n;

    const double b = -4.0 * (direction.array() * spt.array()).sum();
    const double a = -2.0 * (direction.array() * (src * direction * tgt).array()).sum();
    double step = 0.0;
    if (a > 0.0) {
      step = std::clamp(-b / (2.0 * a), 0.0, 1.0);
    } else {
      step = (a + b < 0.0) ? 1.0 : 0.0;
    }
    if (step <= 0.0) {
      out.converged = true;
      break;
    }
    pi += step * direction;
    const double next = gw_objective(pi, src, tgt);
    const bool settled = std::abs(energy - next) <= params.tolerance * std::max(1.0, std::abs(energy));
    energy = next;
    out.history.push_back(energy);
    if (settled) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.coupling = std::move(pi);
  out.objective = energy;
  out.iterations = it;
  return out;
}

std::vector<Count> extract_permutation(const Eigen::MatrixXd& coupling) {
  // Maximum-weight bipartite matching = min-cost assignment on -coupling.
  const std::vector<int> cols = solve_assignment(-coupling);
  std::vector<Count> perm(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) perm[i] = cols[i];
  return perm;
}

// Swap delta of the (unnormalized) QAP objective; diagonal and the (a,b)
// pair cancel because both matrices are symmetric with zero diagonals.
double swap_delta(const std::vector<Count>& perm, Count a, Count b, const Eigen::MatrixXd& src,
                  const Eigen::MatrixXd& tgt) {
  const Count n = tgt.rows();
  const Count pa = perm[static_cast<std::size_t>(a)];
  const Count pb = perm[static_cast<std::size_t>(b)];
  double delta = 0.0;
  for (Count k = 0; k < n; ++k) {
    if (k == a || k == b) continue;
    const Count pk = perm[static_cast<std::size_t>(k)];
    const double sa = src(pa, pk);
    const double sb = src(pb, pk);
    const double ta = tgt(a, k);
    const double tb = tgt(b, k);
    delta += (sb - ta) * (sb - ta) - (sa - ta) * (sa - ta);
    delta += (sa - tb) * (sa - tb) - (sb - tb) * (sb - tb);
  }
  return 2.0 * delta;
}

void refine_pairwise(std::vector<Count>& perm, const Eigen::MatrixXd& src,
                     const Eigen::MatrixXd& tgt) {
  const Count n = tgt.rows();
  bool improved = true;
  while (improved) {
    improved = false;
    for (Count a = 0; a < n; ++a) {
      for (Count b = a + 1; b < n; ++b) {
        if (swap_delta(perm, a, b, src, tgt) < -1e-12) {
          std::swap(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
          improved = true;
        }
      }
    }
  }
}

}  // namespace

GwSolution gw_place(const Eigen::MatrixXd& source_dist, const Eigen::MatrixXd& target_dist,
                    const GwParams& params) {
  const Count n = source_dist.rows();
  if (source_dist.cols() != n || target_dist.rows() != n || target_dist.cols() != n)
    throw ValidationError("gw_place: source and target must be square matrices of equal size");
  if (n < 1) throw ValidationError("gw_place: matrices must be non-empty");
  check_symmetric(source_dist, "source");
  check_symmetric(target_dist, "target");
  if (params.restarts < 1) throw ValidationError("gw_place: restarts must be >= 1");

  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(n, n, inv_n * inv_n);

  std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Count> base(static_cast<std::size_t>(n));
  std::iota(base.begin(), base.end(), Count{0});

  GwSolution best;
  bool have_best = false;
  for (int restart = 0; restart < params.restarts; ++restart) {
    Eigen::MatrixXd start = uniform;
    if (restart > 0) {
      std::shuffle(base.begin(), base.end(), rng);
      constexpr double kBlend[] = {0.25, 0.5, 0.75, 1.0};
      const double alpha = kBlend[restart % 4];
      start *= (1.0 - alpha);
      for (Count i = 0; i < n; ++i) start(i, base[static_cast<std::size_t>(i)]) += alpha * inv_n;
    }

    FwOutcome fw = conditional_gradient(std::move(start), source_dist, target_dist, params);
    std::vector<Count> perm = extract_permutation(fw.coupling);
    if (params.refine) refine_pairwise(perm, source_dist, target_dist);
    const double cost = placement_cost(perm, source_dist, target_dist);

    if (!have_best || cost < best.placement.cost) {
      best.placement = {std::move(perm), cost};
      best.coupling = std::move(fw.coupling);
      best.objective = fw.objective;
      best.objective_history = std::move(fw.history);
      best.iterations = fw.iterations;
      best.converged = fw.converged;
      have_best = true;
    }
    if (best.placement.cost <= 1e-15) break;  // exact match found
  }
  return best;
}

GwSolution gw_place(const BandwidthMatrix& source, const Eigen::MatrixXd& target_dist,
                    const GwParams& params, double epsilon_gbps) {
  return gw_place(bandwidth_to_distance(source, epsilon_gbps), target_dist, params);
}

}  // namespace lmplan
