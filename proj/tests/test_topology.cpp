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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lmplan/assignment.hpp"
#include "lmplan/topology.hpp"
#include "support.hpp"

using namespace lmplan;

namespace {

using Pair = std::pair<Count, Count>;

bool plan_is_valid(const MeasurementPlan& plan) {
  if (static_cast<Count>(plan.rounds.size()) != plan.n - 1) return false;
  std::set<Pair> seen;
  for (const auto& round : plan.rounds) {
    std::set<Count> nodes;
    for (const auto& [a, b] : round) {
      if (a == b || a < 0 || b < 0 || a >= plan.n || b >= plan.n) return false;
      nodes.insert(a);
      nodes.insert(b);
      if (!seen.insert({std::min(a, b), std::max(a, b)}).second) return false;
    }
    if (static_cast<Count>(nodes.size()) != plan.n) return false;
  }
  return static_cast<Count>(seen.size()) == plan.n * (plan.n - 1) / 2;
}

Eigen::MatrixXd random_metric(std::mt19937& rng, Count n) {
  std::uniform_real_distribution<double> dist(0.1, 10.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Count i = 0; i < n; ++i)
    for (Count j = i + 1; j < n; ++j) m(i, j) = m(j, i) = dist(rng);
  return m;
}

// Relabel a metric by a random permutation: S[pm[i], pm[j]] = T[i, j].
Eigen::MatrixXd permuted(const Eigen::MatrixXd& t, const std::vector<Count>& pm) {
  const Count n = t.rows();
  Eigen::MatrixXd s(n, n);
  for (Count i = 0; i < n; ++i)
    for (Count j = 0; j < n; ++j)
      s(pm[static_cast<std::size_t>(i)], pm[static_cast<std::size_t>(j)]) = t(i, j);
  return s;
}

double brute_force_qap(const Eigen::MatrixXd& src, const Eigen::MatrixXd& tgt) {
  const Count n = tgt.rows();
  std::vector<Count> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Count{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, placement_cost(perm, src, tgt));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

BandwidthMatrix two_block_cluster(Count n, double intra_gbps, double inter_gbps) {
  BandwidthMatrix m;
  m.bw = Eigen::MatrixXd::Constant(n, n, inter_gbps);
  for (Count i = 0; i < n; ++i)
    for (Count j = 0; j < n; ++j)
      if ((i < n / 2) == (j < n / 2)) m.bw(i, j) = intra_gbps;
  m.bw.diagonal().setZero();
  return m;
}

}  // namespace

TEST_CASE("measurement plan smallest cases match the hand trace") {
  const MeasurementPlan two = measurement_plan(2);
  REQUIRE(two.rounds.size() == 1);
  CHECK(two.rounds[0] == std::vector<Pair>{{0, 1}});

  const MeasurementPlan four = measurement_plan(4);
  REQUIRE(four.rounds.size() == 3);
  CHECK(four.rounds[0] == std::vector<Pair>{{0, 1}, {2, 3}});
  CHECK(four.rounds[1] == std::vector<Pair>{{0, 2}, {1, 3}});
  CHECK(four.rounds[2] == std::vector<Pair>{{0, 3}, {1, 2}});
}

TEST_CASE("measurement plan n=8 in-place roll ordering") {
  const MeasurementPlan plan = measurement_plan(8);
  REQUIRE(plan.rounds.size() == 7);
  CHECK(plan_is_valid(plan));
  // The d=4 rounds see the array already mutated by the d=2, r=1 roll.
  CHECK(plan.rounds[3] == std::vector<Pair>{{0, 4}, {1, 5}, {3, 7}, {2, 6}});
  CHECK(plan.rounds[4] == std::vector<Pair>{{0, 6}, {1, 4}, {3, 5}, {2, 7}});
  CHECK(plan.rounds[5] == std::vector<Pair>{{0, 5}, {1, 7}, {3, 6}, {2, 4}});
  CHECK(plan.rounds[6] == std::vector<Pair>{{0, 7}, {1, 6}, {3, 4}, {2, 5}});
}

TEST_CASE("measurement plan is a 1-factorization for every size in range") {
  for (Count n = 2; n <= 256; n *= 2) CHECK(plan_is_valid(measurement_plan(n)));
}

TEST_CASE("measurement plan rejects invalid sizes") {
  CHECK_THROWS_AS(measurement_plan(0), ValidationError);
  CHECK_THROWS_AS(measurement_plan(1), ValidationError);
  CHECK_THROWS_AS(measurement_plan(3), ValidationError);
  CHECK_THROWS_AS(measurement_plan(6), ValidationError);
  CHECK_THROWS_AS(measurement_plan(-8), ValidationError);
}

TEST_CASE("measurement plan text format") {
  CHECK(format_measurement_plan(measurement_plan(4)) == "0-1,2-3\n0-2,1-3\n0-3,1-2\n");
}

TEST_CASE("bandwidth csv round trip and validation") {
  const std::string csv = "n=3\n0,25,10\n25,0,50\n10,50,0\n";
  std::istringstream in(csv);
  const BandwidthMatrix m = read_bandwidth_csv(in);
  CHECK(m.size() == 3);
  CHECK(m.bw(0, 1) == 25.0);
  CHECK(m.bw(2, 1) == 50.0);

  std::istringstream bad_header("3\n0,1\n1,0\n");
  CHECK_THROWS_AS(read_bandwidth_csv(bad_header), ParseError);

  std::istringstream short_row("n=2\n0,1\n1\n");
  CHECK_THROWS_AS(read_bandwidth_csv(short_row), ParseError);

  std::istringstream asymmetric("n=2\n0,1\n2,0\n");
  CHECK_THROWS_AS(read_bandwidth_csv(asymmetric), ValidationError);

  std::istringstream bad_diag("n=2\n1,1\n1,0\n");
  CHECK_THROWS_AS(read_bandwidth_csv(bad_diag), ValidationError);
}

TEST_CASE("bandwidth to distance transform") {
  BandwidthMatrix m;
  m.bw = Eigen::MatrixXd::Zero(2, 2);
  m.bw(0, 1) = m.bw(1, 0) = 50.0;
  const Eigen::MatrixXd d = bandwidth_to_distance(m, 1e-6);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
  CHECK(d(0, 1) == doctest::Approx(1.0 / 50.000001));
}

TEST_CASE("logical grid distances") {
  const Eigen::MatrixXd d = logical_distance_matrix(2, 2, 1.0);
  // Order (0,0), (0,1), (1,0), (1,1).
  Eigen::MatrixXd expected(4, 4);
  expected << 0, 1, 1, 2, 1, 0, 2, 1, 1, 2, 0, 1, 2, 1, 1, 0;
  CHECK((d - expected).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd weighted = logical_distance_matrix(2, 3, 10.0);
  CHECK(weighted(0, 1) == 10.0);   // same stage, adjacent replica column
  CHECK(weighted(0, 3) == 1.0);    // adjacent stage, same column
  CHECK(weighted(1, 1) == 0.0);
  CHECK((weighted - weighted.transpose().eval()).cwiseAbs().maxCoeff() == 0.0);

  ParallelismConfig cfg;
  cfg.pp = 2;
  cfg.dp = 2;
  cfg.world_size = 4;
  CHECK((logical_distance_matrix(cfg, 1.0) - d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("placement cost definition") {
  std::mt19937 rng(21);
  const Eigen::MatrixXd t = random_metric(rng, 4);
  std::vector<Count> identity{0, 1, 2, 3};
  CHECK(placement_cost(identity, t, t) == 0.0);

  std::vector<Count> shuffled{2, 0, 3, 1};
  const double cost = placement_cost(shuffled, t, t);
  CHECK(cost >= 0.0);
  // Direct summation oracle.
  double expected = 0.0;
  for (Count i = 0; i < 4; ++i)
    for (Count k = 0; k < 4; ++k) {
      const double diff = t(shuffled[i], shuffled[k]) - t(i, k);
      expected += diff * diff;
    }
  CHECK(cost == doctest::Approx(expected / 16.0));

  std::vector<Count> not_bijective{0, 0, 1, 2};
  CHECK_THROWS_AS(placement_cost(not_bijective, t, t), ValidationError);
  std::vector<Count> wrong_size{0, 1};
  CHECK_THROWS_AS(placement_cost(wrong_size, t, t), ValidationError);
}

TEST_CASE("assignment solver on a known instance") {
  Eigen::MatrixXd cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const std::vector<int> cols = solve_assignment(cost);
  CHECK(cols == std::vector<int>{1, 0, 2});  // total 1 + 2 + 2 = 5
}

TEST_CASE("assignment solver matches brute force on random instances") {
  std::mt19937 rng(88);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Count n = std::uniform_int_distribution<Count>(1, 7)(rng);
    Eigen::MatrixXd cost(n, n);
    for (Count i = 0; i < n; ++i)
      for (Count j = 0; j < n; ++j) cost(i, j) = dist(rng);

    const std::vector<int> cols = solve_assignment(cost);
    double got = 0.0;
    for (Count i = 0; i < n; ++i) got += cost(i, cols[static_cast<std::size_t>(i)]);

    std::vector<Count> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Count{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (Count i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("identical metric spaces place at zero cost") {
  std::mt19937 rng(3);
  const Eigen::MatrixXd t = random_metric(rng, 6);
  const GwSolution solution = gw_place(t, t);
  CHECK(solution.placement.cost == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("permuted metrics recover the exhaustive optimum") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 6; ++trial) {
    const Count n = std::uniform_int_distribution<Count>(4, 8)(rng);
    const Eigen::MatrixXd tgt = random_metric(rng, n);
    std::vector<Count> pm(static_cast<std::size_t>(n));
    std::iota(pm.begin(), pm.end(), Count{0});
    std::shuffle(pm.begin(), pm.end(), rng);
    const Eigen::MatrixXd src = permuted(tgt, pm);

    GwParams params;
    params.seed = static_cast<std::uint64_t>(trial);
    const GwSolution solution = gw_place(src, tgt, params);
    CHECK(solution.placement.cost == doctest::Approx(brute_force_qap(src, tgt)).epsilon(1e-9));
  }
}

TEST_CASE("coupling marginals stay uniform") {
  std::mt19937 rng(77);
  const Count n = 6;
  const Eigen::MatrixXd tgt = random_metric(rng, n);
  const Eigen::MatrixXd src = random_metric(rng, n);
  const GwSolution solution = gw_place(src, tgt);
  const Eigen::VectorXd rows = solution.coupling.rowwise().sum();
  const Eigen::VectorXd cols = solution.coupling.colwise().sum();
  for (Count i = 0; i < n; ++i) {
    CHECK(std::abs(rows(i) - 1.0 / n) < 1e-6);
    CHECK(std::abs(cols(i) - 1.0 / n) < 1e-6);
  }
}

TEST_CASE("conditional-gradient objective never increases") {
  std::mt19937 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Count n = std::uniform_int_distribution<Count>(3, 10)(rng);
    const GwSolution solution = gw_place(random_metric(rng, n), random_metric(rng, n));
    for (std::size_t k = 1; k < solution.objective_history.size(); ++k)
      CHECK(solution.objective_history[k] <= solution.objective_history[k - 1] + 1e-12);
  }
}

TEST_CASE("extraction beats 1000 seeded random permutations") {
  std::mt19937 rng(1001);
  for (int trial = 0; trial < 5; ++trial) {
    const Count n = std::uniform_int_distribution<Count>(4, 10)(rng);
    const Eigen::MatrixXd tgt = random_metric(rng, n);
    const Eigen::MatrixXd src = random_metric(rng, n);
    const GwSolution solution = gw_place(src, tgt);

    std::vector<Count> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Count{0});
    std::mt19937 sampler(5150 + trial);
    double best_random = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 1000; ++s) {
      std::shuffle(perm.begin(), perm.end(), sampler);
      best_random = std::min(best_random, placement_cost(perm, src, tgt));
    }
    CHECK(solution.placement.cost <= best_random + 1e-12);
  }
}

TEST_CASE("two-block cluster keeps data-parallel columns inside a block") {
  const Count n = 8;
  const BandwidthMatrix bw = two_block_cluster(n, 50.0, 5.0);
  const Eigen::MatrixXd target = logical_distance_matrix(2, n / 2, 10.0);
  const GwSolution solution = gw_place(bw, target, GwParams{});
  REQUIRE(solution.placement.perm.size() == static_cast<std::size_t>(n));
  for (Count d = 0; d < n / 2; ++d) {
    const Count first = solution.placement.perm[static_cast<std::size_t>(d)];
    const Count second = solution.placement.perm[static_cast<std::size_t>(n / 2 + d)];
    CHECK((first < n / 2) == (second < n / 2));
  }
}

TEST_CASE("solver flags non-convergence at a tiny iteration cap") {
  std::mt19937 rng(9);
  const Eigen::MatrixXd tgt = random_metric(rng, 8);
  const Eigen::MatrixXd src = random_metric(rng, 8);
  GwParams params;
  params.max_iterations = 1;
  params.restarts = 1;
  params.refine = false;
  const GwSolution solution = gw_place(src, tgt, params);
  CHECK_FALSE(solution.converged);
  CHECK(solution.iterations == 1);
}

TEST_CASE("input validation for placement") {
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd other = Eigen::MatrixXd::Zero(4, 4);
  CHECK_THROWS_AS(gw_place(square, other), ValidationError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(3, 3);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(gw_place(asym, square), ValidationError);
}

TEST_CASE("placement text format") {
  Placement p;
  p.perm = {2, 0, 1};
  CHECK(format_placement(p) == "0 2\n1 0\n2 1\n");
}
