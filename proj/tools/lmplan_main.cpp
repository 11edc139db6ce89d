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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lmplan/config.hpp"
#include "lmplan/data_sched.hpp"
#include "lmplan/memory_model.hpp"
#include "lmplan/model_shape.hpp"
#include "lmplan/parallel_sim.hpp"
#include "lmplan/report.hpp"
#include "lmplan/topology.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw lmplan::ParseError("cannot write output file '" + out_path + "'");
  out << text;
}

std::vector<double> parse_double_list(const std::string& csv, const char* flag) {
  std::vector<double> values;
  std::stringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw lmplan::ValidationError(std::string(flag) + ": bad number '" + cell + "'");
    }
  }
  if (values.empty()) throw lmplan::ValidationError(std::string(flag) + ": empty list");
  return values;
}

std::vector<lmplan::Count> parse_count_list(const std::string& csv, const char* flag) {
  std::vector<lmplan::Count> values;
  for (const double v : parse_double_list(csv, flag)) {
    if (v < 0 || v != static_cast<double>(static_cast<lmplan::Count>(v)))
      throw lmplan::ValidationError(std::string(flag) + ": expected non-negative integers");
    values.push_back(static_cast<lmplan::Count>(v));
  }
  return values;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

struct PlanArgs {
  std::string config_path;
  std::string format = "human";
  std::string out_path;
};

int run_plan(const PlanArgs& args) {
  const lmplan::PlanConfig cfg = lmplan::parse_config(args.config_path);
  const lmplan::Report report = lmplan::plan_report(cfg);
  write_output(lmplan::render_report(report, lmplan::parse_report_format(args.format)),
               args.out_path);
  return kExitOk;
}

struct SimulateArgs {
  std::string config_path;
  std::string format = "human";
  std::string out_path;
  std::string trace_path;
  double fwd_us = 1000.0;
  double bwd_us = -1.0;  // default: 2x forward
  double p2p_us = -1.0;  // default: derived from cluster bandwidth, else 0
  double latency_us = 0.0;
};

int run_simulate(const SimulateArgs& args) {
  const lmplan::PlanConfig cfg = lmplan::parse_config(args.config_path);

  lmplan::StageTiming timing = lmplan::StageTiming::from_forward(args.fwd_us);
  if (args.bwd_us >= 0) timing.bwd_us = args.bwd_us;
  if (args.p2p_us >= 0) {
    timing.p2p_us = args.p2p_us;
  } else if (cfg.cluster && cfg.cluster->bandwidth) {
    const auto& bw = cfg.cluster->bandwidth->bw;
    double min_bw = -1.0;
    for (lmplan::Count i = 0; i < bw.rows(); ++i)
      for (lmplan::Count j = 0; j < bw.cols(); ++j)
        if (i != j && (min_bw < 0 || bw(i, j) < min_bw)) min_bw = bw(i, j);
    const lmplan::CommVolumeReport volumes =
        lmplan::comm_volume_report(cfg.model, cfg.parallelism, cfg.dtype_bytes);
    if (min_bw > 0)
      timing.p2p_us = lmplan::p2p_time_us(volumes.pp_p2p_bytes_per_microbatch_boundary, min_bw,
                                          args.latency_us);
  }

  const lmplan::ScheduleTimeline timeline = lmplan::simulate_1f1b(cfg.parallelism, timing);
  if (!args.trace_path.empty())
    write_output(lmplan::chrome_trace_json(timeline), args.trace_path);
  const lmplan::Report report = lmplan::schedule_report(timeline, timing);
  write_output(lmplan::render_report(report, lmplan::parse_report_format(args.format)),
               args.out_path);
  return kExitOk;
}

struct TopoPlanArgs {
  lmplan::Count n = 0;
  std::string out_path;
};

int run_topo_plan(const TopoPlanArgs& args) {
  write_output(lmplan::format_measurement_plan(lmplan::measurement_plan(args.n)), args.out_path);
  return kExitOk;
}

struct TopoPlaceArgs {
  std::string bandwidth_path;
  lmplan::Count pp = 0;
  lmplan::Count dp = 0;
  double lambda = 1.0;
  double epsilon_gbps = 1e-6;
  lmplan::GwParams params;
  std::string format = "human";
  std::string out_path;
};

int run_topo_place(const TopoPlaceArgs& args) {
  const lmplan::BandwidthMatrix bw = lmplan::load_bandwidth_csv(args.bandwidth_path);
  if (args.pp * args.dp != bw.size())
    throw lmplan::ValidationError("pp*dp = " + std::to_string(args.pp * args.dp) +
                                  " does not match bandwidth matrix size " +
                                  std::to_string(bw.size()));
  const Eigen::MatrixXd target = lmplan::logical_distance_matrix(args.pp, args.dp, args.lambda);
  const lmplan::GwSolution solution =
      lmplan::gw_place(bw, target, args.params, args.epsilon_gbps);
  if (!solution.converged)
    std::cerr << "warning: solver hit the iteration cap before converging\n";

  if (args.format == "json") {
    nlohmann::ordered_json doc;
    doc["logical_to_physical"] = solution.placement.perm;
    doc["cost"] = solution.placement.cost;
    doc["gw_objective"] = solution.objective;
    doc["converged"] = solution.converged;
    write_output(doc.dump(2) + "\n", args.out_path);
  } else if (args.format == "human") {
    write_output(lmplan::format_placement(solution.placement), args.out_path);
    std::cerr << "placement cost " << solution.placement.cost << "\n";
  } else {
    throw lmplan::ValidationError("unknown format '" + args.format + "'");
  }
  return kExitOk;
}

struct MixtureArgs {
  std::string weights_csv;
  std::string names_csv;
  lmplan::Count length = 10'000;
  std::string out_path;
};

int run_mixture(const MixtureArgs& args) {
  const std::vector<double> weights = parse_double_list(args.weights_csv, "--weights");
  std::vector<std::string> names = split_csv(args.names_csv);
  if (!args.names_csv.empty() && names.size() != weights.size())
    throw lmplan::ValidationError("--names count does not match --weights count");

  lmplan::MixtureSpec spec;
  spec.pattern_length = args.length;
  for (std::size_t i = 0; i < weights.size(); ++i)
    spec.sources.push_back(
        {i < names.size() ? names[i] : "source" + std::to_string(i), weights[i]});
  write_output(lmplan::format_mixture_pattern(lmplan::mixture_pattern(spec)), args.out_path);
  return kExitOk;
}

struct MaskArgs {
  std::string tree_path;
  std::string depths_csv;
  std::string format = "human";
  std::string out_path;
};

int run_mask(const MaskArgs& args) {
  if (args.tree_path.empty() == args.depths_csv.empty())
    throw lmplan::ValidationError("mask: provide exactly one of --tree or --depths");
  lmplan::DepthSequence depths;
  if (!args.tree_path.empty())
    depths = lmplan::serialize_tree(lmplan::load_tree(args.tree_path));
  else
    depths = parse_count_list(args.depths_csv, "--depths");

  const lmplan::AttentionMask mask = lmplan::tree_attention_mask(depths);
  if (args.format == "json")
    write_output(mask.to_json() + "\n", args.out_path);
  else if (args.format == "human")
    write_output(mask.to_bit_rows(), args.out_path);
  else
    throw lmplan::ValidationError("unknown format '" + args.format + "'");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planning and simulation toolkit for large-scale LM pretraining runs"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Memory, K,V-cache, compute, and comm-volume report");
  plan->add_option("--config", plan_args.config_path, "Plan config file")->required();
  plan->add_option("--format", plan_args.format, "Output format: human or json");
  plan->add_option("--out", plan_args.out_path, "Write output to a file instead of stdout");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "1F1B pipeline schedule simulation");
  simulate->add_option("--config", sim_args.config_path, "Plan config file")->required();
  simulate->add_option("--fwd-us", sim_args.fwd_us, "Forward time per microbatch (us)");
  simulate->add_option("--bwd-us", sim_args.bwd_us, "Backward time (default: 2x forward)");
  simulate->add_option("--p2p-us", sim_args.p2p_us,
                       "Inter-stage transfer time (default: from cluster bandwidth, else 0)");
  simulate->add_option("--latency-us", sim_args.latency_us, "Per-transfer latency (us)");
  simulate->add_option("--trace", sim_args.trace_path, "Write a Chrome trace JSON");
  simulate->add_option("--format", sim_args.format, "Output format: human or json");
  simulate->add_option("--out", sim_args.out_path, "Write output to a file instead of stdout");

  auto* topo = app.add_subcommand("topo", "Topology discovery and rank placement");
  topo->require_subcommand(1);

  TopoPlanArgs topo_plan_args;
  auto* topo_plan = topo->add_subcommand("plan", "All-pairs bandwidth measurement plan");
  topo_plan->add_option("--n", topo_plan_args.n, "Node count (power of two)")->required();
  topo_plan->add_option("--out", topo_plan_args.out_path, "Write output to a file");

  TopoPlaceArgs topo_place_args;
  auto* topo_place = topo->add_subcommand("place", "Rank placement from measured bandwidths");
  topo_place->add_option("--bandwidth", topo_place_args.bandwidth_path, "Bandwidth CSV")
      ->required();
  topo_place->add_option("--pp", topo_place_args.pp, "Pipeline rows of the node grid")->required();
  topo_place->add_option("--dp", topo_place_args.dp, "Data-parallel columns of the node grid")
      ->required();
  topo_place->add_option("--lambda", topo_place_args.lambda, "Data-parallel distance weight");
  topo_place->add_option("--epsilon", topo_place_args.epsilon_gbps,
                         "Bandwidth-to-distance epsilon (Gbps)");
  topo_place->add_option("--restarts", topo_place_args.params.restarts, "Solver restarts");
  topo_place->add_option("--seed", topo_place_args.params.seed, "Restart seed");
  topo_place->add_option("--max-iterations", topo_place_args.params.max_iterations,
                         "Conditional-gradient iteration cap");
  topo_place->add_option("--tolerance", topo_place_args.params.tolerance,
                         "Relative objective-change tolerance");
  topo_place->add_option("--format", topo_place_args.format, "Output format: human or json");
  topo_place->add_option("--out", topo_place_args.out_path, "Write output to a file");

  MixtureArgs mixture_args;
  auto* mixture = app.add_subcommand("mixture", "Deterministic exact-weight sampling pattern");
  mixture->add_option("--weights", mixture_args.weights_csv, "Comma-separated source weights")
      ->required();
  mixture->add_option("--names", mixture_args.names_csv, "Comma-separated source names");
  mixture->add_option("--length", mixture_args.length, "Pattern length");
  mixture->add_option("--out", mixture_args.out_path, "Write output to a file");

  MaskArgs mask_args;
  auto* mask = app.add_subcommand("mask", "Conversation-tree attention mask");
  mask->add_option("--tree", mask_args.tree_path, "Tree file: 'id parent_id token_count'");
  mask->add_option("--depths", mask_args.depths_csv, "Comma-separated token depths");
  mask->add_option("--format", mask_args.format, "Output format: human (bit rows) or json");
  mask->add_option("--out", mask_args.out_path, "Write output to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (plan->parsed()) return run_plan(plan_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (topo_plan->parsed()) return run_topo_plan(topo_plan_args);
    if (topo_place->parsed()) return run_topo_place(topo_place_args);
    if (mixture->parsed()) return run_mixture(mixture_args);
    if (mask->parsed()) return run_mask(mask_args);
  } catch (const lmplan::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  } catch (const lmplan::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
