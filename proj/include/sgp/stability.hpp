#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sgp/engine.hpp"

namespace sgp {

// Neighboring datasets: identical except one (node, local index) position.
struct NeighborPair {
  ShardedDataset base;
  ShardedDataset perturbed;
  int node = 0;
  int local_index = 0;
  Sample replacement;
};

// Replace one sample with a draw from the held-out pool (disjoint from S).
inline NeighborPair make_neighbor(const ShardedDataset& dataset, int node,
                                  int local_index, std::uint64_t seed) {
  if (node < 0 || node >= dataset.m()) throw std::out_of_range("make_neighbor: node");
  if (local_index < 0 || local_index >= dataset.n())
    throw std::out_of_range("make_neighbor: local index");
  if (dataset.pool.empty())
    throw std::invalid_argument("make_neighbor: empty held-out pool");
  Rng rng(seed, /*stream=*/0x4e18);
  const auto pick = rng.next_below(dataset.pool.size());
  NeighborPair pair;
  pair.base = dataset;
  pair.perturbed = dataset;
  pair.node = node;
  pair.local_index = local_index;
  pair.replacement = dataset.pool[pick];
  pair.perturbed.shards[node][local_index] = pair.replacement;
  return pair;
}

// Uniform draw of the perturbed position, matching the proof's WLOG choice
// under shared-index sampling.
inline NeighborPair make_neighbor(const ShardedDataset& dataset, std::uint64_t seed) {
  Rng rng(seed, /*stream=*/0x4e19);
  const int node = static_cast<int>(rng.next_below(dataset.m()));
  const int local = static_cast<int>(rng.next_below(dataset.n()));
  return make_neighbor(dataset, node, local, seed);
}

struct CoupledTrace {
  std::vector<double> delta;  // delta[k] = ||wbar^(t) - wbar'^(t)|| at t = k+1
  double delta_final = 0.0;
  double avg_divergence = 0.0;  // ||w_avg - w_avg'||
  double gen_gap_run = 0.0;
  double gen_gap_run_prime = 0.0;
  Eigen::VectorXd w_out, w_out_prime;  // configured output iterates
  double max_grad_norm = 0.0;          // empirical G across both runs
};

// Mean test loss minus mean train loss at a given output iterate.
inline double generalization_gap(const Eigen::VectorXd& w, const LossModel& model,
                                 std::span<const Sample> train_set,
                                 std::span<const Sample> test_set) {
  return mean_loss(model, w, test_set) - mean_loss(model, w, train_set);
}

// Lockstep coupled run on a neighboring pair. Shared seed + SharedIndex
// sampling give identical sample indices on both sides, so the trajectories
// differ only through the one replaced example.
inline CoupledTrace coupled_run(const TrainConfig& cfg, const DirectedGraph& graph,
                                const LossModel& model, const NeighborPair& pair,
                                bool output_averaged = false) {
  if (cfg.sampling != SamplingMode::SharedIndex)
    throw std::invalid_argument("coupled_run requires SharedIndex sampling");
  Engine run(cfg, graph, model, pair.base);
  Engine run_prime(cfg, graph, model, pair.perturbed);

  CoupledTrace trace;
  trace.delta.reserve(cfg.T);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(model.dim());
  Eigen::VectorXd avg_prime = avg;
  double gamma_acc = 0.0;
  for (long t = 0; t < cfg.T; ++t) {
    const double gamma = cfg.schedule.gamma(t);
    avg += gamma * run.mean_w();
    avg_prime += gamma * run_prime.mean_w();
    gamma_acc += gamma;
    run.step(t);
    run_prime.step(t);
    trace.delta.push_back((run.mean_w() - run_prime.mean_w()).norm());
  }
  trace.delta_final = trace.delta.empty() ? 0.0 : trace.delta.back();
  if (gamma_acc > 0.0) {
    avg /= gamma_acc;
    avg_prime /= gamma_acc;
    trace.avg_divergence = (avg - avg_prime).norm();
  }
  trace.w_out = output_averaged && gamma_acc > 0.0 ? avg : run.mean_w();
  trace.w_out_prime =
      output_averaged && gamma_acc > 0.0 ? avg_prime : run_prime.mean_w();
  trace.max_grad_norm = std::max(run.max_grad_norm(), run_prime.max_grad_norm());

  std::vector<Sample> train, train_prime;
  for (const auto& shard : pair.base.shards)
    train.insert(train.end(), shard.begin(), shard.end());
  for (const auto& shard : pair.perturbed.shards)
    train_prime.insert(train_prime.end(), shard.begin(), shard.end());
  if (!pair.base.test.empty()) {
    trace.gen_gap_run = generalization_gap(trace.w_out, model, train, pair.base.test);
    trace.gen_gap_run_prime =
        generalization_gap(trace.w_out_prime, model, train_prime, pair.perturbed.test);
  }
  return trace;
}

// Plug-in uniform stability estimate: max over probe samples of the mean
// absolute loss difference between the paired outputs.
inline double stability_estimate(std::span<const CoupledTrace> traces,
                                 const LossModel& model,
                                 std::span<const Sample> probe_set) {
  if (traces.empty()) throw std::invalid_argument("stability_estimate: no traces");
  if (probe_set.empty()) throw std::invalid_argument("stability_estimate: empty probe set");
  double worst = 0.0;
  for (const auto& z : probe_set) {
    double acc = 0.0;
    for (const auto& tr : traces)
      acc += std::abs(loss(model, tr.w_out, z) - loss(model, tr.w_out_prime, z));
    worst = std::max(worst, acc / static_cast<double>(traces.size()));
  }
  return worst;
}

inline std::string replicate_csv(std::span<const std::pair<std::uint64_t, CoupledTrace>>
                                     replicates) {
  std::ostringstream os;
  os << "seed,t,delta,gen_gap_run,gen_gap_run_prime\n";
  for (const auto& [seed, tr] : replicates)
    for (size_t k = 0; k < tr.delta.size(); ++k)
      os << seed << ',' << (k + 1) << ',' << format_double(tr.delta[k]) << ','
         << format_double(tr.gen_gap_run) << ',' << format_double(tr.gen_gap_run_prime)
         << '\n';
  return os.str();
}

inline std::string aggregate_csv(std::span<const CoupledTrace> traces) {
  std::ostringstream os;
  os << "t,delta_mean,delta_stderr\n";
  if (traces.empty()) return os.str();
  const size_t T = traces.front().delta.size();
  for (size_t k = 0; k < T; ++k) {
    std::vector<double> vals;
    vals.reserve(traces.size());
    for (const auto& tr : traces) vals.push_back(tr.delta[k]);
    os << (k + 1) << ',' << format_double(mean_of(vals)) << ','
       << format_double(stderr_of(vals)) << '\n';
  }
  return os.str();
}

}  // namespace sgp
