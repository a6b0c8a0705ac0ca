#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/data_io.hpp"
#include "sgp/mixing.hpp"
#include "sgp/objectives.hpp"
#include "sgp/rng.hpp"
#include "sgp/topology.hpp"
#include "sgp/util.hpp"

namespace sgp {

enum class Algorithm { SGP, DSGD };
enum class SamplingMode { SharedIndex, PerNode };

struct StepSchedule {
  enum class Kind { Constant, Diminishing };
  Kind kind = Kind::Constant;
  double value = 0.0;  // gamma for Constant, v for Diminishing

  double gamma(long t) const {
    if (kind == Kind::Constant) return value;
    return value / static_cast<double>(t + 1);
  }
  // gamma = 0 is allowed (degenerate "no updates" runs are used as oracles).
  static StepSchedule constant(double gamma) {
    if (!(gamma >= 0)) throw std::invalid_argument("schedule: gamma must be >= 0");
    return {Kind::Constant, gamma};
  }
  static StepSchedule diminishing(double v) {
    if (!(v >= 0)) throw std::invalid_argument("schedule: v must be >= 0");
    return {Kind::Diminishing, v};
  }
};

struct InitSpec {
  double gaussian_scale = 0.0;  // 0 => all-zeros init (then C_w0 = 0)
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::SGP;
  long T = 0;
  StepSchedule schedule = StepSchedule::constant(0.01);
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::PerNode;
  InitSpec init;
  double projection_radius = 0.0;  // 0 => no projection (paper's Alg. 1)
  int workers = 1;
  long record_every = 1;
  bool record_losses = true;
};

// Column-per-node state: w (Push-Sum numerators), u (weights), z = w/u.
struct SwarmState {
  Eigen::MatrixXd w;  // d x m
  Eigen::VectorXd u;  // m
  Eigen::MatrixXd z;  // d x m
};

// (max_i, mean_i) of ||z_i - w_bar|| with w_bar = (1/m) sum_i w_i.
inline std::pair<double, double> consensus_error(const SwarmState& st) {
  const int m = static_cast<int>(st.w.cols());
  Eigen::VectorXd wbar = Eigen::VectorXd::Zero(st.w.rows());
  for (int i = 0; i < m; ++i) wbar += st.w.col(i);  // fixed ascending order
  wbar /= static_cast<double>(m);
  double mx = 0.0, acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double e = (st.z.col(i) - wbar).norm();
    mx = std::max(mx, e);
    acc += e;
  }
  return {mx, acc / static_cast<double>(m)};
}

// Residual of Proposition 1's exact consensus-average recursion.
inline double verify_average_dynamics(const Eigen::VectorXd& wbar_before,
                                      const Eigen::VectorXd& wbar_after,
                                      const Eigen::VectorXd& gbar, double gamma) {
  return (wbar_after - (wbar_before - gamma * gbar)).norm();
}

struct StepRecord {
  long t = 0;
  double gamma = 0.0;
  double train_loss = std::numeric_limits<double>::quiet_NaN();
  double test_loss = std::numeric_limits<double>::quiet_NaN();
  double cons_max = 0.0;
  double cons_mean = 0.0;
  double u_sum = 0.0;
};

struct TrajectoryRecord {
  std::vector<StepRecord> steps;
  Eigen::VectorXd w_bar_final;
  Eigen::VectorXd w_avg;
  bool w_avg_defined = false;
  double c_w0 = 0.0;             // (1/m) sum_i ||w_i^{(0)}||
  double max_grad_norm = 0.0;    // empirical G over the trajectory
  double max_prop1_residual = 0.0;
};

// One simulated network run. Stepping is manual so callers (stability
// couplings, acceptance probes) can instrument between iterations.
class Engine {
 public:
  Engine(const TrainConfig& cfg, const DirectedGraph& graph, const LossModel& model,
         const ShardedDataset& data)
      : cfg_(cfg), model_(model), data_(data), m_(graph.m), d_(model.dim()) {
    if (data.m() != graph.m)
      throw std::invalid_argument("engine: dataset shard count != graph size");
    p_ = build_mixing(graph);
    pt_ = p_.transpose();
    st_.w.resize(d_, m_);
    for (int i = 0; i < m_; ++i) {
      if (cfg_.init.gaussian_scale > 0.0) {
        Rng rng(cfg_.seed, stream_key(0x1217, static_cast<std::uint64_t>(i), 0));
        for (int k = 0; k < d_; ++k)
          st_.w(k, i) = cfg_.init.gaussian_scale * rng.next_gaussian();
      } else {
        st_.w.col(i).setZero();
      }
    }
    st_.u = Eigen::VectorXd::Ones(m_);
    st_.z = st_.w;
    for (int i = 0; i < m_; ++i) c_w0_ += st_.w.col(i).norm();
    c_w0_ /= static_cast<double>(m_);
  }

  // Local sample index for node i at step t; SharedIndex broadcasts one
  // global draw, PerNode draws i.i.d. per node. Pure in (seed, node, t).
  int sample_index(int node, long t) const {
    const int n = data_.n();
    if (cfg_.sampling == SamplingMode::SharedIndex) {
      Rng rng(cfg_.seed, stream_key(0xa11, 0, static_cast<std::uint64_t>(t)));
      return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    }
    Rng rng(cfg_.seed, stream_key(0xbeef, static_cast<std::uint64_t>(node) + 1,
                                  static_cast<std::uint64_t>(t)));
    return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
  }

  // One iteration: w <- P (w - gamma g), u <- P u (SGP only), z = w / u.
  void step(long t) {
    const double gamma = cfg_.schedule.gamma(t);
    Eigen::MatrixXd grads(d_, m_);
    parallel_for(m_, cfg_.workers, [&](int i) {
      const Sample& s = data_.shards[i][sample_index(i, t)];
      const Eigen::VectorXd& at =
          cfg_.algorithm == Algorithm::SGP ? st_.z.col(i) : st_.w.col(i);
      grads.col(i) = gradient(model_, at, s);
    });
    last_gbar_ = Eigen::VectorXd::Zero(d_);
    for (int i = 0; i < m_; ++i) {
      last_gbar_ += grads.col(i);  // fixed ascending reduction
      max_grad_norm_ = std::max(max_grad_norm_, grads.col(i).norm());
    }
    last_gbar_ /= static_cast<double>(m_);

    st_.w = (st_.w - gamma * grads) * pt_;
    if (cfg_.algorithm == Algorithm::SGP) {
      st_.u = p_ * st_.u;
      for (int i = 0; i < m_; ++i) {
        if (!(st_.u(i) > 0.0)) {
          std::ostringstream os;
          os << "push-sum weight u[" << i << "] = " << st_.u(i)
             << " <= 0 at t = " << t;
          throw ContractViolation(os.str());
        }
        st_.z.col(i) = st_.w.col(i) / st_.u(i);
      }
    } else {
      st_.z = st_.w;  // D-SGD: no de-biasing, u frozen at 1
    }
    if (cfg_.projection_radius > 0.0) {
      for (int i = 0; i < m_; ++i) {
        const double norm = st_.z.col(i).norm();
        if (norm > cfg_.projection_radius) {
          const double scale = cfg_.projection_radius / norm;
          st_.w.col(i) *= scale;
          st_.z.col(i) *= scale;
        }
      }
    }
  }

  Eigen::VectorXd mean_w() const {
    Eigen::VectorXd wbar = Eigen::VectorXd::Zero(d_);
    for (int i = 0; i < m_; ++i) wbar += st_.w.col(i);
    return wbar / static_cast<double>(m_);
  }

  const SwarmState& state() const { return st_; }
  const Eigen::MatrixXd& mixing() const { return p_; }
  const Eigen::VectorXd& last_gbar() const { return last_gbar_; }
  double c_w0() const { return c_w0_; }
  double max_grad_norm() const { return max_grad_norm_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  TrainConfig cfg_;
  LossModel model_;
  const ShardedDataset& data_;
  int m_, d_;
  Eigen::MatrixXd p_, pt_;
  SwarmState st_;
  Eigen::VectorXd last_gbar_;
  double c_w0_ = 0.0;
  double max_grad_norm_ = 0.0;
};

// Packaged training loop recording the spec'd per-step metrics and the
// step-size-weighted averaged iterate w_avg = sum gamma_t wbar^(t) / sum gamma_t.
inline TrajectoryRecord run_training(const TrainConfig& cfg, const DirectedGraph& graph,
                                     const LossModel& model, const ShardedDataset& data) {
  if (cfg.T < 0) throw std::invalid_argument("run_training: T must be >= 0");
  Engine eng(cfg, graph, model, data);
  TrajectoryRecord rec;
  rec.c_w0 = eng.c_w0();

  std::vector<Sample> train_all;
  if (cfg.record_losses) {
    for (const auto& shard : data.shards)
      train_all.insert(train_all.end(), shard.begin(), shard.end());
  }

  Eigen::VectorXd avg_acc = Eigen::VectorXd::Zero(model.dim());
  double gamma_acc = 0.0;
  for (long t = 0; t < cfg.T; ++t) {
    const double gamma = cfg.schedule.gamma(t);
    avg_acc += gamma * eng.mean_w();
    gamma_acc += gamma;

    const Eigen::VectorXd wbar_before = eng.mean_w();
    eng.step(t);
    const Eigen::VectorXd wbar = eng.mean_w();
    rec.max_prop1_residual =
        std::max(rec.max_prop1_residual,
                 verify_average_dynamics(wbar_before, wbar, eng.last_gbar(), gamma));

    const long step_no = t + 1;
    if (step_no % cfg.record_every == 0 || step_no == cfg.T) {
      StepRecord row;
      row.t = step_no;
      row.gamma = gamma;
      if (cfg.record_losses) {
        row.train_loss = mean_loss(model, wbar, train_all);
        if (!data.test.empty()) row.test_loss = mean_loss(model, wbar, data.test);
      }
      const auto [mx, mean] = consensus_error(eng.state());
      row.cons_max = mx;
      row.cons_mean = mean;
      row.u_sum = eng.state().u.sum();
      rec.steps.push_back(row);
    }
  }
  rec.w_bar_final = eng.mean_w();
  rec.max_grad_norm = eng.max_grad_norm();
  if (gamma_acc > 0.0) {
    rec.w_avg = avg_acc / gamma_acc;
    rec.w_avg_defined = true;
  }
  return rec;
}

inline std::string trajectory_csv(const TrajectoryRecord& rec) {
  std::ostringstream os;
  os << "t,gamma,train_loss,test_loss,cons_max,cons_mean,u_sum\n";
  for (const auto& r : rec.steps)
    os << r.t << ',' << format_double(r.gamma) << ',' << format_double(r.train_loss)
       << ',' << format_double(r.test_loss) << ',' << format_double(r.cons_max) << ','
       << format_double(r.cons_mean) << ',' << format_double(r.u_sum) << '\n';
  return os.str();
}

}  // namespace sgp
