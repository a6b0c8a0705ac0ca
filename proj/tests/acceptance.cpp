// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Optional argv[1] points at a LIBSVM training file (a9a); a
// synthetic surrogate with the same shape is used when it is absent.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sgp/bounds.hpp"
#include "sgp/cli.hpp"
#include "sgp/data_io.hpp"
#include "sgp/engine.hpp"
#include "sgp/mixing.hpp"
#include "sgp/stability.hpp"
#include "sgp/topology.hpp"
#include "sgp/util.hpp"

using namespace sgp;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void report(int idx, const std::string& name, bool ok) {
  std::cout << "criterion " << idx << " [" << name << "]: " << (ok ? "PASS" : "FAIL")
            << std::endl;
  if (!ok) ++g_failures;
  for (const auto& n : g_notes) std::cout << "    " << n << std::endl;
  g_notes.clear();
}

void note(const std::string& s) { g_notes.push_back(s); }

const TopologyKind kAllKinds[] = {
    TopologyKind::FullyConnected, TopologyKind::DiExp,  TopologyKind::Bipartite,
    TopologyKind::BTree,          TopologyKind::DiRing, TopologyKind::SubRing,
    TopologyKind::Star,
};

bool valid_m(TopologyKind k, int m) {
  return k != TopologyKind::Bipartite || m % 2 == 0;
}

ShardedDataset blank_dataset(int m, int n, int d) {
  ShardedDataset ds;
  ds.d = d;
  ds.shards.assign(m, std::vector<Sample>(n));
  return ds;
}

LossModel zero_model(int d) {
  return LossModel{PLQuadratic{Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d)}};
}

// ---------------------------------------------------------------------------
// 1. Column stochasticity + weight conservation over 1e4 SGP steps.
bool criterion1() {
  bool ok = true;
  for (auto k : kAllKinds) {
    for (int m = 3; m <= 64; ++m) {
      if (!valid_m(k, m)) continue;
      const auto p = build_mixing(build_topology(k, m));
      for (int j = 0; j < m; ++j)
        if (std::abs(p.col(j).sum() - 1.0) > 1e-12) {
          note(std::string("column sum off: ") + to_string(k) + " m=" +
               std::to_string(m));
          ok = false;
        }
      // u dynamics are exactly u <- P u regardless of the model
      Eigen::VectorXd u = Eigen::VectorXd::Ones(m);
      double worst = 0.0;
      for (int t = 0; t < 10000; ++t) {
        u = p * u;
        worst = std::max(worst, std::abs(u.sum() - m) / m);
      }
      if (worst > 1e-9) {
        note(std::string("u drift ") + to_string(k) + " m=" + std::to_string(m) +
             ": " + format_double(worst));
        ok = false;
      }
    }
    // full-engine spot checks with live gradients
    for (int m : {3, 16, 64}) {
      if (!valid_m(k, m)) continue;
      auto ds = blank_dataset(m, 2, 2);
      LossModel model{
          PLQuadratic{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2)}};
      TrainConfig cfg;
      cfg.T = 10000;
      cfg.schedule = StepSchedule::constant(0.05);
      cfg.init.gaussian_scale = 1.0;
      cfg.seed = 7;
      Engine eng(cfg, build_topology(k, m), model, ds);
      double worst = 0.0;
      for (long t = 0; t < cfg.T; ++t) {
        eng.step(t);
        worst = std::max(worst, std::abs(eng.state().u.sum() - m) / m);
      }
      if (worst > 1e-9) {
        note(std::string("engine u drift ") + to_string(k) + " m=" +
             std::to_string(m) + ": " + format_double(worst));
        ok = false;
      }
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Exactness of the consensus-average recursion on every step.
bool criterion2() {
  bool ok = true;
  for (auto k : kAllKinds) {
    const int m = 8, d = 10;
    const auto samples = synth_logistic(d, m * 12 + 10, 2.0, 31);
    const auto ds = shard(samples, m, 12, 31, d);
    LossModel model{LogisticL2{d, 1e-4}};
    TrainConfig cfg;
    cfg.T = 2000;
    cfg.schedule = StepSchedule::constant(0.02);
    cfg.init.gaussian_scale = 0.5;
    cfg.seed = 5;
    Engine eng(cfg, build_topology(k, m), model, ds);
    for (long t = 0; t < cfg.T; ++t) {
      const Eigen::VectorXd before = eng.mean_w();
      eng.step(t);
      const double resid = verify_average_dynamics(before, eng.mean_w(),
                                                   eng.last_gbar(), 0.02);
      if (resid >= 1e-10 * (1.0 + before.norm())) {
        note(std::string("residual ") + to_string(k) + " t=" + std::to_string(t) +
             ": " + format_double(resid));
        ok = false;
        break;
      }
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Pure-mixing consensus decay slope matches ln(lambda) within 5%.
bool criterion3() {
  bool ok = true;
  struct Cell {
    TopologyKind kind;
    int block, t_lo, t_hi;
  };
  for (const Cell& cell : {Cell{TopologyKind::DiRing, 32, 16, 336},
                           Cell{TopologyKind::Star, 4, 2, 34}}) {
    const int m = 16, d = 4;
    const auto graph = build_topology(cell.kind, m);
    const double lam = spectral_profile(graph).lambda;
    auto ds = blank_dataset(m, 2, d);
    TrainConfig cfg;
    cfg.T = cell.t_hi + 1;
    cfg.schedule = StepSchedule::constant(0.1);
    cfg.init.gaussian_scale = 1.0;
    cfg.seed = 12;
    Engine eng(cfg, graph, zero_model(d), ds);
    std::vector<double> err(cfg.T + 1, 0.0);
    for (long t = 0; t < cfg.T; ++t) {
      eng.step(t);
      err[t + 1] = consensus_error(eng.state()).first;
    }
    // block maxima absorb the rotational oscillation of the error
    std::vector<double> xs, ys;
    for (int lo = cell.t_lo; lo + cell.block <= cell.t_hi + 1; lo += cell.block) {
      double mx = 0.0;
      for (int t = lo; t < lo + cell.block; ++t) mx = std::max(mx, err[t]);
      xs.push_back(lo + 0.5 * (cell.block - 1));
      ys.push_back(std::log(mx));
    }
    const auto fit = fit_linear(xs, ys);
    const double want = std::log(lam);
    note(std::string(to_string(cell.kind)) + ": slope " + format_double(fit.slope) +
         " vs ln(lambda) " + format_double(want));
    if (!(std::abs(fit.slope - want) <= 0.05 * std::abs(want))) ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Spectral catalog: scaling laws and imbalance facts.
bool criterion4() {
  bool ok = true;
  std::vector<double> xs, ys;
  for (int m : {8, 16, 32, 64}) {
    const auto pr = spectral_profile(build_topology(TopologyKind::DiRing, m));
    xs.push_back(std::log(static_cast<double>(m)));
    ys.push_back(std::log(1.0 - pr.lambda));
  }
  const auto fit = fit_linear(xs, ys);
  note("DiRing log(1-lambda) slope: " + format_double(fit.slope));
  if (!(fit.slope >= -2.3 && fit.slope <= -1.7)) ok = false;

  for (int m : {8, 16, 32, 64}) {
    if (spectral_profile(build_topology(TopologyKind::FullyConnected, m)).lambda !=
        0.0) {
      note("FullyConnected lambda != 0 at m=" + std::to_string(m));
      ok = false;
    }
    const auto star = spectral_profile(build_topology(TopologyKind::Star, m));
    if (std::abs(star.lambda - 0.5) > 1e-10) {
      note("Star lambda off at m=" + std::to_string(m));
      ok = false;
    }
    // doubly stochastic members of the catalog: delta = 1/m
    for (auto k : {TopologyKind::FullyConnected, TopologyKind::DiExp,
                   TopologyKind::Bipartite, TopologyKind::DiRing}) {
      const auto pr = spectral_profile(build_topology(k, m));
      if (std::abs(pr.delta - 1.0 / m) > 1e-10 || !pr.doubly_stochastic) {
        note(std::string("delta != 1/m for ") + to_string(k) + " m=" +
             std::to_string(m));
        ok = false;
      }
    }
    const auto sub = spectral_profile(build_topology(TopologyKind::SubRing, m));
    if (!(sub.delta < 1.0 / m - 1e-12) || sub.doubly_stochastic) {
      note("SubRing delta not strictly below 1/m at m=" + std::to_string(m));
      ok = false;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Bound consistency sweeps and optimal-stop oracles.
BoundParams draw_params(Rng& rng) {
  BoundParams p;
  p.G = 0.1 + 4.9 * rng.next_double();
  p.L = 0.1 + 3.9 * rng.next_double();
  p.C = 0.5 + 4.5 * rng.next_double();
  p.C_w0 = 2.0 * rng.next_double();
  p.r = 0.1 + 4.9 * rng.next_double();
  p.delta = 0.01 + 0.99 * rng.next_double();
  if (p.delta > 1.0) p.delta = 1.0;
  p.lambda = 0.99 * rng.next_double();
  p.m = 1 + static_cast<long>(rng.next_below(32));
  p.n = 1 + static_cast<long>(rng.next_below(10000));
  p.init_dist = 3.0 * rng.next_double();
  return p;
}

double brute_min(const BoundParams& p, bool pl, long t_max) {
  double best = std::numeric_limits<double>::infinity(), prev = best;
  long rising = 0;
  for (long t = 1; t <= t_max; ++t) {
    const double v = pl ? excess_pl(p, t) : excess_convex(p, t);
    if (v < best) best = v;
    rising = v >= prev ? rising + 1 : 0;
    prev = v;
    if (rising > 64 && v > 4.0 * best) break;
  }
  return best;
}

bool criterion5() {
  bool ok = true;
  Rng rng(500, 0);
  int bad = 0;

  // theorem <= corollary, convex pair + optimization pair, 1000 draws each
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = draw_params(rng);
    long T;
    if (trial % 2 == 0) {
      p.schedule = StepSchedule::constant(0.001 + 0.05 * rng.next_double());
      T = 1 + static_cast<long>(rng.next_below(2000));
    } else {
      p.schedule = StepSchedule::diminishing(0.01 + 0.5 * rng.next_double());
      T = 2 + static_cast<long>(rng.next_below(2000));
    }
    if (stability_bound_convex(p, T) > stability_bound_convex_closed(p, T) * (1 + 1e-12))
      ++bad;
    if (opt_bound_convex(p, T) > opt_bound_convex_closed(p, T) * (1 + 1e-12)) ++bad;
    p.alpha = p.L * (0.05 + 0.9 * rng.next_double());
    if (trial % 2 == 1 && p.L < 0.5) p.L = 0.5 + p.L;  // corollary 5 regime: 2L >= 1
    if (opt_bound_pl(p, T) > opt_bound_pl_closed(p, T) * (1 + 1e-12)) ++bad;
  }
  // non-convex pair in its regimes
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = draw_params(rng);
    p.m = 2 + static_cast<long>(rng.next_below(31));
    p.schedule = StepSchedule::constant((1.0 + rng.next_double()) / p.L);
    const long T = 1 + static_cast<long>(rng.next_below(60));
    if (stability_bound_nonconvex(p, T) >
        stability_bound_nonconvex_closed(p, T) * (1 + 1e-10))
      ++bad;
  }
  int done = 0;
  for (int trial = 0; trial < 8000 && done < 1000; ++trial) {
    auto p = draw_params(rng);
    const double v = 0.01 + 0.5 * rng.next_double();
    p.schedule = StepSchedule::diminishing(v);
    const long T = 10 + static_cast<long>(rng.next_below(1500));
    const double a = 1.0 / (2.0 + v * p.L);
    const double pexp = (1.0 + v * p.L) / (2.0 + v * p.L);
    if (std::pow(v, a) * std::pow(static_cast<double>(T), pexp) >
        static_cast<double>(std::min(T, p.n)))
      continue;
    ++done;
    if (stability_bound_nonconvex(p, T) >
        stability_bound_nonconvex_closed(p, T) * (1 + 1e-10))
      ++bad;
  }
  if (done < 1000) {
    note("diminishing regime draws exhausted at " + std::to_string(done));
    ok = false;
  }
  if (bad > 0) {
    note("inequality violations: " + std::to_string(bad));
    ok = false;
  }

  // constant-gamma closed forms vs geometric-series direct sums at 1e-9
  int mismatches = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto p = draw_params(rng);
    p.alpha = p.L * (0.05 + 0.9 * rng.next_double());
    const double g = 0.001 + 0.05 * rng.next_double();
    p.schedule = StepSchedule::constant(g);
    const long T = 1 + static_cast<long>(rng.next_below(5000));
    const double lam_T = std::pow(p.lambda, static_cast<double>(T));
    const double geo = (1.0 - lam_T) / (1.0 - p.lambda);
    const double dl = p.delta * (1 - p.lambda);
    const double stab =
        2 * p.C * p.G * p.L * p.C_w0 * g * geo / p.delta +
        2 * p.C * p.G * p.G * p.L * g * g * T / dl + 2 * p.G * p.G * g * T / p.mn();
    const double w0 = p.init_dist_or0();
    const double opt =
        w0 * w0 / (2 * g * T) + 2 * p.r * p.C * p.L * p.C_w0 * geo / (p.delta * T) +
        (2 * p.r * p.C * p.L * p.G / dl + p.G * p.G / 2) * g;
    const double kap = p.kappa();
    const double plv = p.G * p.r / (*p.alpha * g * T) +
                       p.C * p.G * kap * p.C_w0 * geo / (2 * p.delta * T) +
                       (p.C * p.G * p.G * kap / (2 * dl) + p.G * p.G * kap / 4) * g;
    const auto close = [](double a, double b) {
      return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
    };
    if (!close(stability_bound_convex(p, T), stab)) ++mismatches;
    if (!close(opt_bound_convex(p, T), opt)) ++mismatches;
    if (!close(opt_bound_pl(p, T), plv)) ++mismatches;
  }
  if (mismatches > 0) {
    note("geometric-sum mismatches: " + std::to_string(mismatches));
    ok = false;
  }

  // optimal stopping vs integer brute force
  int accepted = 0, stop_bad = 0;
  for (int trial = 0; trial < 2000 && accepted < 25; ++trial) {
    auto p = draw_params(rng);
    p.schedule = StepSchedule::constant(0.0005 + 0.01 * rng.next_double());
    const auto abc = excess_convex_abc(p);
    if (abc.a <= 0) continue;
    const double t_cont = std::sqrt(abc.b / abc.a);
    if (t_cont < 2 || t_cont > 1e6) continue;
    ++accepted;
    const auto stop = optimal_stop_convex(p);
    const double brute = brute_min(p, false, 10000000L);
    if (!(stop.value <= brute * 1.01 && stop.value >= brute * (1 - 1e-12))) ++stop_bad;
  }
  if (accepted < 25) ok = false;
  accepted = 0;
  const double factor = 1.0 + std::exp(1.0);
  for (int trial = 0; trial < 4000 && accepted < 25; ++trial) {
    auto p = draw_params(rng);
    p.alpha = p.L * (0.1 + 0.8 * rng.next_double());
    p.n = 100 + static_cast<long>(rng.next_below(10000));
    p.schedule = StepSchedule::constant((0.05 + 0.95 * rng.next_double()) / p.L);
    const auto parts = excess_pl_parts(p);
    if (parts.c_opt <= parts.c_stab) continue;
    if (std::log(parts.c_opt / parts.c_stab) < 2.0) continue;
    ++accepted;
    const auto stop = optimal_stop_pl(p);
    const double brute = brute_min(p, true, 10000000L);
    if (!(stop.value <= factor * brute * (1 + 1e-9) &&
          brute <= stop.value * factor * (1 + 1e-9)))
      ++stop_bad;
  }
  if (accepted < 25) ok = false;
  if (stop_bad > 0) {
    note("optimal-stop violations: " + std::to_string(stop_bad));
    ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 6. Convex stability trends at desk scale.
struct Panel {
  std::vector<double> mean_final, se_final;
  std::vector<std::vector<double>> mean_traj;  // delta-bar over seeds, per cell
};

Panel run_panel(const std::vector<Sample>& data, TopologyKind kind, int m, int n,
                long T, const std::vector<StepSchedule>& schedules, int seeds,
                int workers) {
  Panel panel;
  const auto graph = build_topology(kind, m);
  LossModel model{LogisticL2{123, 1e-4}};
  const auto ds = shard(data, m, n, 606, 123);
  for (const auto& sched : schedules) {
    std::vector<double> finals(seeds);
    std::vector<std::vector<double>> deltas(seeds);
    parallel_for(seeds, workers, [&](int s) {
      TrainConfig cfg;
      cfg.T = T;
      cfg.schedule = sched;
      cfg.sampling = SamplingMode::SharedIndex;
      cfg.seed = hash_combine(909, static_cast<std::uint64_t>(s));
      const auto pair = make_neighbor(ds, cfg.seed);
      auto tr = coupled_run(cfg, graph, model, pair);
      finals[s] = tr.delta_final;
      deltas[s] = std::move(tr.delta);
    });
    panel.mean_final.push_back(mean_of(finals));
    panel.se_final.push_back(stderr_of(finals));
    std::vector<double> mean_traj(T, 0.0);
    for (long t = 0; t < T; ++t) {
      double acc = 0;
      for (int s = 0; s < seeds; ++s) acc += deltas[s][t];
      mean_traj[t] = acc / seeds;
    }
    panel.mean_traj.push_back(std::move(mean_traj));
  }
  return panel;
}

bool criterion6(const std::string& a9a_path, int workers) {
  bool ok = true;
  std::vector<Sample> data;
  if (!a9a_path.empty() && fs::exists(a9a_path)) {
    std::ifstream is(a9a_path);
    data = parse_libsvm(is, 123).samples;
    note("dataset: " + a9a_path + " (" + std::to_string(data.size()) + " samples)");
  } else {
    data = synth_logistic(123, 32561, 2.0, 123);
    note("dataset: synthetic surrogate (a9a not found)");
  }
  const long T = 2000;
  const int seeds = 20;

  // gamma panel, m = 32, n = 1000
  {
    std::vector<StepSchedule> gams;
    for (double g : {1e-5, 1e-4, 1e-3, 1e-2}) gams.push_back(StepSchedule::constant(g));
    const auto panel = run_panel(data, TopologyKind::DiExp, 32, 1000, T, gams, seeds,
                                 workers);
    std::ostringstream os;
    for (double v : panel.mean_final) os << format_double(v) << " ";
    note("gamma panel mean delta_T: " + os.str());
    for (size_t i = 0; i + 1 < panel.mean_final.size(); ++i)
      if (panel.mean_final[i] >
          panel.mean_final[i + 1] + panel.se_final[i] + panel.se_final[i + 1]) {
        note("gamma monotonicity violated at index " + std::to_string(i));
        ok = false;
      }
    // linear fit of the constant-gamma divergence trajectory (gamma = 1e-3)
    std::vector<double> ts, ys;
    for (long t = 0; t < T; ++t) {
      ts.push_back(static_cast<double>(t + 1));
      ys.push_back(panel.mean_traj[2][t]);
    }
    const auto lin = fit_linear(ts, ys);
    note("constant-gamma linear fit R2: " + format_double(lin.r2));
    if (!(lin.r2 > 0.9)) ok = false;
  }

  // diminishing schedule: log-in-t fit must beat linear-in-t. The divergence
  // is driven by rare replaced-index hits weighted gamma_t ~ 1/t, so the mean
  // trajectory needs more replicates than the endpoint panels to resolve its
  // shape in the early decades.
  {
    const auto panel = run_panel(data, TopologyKind::DiExp, 32, 1000, T,
                                 {StepSchedule::diminishing(0.01)}, 100, workers);
    std::vector<double> ts, lnts, ys;
    for (long t = 0; t < T; ++t) {
      ts.push_back(static_cast<double>(t + 1));
      lnts.push_back(std::log(static_cast<double>(t + 1)));
      ys.push_back(panel.mean_traj[0][t]);
    }
    const auto lin = fit_linear(ts, ys);
    const auto logf = fit_linear(lnts, ys);
    note("diminishing fits R2: log " + format_double(logf.r2) + " vs linear " +
         format_double(lin.r2));
    if (!(logf.r2 > lin.r2)) ok = false;
  }

  // m panel at fixed total budget m*n = 32000
  {
    std::vector<double> means, ses;
    for (int m : {4, 8, 16, 32}) {
      const auto panel = run_panel(data, TopologyKind::FullyConnected, m, 32000 / m, T,
                                   {StepSchedule::constant(1e-3)}, seeds, workers);
      means.push_back(panel.mean_final[0]);
      ses.push_back(panel.se_final[0]);
    }
    std::ostringstream os;
    for (double v : means) os << format_double(v) << " ";
    note("m panel mean delta_T: " + os.str());
    for (size_t i = 0; i + 1 < means.size(); ++i)
      if (means[i + 1] > means[i] + ses[i] + ses[i + 1]) {
        note("m monotonicity violated at index " + std::to_string(i));
        ok = false;
      }
  }

  // topology ordering at matched configs
  {
    std::vector<double> means, ses;
    for (auto k : {TopologyKind::FullyConnected, TopologyKind::DiExp,
                   TopologyKind::DiRing}) {
      const auto panel =
          run_panel(data, k, 32, 1000, T, {StepSchedule::constant(1e-3)}, seeds,
                    workers);
      means.push_back(panel.mean_final[0]);
      ses.push_back(panel.se_final[0]);
    }
    std::ostringstream os;
    for (double v : means) os << format_double(v) << " ";
    note("topology panel mean delta_T (FC, DiExp, DiRing): " + os.str());
    for (size_t i = 0; i + 1 < means.size(); ++i)
      if (means[i] > means[i + 1] + ses[i] + ses[i + 1]) {
        note("topology ordering violated at index " + std::to_string(i));
        ok = false;
      }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 7. Consistency envelope with a calibrated constant.
bool criterion7() {
  bool ok = true;
  for (auto kind : {TopologyKind::DiRing, TopologyKind::Star}) {
    const int m = 16, n = 30, d = 20;
    const long T = 300;
    const double gamma = 0.01;
    const auto graph = build_topology(kind, m);
    const auto prof = spectral_profile(graph);
    const auto samples = synth_logistic(d, m * n + 40, 2.0, 71);
    const auto ds = shard(samples, m, n, 71, d);
    const double G = 1.0 + 1e-4 * 10.0;  // unit-sphere features, mu r with r = 10

    const auto run_errs = [&](std::uint64_t seed, double* c_w0) {
      TrainConfig cfg;
      cfg.T = T;
      cfg.schedule = StepSchedule::constant(gamma);
      cfg.init.gaussian_scale = 1.0;
      cfg.seed = seed;
      Engine eng(cfg, graph, LossModel{LogisticL2{d, 1e-4}}, ds);
      *c_w0 = eng.c_w0();
      std::vector<double> errs(T + 1, 0.0);
      for (long t = 0; t < T; ++t) {
        eng.step(t);
        errs[t + 1] = consensus_error(eng.state()).first;
      }
      return errs;
    };
    const auto envelope_core = [&](double c_w0, long t) {
      // lambda^t C_w0 + G sum_{s<t} lambda^{t-s} gamma
      double s = 0.0;
      for (long k = 0; k < t; ++k) s = prof.lambda * (s + gamma);
      return std::pow(prof.lambda, static_cast<double>(t)) * c_w0 + G * s;
    };

    double c_w0_cal = 0.0;
    const auto cal = run_errs(1000, &c_w0_cal);
    double c_hat = 0.0;
    for (long t = 1; t <= T; ++t)
      c_hat = std::max(c_hat, cal[t] * prof.delta / envelope_core(c_w0_cal, t));
    c_hat *= 1.2;
    note(std::string(to_string(kind)) + ": calibrated C = " + format_double(c_hat));

    for (std::uint64_t seed = 1001; seed <= 1005; ++seed) {
      double c_w0 = 0.0;
      const auto errs = run_errs(seed, &c_w0);
      for (long t = 1; t <= T; ++t)
        if (errs[t] > (c_hat / prof.delta) * envelope_core(c_w0, t)) {
          note(std::string("envelope breached: ") + to_string(kind) + " seed=" +
               std::to_string(seed) + " t=" + std::to_string(t));
          ok = false;
          break;
        }
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 8. PL optimization error under the corollary bound, plateau proportional
//    to gamma.
bool criterion8() {
  bool ok = true;
  for (auto [alpha, seed] : {std::pair{1.0, 42ULL}, std::pair{0.25, 43ULL}}) {
    const int d = 10, m = 8, n = 40;
    const long T = 3000;
    const auto pl = synth_pl(d, alpha, 4.0, seed);
    LossModel model{pl};
    const auto noise = synth_pl_noise(d, m * n + 40, 0.3, seed);
    const auto ds = shard(noise, m, n, seed, d);
    const auto graph = build_topology(TopologyKind::DiRing, m);
    const auto prof = spectral_profile(graph);
    const Eigen::VectorXd wstar = pl.a.ldlt().solve(pl.b);
    std::vector<Sample> all;
    for (const auto& sh : ds.shards) all.insert(all.end(), sh.begin(), sh.end());
    const double fstar = mean_loss(model, wstar, all);

    std::vector<double> plateaus;
    for (double gamma : {0.02, 0.01}) {
      TrainConfig cfg;
      cfg.T = T;
      cfg.schedule = StepSchedule::constant(gamma);
      cfg.seed = seed + 17;
      Engine eng(cfg, graph, model, ds);
      Eigen::VectorXd avg_acc = Eigen::VectorXd::Zero(d);
      double gamma_acc = 0.0, r_emp = 0.0;
      std::vector<double> gap_track;
      KahanSum tail;
      long tail_count = 0;
      std::vector<std::pair<long, double>> avg_gaps;  // (T_rec, F(w_avg) - F*)
      for (long t = 0; t < T; ++t) {
        avg_acc += gamma * eng.mean_w();
        gamma_acc += gamma;
        eng.step(t);
        for (int i = 0; i < m; ++i)
          r_emp = std::max(r_emp, eng.state().z.col(i).norm());
        const double gap = mean_loss(model, eng.mean_w(), all) - fstar;
        if (t >= 3 * T / 4) {
          tail.add(gap);
          ++tail_count;
        }
        if ((t + 1) % 100 == 0)
          avg_gaps.emplace_back(t + 1,
                                mean_loss(model, avg_acc / gamma_acc, all) - fstar);
      }
      plateaus.push_back(tail.value() / tail_count);

      // corollary bound with empirically grounded constants
      BoundParams p;
      const double r = 1.2 * std::max(r_emp, wstar.norm());
      const auto info = smoothness_info(model, all, r);
      p.G = info.g;
      p.L = info.l;
      p.alpha = alpha;
      p.r = r;
      p.C = std::max(prof.c_h, 1.0);
      p.C_w0 = 0.0;
      p.delta = prof.delta;
      p.lambda = prof.lambda;
      p.m = m;
      p.n = n;
      p.schedule = StepSchedule::constant(gamma);
      for (const auto& [tr, gap] : avg_gaps)
        if (gap > opt_bound_pl_closed(p, tr)) {
          note("bound breached: kappa=" + format_double(4.0 / alpha) + " gamma=" +
               format_double(gamma) + " T=" + std::to_string(tr) + " gap=" +
               format_double(gap));
          ok = false;
          break;
        }
    }
    note("kappa=" + format_double(4.0 / alpha) + " plateaus: " +
         format_double(plateaus[0]) + " vs " + format_double(plateaus[1]));
    if (!(plateaus[0] / plateaus[1] >= 2.0 / 1.5)) {
      note("plateau not proportional to gamma");
      ok = false;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 9. D-SGD bias on an unbalanced graph vs SGP's de-biased consensus.
bool criterion9() {
  bool ok = true;
  const int m = 8, d = 3;
  const long T = 400;
  const auto graph = build_topology(TopologyKind::SubRing, m);
  auto ds = blank_dataset(m, 2, d);
  const Eigen::VectorXd pi = stationary_distribution(build_mixing(graph));

  TrainConfig cfg;
  cfg.T = T;
  cfg.schedule = StepSchedule::constant(0.1);
  cfg.init.gaussian_scale = 1.0;
  cfg.seed = 27;

  TrainConfig dcfg = cfg;
  dcfg.algorithm = Algorithm::DSGD;
  Engine dsgd(dcfg, graph, zero_model(d), ds);
  Engine sgp(cfg, graph, zero_model(d), ds);
  const Eigen::VectorXd total = dsgd.state().w.rowwise().sum();
  const Eigen::VectorXd uniform = total / m;
  for (long t = 0; t < T; ++t) {
    dsgd.step(t);
    sgp.step(t);
  }
  for (int i = 0; i < m; ++i) {
    if ((dsgd.state().z.col(i) - pi(i) * total).lpNorm<Eigen::Infinity>() >= 1e-8) {
      note("D-SGD limit is not the pi-weighted average at node " + std::to_string(i));
      ok = false;
    }
    if ((sgp.state().z.col(i) - uniform).lpNorm<Eigen::Infinity>() >= 1e-8) {
      note("SGP limit is not the uniform average at node " + std::to_string(i));
      ok = false;
    }
  }
  // and the two limits genuinely differ
  if ((pi - Eigen::VectorXd::Constant(m, 1.0 / m)).lpNorm<Eigen::Infinity>() < 1e-3) {
    note("test graph unexpectedly balanced");
    ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 10. Byte-identical CLI output across reruns and worker counts.
bool criterion10() {
  bool ok = true;
  const fs::path dir =
      fs::temp_directory_path() / ("sgp_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "exp.cfg";
  {
    std::ofstream os(cfg_path);
    os << "topology.kind = DiExp\ntopology.m = 8\nmodel.d = 12\n"
          "data.count = 400\nrun.T = 50\nschedule.gamma = 0.01\n"
          "stability.replicates = 6\n";
  }
  const auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  std::ostringstream sink;
  const auto run_to = [&](const std::string& cmd, const std::string& sub,
                          const std::string& workers) {
    const fs::path out = dir / sub;
    const int rc = run_cli({cmd, "--config", cfg_path.string(), "--out", out.string(),
                            "--seed", "9", "--workers", workers},
                           sink, sink);
    if (rc != 0) {
      note(cmd + " exited with " + std::to_string(rc));
      return false;
    }
    return true;
  };
  ok &= run_to("train", "t1", "1") && run_to("train", "t8", "8") &&
        run_to("train", "t1b", "1");
  ok &= run_to("stability", "s1", "1") && run_to("stability", "s8", "8");
  if (ok) {
    if (slurp(dir / "t1/trajectory.csv") != slurp(dir / "t8/trajectory.csv") ||
        slurp(dir / "t1/trajectory.csv") != slurp(dir / "t1b/trajectory.csv")) {
      note("train output differs across reruns/workers");
      ok = false;
    }
    for (const char* f : {"replicates.csv", "aggregate.csv", "summary.csv"})
      if (slurp(dir / "s1" / f) != slurp(dir / "s8" / f)) {
        note(std::string("stability output differs: ") + f);
        ok = false;
      }
  }
  fs::remove_all(dir);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string a9a = argc > 1 ? argv[1] : "";
  const int workers = 8;
  report(1, "column stochasticity + weight conservation", criterion1());
  report(2, "consensus-average recursion exactness", criterion2());
  report(3, "pure-mixing decay rate", criterion3());
  report(4, "spectral catalog scaling", criterion4());
  report(5, "bound consistency + optimal stopping", criterion5());
  report(6, "convex stability trends", criterion6(a9a, workers));
  report(7, "consistency envelope", criterion7());
  report(8, "PL optimization bound + plateau", criterion8());
  report(9, "D-SGD bias exhibit", criterion9());
  report(10, "CLI determinism", criterion10());
  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) + " CRITERIA FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
