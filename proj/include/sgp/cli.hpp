#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sgp/bounds.hpp"
#include "sgp/data_io.hpp"
#include "sgp/engine.hpp"
#include "sgp/mixing.hpp"
#include "sgp/stability.hpp"
#include "sgp/topology.hpp"
#include "sgp/util.hpp"

namespace sgp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit codes shared by the binary and in-process callers.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitContract = 2;
inline constexpr int kExitIo = 3;

// Flat `section.key = value` configuration. '#' starts a comment; paths are
// resolved relative to the config file. Unknown keys are errors.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    Config cfg = from_text(buf.str());
    cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : ".";
    return cfg;
  }

  static Config from_text(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r") != std::string::npos)
          throw ConfigError("config line " + std::to_string(line_no) +
                            ": expected key = value");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }
  double get_double(const std::string& key, double dflt) const {
    const std::string s = get_string(key, "");
    if (s.empty()) return dflt;
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + s);
    }
  }
  long get_long(const std::string& key, long dflt) const {
    const std::string s = get_string(key, "");
    if (s.empty()) return dflt;
    try {
      return std::stol(s);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: " + s);
    }
  }
  std::vector<std::string> get_list(const std::string& key,
                                    const std::string& dflt) const {
    const std::string s = get_string(key, dflt);
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) out.push_back(tok);
    }
    return out;
  }
  bool has(const std::string& key) const {
    touched_.insert(key);
    return values_.count(key) > 0;
  }
  std::filesystem::path resolve(const std::string& rel) const {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : base_dir_ / p;
  }

  // Strictness: every present key must have been read by the command setup.
  void reject_unknown() const {
    for (const auto& [key, _] : values_)
      if (!touched_.count(key)) throw ConfigError("unknown config key: " + key);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> touched_;
  std::filesystem::path base_dir_ = ".";
};

namespace cli_detail {

struct CommonArgs {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int workers = 1;
  std::vector<std::string> extras;  // command-specific flags, e.g. --kinds
};

inline void write_output(const std::filesystem::path& dir, const std::string& name,
                         const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output dir: " + dir.string());
  try {
    write_file_atomic(dir / name, content);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

// Everything a run-style command needs, assembled from one config.
struct Experiment {
  TopologyKind kind = TopologyKind::DiRing;
  int m = 8;
  LossModel model;
  ShardedDataset data;
  TrainConfig train;
  long replicates = 20;
  bool output_averaged = false;
};

inline StepSchedule parse_schedule(const Config& cfg) {
  const std::string type = cfg.get_string("schedule.type", "constant");
  if (type == "constant") return StepSchedule::constant(cfg.get_double("schedule.gamma", 0.01));
  if (type == "diminishing") return StepSchedule::diminishing(cfg.get_double("schedule.v", 0.1));
  throw ConfigError("schedule.type must be constant or diminishing");
}

inline Experiment build_experiment(const Config& cfg, std::uint64_t seed, int workers,
                                   std::ostream& err) {
  Experiment ex;
  try {
    ex.kind = topology_kind_from_string(cfg.get_string("topology.kind", "DiRing"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ex.m = static_cast<int>(cfg.get_long("topology.m", 8));

  const std::string model_type = cfg.get_string("model.type", "logistic");
  const int d = static_cast<int>(cfg.get_long("model.d", 123));
  const std::uint64_t data_seed =
      static_cast<std::uint64_t>(cfg.get_long("data.seed", 7));

  std::vector<Sample> samples;
  std::vector<Sample> test;
  int data_d = d;
  if (model_type == "logistic") {
    ex.model.impl = LogisticL2{d, cfg.get_double("model.mu", 1e-4)};
    const std::string source = cfg.get_string("data.source", "synth");
    if (source == "libsvm") {
      const auto path = cfg.resolve(cfg.get_string("data.path", "data/a9a"));
      std::ifstream is(path);
      if (!is) throw IoError("cannot open dataset: " + path.string());
      auto parsed = parse_libsvm(is, d);
      samples = std::move(parsed.samples);
      for (const auto& w : parsed.warnings) err << "warning: " << w << "\n";
      const std::string tpath = cfg.get_string("data.test_path", "");
      if (!tpath.empty()) {
        std::ifstream ts(cfg.resolve(tpath));
        if (!ts) throw IoError("cannot open test set: " + tpath);
        test = parse_libsvm(ts, d).samples;
      }
    } else if (source == "synth") {
      samples = synth_logistic(d, static_cast<int>(cfg.get_long("data.count", 4096)),
                               cfg.get_double("data.margin", 2.0), data_seed);
    } else {
      throw ConfigError("data.source must be synth or libsvm");
    }
  } else if (model_type == "quadratic") {
    const double alpha = cfg.get_double("model.alpha", 1.0);
    const double L = cfg.get_double("model.L", 4.0);
    ex.model.impl = synth_pl(d, alpha, L, data_seed);
    const int count = static_cast<int>(cfg.get_long("data.count", 4096));
    samples = synth_pl_noise(d, count + count % 2, cfg.get_double("data.noise", 0.1),
                             data_seed);
  } else {
    throw ConfigError("model.type must be logistic or quadratic");
  }

  if (test.empty()) {
    // deterministic carve-out of the tail as the test split
    const double frac = cfg.get_double("data.test_fraction", 0.2);
    const auto keep = static_cast<size_t>(static_cast<double>(samples.size()) * (1.0 - frac));
    test.assign(samples.begin() + keep, samples.end());
    samples.resize(keep);
  }

  long n = cfg.get_long("data.n", 0);
  if (n <= 0) n = static_cast<long>(samples.size()) / ex.m;
  // keep a nonempty held-out pool for neighbor replacements
  while (n > 1 && n * ex.m >= static_cast<long>(samples.size())) --n;
  ex.data = shard(samples, ex.m, static_cast<int>(n), data_seed, data_d);
  ex.data.test = std::move(test);

  ex.train.T = cfg.get_long("run.T", 500);
  ex.train.seed = seed;
  ex.train.workers = workers;
  ex.train.schedule = parse_schedule(cfg);
  ex.train.record_every = cfg.get_long("run.record_every", 1);
  ex.train.init.gaussian_scale = cfg.get_double("run.init_scale", 0.0);
  ex.train.projection_radius = cfg.get_double("run.projection_radius", 0.0);
  const std::string algo = cfg.get_string("run.algorithm", "sgp");
  if (algo == "sgp")
    ex.train.algorithm = Algorithm::SGP;
  else if (algo == "dsgd")
    ex.train.algorithm = Algorithm::DSGD;
  else
    throw ConfigError("run.algorithm must be sgp or dsgd");
  const std::string sampling = cfg.get_string("run.sampling", "pernode");
  if (sampling == "pernode")
    ex.train.sampling = SamplingMode::PerNode;
  else if (sampling == "shared")
    ex.train.sampling = SamplingMode::SharedIndex;
  else
    throw ConfigError("run.sampling must be pernode or shared");

  ex.replicates = cfg.get_long("stability.replicates", 20);
  const std::string out_iter = cfg.get_string("stability.output", "last");
  if (out_iter == "averaged")
    ex.output_averaged = true;
  else if (out_iter != "last")
    throw ConfigError("stability.output must be last or averaged");

  // Convex-mode schedules should respect gamma <= 2/L (warn only, per spec).
  if (ex.model.is_logistic()) {
    std::vector<Sample> all;
    for (const auto& s : ex.data.shards) all.insert(all.end(), s.begin(), s.end());
    if (!all.empty()) {
      const auto info = smoothness_info(ex.model, all, 1.0);
      if (ex.train.schedule.gamma(0) > 2.0 / info.l)
        err << "warning: gamma_0 = " << ex.train.schedule.gamma(0) << " exceeds 2/L = "
            << 2.0 / info.l << "\n";
    }
  }
  return ex;
}

inline std::string profile_csv(const std::vector<std::pair<TopologyKind, int>>& cells) {
  std::ostringstream os;
  os << "kind,m,delta,lambda,c_h,doubly_stochastic\n";
  for (const auto& [kind, m] : cells) {
    const auto prof = spectral_profile(build_topology(kind, m));
    os << to_string(kind) << ',' << m << ',' << format_double(prof.delta) << ','
       << format_double(prof.lambda) << ',' << format_double(prof.c_h) << ','
       << (prof.doubly_stochastic ? "true" : "false") << '\n';
  }
  return os.str();
}

// Stability pipeline shared by cmd_stability and cmd_sweep cells.
struct StabilityResult {
  std::vector<std::pair<std::uint64_t, CoupledTrace>> replicates;
  std::vector<CoupledTrace> traces;
};

inline StabilityResult run_stability(const Experiment& ex, std::uint64_t seed,
                                     int workers) {
  const DirectedGraph graph = build_topology(ex.kind, ex.m);
  StabilityResult res;
  const long R = ex.replicates;
  res.replicates.resize(R);
  TrainConfig cfg = ex.train;
  cfg.sampling = SamplingMode::SharedIndex;
  cfg.workers = 1;  // parallelism is across replicates here
  std::vector<std::string> errors(R);
  parallel_for(static_cast<int>(R), workers, [&](int k) {
    try {
      const std::uint64_t rep_seed = hash_combine(seed, static_cast<std::uint64_t>(k));
      TrainConfig rc = cfg;
      rc.seed = rep_seed;
      const NeighborPair pair = make_neighbor(ex.data, rep_seed);
      res.replicates[k] = {rep_seed, coupled_run(rc, graph, ex.model, pair,
                                                 ex.output_averaged)};
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
  for (auto& [s, tr] : res.replicates) res.traces.push_back(tr);
  return res;
}

inline std::string stability_summary_csv(const StabilityResult& res,
                                         const Experiment& ex) {
  std::vector<double> dT, gap, gap_prime;
  for (const auto& tr : res.traces) {
    dT.push_back(tr.delta_final);
    gap.push_back(tr.gen_gap_run);
    gap_prime.push_back(tr.gen_gap_run_prime);
  }
  double est = 0.0;
  if (!ex.data.test.empty())
    est = stability_estimate(res.traces, ex.model, ex.data.test);
  std::ostringstream os;
  os << "metric,mean,stderr\n";
  os << "delta_T," << format_double(mean_of(dT)) << ',' << format_double(stderr_of(dT))
     << '\n';
  os << "gen_gap," << format_double(mean_of(gap)) << ',' << format_double(stderr_of(gap))
     << '\n';
  os << "gen_gap_prime," << format_double(mean_of(gap_prime)) << ','
     << format_double(stderr_of(gap_prime)) << '\n';
  os << "stability_estimate," << format_double(est) << ",0\n";
  return os.str();
}

// Three-column plot data: x, mean, stderr.
inline std::string series_data(const std::vector<CoupledTrace>& traces) {
  std::ostringstream os;
  if (traces.empty()) return os.str();
  const size_t T = traces.front().delta.size();
  for (size_t k = 0; k < T; ++k) {
    std::vector<double> vals;
    for (const auto& tr : traces) vals.push_back(tr.delta[k]);
    os << (k + 1) << ' ' << format_double(mean_of(vals)) << ' '
       << format_double(stderr_of(vals)) << '\n';
  }
  return os.str();
}

inline BoundParams bound_params_from_config(const Config& cfg) {
  BoundParams p;
  p.G = cfg.get_double("bounds.G", 1.0);
  p.L = cfg.get_double("bounds.L", 1.0);
  p.C = cfg.get_double("bounds.C", 1.0);
  p.C_w0 = cfg.get_double("bounds.C_w0", 0.0);
  p.r = cfg.get_double("bounds.r", 1.0);
  p.delta = cfg.get_double("bounds.delta", 0.125);
  p.lambda = cfg.get_double("bounds.lambda", 0.5);
  p.m = cfg.get_long("bounds.m", 8);
  p.n = cfg.get_long("bounds.n", 1000);
  if (cfg.has("bounds.alpha")) p.alpha = cfg.get_double("bounds.alpha", 1.0);
  if (cfg.has("bounds.init_dist")) p.init_dist = cfg.get_double("bounds.init_dist", 0.0);
  p.schedule = parse_schedule(cfg);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

}  // namespace cli_detail

// --------------------------------------------------------------------------
// Commands. Each returns an exit code and writes CSVs under out_dir.

inline int cmd_topology(const std::vector<std::string>& kinds,
                        const std::vector<int>& ms, const std::string& out_dir,
                        std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::pair<TopologyKind, int>> cells;
    for (const auto& ks : kinds)
      for (int m : ms) cells.emplace_back(topology_kind_from_string(ks), m);
    if (cells.empty()) throw ConfigError("topology: empty kind/m grid");
    const std::string csv = cli_detail::profile_csv(cells);
    cli_detail::write_output(out_dir, "topology.csv", csv);
    out << csv;
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_train(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                     int workers, std::ostream& out, std::ostream& err) {
  const auto ex = cli_detail::build_experiment(cfg, seed, workers, err);
  cfg.reject_unknown();
  const DirectedGraph graph = build_topology(ex.kind, ex.m);
  const TrajectoryRecord rec = run_training(ex.train, graph, ex.model, ex.data);
  cli_detail::write_output(out_dir, "trajectory.csv", trajectory_csv(rec));

  std::ostringstream sum;
  sum << "T = " << ex.train.T << "\n";
  sum << "c_w0 = " << format_double(rec.c_w0) << "\n";
  sum << "max_grad_norm = " << format_double(rec.max_grad_norm) << "\n";
  sum << "max_prop1_residual = " << format_double(rec.max_prop1_residual) << "\n";
  if (!rec.steps.empty()) {
    sum << "final_train_loss = " << format_double(rec.steps.back().train_loss) << "\n";
    sum << "final_test_loss = " << format_double(rec.steps.back().test_loss) << "\n";
  }
  sum << "w_avg_defined = " << (rec.w_avg_defined ? "true" : "false") << "\n";
  cli_detail::write_output(out_dir, "summary.txt", sum.str());
  out << "wrote trajectory.csv (" << rec.steps.size() << " rows)\n";
  return kExitOk;
}

inline int cmd_stability(const Config& cfg, std::uint64_t seed,
                         const std::string& out_dir, int workers, std::ostream& out,
                         std::ostream& err) {
  const auto ex = cli_detail::build_experiment(cfg, seed, workers, err);
  cfg.reject_unknown();
  const auto res = cli_detail::run_stability(ex, seed, workers);
  cli_detail::write_output(out_dir, "replicates.csv", replicate_csv(res.replicates));
  cli_detail::write_output(out_dir, "aggregate.csv", aggregate_csv(res.traces));
  cli_detail::write_output(out_dir, "summary.csv",
                           cli_detail::stability_summary_csv(res, ex));
  out << "wrote replicates.csv / aggregate.csv / summary.csv\n";
  return kExitOk;
}

inline int cmd_bounds(const Config& cfg, const std::string& out_dir, std::ostream& out,
                      std::ostream& err) {
  const BoundParams p = cli_detail::bound_params_from_config(cfg);
  std::vector<long> ts;
  for (const auto& tok : cfg.get_list("bounds.T_list", "10,100,1000"))
    ts.push_back(std::stol(tok));
  cfg.reject_unknown();

  const bool constant = p.schedule.kind == StepSchedule::Kind::Constant;
  std::ostringstream os;
  os << "G,L,C,C_w0,r,delta,lambda,m,n,alpha,schedule,step,T,"
        "stab_convex,stab_convex_closed,opt_convex,opt_convex_closed,excess_convex,"
        "stab_nonconvex,stab_nonconvex_display,stab_nonconvex_closed,"
        "opt_pl,opt_pl_closed,excess_pl,pushsum\n";
  for (long T : ts) {
    os << format_double(p.G) << ',' << format_double(p.L) << ',' << format_double(p.C)
       << ',' << format_double(p.C_w0) << ',' << format_double(p.r) << ','
       << format_double(p.delta) << ',' << format_double(p.lambda) << ',' << p.m << ','
       << p.n << ',' << (p.alpha ? format_double(*p.alpha) : "") << ','
       << (constant ? "constant" : "diminishing") << ','
       << format_double(p.schedule.value) << ',' << T << ','
       << format_double(stability_bound_convex(p, T)) << ','
       << format_double(stability_bound_convex_closed(p, T)) << ','
       << format_double(T > 0 ? opt_bound_convex(p, T) : 0.0) << ','
       << format_double(opt_bound_convex_closed(p, T)) << ','
       << format_double(excess_convex(p, T)) << ','
       << format_double(T > 0 ? stability_bound_nonconvex(p, T) : 0.0) << ','
       << format_double(T > 0 ? stability_bound_nonconvex_display(p, T) : 0.0) << ','
       << format_double(stability_bound_nonconvex_closed(p, T)) << ','
       << (p.alpha ? format_double(opt_bound_pl(p, T)) : "") << ','
       << (p.alpha ? format_double(opt_bound_pl_closed(p, T)) : "") << ','
       << (p.alpha ? format_double(excess_pl(p, T)) : "") << ','
       << format_double(pushsum_consistency_bound(p, T)) << '\n';
  }
  cli_detail::write_output(out_dir, "bounds.csv", os.str());

  std::ostringstream stops;
  stops << "family,T_star,value\n";
  const OptimalStop conv = optimal_stop_convex(p);
  stops << "convex," << (conv.infinite ? std::string("inf") : std::to_string(conv.t_star))
        << ',' << format_double(conv.value) << '\n';
  if (p.alpha) {
    const OptimalStop pl = optimal_stop_pl(p);
    stops << "pl," << pl.t_star << ',' << format_double(pl.value) << '\n';
  }
  cli_detail::write_output(out_dir, "optimal_stop.csv", stops.str());
  out << "wrote bounds.csv / optimal_stop.csv\n";
  return kExitOk;
}

inline int cmd_sweep(const Config& cfg, std::uint64_t seed, const std::string& out_dir,
                     int workers, std::ostream& out, std::ostream& err) {
  const std::string axis = cfg.get_string("sweep.axis", "gamma");
  if (axis == "gamma") {
    const auto gammas = cfg.get_list("sweep.gammas", "0.01,0.001,0.0001,0.00001");
    if (gammas.empty()) throw ConfigError("sweep: empty gamma grid");
    const auto base = cli_detail::build_experiment(cfg, seed, workers, err);
    for (const auto& gs : gammas) {
      auto ex = base;
      ex.train.schedule = StepSchedule::constant(std::stod(gs));
      const auto res = cli_detail::run_stability(ex, seed, workers);
      cli_detail::write_output(out_dir, "sweep_gamma_" + gs + ".dat",
                               cli_detail::series_data(res.traces));
    }
  } else if (axis == "m") {
    const auto ms = cfg.get_list("sweep.ms", "4,8,16,32");
    if (ms.empty()) throw ConfigError("sweep: empty m grid");
    const long budget = cfg.get_long("sweep.budget", 0);
    const auto base = cli_detail::build_experiment(cfg, seed, workers, err);
    for (const auto& msz : ms) {
      const int m = std::stoi(msz);
      auto ex = base;
      if (ex.m != m) {
        // rebuild the shard layout at this m (fixed total budget when given)
        auto ex2 = ex;
        std::vector<Sample> all;
        for (const auto& s : ex.data.shards) all.insert(all.end(), s.begin(), s.end());
        for (const auto& s : ex.data.pool) all.push_back(s);
        long n = budget > 0 ? budget / m : static_cast<long>(all.size()) / m;
        while (n > 1 && n * m >= static_cast<long>(all.size())) --n;
        ex2.m = m;
        ex2.data = shard(all, m, static_cast<int>(n), seed, ex.data.d);
        ex2.data.test = ex.data.test;
        ex = ex2;
      }
      const auto res = cli_detail::run_stability(ex, seed, workers);
      cli_detail::write_output(out_dir, "sweep_m_" + msz + ".dat",
                               cli_detail::series_data(res.traces));
    }
  } else if (axis == "topology") {
    const auto kinds = cfg.get_list("sweep.topologies", "FullyConnected,DiExp,DiRing");
    if (kinds.empty()) throw ConfigError("sweep: empty topology grid");
    for (const auto& ks : kinds) {
      auto ex = cli_detail::build_experiment(cfg, seed, workers, err);
      ex.kind = topology_kind_from_string(ks);
      const auto res = cli_detail::run_stability(ex, seed, workers);
      cli_detail::write_output(out_dir, "sweep_topology_" + ks + ".dat",
                               cli_detail::series_data(res.traces));
    }
  } else {
    throw ConfigError("sweep.axis must be gamma, m, or topology");
  }
  cfg.reject_unknown();
  out << "sweep complete\n";
  return kExitOk;
}

// --------------------------------------------------------------------------
// Top-level argv-style dispatcher so tests can run commands in-process.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  try {
    if (args.empty()) {
      err << "usage: sgp <topology|train|stability|bounds|sweep> [flags]\n";
      return kExitConfig;
    }
    const std::string cmd = args[0];
    std::string config_path;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out_dir = ".";
    int workers = 1;
    std::vector<std::string> kinds;
    std::vector<int> ms;
    for (size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      const auto next = [&]() -> const std::string& {
        if (i + 1 >= args.size()) throw ConfigError("missing value for " + a);
        return args[++i];
      };
      if (a == "--config")
        config_path = next();
      else if (a == "--seed") {
        seed = static_cast<std::uint64_t>(std::stoull(next()));
        seed_given = true;
      } else if (a == "--out")
        out_dir = next();
      else if (a == "--workers")
        workers = std::stoi(next());
      else if (a == "--kinds") {
        std::istringstream is(next());
        std::string tok;
        while (std::getline(is, tok, ',')) kinds.push_back(tok);
      } else if (a == "--m") {
        std::istringstream is(next());
        std::string tok;
        while (std::getline(is, tok, ',')) ms.push_back(std::stoi(tok));
      } else {
        throw ConfigError("unknown flag: " + a);
      }
    }
    if (workers < 1) throw ConfigError("--workers must be >= 1");

    if (cmd == "topology") return cmd_topology(kinds, ms, out_dir, out, err);

    Config cfg = config_path.empty() ? Config() : Config::from_file(config_path);
    if (!seed_given) seed = static_cast<std::uint64_t>(cfg.get_long("run.seed", 1));
    else cfg.get_long("run.seed", 1);  // mark consumed either way

    if (cmd == "train") return cmd_train(cfg, seed, out_dir, workers, out, err);
    if (cmd == "stability") return cmd_stability(cfg, seed, out_dir, workers, out, err);
    if (cmd == "bounds") return cmd_bounds(cfg, out_dir, out, err);
    if (cmd == "sweep") return cmd_sweep(cfg, seed, out_dir, workers, out, err);
    err << "error: unknown command: " << cmd << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitContract;
  }
}

}  // namespace sgp
