#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace sgp {

// One training example. Features sparse (index, value) with 0-based indices;
// label in {-1, +1}.
struct Sample {
  std::vector<std::pair<int, double>> features;
  double label = 1.0;
};

inline double sparse_dot(const Sample& s, const Eigen::VectorXd& w) {
  double acc = 0.0;
  for (const auto& [idx, val] : s.features) acc += val * w(idx);
  return acc;
}

inline double sample_norm(const Sample& s) {
  double acc = 0.0;
  for (const auto& [idx, val] : s.features) acc += val * val;
  return std::sqrt(acc);
}

// log(1 + exp(x)) without overflow for any x.
inline double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Logistic sigma(x) = 1/(1+exp(-x)), branch on sign for stability.
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// l2-regularized logistic regression: f(w; (a,b)) = log(1+exp(-b a^T w)) + mu/2 ||w||^2.
struct LogisticL2 {
  int d = 0;
  double mu = 0.0;
};

// Quadratic with known PL constant: f(w; s) = 1/2 w^T A w - (b + a_s)^T w
// where a_s is the sample's (dense-ified) feature vector. A sample with no
// features gives the plain 1/2 w^T A w - b^T w objective; nonzero mean-zero
// a_s provides the gradient noise the stability experiments need.
struct PLQuadratic {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  int dim() const { return static_cast<int>(a.rows()); }
};

struct LossModel {
  std::variant<LogisticL2, PLQuadratic> impl;

  int dim() const {
    if (const auto* lg = std::get_if<LogisticL2>(&impl)) return lg->d;
    return std::get<PLQuadratic>(impl).dim();
  }
  bool is_logistic() const { return std::holds_alternative<LogisticL2>(impl); }
};

inline double loss(const LossModel& model, const Eigen::VectorXd& w, const Sample& s) {
  if (w.size() != model.dim()) throw std::invalid_argument("loss: dimension mismatch");
  if (const auto* lg = std::get_if<LogisticL2>(&model.impl)) {
    const double margin = s.label * sparse_dot(s, w);
    return softplus(-margin) + 0.5 * lg->mu * w.squaredNorm();
  }
  const auto& pl = std::get<PLQuadratic>(model.impl);
  double v = 0.5 * w.dot(pl.a * w) - pl.b.dot(w);
  v -= sparse_dot(s, w);
  return v;
}

inline Eigen::VectorXd gradient(const LossModel& model, const Eigen::VectorXd& w,
                                const Sample& s) {
  if (w.size() != model.dim()) throw std::invalid_argument("gradient: dimension mismatch");
  if (const auto* lg = std::get_if<LogisticL2>(&model.impl)) {
    const double margin = s.label * sparse_dot(s, w);
    const double coef = -s.label * sigmoid(-margin);
    Eigen::VectorXd g = lg->mu * w;
    for (const auto& [idx, val] : s.features) g(idx) += coef * val;
    return g;
  }
  const auto& pl = std::get<PLQuadratic>(model.impl);
  Eigen::VectorXd g = pl.a * w - pl.b;
  for (const auto& [idx, val] : s.features) g(idx) -= val;
  return g;
}

struct SmoothnessInfo {
  double g = 0.0;      // gradient-norm bound over the radius-r ball
  double l = 0.0;      // smoothness constant
  double alpha = 0.0;  // PL parameter (0 when not applicable)
  double kappa = 0.0;  // l/alpha when alpha > 0
  double r = 0.0;      // parameter-space radius used for g
};

inline SmoothnessInfo smoothness_info(const LossModel& model,
                                      std::span<const Sample> dataset, double r) {
  SmoothnessInfo info;
  info.r = r;
  if (const auto* lg = std::get_if<LogisticL2>(&model.impl)) {
    if (dataset.empty()) throw std::invalid_argument("smoothness_info: empty dataset");
    double max_norm = 0.0;
    for (const auto& s : dataset) max_norm = std::max(max_norm, sample_norm(s));
    info.l = 0.25 * max_norm * max_norm + lg->mu;
    info.g = max_norm + lg->mu * r;  // triangle inequality on the ball B(0, r)
    info.alpha = lg->mu;             // strong convexity from the regularizer
    info.kappa = lg->mu > 0 ? info.l / lg->mu : 0.0;
    return info;
  }
  const auto& pl = std::get<PLQuadratic>(model.impl);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pl.a);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  info.alpha = es.eigenvalues().minCoeff();
  info.l = es.eigenvalues().maxCoeff();
  info.kappa = info.alpha > 0 ? info.l / info.alpha : 0.0;
  double max_noise = 0.0;
  for (const auto& s : dataset) max_noise = std::max(max_noise, sample_norm(s));
  info.g = info.l * r + pl.b.norm() + max_noise;  // ||Aw - b - a_s|| on B(0, r)
  return info;
}

// PL condition at w for the noise-free quadratic: returns
// (2 alpha (f(w) - f(w*)), ||grad f(w)||^2); the first never exceeds the second.
inline std::pair<double, double> pl_residual(const PLQuadratic& pl,
                                             const Eigen::VectorXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pl.a);
  const double alpha = es.eigenvalues().minCoeff();
  const Eigen::VectorXd wstar = pl.a.ldlt().solve(pl.b);
  const auto f = [&](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(pl.a * x) - pl.b.dot(x);
  };
  const double lhs = 2.0 * alpha * (f(w) - f(wstar));
  const double rhs = (pl.a * w - pl.b).squaredNorm();
  return {lhs, rhs};
}

// Mean loss over a set; fixed ascending iteration order (determinism).
inline double mean_loss(const LossModel& model, const Eigen::VectorXd& w,
                        std::span<const Sample> set) {
  if (set.empty()) throw std::invalid_argument("mean_loss: empty set");
  double acc = 0.0;
  for (const auto& s : set) acc += loss(model, w, s);
  return acc / static_cast<double>(set.size());
}

}  // namespace sgp
