#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sgp/topology.hpp"

namespace sgp {

// Column-stochastic mixing matrix for a directed graph: entry (i, j) is the
// weight node i applies to what it receives from j. Uniform over j's
// self-inclusive out-neighborhood, so each column sums to 1 by construction.
// (The naive 1/(d_j + 1) with d_j already self-inclusive would double-count
// self and break column stochasticity.)
inline Eigen::MatrixXd build_mixing(const DirectedGraph& g) {
  if (!is_strongly_connected(g))
    throw std::invalid_argument("build_mixing requires a strongly connected graph");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g.m, g.m);
  for (int j = 0; j < g.m; ++j) {
    const auto receivers = out_neighbors(g, j);
    const double w = 1.0 / static_cast<double>(receivers.size());
    for (int i : receivers) p(i, j) = w;
  }
  return p;
}

// Stationary distribution of a primitive column-stochastic P: the positive
// unit-l1 right eigenvector at eigenvalue 1, by power iteration.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p,
                                               double tol = 1e-12,
                                               long max_iter = 1'000'000) {
  const int m = static_cast<int>(p.rows());
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(m, 1.0 / m);
  for (long it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = p * pi;
    next /= next.lpNorm<1>();
    const double resid = (p * next - next).lpNorm<Eigen::Infinity>();
    pi = next;
    if (resid < tol) return pi;
  }
  throw std::runtime_error(
      "stationary_distribution: power iteration did not converge "
      "(matrix not primitive?)");
}

// Same eigenvector via a dense nonsymmetric eigensolve; used as a
// cross-check oracle for the power iteration.
inline Eigen::VectorXd stationary_distribution_dense(const Eigen::MatrixXd& p) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(p);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.rows(); ++k) {
    const double dist = std::abs(es.eigenvalues()(k) - std::complex<double>(1.0, 0.0));
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  return v / v.lpNorm<1>();
}

// Second largest eigenvalue modulus. Complex spectrum; the (unique, by
// primitivity) eigenvalue at 1 is excluded. By convention 0 for m = 1.
inline double slem(const Eigen::MatrixXd& p) {
  const int m = static_cast<int>(p.rows());
  if (m == 1) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(p, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  int perron = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < m; ++k) {
    const double dist = std::abs(es.eigenvalues()(k) - std::complex<double>(1.0, 0.0));
    if (dist < best_dist) {
      best_dist = dist;
      perron = k;
    }
  }
  double lam = 0.0;
  for (int k = 0; k < m; ++k)
    if (k != perron) lam = std::max(lam, std::abs(es.eigenvalues()(k)));
  // Snap eigensolver noise to an exact 0 (rank-one P has spectrum {1, 0,...}).
  if (lam < 1e-12) lam = 0.0;
  // Clamp eigensolver noise; SLEM of a primitive stochastic matrix is < 1.
  return std::min(lam, 1.0 - 1e-15);
}

// Topological imbalance parameter: min_i pi_i.
inline double imbalance(const Eigen::VectorXd& pi) { return pi.minCoeff(); }

// Smallest C with ||H^t||_inf <= C * lambda^t for 1 <= t <= horizon,
// H := P - pi 1^T, by explicit matrix powers. This is the empirical residual
// constant C_H that feeds the bound evaluations.
inline double residual_constant(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi,
                                double lambda, int horizon = 200) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const int m = static_cast<int>(p.rows());
  const Eigen::MatrixXd h = p - pi * Eigen::RowVectorXd::Ones(m);
  Eigen::MatrixXd ht = h;
  double c = 0.0;
  double lam_t = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    lam_t *= lambda;
    const double norm = ht.cwiseAbs().rowwise().sum().maxCoeff();
    if (norm <= 1e-12) break;  // residual at floating-point noise; ratios are meaningless
    if (lam_t <= 0.0) return std::numeric_limits<double>::infinity();
    c = std::max(c, norm / lam_t);
    if (t < horizon) ht = ht * h;
  }
  return c;
}

struct SpectralProfile {
  Eigen::VectorXd pi;
  double delta = 0.0;
  double lambda = 0.0;
  double c_h = 0.0;
  bool doubly_stochastic = false;
};

inline SpectralProfile spectral_profile(const DirectedGraph& g, int horizon = 200) {
  const Eigen::MatrixXd p = build_mixing(g);
  SpectralProfile prof;
  prof.pi = stationary_distribution(p);
  prof.delta = imbalance(prof.pi);
  prof.lambda = slem(p);
  prof.c_h = residual_constant(p, prof.pi, prof.lambda, horizon);
  prof.doubly_stochastic = true;
  for (int i = 0; i < g.m; ++i)
    if (std::abs(p.row(i).sum() - 1.0) > 1e-10) {
      prof.doubly_stochastic = false;
      break;
    }
  return prof;
}

}  // namespace sgp
