#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sgp/engine.hpp"  // StepSchedule
#include "sgp/util.hpp"

namespace sgp {

// Every symbol the Section-4 bounds consume. C is the empirical residual
// constant from the mixing module; C_w0 the mean initial numerator norm.
struct BoundParams {
  double G = 0.0;
  double L = 0.0;
  double C = 0.0;
  double C_w0 = 0.0;
  double r = 0.0;
  double delta = 1.0;
  double lambda = 0.0;
  long m = 1;
  long n = 1;
  std::optional<double> alpha;      // PL parameter
  StepSchedule schedule = StepSchedule::constant(0.01);
  std::optional<double> init_dist;  // ||wbar^(0) - w*_S|| surrogate

  double kappa() const {
    if (!alpha || !(*alpha > 0)) throw std::invalid_argument("bounds: alpha unset");
    return L / *alpha;
  }
  double mn() const { return static_cast<double>(m) * static_cast<double>(n); }
  double init_dist_or0() const { return init_dist.value_or(0.0); }

  void validate() const {
    if (G < 0 || L < 0 || C < 0 || C_w0 < 0 || r < 0)
      throw std::invalid_argument("bounds: negative constant");
    if (!(delta > 0) || delta > 1.0 + 1e-12)
      throw std::invalid_argument("bounds: delta out of (0, 1]");
    if (lambda < 0 || lambda >= 1) throw std::invalid_argument("bounds: lambda out of [0,1)");
    if (m < 1 || n < 1) throw std::invalid_argument("bounds: m, n >= 1");
  }
};

namespace detail {

// Direct compensated sums of gamma_t, gamma_t^2 and gamma_t lambda^t over
// t = 0..T-1 for the configured schedule.
struct ScheduleSums {
  double sum_gamma = 0.0;
  double sum_gamma_sq = 0.0;
  double sum_gamma_lambda = 0.0;
};

inline ScheduleSums schedule_sums(const BoundParams& p, long T) {
  KahanSum sg, sg2, sgl;
  double lam_t = 1.0;
  for (long t = 0; t < T; ++t) {
    const double g = p.schedule.gamma(t);
    sg.add(g);
    sg2.add(g * g);
    sgl.add(g * lam_t);
    lam_t *= p.lambda;
    if (lam_t == 0.0 && t > 0) {
      // remaining lambda^t terms are exactly zero; the plain sums still run
      for (long s = t + 1; s < T; ++s) {
        const double gs = p.schedule.gamma(s);
        sg.add(gs);
        sg2.add(gs * gs);
      }
      break;
    }
  }
  return {sg.value(), sg2.value(), sgl.value()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Push-Sum consistency (Lemma 2): (C/delta)(lambda^t C_w0 + G sum lambda^{t-s} gamma_s).
inline double pushsum_consistency_bound(const BoundParams& p, long t) {
  p.validate();
  if (t < 0) throw std::invalid_argument("pushsum_consistency_bound: t >= 0");
  // S_t = sum_{s=0}^{t-1} lambda^{t-s} gamma_s by the recurrence
  // S_{k+1} = lambda (S_k + gamma_k).
  double s = 0.0;
  for (long k = 0; k < t; ++k) s = p.lambda * (s + p.schedule.gamma(k));
  const double lam_pow = std::pow(p.lambda, static_cast<double>(t));
  return (p.C / p.delta) * (lam_pow * p.C_w0 + p.G * s);
}

// ---------------------------------------------------------------------------
// Theorem 1 (convex uniform stability), direct summation.
inline double stability_bound_convex(const BoundParams& p, long T) {
  p.validate();
  if (T < 0) throw std::invalid_argument("stability_bound_convex: T >= 0");
  const auto s = detail::schedule_sums(p, T);
  return (2.0 * p.C * p.G * p.L * p.C_w0 / p.delta) * s.sum_gamma_lambda +
         (2.0 * p.C * p.G * p.G * p.L / (p.delta * (1.0 - p.lambda))) * s.sum_gamma_sq +
         (2.0 * p.G * p.G / p.mn()) * s.sum_gamma;
}

// Corollary 1 closed forms, verbatim.
inline double stability_bound_convex_closed(const BoundParams& p, long T) {
  p.validate();
  const double one_m_lam = 1.0 - p.lambda;
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    const double g = p.schedule.value;
    return 2.0 * p.C * p.G * p.L * g * p.C_w0 / (p.delta * one_m_lam) +
           (2.0 * p.C * p.G * p.G * p.L * g * g / (p.delta * one_m_lam) +
            2.0 * p.G * p.G * g / p.mn()) *
               static_cast<double>(T);
  }
  if (T < 1)
    throw std::invalid_argument("stability_bound_convex_closed: T >= 1 for diminishing");
  const double v = p.schedule.value;
  return (2.0 * p.G * p.G * v / p.mn()) * std::log(static_cast<double>(T)) +
         (2.0 * v * p.C * p.G * p.L * p.C_w0 + 4.0 * p.C * p.G * p.G * p.L * v * v) /
             (p.delta * one_m_lam) +
         2.0 * p.G * p.G * v / p.mn();
}

// ---------------------------------------------------------------------------
// Theorem 2 (convex optimization error), direct summation.
inline double opt_bound_convex(const BoundParams& p, long T) {
  p.validate();
  const auto s = detail::schedule_sums(p, T);
  if (!(s.sum_gamma > 0)) throw std::invalid_argument("opt_bound_convex: sum gamma = 0");
  const double w0 = p.init_dist_or0();
  return w0 * w0 / (2.0 * s.sum_gamma) +
         (2.0 * p.r * p.C * p.L * p.C_w0 / (p.delta * s.sum_gamma)) * s.sum_gamma_lambda +
         (2.0 * p.r * p.C * p.L * p.G / (p.delta * (1.0 - p.lambda)) +
          p.G * p.G / 2.0) *
             (s.sum_gamma_sq / s.sum_gamma);
}

// Corollary 2 closed forms, verbatim.
inline double opt_bound_convex_closed(const BoundParams& p, long T) {
  p.validate();
  if (T < 1) throw std::invalid_argument("opt_bound_convex_closed: T >= 1");
  const double one_m_lam = 1.0 - p.lambda;
  const double w0 = p.init_dist_or0();
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    const double g = p.schedule.value;
    return (w0 * w0 / (2.0 * g) +
            2.0 * p.r * p.C * p.L * p.C_w0 / (p.delta * one_m_lam)) /
               static_cast<double>(T) +
           2.0 * p.C * p.G * p.r * p.L * g / (p.delta * one_m_lam) +
           p.G * p.G * g / 2.0;
  }
  const double v = p.schedule.value;
  return (w0 * w0 / v + 4.0 * p.r * p.C * p.L * p.C_w0 / (p.delta * one_m_lam) +
          8.0 * v * p.r * p.C * p.G * p.L / (p.delta * one_m_lam) +
          2.0 * v * p.G * p.G) /
         std::log(static_cast<double>(T));
}

// ---------------------------------------------------------------------------
// Appendix C.5 excess-risk decomposition: eps(T) <= A*T + B/T + Cc (constant
// schedule) or A*ln T + B/ln T + Cc (diminishing).
struct ExcessABC {
  double a = 0.0, b = 0.0, c = 0.0;
};

inline ExcessABC excess_convex_abc(const BoundParams& p) {
  p.validate();
  const double dl = p.delta * (1.0 - p.lambda);
  const double w0 = p.init_dist_or0();
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    const double g = p.schedule.value;
    ExcessABC x;
    x.a = p.C * p.G * p.G * p.L * g * g / dl + p.G * p.G * g / p.mn();
    x.b = w0 * w0 / (2.0 * g) + 2.0 * p.r * p.C * p.L * p.C_w0 / dl;
    x.c = p.C * p.G * p.L * g * p.C_w0 / dl + 2.0 * p.r * p.C * p.L * p.G * g / dl +
          p.G * p.G * g / 2.0;
    return x;
  }
  const double v = p.schedule.value;
  ExcessABC x;
  x.a = 2.0 * p.G * p.G * v / p.mn();
  x.c = 4.0 * p.G * p.C * p.L * v * p.C_w0 / dl + 8.0 * p.C * p.G * p.G * p.L * v * v / dl +
        4.0 * p.G * p.G * v / p.mn();
  x.b = x.c + w0 * w0 / v + 4.0 * p.r * p.C * p.L * p.C_w0 / dl +
        8.0 * v * p.r * p.C * p.L * p.G / dl + 2.0 * v * p.G * p.G;
  return x;
}

inline double excess_convex(const BoundParams& p, long T) {
  const auto x = excess_convex_abc(p);
  const double Td = static_cast<double>(T);
  if (p.schedule.kind == StepSchedule::Kind::Constant) return x.a * Td + x.b / Td + x.c;
  const double lnT = std::log(Td);
  return x.a * lnT + x.b / lnT + x.c;
}

struct OptimalStop {
  long t_star = 0;
  double value = 0.0;
  bool infinite = false;  // A = 0: run forever, no finite minimizer
};

inline OptimalStop optimal_stop_convex(const BoundParams& p) {
  const auto x = excess_convex_abc(p);
  if (x.a == 0.0)
    return {std::numeric_limits<long>::max(), x.c, true};
  const bool constant = p.schedule.kind == StepSchedule::Kind::Constant;
  const double x_star = std::sqrt(x.b / x.a);
  const double t_cont = constant ? x_star : std::exp(x_star);
  long lo = std::max(1L, static_cast<long>(std::floor(t_cont)));
  long hi = std::max(1L, static_cast<long>(std::ceil(t_cont)));
  const auto eval = [&](long T) { return excess_convex(p, T); };
  double flo = eval(lo), fhi = eval(hi);
  if (std::isnan(flo)) flo = std::numeric_limits<double>::infinity();
  if (std::isnan(fhi)) fhi = std::numeric_limits<double>::infinity();
  if (flo <= fhi) return {lo, flo, false};
  return {hi, fhi, false};
}

// ---------------------------------------------------------------------------
// Theorem 3 (non-convex uniform stability): min over the first-divergence
// time t0 of t0/(mn) + G * sum of expansion-weighted per-step terms. This
// evaluator follows the proof's recursion (inner Push-Sum sum kept exact).
namespace detail {

template <typename InnerFn>
double nonconvex_min_over_t0(const BoundParams& p, long T, InnerFn&& inner) {
  if (T < 1) throw std::invalid_argument("stability_bound_nonconvex: T >= 1");
  const double mn = p.mn();
  std::vector<double> gam(T);
  for (long t = 0; t < T; ++t) gam[t] = p.schedule.gamma(t);

  // suffix products of rho_k = 1 + L gamma_k (1 - 1/(mn)) for k in (t, T-1]
  std::vector<double> suffix_prod(T);
  suffix_prod[T - 1] = 1.0;
  for (long t = T - 2; t >= 0; --t) {
    const double rho = 1.0 + p.L * gam[t + 1] - p.L * gam[t + 1] / mn;
    suffix_prod[t] = rho * suffix_prod[t + 1];
  }
  // suffix sums of suffix_prod[t] * inner(t)
  std::vector<double> suffix_sum(T + 1);
  suffix_sum[T] = 0.0;
  for (long t = T - 1; t >= 0; --t)
    suffix_sum[t] = suffix_sum[t + 1] + suffix_prod[t] * inner(t);

  const long t0_max = std::min(T, static_cast<long>(p.n));
  double best = std::numeric_limits<double>::infinity();
  for (long t0 = 0; t0 <= t0_max; ++t0)
    best = std::min(best, static_cast<double>(t0) / mn + p.G * suffix_sum[t0]);
  return best;
}

}  // namespace detail

inline double stability_bound_nonconvex(const BoundParams& p, long T) {
  p.validate();
  const double mn = p.mn();
  // S_t = sum_{s<t} lambda^{t-s} gamma_s, lambda^t: precompute incrementally.
  std::vector<double> inner_vals(T);
  double s = 0.0, lam_t = 1.0;
  for (long t = 0; t < T; ++t) {
    const double g = p.schedule.gamma(t);
    inner_vals[t] =
        (2.0 * p.C * p.L * g / p.delta) * (lam_t * p.C_w0 + p.G * s) + 2.0 * p.G * g / mn;
    s = p.lambda * (s + g);
    lam_t *= p.lambda;
  }
  return detail::nonconvex_min_over_t0(p, T,
                                       [&](long t) { return inner_vals[t]; });
}

// Theorem 3's display verbatim (carries 1/(delta m) on the C_w0 term and the
// post-geometric gamma_t^2 term); reported alongside the recursion form.
inline double stability_bound_nonconvex_display(const BoundParams& p, long T) {
  p.validate();
  const double mn = p.mn();
  std::vector<double> inner_vals(T);
  double lam_t = 1.0;
  for (long t = 0; t < T; ++t) {
    const double g = p.schedule.gamma(t);
    inner_vals[t] = 2.0 * p.C * p.L * g * lam_t * p.C_w0 /
                        (p.delta * static_cast<double>(p.m)) +
                    2.0 * p.G * p.C * p.L * g * g / (p.delta * (1.0 - p.lambda)) +
                    2.0 * p.G * g / mn;
    lam_t *= p.lambda;
  }
  return detail::nonconvex_min_over_t0(p, T,
                                       [&](long t) { return inner_vals[t]; });
}

// Corollary 4 closed forms, verbatim.
inline double stability_bound_nonconvex_closed(const BoundParams& p, long T) {
  p.validate();
  const double mn = p.mn();
  const double dl = p.delta * (1.0 - p.lambda);
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    const double g = p.schedule.value;
    const double rho = 1.0 + p.L * g - p.L * g / mn;
    const double prefactor = 2.0 * p.G * p.C * p.L * g * p.C_w0 / dl +
                             4.0 * p.C * p.G * p.G * p.L * g * g / dl +
                             4.0 * p.G * p.G * g / mn;
    return prefactor * std::pow(rho, static_cast<double>(T));
  }
  const double v = p.schedule.value;
  const double va = std::pow(v, 1.0 / (2.0 + v * p.L));
  const double pexp = (1.0 + v * p.L) / (2.0 + v * p.L);
  const double qexp = v * p.L / (2.0 + v * p.L);
  const double Td = static_cast<double>(T);
  return (4.0 * p.C * p.G * va * p.C_w0 / p.delta) * std::pow(Td, pexp) +
         ((va + 4.0 * p.G * p.G) / mn) * std::pow(Td, pexp) +
         (2.0 * p.C * p.G * p.G * va / dl) * std::pow(Td, qexp);
}

// ---------------------------------------------------------------------------
// Theorem 4 (PL optimization error), direct summation.
inline double opt_bound_pl(const BoundParams& p, long T) {
  p.validate();
  const double kap = p.kappa();
  const auto s = detail::schedule_sums(p, T);
  if (!(s.sum_gamma > 0)) throw std::invalid_argument("opt_bound_pl: sum gamma = 0");
  return p.G * p.r / (*p.alpha * s.sum_gamma) +
         (p.C * p.G * kap * p.C_w0 / (2.0 * p.delta * s.sum_gamma)) * s.sum_gamma_lambda +
         (p.C * p.G * p.G * kap / (2.0 * p.delta * (1.0 - p.lambda)) +
          p.G * p.G * kap / 4.0) *
             (s.sum_gamma_sq / s.sum_gamma);
}

// Corollary 5 closed forms, verbatim.
inline double opt_bound_pl_closed(const BoundParams& p, long T) {
  p.validate();
  const double kap = p.kappa();
  const double dl = p.delta * (1.0 - p.lambda);
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    const double g = p.schedule.value;
    return (p.G * p.r / (*p.alpha * g) + p.C * p.G * kap * p.C_w0 / (2.0 * dl)) /
               static_cast<double>(T) +
           (p.C * p.G * p.G * kap / (2.0 * dl) + p.G * p.G * kap / 4.0) * g;
  }
  const double v = p.schedule.value;
  return ((p.C * p.G * kap * p.C_w0 + 2.0 * v * p.C * p.G * p.G * p.L * kap) / dl +
          (2.0 * p.r * p.G + v * v * p.G * p.G * p.L) / (v * *p.alpha)) /
         std::log(static_cast<double>(T));
}

// ---------------------------------------------------------------------------
// Appendix C.10 excess bound and early stopping, PL case.
struct PlExcessParts {
  // constant-gamma path
  double c_stab = 0.0, c_opt = 0.0, rho = 1.0, floor = 0.0;
  // diminishing path
  double k_stab = 0.0, k_opt = 0.0, pexp = 0.0, qexp = 0.0;
  double k_stab1 = 0.0, k_stab2 = 0.0;
};

inline PlExcessParts excess_pl_parts(const BoundParams& p) {
  p.validate();
  const double kap = p.kappa();
  const double dl = p.delta * (1.0 - p.lambda);
  const double mn = p.mn();
  PlExcessParts parts;
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    const double g = p.schedule.value;
    parts.rho = 1.0 + p.L * g - p.L * g / mn;
    const double stab_numer = 2.0 * p.G * p.C * p.L * g * p.C_w0 / dl +
                              4.0 * p.C * p.G * p.G * p.L * g * g / dl +
                              4.0 * p.G * p.G * g / mn;
    parts.c_stab = stab_numer / (p.L * g * (1.0 - 1.0 / mn));
    parts.c_opt = p.G * p.r / (*p.alpha * g) + p.C * p.G * kap * p.C_w0 / (2.0 * dl);
    parts.floor = (p.C * p.G * p.G * kap / (2.0 * dl) + p.G * p.G * kap / 4.0) * g;
    return parts;
  }
  const double v = p.schedule.value;
  const double va = std::pow(v, 1.0 / (2.0 + v * p.L));
  parts.pexp = (1.0 + v * p.L) / (2.0 + v * p.L);
  parts.qexp = v * p.L / (2.0 + v * p.L);
  parts.k_stab1 = (4.0 * p.G / parts.pexp) *
                  (4.0 * p.C * va * p.C_w0 / p.delta + va / (p.G * mn) + 4.0 * p.G / mn);
  parts.k_stab2 = 8.0 * p.G * p.G * p.C * va / (parts.qexp * dl);
  parts.k_stab = parts.k_stab1 + parts.k_stab2;
  parts.k_opt = (p.C * p.G * kap * p.C_w0 + 2.0 * v * p.C * p.G * p.G * p.L * kap) / dl +
                (2.0 * p.r * p.G + v * v * p.G * p.G * p.L) / (v * *p.alpha);
  return parts;
}

inline double excess_pl(const BoundParams& p, long T) {
  if (T < 1) throw std::invalid_argument("excess_pl: T >= 1");
  const auto parts = excess_pl_parts(p);
  const double Td = static_cast<double>(T);
  if (p.schedule.kind == StepSchedule::Kind::Constant)
    return parts.c_opt / Td + parts.c_stab * std::pow(parts.rho, Td) / Td + parts.floor;
  return (parts.k_stab1 * std::pow(Td, parts.pexp) +
          parts.k_stab2 * std::pow(Td, parts.qexp) + parts.k_opt) /
         std::log(Td);
}

inline OptimalStop optimal_stop_pl(const BoundParams& p) {
  const auto parts = excess_pl_parts(p);
  if (p.schedule.kind == StepSchedule::Kind::Constant) {
    if (parts.c_opt <= parts.c_stab) return {1, excess_pl(p, 1), false};
    const double mu = std::log(parts.rho);
    const double ln_ratio = std::log(parts.c_opt / parts.c_stab);
    const double t_cont = ln_ratio / mu;
    const long lo = std::max(1L, static_cast<long>(std::floor(t_cont)));
    const long hi = std::max(1L, static_cast<long>(std::ceil(t_cont)));
    const long t_star = excess_pl(p, lo) <= excess_pl(p, hi) ? lo : hi;
    const double value = (1.0 + std::exp(1.0)) * parts.c_opt * mu / ln_ratio + parts.floor;
    return {t_star, value, false};
  }
  const double ratio = parts.k_opt / (parts.pexp * parts.k_stab);
  if (ratio < std::exp(1.0)) return {1, excess_pl(p, 2), false};  // balance degenerate
  const double t_cont =
      std::pow(parts.k_opt / (parts.pexp * parts.k_stab * std::log(ratio)),
               1.0 / parts.pexp);
  const long lo = std::max(2L, static_cast<long>(std::floor(t_cont)));
  const long hi = std::max(2L, static_cast<long>(std::ceil(t_cont)));
  const long t_star = excess_pl(p, lo) <= excess_pl(p, hi) ? lo : hi;
  const double value = parts.pexp * parts.k_opt / std::log(ratio);
  return {t_star, value, false};
}

}  // namespace sgp
