#ifndef STEIN1D_CONCENTRATION_HPP
#define STEIN1D_CONCENTRATION_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "stein1d/profile.hpp"

namespace stein1d {

/// Named bound values at one radius.
struct TailBoundPoint {
  double r = 0.0;
  std::map<std::string, double> bounds;
};

/// Radius grid with one series per bound plus an optional empirical tail.
struct TailBoundCurve {
  std::vector<double> r_values;
  std::map<std::string, std::vector<double>> series;
  std::vector<double> empirical;  // empty unless filled by the caller
};

/// Sub-Gaussian bounds for a uniformly bounded kernel, c = 1/||tau||_inf:
/// chernoff  P(g - Eg >= r)  <= exp(-c r^2/2)
/// mills_right              <= E(g-Eg)+ exp(-c r^2/2)/r
/// mills_abs  P(|g-Eg| >= r) <= E|g-Eg| exp(-c r^2/2)/r
inline TailBoundPoint subgaussian_bounds(const KernelProfile& profile, const MomentStats& stats,
                                         double r) {
  if (!profile.sup_bound)
    throw std::domain_error("subgaussian_bounds: hypothesis not established (no sup bound)");
  if (!(r > 0.0)) throw std::invalid_argument("subgaussian_bounds: requires r > 0");
  const double c = 1.0 / *profile.sup_bound;
  const double e = std::exp(-0.5 * c * r * r);
  TailBoundPoint out;
  out.r = r;
  out.bounds["chernoff"] = e;
  out.bounds["mills_right"] = stats.mean_plus * e / r;
  out.bounds["mills_abs"] = stats.mean_abs * e / r;
  return out;
}

/// Beta-specific bounds: exp(-2(alpha+beta) r^2) Chernoff, its Mills
/// refinements, and for alpha, beta >= 1 the moment-free variant with the
/// universal constant C = 2.5.
inline TailBoundPoint beta_bounds(double alpha, double beta, double r,
                                  const MomentStats& stats) {
  if (!(alpha > 0.0 && beta > 0.0))
    throw std::invalid_argument("beta_bounds: requires alpha, beta > 0");
  if (!(r > 0.0)) throw std::invalid_argument("beta_bounds: requires r > 0");
  const double e = std::exp(-2.0 * (alpha + beta) * r * r);
  TailBoundPoint out;
  out.r = r;
  out.bounds["chernoff"] = e;
  out.bounds["mills_right"] = stats.mean_plus * e / r;
  out.bounds["mills_abs"] = stats.mean_abs * e / r;
  if (alpha >= 1.0 && beta >= 1.0)
    out.bounds["c_variant"] = 2.5 / std::sqrt(alpha + beta + 1.0) * e / r;
  return out;
}

/// Sub-gamma bound for a sub-linear kernel tau <= a|x-mu| + b:
/// P(g - Eg >= r) <= exp(-r^2 / (2ar + 2b)).
inline double subgamma_bound(double a, double b, double r) {
  if (!(a >= 0.0) || !(b >= 0.0) || (a == 0.0 && b == 0.0))
    throw std::invalid_argument("subgamma_bound: requires a, b >= 0, not both zero");
  if (!(r > 0.0)) throw std::invalid_argument("subgamma_bound: requires r > 0");
  return std::exp(-r * r / (2.0 * a * r + 2.0 * b));
}

/// Mills-type bounds for a sub-linear kernel with a > 0:
/// right: E(X-mu)+ (ar+b)^(b/a^2) exp(-r/a) / r;  abs: same with E|X-mu|.
inline TailBoundPoint mills_gamma_bounds(double a, double b, double r,
                                         const MomentStats& stats) {
  if (!(a > 0.0)) throw std::invalid_argument("mills_gamma_bounds: requires a > 0");
  if (!(b >= 0.0)) throw std::invalid_argument("mills_gamma_bounds: requires b >= 0");
  if (!(r > 0.0)) throw std::invalid_argument("mills_gamma_bounds: requires r > 0");
  const double profile = std::pow(a * r + b, b / (a * a)) * std::exp(-r / a) / r;
  TailBoundPoint out;
  out.r = r;
  out.bounds["mills_gamma_right"] = stats.mean_plus * profile;
  out.bounds["mills_gamma_abs"] = stats.mean_abs * profile;
  return out;
}

/// psi_tau(lambda) = log E[exp(lambda^2 tau(X))] in [0, +inf]; +inf marks a
/// divergent exponential moment (integrand overflow past 1e280 included).
inline double psi_tau(const KernelEvaluator& ev, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("psi_tau: requires lambda >= 0");
  if (lambda == 0.0) return 0.0;
  const double l2 = lambda * lambda;
  const Distribution& d = ev.dist;
  // The exponent lambda^2 tau + log p is combined in log space: log p stays
  // finite far beyond where the density itself underflows, so a divergent
  // exponential moment shows up as overflow instead of silent truncation.
  const bool closed = ev.dist.closed_form_kernel().has_value();
  RealFn log_integrand;
  if (closed) {
    auto tau = ev.dist.closed_form_kernel()->tau;
    log_integrand = [&d, tau, l2](double x) { return l2 * tau(x) + d.log_pdf(x); };
  } else {
    KernelEvaluator direct(d, KernelMethod::direct_integral, ev.cfg);
    log_integrand = [direct, l2](double x) {
      return l2 * stein_kernel(direct, x) + direct.dist.log_pdf(x);
    };
  }
  const Interval iv = closed ? d.support() : d.clipped_interior(1e-12);
  try {
    auto est = integrate(
        [&log_integrand](double x) {
          const double e = log_integrand(x);
          if (e == -inf) return 0.0;
          if (e > 690.0) return 1e300;
          return std::exp(e);
        },
        iv, ev.cfg);
    if (!est.converged || !std::isfinite(est.value) || est.value >= 1e280) return inf;
    return std::log(est.value);
  } catch (const numerical_error&) {
    return inf;
  }
}

/// Generic Chernoff bound exp(-psi*_tau(r)) with the Fenchel-Legendre
/// conjugate taken over lambda in (0, lambda_max).
inline double fenchel_tail_bound(const KernelEvaluator& ev, double r, double lambda_max) {
  if (!(r > 0.0)) throw std::invalid_argument("fenchel_tail_bound: requires r > 0");
  const double conj = convex_conjugate([&ev](double lam) { return psi_tau(ev, lam); }, r,
                                       std::isfinite(lambda_max)
                                           ? Interval::bounded(0.0, lambda_max)
                                           : Interval::right_tail(0.0));
  if (std::isinf(conj)) return 0.0;
  return std::exp(-std::max(0.0, conj));
}

/// Moment bound ||f||_r <= (r/sqrt(2)) ||sqrt(tau)||_r for 1-Lipschitz
/// centered f, and the two-regime tail with t1 = ||sqrt(tau)||_r e r.
struct PoincareMomentTail {
  double sqrt_tau_norm = 0.0;
  double moment_rhs = 0.0;
  double t1 = 0.0;
  double tail = 0.0;
};

inline PoincareMomentTail poincare_moment_tail(const KernelEvaluator& ev, double r_order,
                                               double t) {
  if (!(r_order >= 2.0))
    throw std::invalid_argument("poincare_moment_tail: requires r >= 2");
  if (!(t >= 0.0)) throw std::invalid_argument("poincare_moment_tail: requires t >= 0");
  Estimate est;
  if (auto k = ev.dist.closed_form_kernel()) {
    auto tau = k->tau;
    est = expectation(ev.dist,
                      [tau, r_order](double x) { return std::pow(tau(x), 0.5 * r_order); },
                      ev.cfg);
  } else {
    KernelEvaluator direct(ev.dist, KernelMethod::direct_integral, ev.cfg);
    est = expectation(
        ev.dist,
        [&direct, r_order](double x) {
          return std::pow(stein_kernel(direct, x), 0.5 * r_order);
        },
        ev.dist.clipped_interior(1e-9), ev.cfg);
  }
  if (!est.converged || !std::isfinite(est.value))
    throw numerical_error("poincare_moment_tail: ||sqrt(tau)||_r diverges");
  PoincareMomentTail out;
  out.sqrt_tau_norm = std::pow(est.value, 1.0 / r_order);
  out.moment_rhs = r_order / std::sqrt(2.0) * out.sqrt_tau_norm;
  out.t1 = out.sqrt_tau_norm * M_E * r_order;
  out.tail = t <= out.t1 ? 2.0 * std::exp(-t / (out.sqrt_tau_norm * M_E))
                         : 2.0 * std::pow(out.sqrt_tau_norm * r_order / t, r_order);
  return out;
}

/// Discrete instance of the Laplace-domination lemma: on a finite measure,
/// E[g e^g] <= E[h e^g] < inf implies E[e^g] <= E[e^h]. Returns whether the
/// implication is witnessed (a false hypothesis counts vacuously).
inline bool laplace_domination_check(const std::vector<double>& weights,
                                     const std::vector<double>& g,
                                     const std::vector<double>& h) {
  if (weights.size() != g.size() || weights.size() != h.size())
    throw std::invalid_argument("laplace_domination_check: size mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0))
      throw std::invalid_argument("laplace_domination_check: weights must be nonnegative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("laplace_domination_check: weights must sum to one");

  double e_geg = 0.0, e_heg = 0.0, e_eg = 0.0, e_eh = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double eg = std::exp(g[i]);
    e_geg += weights[i] * g[i] * eg;
    e_heg += weights[i] * h[i] * eg;
    e_eg += weights[i] * eg;
    e_eh += weights[i] * std::exp(h[i]);
  }
  const double scale = 1.0 + std::abs(e_geg) + std::abs(e_heg);
  const bool hypothesis = e_geg <= e_heg + 1e-12 * scale && std::isfinite(e_heg);
  if (!hypothesis) return true;  // vacuous
  return e_eg <= e_eh + 1e-12 * (1.0 + e_eg + e_eh);
}

enum class MonotoneProfileKind { gauss_Tg, gamma_T };

struct MonotoneProfileParams {
  double c = 1.0;           // gauss_Tg
  double a = 0.0, b = 0.0;  // gamma_T
};

/// Tail-expectation profiles that the bounded / sub-linear kernel theorems
/// make non-increasing in r >= 0 (identity observable):
/// gauss_Tg: exp(c r^2/2) E[(X-mu) 1{X-mu >= r}]
/// gamma_T:  (ar+b)^(-b/a^2) exp(r/a) E[(X-mu) 1{X-mu >= r}]
inline TailBoundCurve monotone_profile(const KernelEvaluator& ev, MonotoneProfileKind kind,
                                       const MonotoneProfileParams& params,
                                       const std::vector<double>& r_grid) {
  const Distribution& d = ev.dist;
  const double mu = d.mean();
  QuadratureConfig cfg = ev.cfg;
  cfg.abs_tol = 1e-280;
  TailBoundCurve curve;
  curve.r_values = r_grid;
  std::vector<double> values(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    if (!(r >= 0.0)) throw std::invalid_argument("monotone_profile: requires r >= 0");
    const double v =
        expectation(d, [mu](double y) { return y - mu; }, d.right_tail_interval(mu + r), cfg)
            .value;
    double factor;
    if (kind == MonotoneProfileKind::gauss_Tg) {
      factor = std::exp(0.5 * params.c * r * r);
    } else {
      if (!(params.a > 0.0))
        throw std::invalid_argument("monotone_profile: gamma_T requires a > 0");
      factor = std::pow(params.a * r + params.b, -params.b / (params.a * params.a)) *
               std::exp(r / params.a);
    }
    values[i] = factor * v;
  }
  curve.series[kind == MonotoneProfileKind::gauss_Tg ? "gauss_Tg" : "gamma_T"] =
      std::move(values);
  return curve;
}

}  // namespace stein1d

#endif  // STEIN1D_CONCENTRATION_HPP
