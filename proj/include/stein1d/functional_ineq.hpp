#ifndef STEIN1D_FUNCTIONAL_INEQ_HPP
#define STEIN1D_FUNCTIONAL_INEQ_HPP

#include <cmath>
#include <map>
#include <string>

#include "stein1d/cov_identities.hpp"
#include "stein1d/profile.hpp"

namespace stein1d {

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool holds = false;
  std::map<std::string, double> constants;
  std::string notes;
};

namespace detail {

inline void finish_report(InequalityReport& rep, double tolerance = 1e-9) {
  rep.slack = rep.rhs - rep.lhs;
  rep.holds = rep.slack >= -tolerance * (1.0 + std::abs(rep.lhs) + std::abs(rep.rhs)) ||
              rep.rhs == inf;
}

// E[tau w] over the full support: uses the closed form when present, else the
// kernel numerator (which stays evaluable arbitrarily deep in the tails).
inline Estimate kernel_weighted_expectation(const KernelEvaluator& ev, const RealFn& w) {
  if (auto k = ev.dist.closed_form_kernel()) {
    auto tau = k->tau;
    return expectation(ev.dist, [tau, &w](double x) { return tau(x) * w(x); }, ev.cfg);
  }
  return integrate(
      [&ev, &w](double x) { return stein_kernel_numerator(ev, x).value * w(x); },
      ev.dist.support(), ev.cfg);
}

}  // namespace detail

/// Var(f) <= E[tau f'^2]; equality at f = Id.
inline InequalityReport weighted_poincare_report(const KernelEvaluator& ev,
                                                 const TestFunction& f) {
  InequalityReport rep;
  rep.name = "weighted_poincare";
  const Distribution& d = ev.dist;
  const double ef = expectation(d, f.f, ev.cfg).value;
  auto var = expectation(
      d, [&](double x) { const double c = f.f(x) - ef; return c * c; }, ev.cfg);
  if (!var.converged) throw numerical_error("weighted_poincare: Var(f) diverges");
  rep.lhs = var.value;
  auto rhs = detail::kernel_weighted_expectation(
      ev, [&f](double x) { const double fp = f.f_prime(x); return fp * fp; });
  if (!rhs.converged || !std::isfinite(rhs.value) || rhs.value > 1e30) {
    rep.rhs = inf;
    rep.notes = "rhs quadrature did not converge; reported as divergent";
  } else {
    rep.rhs = rhs.value;
  }
  rep.constants["var"] = rep.lhs;
  detail::finish_report(rep, 1e-7);
  return rep;
}

namespace detail {

struct MuckenhouptSide {
  double value = inf;   // the supremum
  double argmax = 0.0;
  bool diverged = false;
};

// sup over x on one side of the median of  tail_weight(tail prob) * Int dt/n.
// The inner integral accumulates once along a survival-spaced grid.
template <typename TailFn>
MuckenhouptSide muckenhoupt_side(const Distribution& d, const RealFn& n, bool upper,
                                 const TailFn& tail_weight, int grid_points = 512) {
  MuckenhouptSide side;
  const double m = d.quantile(0.5);
  const double s_min = 1e-7;
  const int N = grid_points;
  const double rho = std::pow(s_min / 0.5, 1.0 / (N - 1));

  QuadratureConfig seg_cfg;
  seg_cfg.abs_tol = 1e-280;
  seg_cfg.rel_tol = 1e-9;
  seg_cfg.max_subdivisions = 200;

  auto recip = [&n](double t) { return 1.0 / n(t); };

  // Integrability probe at the median: slice [m, q] into geometric shells.
  // If the shell contributions stop shrinking, 1/n is not integrable at m
  // (the computed median's rounding would otherwise turn the divergence into
  // an arbitrary huge value).
  {
    const double q = upper ? d.quantile(0.75) : d.quantile(0.25);
    const double w = std::abs(q - m);
    if (w > 0.0) {
      double prev_slice = inf;
      int flat = 0;
      for (int k = 0; k <= 20; ++k) {
        const double d_hi = w * std::pow(4.0, -k);
        const double d_lo = 0.25 * d_hi;
        Estimate slice;
        try {
          slice = upper ? integrate(recip, Interval::bounded(m + d_lo, m + d_hi), seg_cfg)
                        : integrate(recip, Interval::bounded(m - d_hi, m - d_lo), seg_cfg);
        } catch (const numerical_error&) {
          side.diverged = true;
          return side;
        }
        if (k > 12 && slice.value > 1e-300 && slice.value > 0.9 * prev_slice) {
          if (++flat >= 3) {
            side.diverged = true;
            return side;
          }
        } else {
          flat = 0;
        }
        prev_slice = slice.value;
      }
    }
  }

  double prev_x = m;
  double cum = 0.0;
  double best = -inf, best_x = m, best_cum = 0.0, best_prev = m;
  double s = 0.5;
  for (int k = 0; k < N; ++k) {
    const double x = upper ? d.quantile(1.0 - s) : d.quantile(s);
    if ((upper && x > prev_x) || (!upper && x < prev_x)) {
      Estimate seg;
      try {
        seg = upper ? integrate(recip, Interval::bounded(prev_x, x), seg_cfg)
                    : integrate(recip, Interval::bounded(x, prev_x), seg_cfg);
      } catch (const numerical_error&) {
        side.diverged = true;
        return side;
      }
      // Error-dominated non-convergence marks a non-integrable 1/n.
      if (!seg.converged &&
          seg.error_bound > 1e-3 * std::max(1.0, std::abs(cum) + std::abs(seg.value))) {
        side.diverged = true;
        return side;
      }
      cum += seg.value;
      const double tail = upper ? d.survival(x) : d.cdf(x);
      const double val = tail_weight(tail) * cum;
      if (val > best) {
        best = val;
        best_x = x;
        best_cum = cum;
        best_prev = prev_x;
      }
      prev_x = x;
    }
    s *= rho;
  }
  // Golden refinement around the best grid point, re-integrating locally.
  auto local = [&](double x) {
    double delta = 0.0;
    if (x != best_x) {
      const double sign = ((x > best_x) == upper) ? 1.0 : -1.0;
      delta = sign * integrate(recip,
                               Interval::bounded(std::min(x, best_x), std::max(x, best_x)),
                               seg_cfg)
                         .value;
    }
    const double tail = upper ? d.survival(x) : d.cdf(x);
    return tail_weight(tail) * (best_cum + delta);
  };
  const double lo = upper ? best_prev : best_x;
  const double hi = upper ? best_x : best_prev;
  if (hi > lo) {
    try {
      auto [arg, val] = refine_supremum(local, Interval::bounded(lo, hi), 32);
      if (val > best) {
        best = val;
        best_x = arg;
      }
    } catch (const numerical_error&) {
      // keep the grid value
    }
  }
  side.value = best;
  side.argmax = best_x;
  return side;
}

}  // namespace detail

/// Muckenhoupt constants for Var_eta(f) <= C_P Int f'^2 n dt:
/// B+ = sup_{x>m} eta([x,inf)) Int_m^x dt/n, B- mirrored;
/// max{B+,B-} <= C_P <= 4 max{B+,B-}.
inline InequalityReport muckenhoupt_poincare(const Distribution& d, const RealFn& weight_density,
                                             int grid_points = 512) {
  InequalityReport rep;
  rep.name = "muckenhoupt_poincare";
  auto ident = [](double tail) { return tail; };
  const auto plus = detail::muckenhoupt_side(d, weight_density, true, ident, grid_points);
  const auto minus = detail::muckenhoupt_side(d, weight_density, false, ident, grid_points);
  const double b_plus = plus.diverged ? inf : plus.value;
  const double b_minus = minus.diverged ? inf : minus.value;
  const double m = std::max(b_plus, b_minus);
  rep.constants["B_plus"] = b_plus;
  rep.constants["B_minus"] = b_minus;
  rep.constants["CP_lower"] = m;
  rep.constants["CP_upper"] = 4.0 * m;
  rep.lhs = m;
  rep.rhs = 4.0 * m;
  rep.holds = std::isfinite(m);
  rep.slack = rep.rhs - rep.lhs;
  if (!rep.holds) rep.notes = "divergent inner integral: no finite Poincare constant";
  return rep;
}

/// Ent(g^2) = E[g^2 log g^2] - E[g^2] log E[g^2] >= 0.
inline double entropy(const Distribution& d, const TestFunction& g,
                      const QuadratureConfig& cfg = {}) {
  auto vlogv = [&](double x) {
    const double v = g.f(x) * g.f(x);
    return v > 0.0 ? v * std::log(v) : 0.0;
  };
  auto e_vlogv = expectation(d, vlogv, cfg);
  auto e_v = expectation(d, [&](double x) { const double v = g.f(x); return v * v; }, cfg);
  if (!e_vlogv.converged || !e_v.converged || !(e_v.value > 0.0))
    throw numerical_error("entropy: integrals diverge");
  return e_vlogv.value - e_v.value * std::log(e_v.value);
}

/// Muckenhoupt-type log-Sobolev constants with Lambda(u) = -u log u capped at
/// its maximum 1/e: L+ = sup_{x>m} Lambda(eta([x,inf))) Int_m^x dt/n.
/// 1/150 <= C_LS / max{L-, L+} <= 468.
inline InequalityReport muckenhoupt_logsobolev(const Distribution& d,
                                               const RealFn& weight_density,
                                               int grid_points = 512) {
  InequalityReport rep;
  rep.name = "muckenhoupt_logsobolev";
  auto lambda = [](double u) {
    if (u <= 0.0) return 0.0;
    if (u >= std::exp(-1.0)) return std::exp(-1.0);
    return -u * std::log(u);
  };
  const auto plus = detail::muckenhoupt_side(d, weight_density, true, lambda, grid_points);
  const auto minus = detail::muckenhoupt_side(d, weight_density, false, lambda, grid_points);
  const double l_plus = plus.diverged ? inf : plus.value;
  const double l_minus = minus.diverged ? inf : minus.value;
  const double m = std::max(l_plus, l_minus);
  rep.constants["L_plus"] = l_plus;
  rep.constants["L_minus"] = l_minus;
  rep.constants["CLS_lower"] = m / 150.0;
  rep.constants["CLS_upper"] = 468.0 * m;
  rep.lhs = m / 150.0;
  rep.rhs = 468.0 * m;
  rep.holds = std::isfinite(m);
  rep.slack = rep.rhs - rep.lhs;
  if (!rep.holds) rep.notes = "divergent inner integral: no finite log-Sobolev constant";
  return rep;
}

/// Ent(g^2) <= C_LS Int tau^2 g'^2 dnu, asserted against the criterion's
/// upper constant 468 max{L-,L+} since the sharp constant is existence-only.
inline InequalityReport weighted_logsobolev_report(const KernelEvaluator& ev,
                                                   const TestFunction& g) {
  InequalityReport rep;
  rep.name = "weighted_logsobolev";
  const Distribution& d = ev.dist;
  rep.lhs = entropy(d, g, ev.cfg);

  Estimate rhs0;
  if (auto k = d.closed_form_kernel()) {
    auto tau = k->tau;
    rhs0 = expectation(
        d,
        [tau, &g](double x) {
          const double t = tau(x), fp = g.f_prime(x);
          return t * t * fp * fp;
        },
        ev.cfg);
  } else {
    // tau^2 p = numerator^2 / p; clip where the density underflows.
    rhs0 = integrate(
        [&](double x) {
          const double num = stein_kernel_numerator(ev, x).value;
          const double fp = g.f_prime(x);
          return num * num / ev.dist.pdf(x) * fp * fp;
        },
        d.clipped_interior(1e-9), ev.cfg);
    rep.notes = "rhs integral clipped at the 1e-9 quantiles (no closed-form kernel)";
  }
  const double rhs0_v = (rhs0.converged && std::isfinite(rhs0.value)) ? rhs0.value : inf;
  rep.constants["rhs0"] = rhs0_v;

  RealFn weight;
  if (auto k = d.closed_form_kernel()) {
    auto tau = k->tau;
    weight = [tau, d](double t) { return tau(t) * tau(t) * d.pdf(t); };
  } else {
    KernelEvaluator direct(d, KernelMethod::direct_integral, ev.cfg);
    weight = [direct](double t) {
      const double num = stein_kernel_numerator(direct, t).value;
      return num * num / direct.dist.pdf(t);
    };
  }
  auto muck = muckenhoupt_logsobolev(d, weight, 256);
  for (const auto& [k, v] : muck.constants) rep.constants[k] = v;
  const double cls_upper = muck.constants["CLS_upper"];
  rep.rhs = std::isfinite(cls_upper) && std::isfinite(rhs0_v) ? cls_upper * rhs0_v : inf;
  detail::finish_report(rep, 1e-7);
  return rep;
}

enum class LogSobolevFeasibility { sufficient, necessary_violated, inconclusive };

inline const char* to_string(LogSobolevFeasibility f) {
  switch (f) {
    case LogSobolevFeasibility::sufficient: return "sufficient";
    case LogSobolevFeasibility::necessary_violated: return "necessary_violated";
    case LogSobolevFeasibility::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Classification of Ent(g^2) <= C Int tau^2 g'^2 dnu feasibility from the
/// declared per-edge kernel asymptotics.
/// Finite edge: passes when the declared tau exponent is <= 1, i.e. 1/tau is
/// integrable up to the log-divergent borderline (exponent exactly 1, the
/// generic finite-edge rate).
/// Infinite edge: growth exponent in [0,2) passes via tau <= c+ x^2/log x,
/// exponent >= 1 via tau >= c- x; a negative exponent (tau -> 0) violates the
/// necessary condition.
inline LogSobolevFeasibility logsobolev_feasibility(const KernelProfile& profile,
                                                    const Interval& support,
                                                    std::string* notes = nullptr) {
  auto edge_check = [&](const std::optional<EdgeAsymptotic>& asym, bool finite,
                        const char* side) -> std::optional<bool> {
    if (!asym)
      throw std::invalid_argument(std::string("logsobolev_feasibility: missing declared ") +
                                  side + " edge asymptotics");
    if (finite) {
      const bool ok = asym->exponent <= 1.0 + 1e-12;
      if (notes && ok)
        *notes += std::string(side) + ": reciprocal kernel integrable at the finite edge; ";
      return ok ? std::optional<bool>(true) : std::nullopt;
    }
    if (asym->exponent < 0.0) return false;  // tau -> 0 at an infinite edge
    if (asym->exponent >= 1.0) {
      if (notes) *notes += std::string(side) + ": tau >= c- x for large x; ";
      return true;
    }
    if (asym->exponent < 2.0) {
      if (notes) *notes += std::string(side) + ": tau <= c+ x^2/log x and bounded below; ";
      return true;
    }
    return std::nullopt;
  };
  const auto lo = edge_check(profile.lo_edge, support.lo_finite(), "lower");
  const auto hi = edge_check(profile.hi_edge, support.hi_finite(), "upper");
  if ((lo && !*lo) || (hi && !*hi)) return LogSobolevFeasibility::necessary_violated;
  if (lo && hi && *lo && *hi) return LogSobolevFeasibility::sufficient;
  return LogSobolevFeasibility::inconclusive;
}

/// Asymmetric Brascamp-Lieb report: |Cov(g,h)| against the four kernel-based
/// right-hand sides. Conjugate exponents 1/p + 1/q = 1; q may be infinite.
inline InequalityReport asymmetric_bl_report(const KernelEvaluator& ev, const TestFunction& g,
                                             const TestFunction& h, double p, double q) {
  const bool q_inf = std::isinf(q);
  if (!q_inf && std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-12)
    throw std::invalid_argument("asymmetric_bl_report: requires 1/p + 1/q = 1");
  if (q_inf && p != 1.0)
    throw std::invalid_argument("asymmetric_bl_report: q = inf requires p = 1");

  InequalityReport rep;
  rep.name = "asymmetric_brascamp_lieb";
  const Distribution& d = ev.dist;
  auto kernel = d.closed_form_kernel();
  if (!kernel) throw std::invalid_argument("asymmetric_bl_report: requires a closed-form kernel");
  auto tau = kernel->tau;

  rep.lhs = std::abs(covariance_direct(d, g, h, ev.cfg));

  const Interval clip = d.clipped_interior(1e-6);
  auto lp_norm = [&](const RealFn& u, double r) {
    auto est = expectation(
        d, [&u, r](double x) { return std::pow(std::abs(u(x)), r); }, ev.cfg);
    if (!est.converged || !std::isfinite(est.value)) return inf;
    return std::pow(est.value, 1.0 / r);
  };
  auto sup_norm = [&](const RealFn& u) {
    auto [arg, val] = refine_supremum([&u](double x) { return std::abs(u(x)); }, clip, 512);
    (void)arg;
    return val;
  };

  const double g_tau_p =
      p == 1.0 ? lp_norm([&](double x) { return g.f_prime(x) * tau(x); }, 1.0)
               : lp_norm([&](double x) { return g.f_prime(x) * tau(x); }, p);

  const double eh = expectation(d, h.f, ev.cfg).value;
  auto lbar_over_tau = [&](double x) {
    return inverse_stein_numerator(ev, h.f, eh, x) / (tau(x) * d.pdf(x));
  };

  double rhs_gene;
  if (q_inf) {
    rhs_gene = g_tau_p * sup_norm(lbar_over_tau);
  } else {
    rhs_gene = g_tau_p * lp_norm(lbar_over_tau, q);
  }
  rep.constants["rhs_gene"] = rhs_gene;
  rep.constants["holds_gene"] = rep.lhs <= rhs_gene * (1.0 + 1e-7) ? 1.0 : 0.0;

  double rhs_min = rhs_gene;
  if (q_inf) {
    const double h_sup = h.lipschitz_bound ? *h.lipschitz_bound : sup_norm(h.f_prime);
    const double rhs_1i = h_sup * g_tau_p;
    rep.constants["rhs_1_infty"] = rhs_1i;
    rep.constants["holds_1_infty"] = rep.lhs <= rhs_1i * (1.0 + 1e-7) ? 1.0 : 0.0;
    rhs_min = std::min(rhs_min, rhs_1i);
  } else {
    // m(x) = p(x)^-1 Int k(x,y)/tau(y) dy, via the kink split.
    auto m_fn = [&](double x) {
      QuadratureConfig cfg = ev.cfg;
      cfg.abs_tol = 1e-280;
      Interval left = d.left_tail_interval(x);
      left.lo_singular = false;
      Interval right = d.right_tail_interval(x);
      right.hi_singular = false;
      const double int_F =
          integrate([&](double y) { return d.cdf(y) / tau(y); }, left, cfg).value;
      const double int_S =
          integrate([&](double y) { return d.survival(y) / tau(y); }, right, cfg).value;
      return (d.survival(x) * int_F + d.cdf(x) * int_S) / d.pdf(x);
    };
    auto est_pq = expectation(
        d, [&](double x) { return std::pow(std::abs(h.f_prime(x)), q) * m_fn(x); },
        d.clipped_interior(1e-8), ev.cfg);
    const double rhs_pq =
        est_pq.converged ? g_tau_p * std::pow(est_pq.value, 1.0 / q) : inf;
    rep.constants["rhs_p_q"] = rhs_pq;
    rep.constants["holds_p_q"] = rep.lhs <= rhs_pq * (1.0 + 1e-7) ? 1.0 : 0.0;
    if (std::isfinite(rhs_pq)) rhs_min = std::min(rhs_min, rhs_pq);

    // sigma^2_min as the clipped essential infimum of tau.
    auto [arg_min, neg_min] =
        refine_supremum([&](double x) { return -tau(x); }, clip, 512);
    (void)arg_min;
    const double sigma2 = -neg_min;
    if (sigma2 > 0.0) {
      // ||h' tau^(1/q)||_q = (E[|h'|^q tau])^(1/q)
      auto h_tau = expectation(
          d, [&](double x) { return std::pow(std::abs(h.f_prime(x)), q) * tau(x); }, ev.cfg);
      const double rhs_pq2 =
          h_tau.converged ? g_tau_p * std::pow(h_tau.value, 1.0 / q) / sigma2 : inf;
      rep.constants["sigma2_min"] = sigma2;
      rep.constants["rhs_p_q_2"] = rhs_pq2;
      rep.constants["holds_p_q_2"] = rep.lhs <= rhs_pq2 * (1.0 + 1e-7) ? 1.0 : 0.0;
      if (std::isfinite(rhs_pq2)) rhs_min = std::min(rhs_min, rhs_pq2);
    } else {
      rep.notes += "sigma2_min variant skipped: kernel infimum is zero; ";
    }
  }
  rep.rhs = rhs_min;
  detail::finish_report(rep, 1e-7);
  return rep;
}

/// Is(nu) = ess inf p / min{F, 1-F} plus the quantile lower estimate
/// min{ alpha^-1 min p on [q_a, q_1-a], min{mu-q_a, q_1-a - mu}/||tau||_inf }.
inline InequalityReport isoperimetric_constant(const Distribution& d, double alpha = 0.25) {
  InequalityReport rep;
  rep.name = "isoperimetric";
  auto ratio = [&d](double x) {
    const double m = std::min(d.cdf(x), d.survival(x));
    return m > 0.0 ? d.pdf(x) / m : inf;
  };
  const Interval clip = d.clipped_interior(1e-6);
  auto [arg, neg] = refine_supremum([&ratio](double x) { return -ratio(x); }, clip, 512);
  (void)arg;
  const double is = -neg;
  rep.constants["Is"] = is;

  const double mu = d.mean();
  const double q_lo = d.quantile(alpha);
  const double q_hi = d.quantile(1.0 - alpha);
  double quantile_bound = 0.0;
  if (q_lo < mu && mu < q_hi) {
    auto [arg_p, neg_p] =
        refine_supremum([&d](double x) { return -d.pdf(x); }, Interval::bounded(q_lo, q_hi), 256);
    (void)arg_p;
    const double min_p = -neg_p;
    KernelEvaluator ev(d);
    double tau_sup = inf;
    if (auto k = d.closed_form_kernel()) {
      tau_sup = k->sup_norm;
    } else {
      auto [a2, v2] = refine_supremum([&ev](double x) { return stein_kernel(ev, x); }, clip, 256);
      (void)a2;
      const auto lo_asym = d.lo_kernel_asymptotic();
      const auto hi_asym = d.hi_kernel_asymptotic();
      const bool unbounded = (!d.support().lo_finite() && lo_asym && lo_asym->exponent > 0.0) ||
                             (!d.support().hi_finite() && hi_asym && hi_asym->exponent > 0.0);
      tau_sup = unbounded ? inf : v2;
    }
    const double mills = std::min(mu - q_lo, q_hi - mu) / tau_sup;
    quantile_bound = std::min(min_p / alpha, mills);
  }
  rep.constants["Is_lower_quantile"] = quantile_bound;
  rep.constants["alpha"] = alpha;
  rep.lhs = quantile_bound;
  rep.rhs = is;
  detail::finish_report(rep, 1e-7);
  return rep;
}

}  // namespace stein1d

#endif  // STEIN1D_FUNCTIONAL_INEQ_HPP
