#ifndef STEIN1D_TAILS_DENSITY_HPP
#define STEIN1D_TAILS_DENSITY_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "stein1d/concentration.hpp"
#include "stein1d/cov_identities.hpp"

namespace stein1d {

namespace detail {

// Kernel with a positivity check along reconstruction paths.
inline RealFn checked_tau(const KernelEvaluator& ev) {
  if (auto k = ev.dist.closed_form_kernel()) {
    auto tau = k->tau;
    return [tau](double y) {
      const double t = tau(y);
      if (!(t > 0.0))
        throw numerical_error("nonpositive kernel on the integration path at y = " +
                              std::to_string(y));
      return t;
    };
  }
  return [ev](double y) {
    const double t = stein_kernel(ev, y);
    if (!(t > 0.0))
      throw numerical_error("nonpositive kernel on the integration path at y = " +
                            std::to_string(y));
    return t;
  };
}

// Signed path integral Int_x0^x f dt (negative when x < x0).
inline double signed_path_integral(const RealFn& f, double x0, double x,
                                   const QuadratureConfig& cfg) {
  if (x == x0) return 0.0;
  const double v = integrate(f, Interval::bounded(std::min(x0, x), std::max(x0, x)), cfg).value;
  return x >= x0 ? v : -v;
}

}  // namespace detail

/// p(x) = E|X-mu| / (2 tau(x)) exp(-Int_mu^x (y-mu)/tau(y) dy).
inline double density_from_kernel(const KernelEvaluator& ev, double x) {
  const double mu = ev.dist.mean();
  const double abs_moment =
      expectation(ev.dist, [mu](double y) { return std::abs(y - mu); }, ev.cfg).value;
  auto tau = detail::checked_tau(ev);
  const double expo = detail::signed_path_integral(
      [&tau, mu](double y) { return (y - mu) / tau(y); }, mu, x, ev.cfg);
  return abs_moment / (2.0 * tau(x)) * std::exp(-expo);
}

/// density_from_kernel on a sweep of points: the moment and the exponent
/// path segments are computed once and reused by segment addition.
inline std::vector<double> density_from_kernel_grid(const KernelEvaluator& ev,
                                                    std::vector<double> xs) {
  const double mu = ev.dist.mean();
  const double abs_moment =
      expectation(ev.dist, [mu](double y) { return std::abs(y - mu); }, ev.cfg).value;
  auto tau = detail::checked_tau(ev);
  auto integrand = [&tau, mu](double y) { return (y - mu) / tau(y); };

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  std::vector<double> out(xs.size());
  // Walk outward from mu in both directions, reusing the running integral.
  double expo = 0.0, anchor = mu;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double x = xs[order[k]];
    if (x < mu) continue;
    expo += detail::signed_path_integral(integrand, anchor, x, ev.cfg);
    anchor = x;
    out[order[k]] = abs_moment / (2.0 * tau(x)) * std::exp(-expo);
  }
  expo = 0.0;
  anchor = mu;
  for (std::size_t k = order.size(); k-- > 0;) {
    const double x = xs[order[k]];
    if (x >= mu) continue;
    expo += detail::signed_path_integral(integrand, anchor, x, ev.cfg);
    anchor = x;
    out[order[k]] = abs_moment / (2.0 * tau(x)) * std::exp(-expo);
  }
  return out;
}

/// p(x) = E[h 1{X >= x0}] / Lbar_h(x) exp(-Int_x0^x h/Lbar_h), for centered h.
inline double density_from_h(const KernelEvaluator& ev, const RealFn& h, double x0, double x) {
  const Distribution& d = ev.dist;
  const double eh = expectation(d, h, ev.cfg).value;
  if (std::abs(eh) > 1e-7)
    throw std::invalid_argument("density_from_h: h must be centered (E[h] = 0)");
  auto lbar = [&](double y) {
    const double num = inverse_stein_numerator(ev, h, 0.0, y);
    const double p = d.pdf(y);
    const double v = num / p;
    if (!(v > 0.0))
      throw numerical_error("density_from_h: Lbar h is nonpositive at y = " + std::to_string(y));
    return v;
  };
  const double numerator = expectation(d, h, d.right_tail_interval(x0), ev.cfg).value;
  QuadratureConfig path_cfg = ev.cfg;
  path_cfg.max_subdivisions = 200;
  const double expo = detail::signed_path_integral(
      [&](double y) { return h(y) / lbar(y); }, x0, x, path_cfg);
  return numerator / lbar(x) * std::exp(-expo);
}

/// P(X >= x) = E[h 1{X >= x0}] (T_h(x)/h(x) - Int_x^b h' T_h / h^2), with
/// T_h(y) = exp(-Int_x0^y h/Lbar_h). Requires h > 0 on (x, b).
inline double tail_from_h(const KernelEvaluator& ev, const TestFunction& h, double x0,
                          double x) {
  const Distribution& d = ev.dist;
  const double eh = expectation(d, h.f, ev.cfg).value;
  if (std::abs(eh) > 1e-7)
    throw std::invalid_argument("tail_from_h: h must be centered (E[h] = 0)");
  auto lbar = [&](double y) {
    return inverse_stein_numerator(ev, h.f, 0.0, y) / d.pdf(y);
  };
  const double numerator = expectation(d, h.f, d.right_tail_interval(x0), ev.cfg).value;

  // Memoized path integral Psi(y) = Int_x0^y h/Lbar_h.
  auto psi_cache = std::make_shared<std::map<double, double>>();
  (*psi_cache)[x0] = 0.0;
  QuadratureConfig path_cfg = ev.cfg;
  path_cfg.max_subdivisions = 120;
  auto psi = [&, psi_cache](double y) {
    auto it = psi_cache->lower_bound(y);
    double anchor, base;
    if (it != psi_cache->end() &&
        (it == psi_cache->begin() || it->first - y <= y - std::prev(it)->first)) {
      anchor = it->first;
      base = it->second;
    } else {
      --it;
      anchor = it->first;
      base = it->second;
    }
    const double value =
        base + detail::signed_path_integral([&](double t) { return h.f(t) / lbar(t); }, anchor,
                                            y, path_cfg);
    (*psi_cache)[y] = value;
    return value;
  };

  auto h_checked = [&](double y) {
    const double v = h.f(y);
    if (!(v > 0.0))
      throw numerical_error("tail_from_h: h is nonpositive on (x, b) at y = " +
                            std::to_string(y));
    return v;
  };
  const double t_x = std::exp(-psi(x));
  // The correction integrand T_h/h^2 underflows to 0/0 once the density does;
  // clip the far end, whose true contribution is below the 1e-13 tail mass.
  Interval upper = d.right_tail_interval(x);
  upper.hi_singular = false;
  if (!upper.hi_finite() || d.pdf(upper.hi) <= 0.0)
    upper.hi = std::min(upper.hi, d.quantile(1.0 - 1e-13));
  QuadratureConfig outer_cfg = ev.cfg;
  outer_cfg.abs_tol = std::max(1e-13, 1e-8 * t_x / std::max(1.0, h_checked(x)));
  outer_cfg.rel_tol = 1e-7;
  auto correction = integrate(
      [&](double y) {
        const double hy = h_checked(y);
        return h.f_prime(y) * std::exp(-psi(y)) / (hy * hy);
      },
      upper, outer_cfg);
  return numerator * (t_x / h_checked(x) - correction.value);
}

/// tail_from_h specialized to the canonical h = Id - mu (so Lbar h = tau),
/// valid for x above the mean.
inline double tail_from_h(const KernelEvaluator& ev, double x0, double x) {
  const double mu = ev.dist.mean();
  TestFunction h{"id_centered", [mu](double y) { return y - mu; }, [](double) { return 1.0; },
                 1.0};
  return tail_from_h(ev, h, x0, x);
}

/// Lower tail bound variants. Values flagged up_to_constant carry an
/// undetermined positive multiplicative constant (returned as 1); only their
/// shape is assertable.
struct LowerTailBound {
  double value = 0.0;
  bool up_to_constant = false;
};

struct LowerTailVariant {
  enum class Kind { unif, unif_left, poly, limsup, prop52 } kind = Kind::unif;
  // poly
  double beta = 2.0;
  double s = 1.0;
  // limsup
  double alpha = 1.0;
  double delta = 1.0;
  // prop52
  enum class Prop52 { general, sigma_min, recip_quadratic, power } prop52 = Prop52::general;
  double c = 0.5;       // tau <= c x^2
  double c_minus = 0.5; // tau >= c_minus x^2
  double c_p = 1.0;     // tau >= c_p x^p
  double p = 1.0;
  double x0 = 1.0;

  static LowerTailVariant unif() { return {}; }
  static LowerTailVariant unif_left() {
    LowerTailVariant v;
    v.kind = Kind::unif_left;
    return v;
  }
  static LowerTailVariant poly(double beta, double s) {
    LowerTailVariant v;
    v.kind = Kind::poly;
    v.beta = beta;
    v.s = s;
    return v;
  }
  static LowerTailVariant limsup(double alpha, double delta) {
    LowerTailVariant v;
    v.kind = Kind::limsup;
    v.alpha = alpha;
    v.delta = delta;
    return v;
  }
  static LowerTailVariant prop52_general(double c, double x0) {
    LowerTailVariant v;
    v.kind = Kind::prop52;
    v.prop52 = Prop52::general;
    v.c = c;
    v.x0 = x0;
    return v;
  }
  static LowerTailVariant prop52_sigma_min() {
    LowerTailVariant v;
    v.kind = Kind::prop52;
    v.prop52 = Prop52::sigma_min;
    return v;
  }
  static LowerTailVariant prop52_recip_quadratic(double c_minus, double x0) {
    LowerTailVariant v;
    v.kind = Kind::prop52;
    v.prop52 = Prop52::recip_quadratic;
    v.c_minus = c_minus;
    v.x0 = x0;
    return v;
  }
  static LowerTailVariant prop52_power(double c_p, double p, double x0) {
    LowerTailVariant v;
    v.kind = Kind::prop52;
    v.prop52 = Prop52::power;
    v.c_p = c_p;
    v.p = p;
    v.x0 = x0;
    return v;
  }
};

namespace detail {

// Verify a pointwise hypothesis on a 200-point log grid from s to the
// centered 1-1e-9 quantile.
template <typename Check>
void verify_on_log_grid(const KernelEvaluator& ev, double s, const Check& ok,
                        const char* what) {
  const double mu = ev.dist.mean();
  const double far = ev.dist.quantile(1.0 - 1e-9) - mu;
  if (!(far > s)) throw numerical_error(std::string("hypothesis not established: ") + what);
  const double ratio = std::pow(far / s, 1.0 / 199.0);
  double t = s;
  for (int i = 0; i < 200; ++i, t *= ratio) {
    if (!ok(t)) throw numerical_error(std::string("hypothesis not established: ") + what);
  }
}

}  // namespace detail

inline LowerTailBound lower_tail_bound(const KernelEvaluator& ev, const KernelProfile& profile,
                                       double x, const LowerTailVariant& variant) {
  using Kind = LowerTailVariant::Kind;
  using P52 = LowerTailVariant::Prop52;
  const Distribution& d = ev.dist;
  const double mu = d.mean();
  if (!(x >= 0.0)) throw std::invalid_argument("lower_tail_bound: requires x >= 0");
  auto need_sigma = [&]() {
    if (!profile.inf_bound || !(*profile.inf_bound > 0.0))
      throw numerical_error("hypothesis not established: kernel not bounded below");
    return *profile.inf_bound;
  };
  auto tau_centered = detail::checked_tau(ev);
  LowerTailBound out;
  switch (variant.kind) {
    case Kind::unif: {
      const double s2 = need_sigma();
      const double mean_plus =
          expectation(d, [mu](double y) { return y - mu; }, d.right_tail_interval(mu), ev.cfg)
              .value;
      out.value = mean_plus * std::exp(-x * x / (2.0 * s2));
      return out;
    }
    case Kind::unif_left: {
      const double s2 = need_sigma();
      const double mean_minus =
          expectation(d, [mu](double y) { return mu - y; }, d.left_tail_interval(mu), ev.cfg)
              .value;
      out.value = mean_minus * std::exp(-x * x / (2.0 * s2));
      return out;
    }
    case Kind::poly: {
      const double s2 = need_sigma();
      if (!(variant.beta > 1.0))
        throw std::invalid_argument("lower_tail_bound: poly requires beta > 1");
      if (!(x >= variant.s))
        throw std::invalid_argument("lower_tail_bound: poly requires x >= s");
      // t^(1+beta) p(mu + t) nonincreasing on [s, inf).
      double prev = inf;
      detail::verify_on_log_grid(
          ev, variant.s,
          [&](double t) {
            const double v = std::pow(t, 1.0 + variant.beta) * d.pdf(mu + t);
            const bool ok = v <= prev * (1.0 + 1e-9);
            prev = v;
            return ok;
          },
          "t^(1+beta) p(mu+t) is not nonincreasing on [s, inf)");
      const double mean_plus =
          expectation(d, [mu](double y) { return y - mu; }, d.right_tail_interval(mu), ev.cfg)
              .value;
      out.value = (1.0 - 1.0 / variant.beta) * mean_plus / x * std::exp(-x * x / (2.0 * s2));
      return out;
    }
    case Kind::limsup: {
      const double s2 = need_sigma();
      if (!(variant.alpha > 0.0 && variant.alpha < 2.0))
        throw std::invalid_argument("lower_tail_bound: limsup requires alpha in (0,2)");
      if (!(variant.delta > 0.0 && variant.delta < 2.0))
        throw std::invalid_argument("lower_tail_bound: limsup requires delta in (0,2)");
      detail::verify_on_log_grid(
          ev, 1.0,
          [&](double t) {
            return std::pow(t, -variant.alpha) * std::log(tau_centered(mu + t)) < 1e6;
          },
          "limsup growth condition on log tau");
      out.value = std::exp(-x * x / ((2.0 - variant.delta) * s2)) / std::max(x, 1e-300);
      out.up_to_constant = true;
      return out;
    }
    case Kind::prop52: {
      switch (variant.prop52) {
        case P52::general: {
          if (!(variant.c > 0.0 && variant.c < 1.0))
            throw std::invalid_argument("lower_tail_bound: prop52 requires c in (0,1)");
          detail::verify_on_log_grid(
              ev, variant.x0,
              [&](double t) { return tau_centered(mu + t) <= variant.c * t * t * (1.0 + 1e-9); },
              "tau <= c x^2 beyond x0");
          const double expo = detail::signed_path_integral(
              [&](double y) { return (y - mu) / tau_centered(y); }, mu, mu + x, ev.cfg);
          out.value = std::exp(-expo) / std::max(x, 1e-300);
          out.up_to_constant = true;
          return out;
        }
        case P52::sigma_min: {
          const double s2 = need_sigma();
          out.value = std::exp(-x * x / (2.0 * s2)) / std::max(x, 1e-300);
          out.up_to_constant = true;
          return out;
        }
        case P52::recip_quadratic: {
          if (!(variant.c_minus > 0.0))
            throw std::invalid_argument("lower_tail_bound: requires c_minus > 0");
          detail::verify_on_log_grid(
              ev, variant.x0,
              [&](double t) {
                return tau_centered(mu + t) >= variant.c_minus * t * t * (1.0 - 1e-9);
              },
              "tau >= c_minus x^2 beyond x0");
          out.value = std::pow(x, -(1.0 + 1.0 / variant.c_minus));
          out.up_to_constant = true;
          return out;
        }
        case P52::power: {
          if (!(variant.p > 0.0 && variant.p < 2.0) || !(variant.c_p > 0.0))
            throw std::invalid_argument("lower_tail_bound: requires p in (0,2), c_p > 0");
          detail::verify_on_log_grid(
              ev, variant.x0,
              [&](double t) {
                return tau_centered(mu + t) >= variant.c_p * std::pow(t, variant.p) * (1.0 - 1e-9);
              },
              "tau >= c_p x^p beyond x0");
          out.value = std::exp(-std::pow(x, 2.0 - variant.p) /
                               ((2.0 - variant.p) * variant.c_p)) /
                      std::max(x, 1e-300);
          out.up_to_constant = true;
          return out;
        }
      }
    }
  }
  throw std::logic_error("lower_tail_bound: unknown variant");
}

/// R(x) = exp(x^2 / 2 sigma^2_min) Int_x^inf y p~(y) dy on the centered
/// variable, nondecreasing on R+ when tau >= sigma^2_min > 0.
inline TailBoundCurve monotone_R_profile(const KernelEvaluator& ev, const KernelProfile& profile,
                                         const std::vector<double>& x_grid) {
  if (!profile.inf_bound || !(*profile.inf_bound > 0.0))
    throw numerical_error("hypothesis not established: kernel not bounded below");
  const double s2 = *profile.inf_bound;
  const Distribution& d = ev.dist;
  const double mu = d.mean();
  QuadratureConfig cfg = ev.cfg;
  cfg.abs_tol = 1e-280;
  TailBoundCurve curve;
  curve.r_values = x_grid;
  std::vector<double> values(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    const double v =
        expectation(d, [mu](double y) { return y - mu; }, d.right_tail_interval(mu + x), cfg)
            .value;
    values[i] = std::exp(0.5 * x * x / s2) * v;
  }
  curve.series["R"] = std::move(values);
  return curve;
}

}  // namespace stein1d

#endif  // STEIN1D_TAILS_DENSITY_HPP
