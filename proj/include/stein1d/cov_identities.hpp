#ifndef STEIN1D_COV_IDENTITIES_HPP
#define STEIN1D_COV_IDENTITIES_HPP

#include <cmath>
#include <random>
#include <string>

#include "stein1d/stein_core.hpp"

namespace stein1d {

/// Labeled test function with its analytic derivative.
struct TestFunction {
  std::string label;
  RealFn f;
  RealFn f_prime;
  std::optional<double> lipschitz_bound;
};

/// Spot-checks f_prime against central differences at 5 random interior
/// points; throws when the declared derivative is wrong.
inline void validate_test_function(const TestFunction& tf, const Interval& iv,
                                   unsigned seed = 20240817) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 5; ++i) {
    const double x = iv.lo + (iv.hi - iv.lo) * u(rng);
    const double fd = derivative(tf.f, x);
    if (std::abs(fd - tf.f_prime(x)) > 1e-5 * (1.0 + std::abs(fd)))
      throw std::invalid_argument("TestFunction '" + tf.label +
                                  "': f_prime disagrees with finite differences");
  }
}

/// Cov(g, h) by direct quadrature of (g - Eg)(h - Eh).
inline double covariance_direct(const Distribution& d, const TestFunction& g,
                                const TestFunction& h, const QuadratureConfig& cfg = {}) {
  const double eg = expectation(d, g.f, cfg).value;
  const double eh = expectation(d, h.f, cfg).value;
  auto est = expectation(
      d, [&](double x) { return (g.f(x) - eg) * (h.f(x) - eh); }, cfg);
  if (!est.converged) throw numerical_error("covariance_direct: divergent moment");
  return est.value;
}

/// Cov(g, h) as the double integral of g'(x) k(x,y) h'(y) over the support
/// square, iterated with a tighter inner tolerance. For unbounded supports
/// the square is clipped at the 1e-12 quantile box (1e-8 leaves a deficit
/// above 1e-5 for polynomially growing derivatives under gamma-like tails);
/// the clipped remainder is bounded through
/// k(x,y) <= sqrt(F S)(x) sqrt(F S)(y) and reported in the Estimate's error.
inline Estimate covariance_hoeffding_estimate(const Distribution& d, const TestFunction& g,
                                              const TestFunction& h,
                                              const QuadratureConfig& cfg = {}) {
  const Interval sup = d.support();
  const bool unbounded = !sup.lo_finite() || !sup.hi_finite();
  const double clip = 1e-12;
  Interval box = sup;
  if (unbounded) box = Interval::bounded(d.quantile(clip), d.quantile(1.0 - clip));

  QuadratureConfig inner_cfg = cfg;
  inner_cfg.abs_tol = 0.1 * cfg.abs_tol;
  inner_cfg.rel_tol = 0.1 * cfg.rel_tol;

  // Inner integral Int k(x,y) h'(y) dy, split at the kink y = x.
  auto inner = [&](double x) {
    const double Fx = d.cdf(x);
    const double Sx = d.survival(x);
    const auto left = integrate([&](double y) { return d.cdf(y) * h.f_prime(y); },
                                Interval{box.lo, x, false, false}, inner_cfg);
    const auto right = integrate([&](double y) { return d.survival(y) * h.f_prime(y); },
                                 Interval{x, box.hi, false, false}, inner_cfg);
    return Sx * left.value + Fx * right.value;
  };

  auto outer = integrate([&](double x) { return g.f_prime(x) * inner(x); },
                         Interval{box.lo, box.hi, false, false}, cfg);

  Estimate out = outer;
  if (unbounded) {
    // k(x,y) <= sqrt(F(x)S(x)) sqrt(F(y)S(y)); bound the three clipped strips.
    auto envelope = [&d](const RealFn& fp) {
      return [&d, fp](double t) {
        const double fs = std::max(0.0, d.cdf(t) * d.survival(t));
        return fs > 0.0 ? std::abs(fp(t)) * std::sqrt(fs) : 0.0;
      };
    };
    QuadratureConfig rem_cfg;
    rem_cfg.rel_tol = 1e-4;
    rem_cfg.abs_tol = 1e-14;
    const double g_all = integrate(envelope(g.f_prime), sup, rem_cfg).value;
    const double h_all = integrate(envelope(h.f_prime), sup, rem_cfg).value;
    double g_strip = integrate(envelope(g.f_prime), Interval{sup.lo, box.lo, false, false},
                               rem_cfg)
                         .value +
                     integrate(envelope(g.f_prime), Interval{box.hi, sup.hi, false, false},
                               rem_cfg)
                         .value;
    double h_strip = integrate(envelope(h.f_prime), Interval{sup.lo, box.lo, false, false},
                               rem_cfg)
                         .value +
                     integrate(envelope(h.f_prime), Interval{box.hi, sup.hi, false, false},
                               rem_cfg)
                         .value;
    out.error_bound += g_strip * h_all + g_all * h_strip;
  }
  return out;
}

inline double covariance_hoeffding(const Distribution& d, const TestFunction& g,
                                   const TestFunction& h, const QuadratureConfig& cfg = {}) {
  return covariance_hoeffding_estimate(d, g, h, cfg).value;
}

/// Cov(g, h) = Int g'(x) Lh(x) dx with Lh the unnormalized inverse Stein
/// operator (single quadrature; no division by the density).
inline double covariance_inverse_operator(const Distribution& d, const TestFunction& g,
                                          const TestFunction& h,
                                          const QuadratureConfig& cfg = {}) {
  KernelEvaluator ev(d, KernelMethod::direct_integral, cfg);
  const double eh = expectation(d, h.f, cfg).value;
  Interval iv = d.support();
  iv.lo_singular = iv.hi_singular = false;  // g' Lh stays bounded at the edges
  auto est = integrate(
      [&](double x) {
        const double lh = inverse_stein_numerator(ev, h.f, eh, x);
        return lh != 0.0 ? g.f_prime(x) * lh : 0.0;
      },
      iv, cfg);
  if (!est.converged)
    throw numerical_error("covariance_inverse_operator: quadrature did not converge");
  return est.value;
}

}  // namespace stein1d

#endif  // STEIN1D_COV_IDENTITIES_HPP
