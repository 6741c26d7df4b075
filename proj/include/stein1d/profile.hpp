#ifndef STEIN1D_PROFILE_HPP
#define STEIN1D_PROFILE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "stein1d/stein_core.hpp"

namespace stein1d {

/// Summary of tau's behaviour feeding the concentration and feasibility
/// hypotheses. Bounds are exact for closed-form families and grid-fitted
/// (then re-verified on the grid) otherwise.
struct KernelProfile {
  std::optional<double> sup_bound;                      // ||tau||_inf
  std::optional<double> inf_bound;                      // sigma^2_min, only when > 0
  std::optional<std::pair<double, double>> sublinear;   // tau(x) <= a|x-mu| + b
  std::optional<double> growth_exponent;                // limsup x^-a log tau < inf
  std::optional<EdgeAsymptotic> lo_edge, hi_edge;
  double mu = 0.0;
};

/// Moment factors for Mills-type bounds: E(g - Eg)+ and E|g - Eg|.
struct MomentStats {
  double mean_plus = 0.0;
  double mean_abs = 0.0;
  double mu = 0.0;
};

/// MomentStats for the identity observable g = Id.
inline MomentStats identity_moment_stats(const Distribution& d) {
  MomentStats s;
  s.mu = d.mean();
  const double mu = s.mu;
  s.mean_plus =
      expectation(d, [mu](double x) { return x - mu; }, d.right_tail_interval(mu)).value;
  s.mean_abs = expectation(d, [mu](double x) { return std::abs(x - mu); }).value;
  return s;
}

namespace detail {

// Slope of the final edge of the upper convex hull of (u_i, t_i), u ascending.
inline double upper_hull_final_slope(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      // Keep the hull concave from above.
      if ((b.second - a.second) * (p.first - a.first) <=
          (p.second - a.second) * (b.first - a.first)) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  if (hull.size() < 2) return 0.0;
  const auto& a = hull[hull.size() - 2];
  const auto& b = hull.back();
  return (b.second - a.second) / (b.first - a.first);
}

}  // namespace detail

/// Profile of tau on the given interior grid. Closed-form families override
/// the fitted constants with exact ones; declared bounds are re-verified on
/// the grid before the profile is returned.
inline KernelProfile fit_profile(const KernelEvaluator& ev, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("fit_profile: empty grid");
  KernelProfile prof;
  prof.mu = ev.dist.mean();
  prof.lo_edge = ev.dist.lo_kernel_asymptotic();
  prof.hi_edge = ev.dist.hi_kernel_asymptotic();

  std::vector<double> tau(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) tau[i] = stein_kernel(ev, grid[i]);

  const Interval sup_iv = ev.dist.support();
  const bool grows_hi = !sup_iv.hi_finite() && prof.hi_edge && prof.hi_edge->exponent > 0.0;
  const bool grows_lo = !sup_iv.lo_finite() && prof.lo_edge && prof.lo_edge->exponent > 0.0;
  const bool edge_vanishes =
      (sup_iv.lo_finite() && (!prof.lo_edge || prof.lo_edge->exponent > 0.0)) ||
      (sup_iv.hi_finite() && (!prof.hi_edge || prof.hi_edge->exponent > 0.0)) ||
      (!sup_iv.lo_finite() && prof.lo_edge && prof.lo_edge->exponent < 0.0) ||
      (!sup_iv.hi_finite() && prof.hi_edge && prof.hi_edge->exponent < 0.0);

  if (auto k = ev.dist.closed_form_kernel()) {
    if (std::isfinite(k->sup_norm)) prof.sup_bound = k->sup_norm;
    if (k->inf_bound > 0.0) prof.inf_bound = k->inf_bound;
    prof.sublinear = k->sublinear;
    prof.growth_exponent = 1.0;  // polynomial kernel
  } else {
    auto tau_at = [&ev](double x) { return stein_kernel(ev, x); };
    const Interval span = Interval::bounded(grid.front(), grid.back());
    if (!grows_lo && !grows_hi) {
      auto [argmax, vmax] = refine_supremum(tau_at, span, 256);
      (void)argmax;
      prof.sup_bound = std::max(vmax, *std::max_element(tau.begin(), tau.end()));
    }
    if (!edge_vanishes) {
      auto [argmin, neg] = refine_supremum([&](double x) { return -tau_at(x); }, span, 256);
      (void)argmin;
      const double vmin = std::min(-neg, *std::min_element(tau.begin(), tau.end()));
      if (vmin > 0.0) prof.inf_bound = vmin;
    }
    const double max_growth = std::max(grows_lo ? prof.lo_edge->exponent : 0.0,
                                       grows_hi ? prof.hi_edge->exponent : 0.0);
    if (prof.sup_bound) {
      prof.sublinear = std::pair{0.0, *prof.sup_bound};
    } else if (max_growth <= 1.0) {
      std::vector<std::pair<double, double>> pts(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        pts[i] = {std::abs(grid[i] - prof.mu), tau[i]};
      const double a = std::max(0.0, detail::upper_hull_final_slope(pts));
      double b = 0.0;
      for (const auto& [u, t] : pts) b = std::max(b, t - a * u);
      prof.sublinear = std::pair{a, b};
    }
    if (prof.lo_edge || prof.hi_edge) prof.growth_exponent = 1.0;
  }

  // Verify declared bounds on the grid.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (prof.sup_bound && tau[i] > *prof.sup_bound + 1e-9)
      throw numerical_error("fit_profile: sup bound violated on the grid");
    if (prof.inf_bound && tau[i] < *prof.inf_bound - 1e-9)
      throw numerical_error("fit_profile: inf bound violated on the grid");
    if (prof.sublinear) {
      const auto [a, b] = *prof.sublinear;
      if (tau[i] > a * std::abs(grid[i] - prof.mu) + b + 1e-9)
        throw numerical_error("fit_profile: sub-linear envelope violated on the grid");
    }
  }
  return prof;
}

/// Uniform interior grid clipped at the given quantile level.
inline std::vector<double> report_grid(const Distribution& d, int points = 201,
                                       double clip = 1e-6) {
  const Interval iv = d.clipped_interior(clip);
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i)
    xs[i] = iv.lo + (iv.hi - iv.lo) * i / (points - 1.0);
  return xs;
}

}  // namespace stein1d

#endif  // STEIN1D_PROFILE_HPP
