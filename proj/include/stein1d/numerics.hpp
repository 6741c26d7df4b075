#ifndef STEIN1D_NUMERICS_HPP
#define STEIN1D_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stein1d {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Raised when a numerical routine cannot produce a trustworthy result
/// (NaN integrand, no sign change, divergent objective, ...).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Integration range with extended-real endpoints. Singular flags mark finite
/// endpoints where the integrand blows up but stays absolutely integrable.
struct Interval {
  double lo = -inf;
  double hi = inf;
  bool lo_singular = false;
  bool hi_singular = false;

  static Interval bounded(double lo, double hi, bool lo_singular = false,
                          bool hi_singular = false) {
    return Interval{lo, hi, lo_singular, hi_singular};
  }
  static Interval right_tail(double lo, bool lo_singular = false) {
    return Interval{lo, inf, lo_singular, false};
  }
  static Interval left_tail(double hi, bool hi_singular = false) {
    return Interval{-inf, hi, false, hi_singular};
  }
  static Interval whole_line() { return Interval{}; }

  bool lo_finite() const { return std::isfinite(lo); }
  bool hi_finite() const { return std::isfinite(hi); }

  void validate() const {
    if (!(lo < hi)) throw std::invalid_argument("Interval: requires lo < hi");
    if (lo_singular && !lo_finite())
      throw std::invalid_argument("Interval: singular flag on infinite lower endpoint");
    if (hi_singular && !hi_finite())
      throw std::invalid_argument("Interval: singular flag on infinite upper endpoint");
  }
};

enum class InfiniteTransform { rational, exponential };

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  InfiniteTransform infinite_transform = InfiniteTransform::rational;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
      throw std::invalid_argument("QuadratureConfig: tolerances must be positive");
    if (max_subdivisions < 1)
      throw std::invalid_argument("QuadratureConfig: max_subdivisions must be >= 1");
  }
};

struct Estimate {
  double value = 0.0;
  double error_bound = 0.0;
  bool converged = false;
};

using RealFn = std::function<double(double)>;

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK dqk15).
inline constexpr std::array<double, 8> gk_nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> gk_weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
  double value;
  double error;
};

// One GK15 application on [a, b]; fn takes the transformed coordinate.
template <typename Fn>
PanelResult gk15(const Fn& fn, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fc = fn(c);
  double kronrod = gk_weights[7] * fc;
  double gauss = gauss_weights[3] * fc;
  double resabs = std::abs(kronrod);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * gk_nodes[j];
    const double f1 = fn(c - dx);
    const double f2 = fn(c + dx);
    kronrod += gk_weights[j] * (f1 + f2);
    resabs += gk_weights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += gauss_weights[j / 2] * (f1 + f2);
  }
  const double value = kronrod * h;
  double err = std::abs((kronrod - gauss) * h);
  // QUADPACK-style sharpening for smooth panels.
  resabs *= std::abs(h);
  if (resabs > 0.0 && err > 0.0) {
    const double scaled = std::pow(200.0 * err / resabs, 1.5);
    if (scaled < 1.0) err = resabs * scaled;
  }
  return {value, err};
}

// A finite sub-interval in a transformed coordinate t together with the map
// back to the original axis: x = x_of(t), dx = w_of(t) dt.
struct MappedPiece {
  double t_lo, t_hi;
  std::function<double(double)> x_of;
  std::function<double(double)> w_of;
};

inline MappedPiece identity_piece(double a, double b) {
  return {a, b, [](double t) { return t; }, [](double) { return 1.0; }};
}

// x = a + u^4 absorbs integrable endpoint singularities at a (covers x^g
// behaviour with g > -3/4).
inline MappedPiece lo_singular_piece(double a, double b) {
  const double u_hi = std::pow(b - a, 0.25);
  return {0.0, u_hi, [a](double u) { return a + u * u * u * u; },
          [](double u) { return 4.0 * u * u * u; }};
}

inline MappedPiece hi_singular_piece(double a, double b) {
  const double u_hi = std::pow(b - a, 0.25);
  return {0.0, u_hi, [b](double u) { return b - u * u * u * u; },
          [](double u) { return 4.0 * u * u * u; }};
}

// Rational compactification of [a, +inf): x = a + t/(1-t).
inline MappedPiece right_rational_piece(double a) {
  return {0.0, 1.0, [a](double t) { return a + t / (1.0 - t); },
          [](double t) {
            const double d = 1.0 - t;
            return 1.0 / (d * d);
          }};
}

inline MappedPiece left_rational_piece(double b) {
  return {0.0, 1.0, [b](double t) { return b - t / (1.0 - t); },
          [](double t) {
            const double d = 1.0 - t;
            return 1.0 / (d * d);
          }};
}

// Exponential compactification of [a, +inf): x = a - log(1-t).
inline MappedPiece right_exponential_piece(double a) {
  return {0.0, 1.0, [a](double t) { return a - std::log1p(-t); },
          [](double t) { return 1.0 / (1.0 - t); }};
}

inline MappedPiece left_exponential_piece(double b) {
  return {0.0, 1.0, [b](double t) { return b + std::log1p(-t); },
          [](double t) { return 1.0 / (1.0 - t); }};
}

// Whole line, rational: x = t/(1-t^2) on (-1, 1).
inline MappedPiece whole_line_rational_piece() {
  return {-1.0, 1.0,
          [](double t) { return t / (1.0 - t * t); },
          [](double t) {
            const double d = 1.0 - t * t;
            return (1.0 + t * t) / (d * d);
          }};
}

// Decompose an interval into mapped pieces with at most one awkward feature
// (singular endpoint or infinite endpoint) each.
inline std::vector<MappedPiece> decompose(const Interval& iv, InfiniteTransform tr) {
  std::vector<MappedPiece> out;
  const bool lo_inf = !iv.lo_finite();
  const bool hi_inf = !iv.hi_finite();
  if (lo_inf && hi_inf) {
    if (tr == InfiniteTransform::rational) {
      out.push_back(whole_line_rational_piece());
    } else {
      out.push_back(left_exponential_piece(0.0));
      out.push_back(right_exponential_piece(0.0));
    }
    return out;
  }
  if (lo_inf) {
    const double split = iv.hi_singular ? iv.hi - 1.0 : iv.hi;
    out.push_back(tr == InfiniteTransform::rational ? left_rational_piece(split)
                                                    : left_exponential_piece(split));
    if (iv.hi_singular) out.push_back(hi_singular_piece(split, iv.hi));
    return out;
  }
  if (hi_inf) {
    const double split = iv.lo_singular ? iv.lo + 1.0 : iv.lo;
    if (iv.lo_singular) out.push_back(lo_singular_piece(iv.lo, split));
    out.push_back(tr == InfiniteTransform::rational ? right_rational_piece(split)
                                                    : right_exponential_piece(split));
    return out;
  }
  // finite interval
  if (iv.lo_singular && iv.hi_singular) {
    const double mid = 0.5 * (iv.lo + iv.hi);
    out.push_back(lo_singular_piece(iv.lo, mid));
    out.push_back(hi_singular_piece(mid, iv.hi));
  } else if (iv.lo_singular) {
    out.push_back(lo_singular_piece(iv.lo, iv.hi));
  } else if (iv.hi_singular) {
    out.push_back(hi_singular_piece(iv.lo, iv.hi));
  } else {
    out.push_back(identity_piece(iv.lo, iv.hi));
  }
  return out;
}

struct AdaptivePanel {
  double a, b, value, error;
  bool operator<(const AdaptivePanel& other) const { return error < other.error; }
};

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over iv. Infinite endpoints are
/// compactified by cfg.infinite_transform; flagged singular endpoints get a
/// power substitution. A NaN from f is a hard error naming the abscissa.
inline Estimate integrate(const RealFn& f, const Interval& iv,
                          const QuadratureConfig& cfg = {}) {
  iv.validate();
  cfg.validate();
  const auto pieces = detail::decompose(iv, cfg.infinite_transform);

  auto make_eval = [&f](const detail::MappedPiece& piece) {
    return [&f, &piece](double t) {
      const double x = piece.x_of(t);
      const double fx = f(x);
      if (std::isnan(fx))
        throw numerical_error("integrate: integrand is NaN at x = " + std::to_string(x));
      return fx * piece.w_of(t);
    };
  };
  std::vector<std::function<double(double)>> evals;
  evals.reserve(pieces.size());
  for (const auto& piece : pieces) evals.push_back(make_eval(piece));

  struct TaggedPanel {
    detail::AdaptivePanel p;
    std::size_t piece;
    bool operator<(const TaggedPanel& o) const { return p.error < o.p.error; }
  };
  std::priority_queue<TaggedPanel> tagged;
  double total_value = 0.0;
  double total_error = 0.0;
  int panel_count = 0;

  // Seed each piece with a few panels so narrow features are not missed.
  constexpr int initial_panels = 8;
  for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
    const auto& piece = pieces[pi];
    const double width = (piece.t_hi - piece.t_lo) / initial_panels;
    for (int k = 0; k < initial_panels; ++k) {
      const double a = piece.t_lo + k * width;
      const double b = (k == initial_panels - 1) ? piece.t_hi : a + width;
      auto r = detail::gk15(evals[pi], a, b);
      tagged.push({{a, b, r.value, r.error}, pi});
      total_value += r.value;
      total_error += r.error;
      ++panel_count;
    }
  }

  auto tolerance = [&cfg](double value) {
    return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
  };

  while (total_error > tolerance(total_value) && panel_count < cfg.max_subdivisions) {
    TaggedPanel worst = tagged.top();
    tagged.pop();
    const double mid = 0.5 * (worst.p.a + worst.p.b);
    if (!(mid > worst.p.a && mid < worst.p.b)) {
      // Panel width at rounding limit; put it back and stop refining.
      tagged.push(worst);
      break;
    }
    auto left = detail::gk15(evals[worst.piece], worst.p.a, mid);
    auto right = detail::gk15(evals[worst.piece], mid, worst.p.b);
    total_value += left.value + right.value - worst.p.value;
    total_error += left.error + right.error - worst.p.error;
    tagged.push({{worst.p.a, mid, left.value, left.error}, worst.piece});
    tagged.push({{mid, worst.p.b, right.value, right.error}, worst.piece});
    ++panel_count;
  }

  // Recompute totals from the heap to shed accumulated cancellation.
  double value = 0.0;
  double error = 0.0;
  while (!tagged.empty()) {
    value += tagged.top().p.value;
    error += tagged.top().p.error;
    tagged.pop();
  }
  return {value, error, error <= tolerance(value)};
}

/// Brent root finding on a sign-changing bracket. Falls back to bisection
/// steps internally, so convergence is guaranteed for continuous f.
inline double find_root(const RealFn& f, const Interval& bracket, double tol = 1e-12) {
  if (!bracket.lo_finite() || !bracket.hi_finite())
    throw std::invalid_argument("find_root: bracket must be finite");
  double a = bracket.lo, b = bracket.hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw numerical_error("find_root: no sign change across bracket");
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double eps_m = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= eps_m || fb == 0.0) return b;
    if (std::abs(e) < eps_m || std::abs(fa) <= std::abs(fb)) {
      d = e = m;
    } else {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double r = fb / fc;
        const double t = fa / fc;
        p = s * (2.0 * m * t * (t - r) - (b - a) * (r - 1.0));
        q = (t - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(eps_m * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = e = m;
      }
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > eps_m) ? d : (m > 0.0 ? eps_m : -eps_m);
    fb = f(b);
  }
  return b;
}

/// Central finite difference, O(step^2). Default step max(1e-6, 1e-6|x|).
inline double derivative(const RealFn& f, double x,
                         std::optional<double> step_hint = std::nullopt) {
  const double h = step_hint ? *step_hint : std::max(1e-6, 1e-6 * std::abs(x));
  volatile double xp = x + h;
  volatile double xm = x - h;
  const double fp = f(xp), fm = f(xm);
  if (!std::isfinite(fp) || !std::isfinite(fm))
    throw numerical_error("derivative: f not evaluable near x = " + std::to_string(x));
  return (fp - fm) / (xp - xm);
}

namespace detail {

// Golden-section maximization on [a, b] in a mapped coordinate.
template <typename Fn>
std::pair<double, double> golden_max(const Fn& fn, double a, double b, int iters = 120) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int i = 0; i < iters && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 < f2 || std::isnan(f1)) {
      a = x1;
      x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = fn(x2);
    } else {
      b = x2;
      x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = fn(x1);
    }
  }
  if (std::isnan(f1) || (!std::isnan(f2) && f2 > f1)) return {x2, f2};
  return {x1, f1};
}

}  // namespace detail

/// Coarse grid scan followed by golden-section refinement around the best
/// cell. Grids are laid uniformly in the same compactified coordinates the
/// integrator uses, which concentrates points toward singular and infinite
/// ends. Returns (argmax, max).
inline std::pair<double, double> refine_supremum(const RealFn& f, const Interval& iv,
                                                 int grid_points = 512) {
  iv.validate();
  if (grid_points < 3) throw std::invalid_argument("refine_supremum: grid too small");
  const auto pieces = detail::decompose(iv, InfiniteTransform::rational);
  const int per_piece = std::max(3, grid_points / static_cast<int>(pieces.size()));

  double best_x = std::numeric_limits<double>::quiet_NaN();
  double best_v = -inf;
  bool any_finite = false;
  double best_t_lo = 0.0, best_t_hi = 0.0;
  const detail::MappedPiece* best_piece = nullptr;

  for (const auto& piece : pieces) {
    const double span = piece.t_hi - piece.t_lo;
    for (int i = 1; i <= per_piece; ++i) {
      const double t = piece.t_lo + span * i / (per_piece + 1.0);
      const double x = piece.x_of(t);
      const double v = f(x);
      if (std::isnan(v)) continue;
      any_finite = true;
      if (v > best_v) {
        best_v = v;
        best_x = x;
        const double dt = span / (per_piece + 1.0);
        best_t_lo = std::max(piece.t_lo, t - dt);
        best_t_hi = std::min(piece.t_hi, t + dt);
        best_piece = &piece;
      }
    }
  }
  if (!any_finite) throw numerical_error("refine_supremum: f is NaN on the entire grid");

  auto in_t = [&](double t) {
    const double v = f(best_piece->x_of(t));
    return std::isnan(v) ? -inf : v;
  };
  auto [t_star, v_star] = detail::golden_max(in_t, best_t_lo, best_t_hi);
  if (v_star > best_v) {
    best_v = v_star;
    best_x = best_piece->x_of(t_star);
  }
  return {best_x, best_v};
}

/// Fenchel-Legendre value sup_{lambda in iv} (r*lambda - psi(lambda)) for
/// convex psi. Returns +inf when the objective diverges at the open right
/// end. psi may return +inf to mark out-of-domain points.
inline double convex_conjugate(const RealFn& psi, double r, const Interval& lambda_interval,
                               int grid_points = 256) {
  lambda_interval.validate();
  auto objective = [&](double lam) {
    const double p = psi(lam);
    if (std::isnan(p)) throw numerical_error("convex_conjugate: psi is NaN");
    return r * lam - p;
  };
  const auto pieces = detail::decompose(lambda_interval, InfiniteTransform::rational);
  const auto& piece = pieces.front();

  double best_t = 0.0, best_v = -inf;
  bool any_finite = false;
  const double span = piece.t_hi - piece.t_lo;
  for (int i = 1; i <= grid_points; ++i) {
    const double t = piece.t_lo + span * i / (grid_points + 1.0);
    const double v = objective(piece.x_of(t));
    if (!std::isfinite(v)) continue;
    any_finite = true;
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  if (!any_finite)
    throw numerical_error("convex_conjugate: psi is infinite on the whole interval");

  // Divergence probe at the open right end.
  const double t_last = piece.t_lo + span * grid_points / (grid_points + 1.0);
  if (best_t >= t_last) {
    double probe_best = best_v;
    bool increasing = true;
    for (int k = 1; k <= 40; ++k) {
      const double t = piece.t_hi - (piece.t_hi - t_last) * std::pow(2.0, -k);
      const double v = objective(piece.x_of(t));
      if (!std::isfinite(v) || v < probe_best) {
        increasing = false;
        break;
      }
      probe_best = v;
      if (probe_best > 1e12) return inf;
    }
    if (increasing && probe_best > best_v + 1.0) return inf;
    best_v = std::max(best_v, probe_best);
  }

  const double dt = span / (grid_points + 1.0);
  auto in_t = [&](double t) {
    const double v = objective(piece.x_of(t));
    return std::isfinite(v) ? v : -inf;
  };
  auto [t_star, v_star] =
      detail::golden_max(in_t, std::max(piece.t_lo, best_t - dt),
                         std::min(piece.t_hi, best_t + dt));
  (void)t_star;
  return std::max(best_v, v_star);
}

}  // namespace stein1d

#endif  // STEIN1D_NUMERICS_HPP
