#ifndef STEIN1D_DISTRIBUTION_HPP
#define STEIN1D_DISTRIBUTION_HPP

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stein1d/numerics.hpp"

namespace stein1d {

enum class FamilyKind {
  normal,
  beta,
  gamma,
  exponential,
  generalized_cauchy,
  subbotin,
  student,
  uniform01,
  pearson,
  custom_tabulated,
};

struct PearsonParams {
  double lambda = 0.0;
  double alpha = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double support_lo = -inf;
  double support_hi = inf;
  bool lo_singular = false;
  bool hi_singular = false;
};

struct DistributionSpec {
  FamilyKind family = FamilyKind::normal;
  double alpha = 0.0;  // beta(alpha,.), subbotin(alpha), student(alpha)
  double beta = 0.0;   // beta(.,beta), generalized_cauchy(beta)
  double shape = 0.0;  // gamma shape k
  double scale = 0.0;  // gamma scale theta
  double rate = 0.0;   // exponential
  PearsonParams pearson;
  std::vector<std::pair<double, double>> table;  // custom_tabulated (x, p)

  static DistributionSpec normal() {
    DistributionSpec s;
    s.family = FamilyKind::normal;
    return s;
  }
  static DistributionSpec beta_dist(double a, double b) {
    DistributionSpec s;
    s.family = FamilyKind::beta;
    s.alpha = a;
    s.beta = b;
    return s;
  }
  static DistributionSpec gamma_dist(double k, double theta) {
    DistributionSpec s;
    s.family = FamilyKind::gamma;
    s.shape = k;
    s.scale = theta;
    return s;
  }
  static DistributionSpec exponential(double rate) {
    DistributionSpec s;
    s.family = FamilyKind::exponential;
    s.rate = rate;
    return s;
  }
  static DistributionSpec generalized_cauchy(double beta) {
    DistributionSpec s;
    s.family = FamilyKind::generalized_cauchy;
    s.beta = beta;
    return s;
  }
  static DistributionSpec subbotin(double alpha) {
    DistributionSpec s;
    s.family = FamilyKind::subbotin;
    s.alpha = alpha;
    return s;
  }
  static DistributionSpec student(double alpha) {
    DistributionSpec s;
    s.family = FamilyKind::student;
    s.alpha = alpha;
    return s;
  }
  static DistributionSpec uniform01() {
    DistributionSpec s;
    s.family = FamilyKind::uniform01;
    return s;
  }
  static DistributionSpec pearson_dist(const PearsonParams& p) {
    DistributionSpec s;
    s.family = FamilyKind::pearson;
    s.pearson = p;
    return s;
  }
  static DistributionSpec tabulated(std::vector<std::pair<double, double>> tbl) {
    DistributionSpec s;
    s.family = FamilyKind::custom_tabulated;
    s.table = std::move(tbl);
    return s;
  }

  std::string label() const {
    std::ostringstream os;
    switch (family) {
      case FamilyKind::normal: return "normal";
      case FamilyKind::beta: os << "beta(" << alpha << "," << beta << ")"; break;
      case FamilyKind::gamma: os << "gamma(" << shape << "," << scale << ")"; break;
      case FamilyKind::exponential: os << "exponential(" << rate << ")"; break;
      case FamilyKind::generalized_cauchy: os << "generalized_cauchy(" << beta << ")"; break;
      case FamilyKind::subbotin: os << "subbotin(" << alpha << ")"; break;
      case FamilyKind::student: os << "student(" << alpha << ")"; break;
      case FamilyKind::uniform01: return "uniform01";
      case FamilyKind::pearson: os << "pearson(" << pearson.lambda << "," << pearson.alpha << ","
                                    << pearson.beta0 << "," << pearson.beta1 << ","
                                    << pearson.beta2 << ")"; break;
      case FamilyKind::custom_tabulated: os << "custom_tabulated[" << table.size() << "]"; break;
    }
    return os.str();
  }
};

/// tau(x) ~ coefficient * d^exponent with d the distance to a finite edge, or
/// tau(x) ~ coefficient * |x|^exponent toward an infinite edge.
struct EdgeAsymptotic {
  double exponent = 0.0;
  double coefficient = 1.0;
};

struct ClosedFormKernel {
  std::function<double(double)> tau;
  double sup_norm = inf;   // sup over the interior
  double inf_bound = 0.0;  // inf over the interior
  std::optional<std::pair<double, double>> sublinear;  // tau(x) <= a|x-mu| + b
};

namespace detail {

inline double logspace_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// Nodes laid uniformly in the compactified coordinate of each piece; strictly
/// inside the interval.
inline std::vector<double> transform_grid(const Interval& iv, int n) {
  const auto pieces = decompose(iv, InfiniteTransform::rational);
  const int per_piece = std::max(2, n / static_cast<int>(pieces.size()));
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(per_piece) * pieces.size());
  for (const auto& piece : pieces) {
    const double span = piece.t_hi - piece.t_lo;
    for (int i = 1; i <= per_piece; ++i) {
      xs.push_back(piece.x_of(piece.t_lo + span * i / (per_piece + 1.0)));
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

/// Fritsch-Carlson monotone cubic Hermite interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    slope_.assign(n, 0.0);
    if (n < 2) throw std::invalid_argument("MonotoneCubic: need at least two points");
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x_[i + 1] - x_[i];
      if (!(h > 0.0)) throw std::invalid_argument("MonotoneCubic: x must be strictly increasing");
      d[i] = (y_[i + 1] - y_[i]) / h;
    }
    slope_[0] = d[0];
    slope_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
      slope_[i] = (d[i - 1] * d[i] > 0.0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0.0) {
        slope_[i] = slope_[i + 1] = 0.0;
        continue;
      }
      const double a = slope_[i] / d[i];
      const double b = slope_[i + 1] / d[i];
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double t = 3.0 / std::sqrt(s);
        slope_[i] = t * a * d[i];
        slope_[i + 1] = t * b * d[i];
      }
    }
  }

  double operator()(double x) const {
    const auto [i, t, h] = locate(x);
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * y_[i] + (t3 - 2.0 * t2 + t) * h * slope_[i] +
           (-2.0 * t3 + 3.0 * t2) * y_[i + 1] + (t3 - t2) * h * slope_[i + 1];
  }

  double deriv(double x) const {
    const auto [i, t, h] = locate(x);
    const double t2 = t * t;
    return ((6.0 * t2 - 6.0 * t) * y_[i] + (3.0 * t2 - 4.0 * t + 1.0) * h * slope_[i] +
            (-6.0 * t2 + 6.0 * t) * y_[i + 1] + (3.0 * t2 - 2.0 * t) * h * slope_[i + 1]) / h;
  }

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

 private:
  std::tuple<std::size_t, double, double> locate(double x) const {
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    if (i == 0) i = 1;
    if (i >= x_.size()) i = x_.size() - 1;
    --i;
    const double h = x_[i + 1] - x_[i];
    return {i, (x - x_[i]) / h, h};
  }

  std::vector<double> x_, y_, slope_;
};

}  // namespace detail

namespace detail {

class Family {
 public:
  virtual ~Family() = default;
  virtual Interval support() const = 0;
  virtual double log_density(double x) const = 0;  // without support clamping
  // Edge-exact densities: delta is the exact distance to the finite edge.
  // Families with a singular edge away from zero must override these, since
  // edge +/- delta rounds onto the edge once delta drops below epsilon.
  virtual double log_density_from_lo(double delta) const {
    return log_density(support().lo + delta);
  }
  virtual double log_density_from_hi(double delta) const {
    return log_density(support().hi - delta);
  }
  virtual bool analytic_cdf() const { return false; }
  virtual double cdf(double) const { return 0.0; }
  virtual double survival(double) const { return 0.0; }
  virtual std::optional<double> quantile(double) const { return std::nullopt; }
  virtual bool finite_mean() const { return true; }
  virtual std::optional<double> analytic_mean() const { return std::nullopt; }
  virtual std::optional<double> potential_prime(double) const { return std::nullopt; }
  virtual std::optional<ClosedFormKernel> kernel() const { return std::nullopt; }
  virtual std::string kernel_absent_reason() const {
    return "no closed-form Stein kernel for this family";
  }
  virtual std::optional<EdgeAsymptotic> lo_asymptotic() const { return std::nullopt; }
  virtual std::optional<EdgeAsymptotic> hi_asymptotic() const { return std::nullopt; }
};

class NormalFamily final : public Family {
 public:
  Interval support() const override { return Interval::whole_line(); }
  double log_density(double x) const override { return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI); }
  bool analytic_cdf() const override { return true; }
  double cdf(double x) const override { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
  double survival(double x) const override { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
  std::optional<double> analytic_mean() const override { return 0.0; }
  std::optional<double> potential_prime(double x) const override { return x; }
  std::optional<ClosedFormKernel> kernel() const override {
    ClosedFormKernel k;
    k.tau = [](double) { return 1.0; };
    k.sup_norm = 1.0;
    k.inf_bound = 1.0;
    k.sublinear = std::pair{0.0, 1.0};
    return k;
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override { return EdgeAsymptotic{0.0, 1.0}; }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override { return EdgeAsymptotic{0.0, 1.0}; }
};

class BetaFamily final : public Family {
 public:
  BetaFamily(double a, double b) : a_(a), b_(b), log_B_(logspace_beta(a, b)) {}
  Interval support() const override {
    return Interval::bounded(0.0, 1.0, /*lo_singular=*/a_ < 1.0, /*hi_singular=*/b_ < 1.0);
  }
  double log_density(double x) const override {
    return (a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x) - log_B_;
  }
  double log_density_from_lo(double delta) const override {
    return (a_ - 1.0) * std::log(delta) + (b_ - 1.0) * std::log1p(-delta) - log_B_;
  }
  double log_density_from_hi(double delta) const override {
    return (b_ - 1.0) * std::log(delta) + (a_ - 1.0) * std::log1p(-delta) - log_B_;
  }
  std::optional<double> analytic_mean() const override { return a_ / (a_ + b_); }
  std::optional<double> potential_prime(double x) const override {
    return -(a_ - 1.0) / x + (b_ - 1.0) / (1.0 - x);
  }
  std::optional<ClosedFormKernel> kernel() const override {
    const double s = a_ + b_;
    ClosedFormKernel k;
    k.tau = [s](double x) { return x * (1.0 - x) / s; };
    k.sup_norm = 0.25 / s;
    k.inf_bound = 0.0;
    k.sublinear = std::pair{0.0, 0.25 / s};
    return k;
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override {
    return EdgeAsymptotic{1.0, 1.0 / (a_ + b_)};
  }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override {
    return EdgeAsymptotic{1.0, 1.0 / (a_ + b_)};
  }

 private:
  double a_, b_, log_B_;
};

class GammaFamily final : public Family {
 public:
  GammaFamily(double k, double theta) : k_(k), theta_(theta) {}
  Interval support() const override {
    return Interval::right_tail(0.0, /*lo_singular=*/k_ < 1.0);
  }
  double log_density(double x) const override {
    return (k_ - 1.0) * std::log(x) - x / theta_ - std::lgamma(k_) - k_ * std::log(theta_);
  }
  std::optional<double> analytic_mean() const override { return k_ * theta_; }
  std::optional<double> potential_prime(double x) const override {
    return -(k_ - 1.0) / x + 1.0 / theta_;
  }
  std::optional<ClosedFormKernel> kernel() const override {
    const double th = theta_;
    ClosedFormKernel k;
    k.tau = [th](double x) { return th * x; };
    k.sup_norm = inf;
    k.inf_bound = 0.0;
    k.sublinear = std::pair{theta_, k_ * theta_ * theta_};
    return k;
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override { return EdgeAsymptotic{1.0, theta_}; }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override { return EdgeAsymptotic{1.0, theta_}; }

 private:
  double k_, theta_;
};

class ExponentialFamily final : public Family {
 public:
  explicit ExponentialFamily(double rate) : rate_(rate) {}
  Interval support() const override { return Interval::right_tail(0.0); }
  double log_density(double x) const override { return std::log(rate_) - rate_ * x; }
  bool analytic_cdf() const override { return true; }
  double cdf(double x) const override { return -std::expm1(-rate_ * x); }
  double survival(double x) const override { return std::exp(-rate_ * x); }
  std::optional<double> quantile(double u) const override { return -std::log1p(-u) / rate_; }
  std::optional<double> analytic_mean() const override { return 1.0 / rate_; }
  std::optional<double> potential_prime(double) const override { return rate_; }
  std::optional<ClosedFormKernel> kernel() const override {
    const double r = rate_;
    ClosedFormKernel k;
    k.tau = [r](double x) { return x / r; };
    k.sup_norm = inf;
    k.inf_bound = 0.0;
    k.sublinear = std::pair{1.0 / r, 1.0 / (r * r)};
    return k;
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override {
    return EdgeAsymptotic{1.0, 1.0 / rate_};
  }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override {
    return EdgeAsymptotic{1.0, 1.0 / rate_};
  }

 private:
  double rate_;
};

class GeneralizedCauchyFamily final : public Family {
 public:
  explicit GeneralizedCauchyFamily(double beta) : beta_(beta) {
    // Z = sqrt(pi) Gamma(beta - 1/2) / Gamma(beta)
    log_Z_ = 0.5 * std::log(M_PI) + std::lgamma(beta_ - 0.5) - std::lgamma(beta_);
  }
  Interval support() const override { return Interval::whole_line(); }
  double log_density(double x) const override { return -beta_ * std::log1p(x * x) - log_Z_; }
  bool finite_mean() const override { return beta_ > 1.0; }
  std::optional<double> analytic_mean() const override {
    if (beta_ > 1.0) return 0.0;
    return std::nullopt;
  }
  std::optional<double> potential_prime(double x) const override {
    return 2.0 * beta_ * x / (1.0 + x * x);
  }
  std::optional<ClosedFormKernel> kernel() const override {
    if (beta_ <= 1.0) return std::nullopt;
    const double c = 2.0 * (beta_ - 1.0);
    ClosedFormKernel k;
    k.tau = [c](double x) { return (1.0 + x * x) / c; };
    k.sup_norm = inf;
    k.inf_bound = 1.0 / c;
    return k;
  }
  std::string kernel_absent_reason() const override {
    return "kernel undefined: infinite first moment";
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override {
    if (beta_ <= 1.0) return std::nullopt;
    return EdgeAsymptotic{2.0, 1.0 / (2.0 * (beta_ - 1.0))};
  }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override { return lo_asymptotic(); }

 private:
  double beta_;
  double log_Z_;
};

class SubbotinFamily final : public Family {
 public:
  explicit SubbotinFamily(double alpha) : alpha_(alpha) {
    // Normalizer by quadrature.
    const double a = alpha_;
    auto est = integrate([a](double x) { return std::exp(-std::pow(std::abs(x), a) / a); },
                         Interval::whole_line());
    if (!est.converged) throw numerical_error("subbotin: normalizer quadrature failed");
    log_Z_ = std::log(est.value);
  }
  Interval support() const override { return Interval::whole_line(); }
  double log_density(double x) const override {
    return -std::pow(std::abs(x), alpha_) / alpha_ - log_Z_;
  }
  std::optional<double> analytic_mean() const override { return 0.0; }
  std::optional<double> potential_prime(double x) const override {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), alpha_ - 1.0), x);
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override {
    return EdgeAsymptotic{2.0 - alpha_, 1.0};
  }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override {
    return EdgeAsymptotic{2.0 - alpha_, 1.0};
  }

 private:
  double alpha_;
  double log_Z_;
};

class StudentFamily final : public Family {
 public:
  explicit StudentFamily(double alpha) : alpha_(alpha) {
    log_Z_ = -0.5 * alpha_ * std::log(alpha_) + 0.5 * std::log(M_PI) +
             std::lgamma(0.5 * alpha_) - std::lgamma(0.5 * (alpha_ + 1.0));
  }
  Interval support() const override { return Interval::whole_line(); }
  double log_density(double x) const override {
    return -0.5 * (1.0 + alpha_) * std::log(alpha_ + x * x) - log_Z_;
  }
  bool finite_mean() const override { return alpha_ > 1.0; }
  std::optional<double> analytic_mean() const override {
    if (alpha_ > 1.0) return 0.0;
    return std::nullopt;
  }
  std::optional<double> potential_prime(double x) const override {
    return (1.0 + alpha_) * x / (alpha_ + x * x);
  }
  std::optional<ClosedFormKernel> kernel() const override {
    if (alpha_ <= 1.0) return std::nullopt;
    const double a = alpha_;
    ClosedFormKernel k;
    k.tau = [a](double x) { return (x * x + a) / (a - 1.0); };
    k.sup_norm = inf;
    k.inf_bound = a / (a - 1.0);
    return k;
  }
  std::string kernel_absent_reason() const override {
    return "kernel undefined: infinite first moment";
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override {
    if (alpha_ <= 1.0) return std::nullopt;
    return EdgeAsymptotic{2.0, 1.0 / (alpha_ - 1.0)};
  }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override { return lo_asymptotic(); }

 private:
  double alpha_;
  double log_Z_;
};

class Uniform01Family final : public Family {
 public:
  Interval support() const override { return Interval::bounded(0.0, 1.0); }
  double log_density(double) const override { return 0.0; }
  bool analytic_cdf() const override { return true; }
  double cdf(double x) const override { return std::clamp(x, 0.0, 1.0); }
  double survival(double x) const override { return std::clamp(1.0 - x, 0.0, 1.0); }
  std::optional<double> quantile(double u) const override { return u; }
  std::optional<double> analytic_mean() const override { return 0.5; }
  std::optional<double> potential_prime(double) const override { return 0.0; }
  std::optional<ClosedFormKernel> kernel() const override {
    ClosedFormKernel k;
    k.tau = [](double x) { return 0.5 * x * (1.0 - x); };
    k.sup_norm = 0.125;
    k.inf_bound = 0.0;
    k.sublinear = std::pair{0.0, 0.125};
    return k;
  }
  std::optional<EdgeAsymptotic> lo_asymptotic() const override { return EdgeAsymptotic{1.0, 0.5}; }
  std::optional<EdgeAsymptotic> hi_asymptotic() const override { return EdgeAsymptotic{1.0, 0.5}; }
};

/// Density solving p'/p = (alpha - x) / q(x - lambda) with quadratic
/// q(u) = beta2 u^2 + beta1 u + beta0 on a declared support. The log-density
/// is reconstructed by cumulative quadrature of the score.
class PearsonFamily final : public Family {
 public:
  explicit PearsonFamily(const PearsonParams& p) : p_(p) {
    Interval sup{p_.support_lo, p_.support_hi, p_.lo_singular, p_.hi_singular};
    sup.validate();
    support_ = sup;
    nodes_ = transform_grid(support_, 512);
    log_u_.assign(nodes_.size(), 0.0);
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    cfg.max_subdivisions = 400;
    // Validate q > 0 on the interior grid.
    for (double x : nodes_) {
      if (!(quadratic(x) > 0.0))
        throw std::invalid_argument(
            "pearson: quadratic must be positive on the declared support interior");
    }
    // Cumulative log-density along the node grid; the normalizer absorbs the
    // arbitrary constant at the first node.
    auto seg = [&](double a, double b) {
      return integrate([this](double t) { return score(t); }, Interval::bounded(a, b), cfg).value;
    };
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      log_u_[i] = log_u_[i - 1] + seg(nodes_[i - 1], nodes_[i]);
    // Re-anchor at the mode so exp(log_u) cannot overflow.
    const double peak = *std::max_element(log_u_.begin(), log_u_.end());
    for (double& v : log_u_) v -= peak;
    // Normalizer.
    auto z = integrate([this](double x) { return std::exp(log_unnormalized(x)); }, support_);
    if (!z.converged || !(z.value > 0.0) || !std::isfinite(z.value))
      throw std::invalid_argument("pearson: density is not normalizable on the declared support");
    log_Z_ = std::log(z.value);
    finite_mean_ = support_.lo_finite() && support_.hi_finite() ? true : p_.beta2 < 0.5;
  }

  Interval support() const override { return support_; }
  double log_density(double x) const override { return log_unnormalized(x) - log_Z_; }
  bool finite_mean() const override { return finite_mean_; }
  std::optional<double> potential_prime(double x) const override { return -score(x); }
  std::optional<ClosedFormKernel> kernel() const override {
    if (!finite_mean_ || p_.beta2 == 0.5) return std::nullopt;
    const PearsonParams p = p_;
    const double denom = 1.0 - 2.0 * p.beta2;
    ClosedFormKernel k;
    k.tau = [p, denom](double x) {
      const double u = x - p.lambda;
      return (p.beta0 + p.beta1 * u + p.beta2 * u * u) / denom;
    };
    // Quadratic extrema over the declared support.
    double lo_v = inf, hi_v = -inf;
    auto consider = [&](double x) {
      if (!std::isfinite(x)) {
        hi_v = inf;
        return;
      }
      const double v = k.tau(x);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    };
    consider(support_.lo);
    consider(support_.hi);
    if (p.beta2 != 0.0) {
      const double vert = p.lambda - 0.5 * p.beta1 / p.beta2;
      if (vert > support_.lo && vert < support_.hi) consider(vert);
    }
    k.sup_norm = hi_v;
    k.inf_bound = std::max(0.0, lo_v);
    return k;
  }
  std::string kernel_absent_reason() const override {
    if (!finite_mean_) return "kernel undefined: infinite first moment";
    return "kernel undefined: beta2 = 1/2";
  }

 private:
  double quadratic(double x) const {
    const double u = x - p_.lambda;
    return p_.beta0 + p_.beta1 * u + p_.beta2 * u * u;
  }
  double score(double x) const { return (p_.alpha - x) / quadratic(x); }
  double log_unnormalized(double x) const {
    if (x <= support_.lo || x >= support_.hi) return -inf;
    std::size_t i = std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin();
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    cfg.max_subdivisions = 60;
    if (i == 0) {
      return log_u_.front() -
             integrate([this](double t) { return score(t); }, Interval::bounded(x, nodes_.front()), cfg)
                 .value;
    }
    const double anchor = nodes_[i - 1];
    if (x == anchor) return log_u_[i - 1];
    return log_u_[i - 1] +
           integrate([this](double t) { return score(t); }, Interval::bounded(anchor, x), cfg).value;
  }

  PearsonParams p_;
  Interval support_;
  std::vector<double> nodes_;
  std::vector<double> log_u_;
  double log_Z_ = 0.0;
  bool finite_mean_ = true;
};

class TabulatedFamily final : public Family {
 public:
  explicit TabulatedFamily(const std::vector<std::pair<double, double>>& table) {
    if (table.size() < 2)
      throw std::invalid_argument("custom_tabulated: need at least two table rows");
    std::vector<double> xs, ps;
    xs.reserve(table.size());
    ps.reserve(table.size());
    for (const auto& [x, p] : table) {
      if (!(p > 0.0))
        throw std::invalid_argument("custom_tabulated: table densities must be strictly positive");
      xs.push_back(x);
      ps.push_back(p);
    }
    interp_ = MonotoneCubic(std::move(xs), std::move(ps));
    auto z = integrate([this](double x) { return std::max(0.0, interp_(x)); },
                       Interval::bounded(interp_.x_front(), interp_.x_back()));
    if (!z.converged || !(z.value > 0.0))
      throw std::invalid_argument("custom_tabulated: table does not normalize");
    log_Z_ = std::log(z.value);
  }
  Interval support() const override {
    return Interval::bounded(interp_.x_front(), interp_.x_back());
  }
  double log_density(double x) const override {
    const double v = interp_(x);
    if (!(v > 0.0)) return -inf;
    return std::log(v) - log_Z_;
  }
  std::optional<double> potential_prime(double x) const override {
    const double v = interp_(x);
    if (!(v > 0.0)) return std::nullopt;
    return -interp_.deriv(x) / v;
  }

 private:
  MonotoneCubic interp_;
  double log_Z_ = 0.0;
};

/// Edge-exact density closures: `at` evaluates p(x); `from_lo`/`from_hi`
/// evaluate p at an exact distance delta from a finite edge.
struct EdgeAwareDensity {
  std::function<double(double)> at;
  std::function<double(double)> from_lo;
  std::function<double(double)> from_hi;
};

/// Mass of [lo, lo+width] resp. [hi-width, hi] using the shifted coordinate,
/// so singular edges away from zero keep full precision. The density is
/// evaluated first; where it underflows to zero the weight is never called.
inline Estimate lo_edge_mass(const EdgeAwareDensity& pdf, const RealFn& weight_from_lo,
                             double width, const QuadratureConfig& cfg) {
  return integrate(
      [&](double delta) {
        const double p = pdf.from_lo(delta);
        return p > 0.0 ? weight_from_lo(delta) * p : 0.0;
      },
      Interval::bounded(0.0, width, /*lo_singular=*/true), cfg);
}
inline Estimate hi_edge_mass(const EdgeAwareDensity& pdf, const RealFn& weight_from_hi,
                             double width, const QuadratureConfig& cfg) {
  return integrate(
      [&](double delta) {
        const double p = pdf.from_hi(delta);
        return p > 0.0 ? weight_from_hi(delta) * p : 0.0;
      },
      Interval::bounded(0.0, width, /*lo_singular=*/true), cfg);
}

/// Forward/backward cumulative CDF table; queries are resolved by a short
/// local quadrature from the nearest node, so deep-tail values keep relative
/// precision.
class CdfCache {
 public:
  CdfCache() = default;
  CdfCache(EdgeAwareDensity pdf, const Interval& support, int n_nodes)
      : pdf_(std::move(pdf)) {
    support_ = support;
    xs_ = transform_grid(support, n_nodes);
    const std::size_t n = xs_.size();
    F_.assign(n, 0.0);
    S_.assign(n, 0.0);
    std::vector<double> mass(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
      mass[i] = integrate(pdf_.at, Interval::bounded(xs_[i], xs_[i + 1]), cell_cfg()).value;
    F_[0] = lo_zone_mass(xs_.front());
    for (std::size_t i = 1; i < n; ++i) F_[i] = F_[i - 1] + mass[i - 1];
    S_[n - 1] = hi_zone_mass(xs_.back());
    for (std::size_t i = n - 1; i-- > 0;) S_[i] = S_[i + 1] + mass[i];
  }

  double cdf(double x) const {
    if (x <= support_.lo) return 0.0;
    if (x >= support_.hi) return 1.0;
    if (x < xs_.front()) return lo_zone_mass(x);
    if (x > xs_.back()) return 1.0 - hi_zone_mass(x);
    const std::size_t i =
        std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin() - 1;
    if (x == xs_[i]) return F_[i];
    return F_[i] + integrate(pdf_.at, Interval::bounded(xs_[i], x), cell_cfg()).value;
  }

  double survival(double x) const {
    if (x <= support_.lo) return 1.0;
    if (x >= support_.hi) return 0.0;
    if (x > xs_.back()) return hi_zone_mass(x);
    if (x < xs_.front()) return 1.0 - lo_zone_mass(x);
    const std::size_t i =
        std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin() - 1;
    if (x == xs_[i]) return S_[i];
    if (x == xs_[i + 1]) return S_[i + 1];
    return S_[i + 1] + integrate(pdf_.at, Interval::bounded(x, xs_[i + 1]), cell_cfg()).value;
  }

  // Bracket for quantile(u): a cell of the node table when available. The
  // forward table resolves lower quantiles; the backward survival table
  // resolves upper ones (the forward sums saturate at accumulation noise).
  std::pair<double, double> quantile_bracket(double u) const {
    const auto it = std::lower_bound(F_.begin(), F_.end(), u);
    if (it == F_.begin()) return {support_.lo, xs_.front()};
    if (it == F_.end()) return {xs_.back(), support_.hi};
    const std::size_t i = it - F_.begin();
    return {xs_[i - 1], xs_[i]};
  }

  std::pair<double, double> survival_bracket(double s) const {
    const auto it =
        std::partition_point(S_.begin(), S_.end(), [s](double v) { return v > s; });
    if (it == S_.begin()) return {support_.lo, xs_.front()};
    if (it == S_.end()) return {xs_.back(), support_.hi};
    const std::size_t i = it - S_.begin();
    return {xs_[i - 1], xs_[i]};
  }

 private:
  // Mass of [lo, x]. Relative-dominant tolerance: these are the deep-tail
  // values whose relative precision the callers rely on.
  double lo_zone_mass(double x) const {
    if (support_.lo_singular)
      return lo_edge_mass(pdf_, [](double) { return 1.0; }, x - support_.lo, tail_cfg()).value;
    Interval piece = support_;
    piece.hi = x;
    piece.hi_singular = false;
    return integrate(pdf_.at, piece, tail_cfg()).value;
  }
  // Mass of [x, hi].
  double hi_zone_mass(double x) const {
    if (support_.hi_singular)
      return hi_edge_mass(pdf_, [](double) { return 1.0; }, support_.hi - x, tail_cfg()).value;
    Interval piece = support_;
    piece.lo = x;
    piece.lo_singular = false;
    return integrate(pdf_.at, piece, tail_cfg()).value;
  }

  static QuadratureConfig cell_cfg() {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-13;
    cfg.rel_tol = 1e-10;
    cfg.max_subdivisions = 200;
    return cfg;
  }
  static QuadratureConfig tail_cfg() {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-280;
    cfg.rel_tol = 1e-10;
    cfg.max_subdivisions = 400;
    return cfg;
  }

  EdgeAwareDensity pdf_;
  Interval support_;
  std::vector<double> xs_, F_, S_;
};

struct DistributionImpl {
  DistributionSpec spec;
  std::unique_ptr<const Family> family;
  Interval support;
  bool finite_mean = true;
  double mean = 0.0;  // valid only when finite_mean
  std::optional<CdfCache> cache;
};

}  // namespace detail

/// Immutable 1-D distribution handle. Cheap to copy; safe to share across
/// threads after construction.
class Distribution {
 public:
  Distribution() = default;

  const DistributionSpec& spec() const { return impl_->spec; }
  std::string label() const { return impl_->spec.label(); }
  Interval support() const { return impl_->support; }

  double log_pdf(double x) const {
    if (x <= impl_->support.lo || x >= impl_->support.hi) return -inf;
    return impl_->family->log_density(x);
  }
  double pdf(double x) const { return std::exp(log_pdf(x)); }

  /// Density at an exact distance delta above the lower support edge.
  double pdf_from_lo(double delta) const {
    if (!(delta > 0.0)) return 0.0;
    return std::exp(impl_->family->log_density_from_lo(delta));
  }
  /// Density at an exact distance delta below the upper support edge.
  double pdf_from_hi(double delta) const {
    if (!(delta > 0.0)) return 0.0;
    return std::exp(impl_->family->log_density_from_hi(delta));
  }

  double cdf(double x) const {
    if (impl_->family->analytic_cdf()) {
      if (x <= impl_->support.lo) return 0.0;
      if (x >= impl_->support.hi) return 1.0;
      return impl_->family->cdf(x);
    }
    return impl_->cache->cdf(x);
  }

  double survival(double x) const {
    if (impl_->family->analytic_cdf()) {
      if (x <= impl_->support.lo) return 1.0;
      if (x >= impl_->support.hi) return 0.0;
      return impl_->family->survival(x);
    }
    return impl_->cache->survival(x);
  }

  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0))
      throw std::invalid_argument("quantile: u must lie in (0,1)");
    if (auto q = impl_->family->quantile(u)) return *q;
    auto [lo, hi] = quantile_bracket(u);
    const double xtol = 1e-10 * (1.0 + std::abs(lo) + std::abs(hi));
    double root =
        u <= 0.5 ? find_root([this, u](double x) { return cdf(x) - u; },
                             Interval::bounded(lo, hi), xtol)
                 : find_root([this, u](double x) { return (1.0 - u) - survival(x); },
                             Interval::bounded(lo, hi), xtol);
    // Newton polish on the better-conditioned side of the distribution, so the
    // tail probability at the returned point is relatively accurate.
    const bool upper = u > 0.5;
    const double target = upper ? 1.0 - u : u;
    for (int k = 0; k < 6; ++k) {
      const double p = pdf(root);
      if (!(p > 0.0)) break;
      const double err = upper ? survival(root) - target : cdf(root) - target;
      if (std::abs(err) <= 1e-12 * target) break;
      const double next = upper ? root + err / p : root - err / p;
      if (next <= impl_->support.lo || next >= impl_->support.hi || !std::isfinite(next)) break;
      root = next;
    }
    return root;
  }

  bool has_finite_first_moment() const { return impl_->finite_mean; }

  double mean() const {
    if (!impl_->finite_mean)
      throw std::domain_error("no finite mean for " + label());
    return impl_->mean;
  }

  /// Potential phi = -log p; +inf outside the support.
  double potential(double x) const { return -log_pdf(x); }

  bool has_analytic_potential_prime() const {
    const Interval sup = impl_->support;
    double probe = 0.0;
    if (sup.lo_finite() && sup.hi_finite()) probe = 0.5 * (sup.lo + sup.hi);
    else if (sup.lo_finite()) probe = sup.lo + 1.0;
    else if (sup.hi_finite()) probe = sup.hi - 1.0;
    return impl_->family->potential_prime(probe).has_value();
  }

  /// phi' on the interior; analytic when the family provides it, otherwise a
  /// central difference of -log p.
  double potential_prime(double x) const {
    if (auto v = impl_->family->potential_prime(x)) return *v;
    return derivative([this](double t) { return -log_pdf(t); }, x);
  }

  std::optional<ClosedFormKernel> closed_form_kernel() const { return impl_->family->kernel(); }
  std::string kernel_absent_reason() const { return impl_->family->kernel_absent_reason(); }

  std::optional<EdgeAsymptotic> lo_kernel_asymptotic() const {
    return impl_->family->lo_asymptotic();
  }
  std::optional<EdgeAsymptotic> hi_kernel_asymptotic() const {
    return impl_->family->hi_asymptotic();
  }

  /// Interior interval clipped at quantiles (q, 1-q).
  Interval clipped_interior(double q = 1e-6) const {
    return Interval::bounded(quantile(q), quantile(1.0 - q));
  }

  /// [x, hi] resp. [lo, x] with the support's singular flag on the far edge.
  Interval right_tail_interval(double x) const {
    Interval iv = impl_->support;
    iv.lo = x;
    iv.lo_singular = false;
    return iv;
  }
  Interval left_tail_interval(double x) const {
    Interval iv = impl_->support;
    iv.hi = x;
    iv.hi_singular = false;
    return iv;
  }

  detail::EdgeAwareDensity edge_density() const {
    Distribution self = *this;
    return {[self](double x) { return self.pdf(x); },
            [self](double delta) { return self.pdf_from_lo(delta); },
            [self](double delta) { return self.pdf_from_hi(delta); }};
  }

 private:
  friend Distribution make_distribution(const DistributionSpec&);
  explicit Distribution(std::shared_ptr<const detail::DistributionImpl> impl)
      : impl_(std::move(impl)) {}

  std::pair<double, double> quantile_bracket(double u) const {
    double lo, hi;
    if (impl_->cache) {
      std::tie(lo, hi) = u <= 0.5 ? impl_->cache->quantile_bracket(u)
                                  : impl_->cache->survival_bracket(1.0 - u);
    } else {
      lo = impl_->support.lo;
      hi = impl_->support.hi;
    }
    if (!std::isfinite(lo)) {
      lo = std::isfinite(hi) ? hi - 1.0 : -1.0;
      double width = 1.0;
      while (cdf(lo) > u) {
        lo -= width;
        width *= 2.0;
      }
    }
    if (!std::isfinite(hi)) {
      hi = std::max(lo + 1.0, 1.0);
      double width = 1.0;
      while (survival(hi) > 1.0 - u) {
        hi += width;
        width *= 2.0;
      }
    }
    return {lo, hi};
  }

  std::shared_ptr<const detail::DistributionImpl> impl_;
};

namespace detail {

inline void validate_spec(const DistributionSpec& spec) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + " must be positive");
  };
  switch (spec.family) {
    case FamilyKind::normal:
    case FamilyKind::uniform01:
      break;
    case FamilyKind::beta:
      positive(spec.alpha, "beta: alpha");
      positive(spec.beta, "beta: beta");
      break;
    case FamilyKind::gamma:
      positive(spec.shape, "gamma: shape");
      positive(spec.scale, "gamma: scale");
      break;
    case FamilyKind::exponential:
      positive(spec.rate, "exponential: rate");
      break;
    case FamilyKind::generalized_cauchy:
      if (!(spec.beta > 0.5))
        throw std::invalid_argument("generalized_cauchy requires beta > 1/2");
      break;
    case FamilyKind::subbotin:
      positive(spec.alpha, "subbotin: alpha");
      break;
    case FamilyKind::student:
      positive(spec.alpha, "student: alpha");
      break;
    case FamilyKind::pearson:
      if (!(spec.pearson.support_lo < spec.pearson.support_hi))
        throw std::invalid_argument("pearson: declared support must satisfy lo < hi");
      break;
    case FamilyKind::custom_tabulated:
      if (spec.table.size() < 2)
        throw std::invalid_argument("custom_tabulated: need at least two table rows");
      break;
  }
}

inline std::unique_ptr<const Family> build_family(const DistributionSpec& spec) {
  switch (spec.family) {
    case FamilyKind::normal: return std::make_unique<NormalFamily>();
    case FamilyKind::beta: return std::make_unique<BetaFamily>(spec.alpha, spec.beta);
    case FamilyKind::gamma: return std::make_unique<GammaFamily>(spec.shape, spec.scale);
    case FamilyKind::exponential: return std::make_unique<ExponentialFamily>(spec.rate);
    case FamilyKind::generalized_cauchy:
      return std::make_unique<GeneralizedCauchyFamily>(spec.beta);
    case FamilyKind::subbotin: return std::make_unique<SubbotinFamily>(spec.alpha);
    case FamilyKind::student: return std::make_unique<StudentFamily>(spec.alpha);
    case FamilyKind::uniform01: return std::make_unique<Uniform01Family>();
    case FamilyKind::pearson: return std::make_unique<PearsonFamily>(spec.pearson);
    case FamilyKind::custom_tabulated: return std::make_unique<TabulatedFamily>(spec.table);
  }
  throw std::invalid_argument("unknown family");
}

}  // namespace detail

inline Distribution make_distribution(const DistributionSpec& spec) {
  detail::validate_spec(spec);
  auto impl = std::make_shared<detail::DistributionImpl>();
  impl->spec = spec;
  impl->family = detail::build_family(spec);
  impl->support = impl->family->support();
  impl->finite_mean = impl->family->finite_mean();
  const auto* fam = impl->family.get();
  const Interval sup = impl->support;
  detail::EdgeAwareDensity pdf{
      [fam, sup](double x) {
        if (x <= sup.lo || x >= sup.hi) return 0.0;
        return std::exp(fam->log_density(x));
      },
      [fam](double delta) { return std::exp(fam->log_density_from_lo(delta)); },
      [fam](double delta) { return std::exp(fam->log_density_from_hi(delta)); }};
  if (!impl->family->analytic_cdf()) impl->cache.emplace(pdf, sup, 1024);
  if (impl->finite_mean) {
    if (auto m = impl->family->analytic_mean()) {
      impl->mean = *m;
    } else {
      Estimate est{0.0, 0.0, true};
      double lo = sup.lo, hi = sup.hi;
      auto add = [&est](const Estimate& e) {
        est.value += e.value;
        est.error_bound += e.error_bound;
        est.converged = est.converged && e.converged;
      };
      if (sup.lo_singular) {
        const double w = std::min(1.0, 0.5 * (sup.hi - sup.lo));
        add(detail::lo_edge_mass(pdf, [&sup](double d) { return sup.lo + d; }, w, {}));
        lo += w;
      }
      if (sup.hi_singular) {
        const double w = std::min(1.0, 0.5 * (sup.hi - sup.lo));
        add(detail::hi_edge_mass(pdf, [&sup](double d) { return sup.hi - d; }, w, {}));
        hi -= w;
      }
      if (lo < hi) add(integrate([&pdf](double x) { return x * pdf.at(x); },
                                 Interval{lo, hi, false, false}));
      if (!est.converged)
        throw numerical_error("mean quadrature did not converge for " + spec.label());
      impl->mean = est.value;
    }
  }
  return Distribution(std::shared_ptr<const detail::DistributionImpl>(std::move(impl)));
}

/// Integral of weight(x) p(x) dx over iv, a sub-interval of the support.
/// Pieces touching a flagged singular edge are integrated in the shifted
/// coordinate delta = distance-to-edge, which keeps the density exact there;
/// the weight only needs to be continuous at the edge.
inline Estimate expectation(const Distribution& d, const RealFn& weight, Interval iv,
                            const QuadratureConfig& cfg = {}) {
  iv.validate();
  const auto pdf = d.edge_density();
  Estimate total{0.0, 0.0, true};
  auto add = [&total](const Estimate& e) {
    total.value += e.value;
    total.error_bound += e.error_bound;
    total.converged = total.converged && e.converged;
  };
  double lo = iv.lo, hi = iv.hi;
  const double span = (iv.lo_finite() && iv.hi_finite()) ? hi - lo : 2.0;
  if (iv.lo_singular) {
    const double w = std::min(1.0, 0.5 * span);
    const double edge = lo;
    add(detail::lo_edge_mass(pdf, [&weight, edge](double delta) { return weight(edge + delta); },
                             w, cfg));
    lo += w;
  }
  if (iv.hi_singular) {
    const double w = std::min(1.0, 0.5 * span);
    const double edge = hi;
    add(detail::hi_edge_mass(pdf, [&weight, edge](double delta) { return weight(edge - delta); },
                             w, cfg));
    hi -= w;
  }
  if (lo < hi)
    add(integrate(
        [&](double x) {
          const double p = pdf.at(x);
          return p > 0.0 ? weight(x) * p : 0.0;
        },
        Interval{lo, hi, false, false}, cfg));
  return total;
}

/// Expectation of weight over the whole support.
inline Estimate expectation(const Distribution& d, const RealFn& weight,
                            const QuadratureConfig& cfg = {}) {
  return expectation(d, weight, d.support(), cfg);
}

/// Spec operation names.
inline double density(const Distribution& d, double x) { return d.pdf(x); }
inline double cdf(const Distribution& d, double x) { return d.cdf(x); }
inline double quantile(const Distribution& d, double u) { return d.quantile(u); }
inline double mean(const Distribution& d) { return d.mean(); }
inline std::optional<std::function<double(double)>> closed_form_kernel(const Distribution& d) {
  if (auto k = d.closed_form_kernel()) return k->tau;
  return std::nullopt;
}

}  // namespace stein1d

#endif  // STEIN1D_DISTRIBUTION_HPP
