#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stein1d/stein_core.hpp"

using namespace stein1d;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

KernelEvaluator make_ev(DistributionSpec spec, KernelMethod m = KernelMethod::closed_form) {
  return KernelEvaluator(make_distribution(spec), m);
}

std::vector<double> interior_grid(const Distribution& d, int n, double clip = 1e-6) {
  const Interval iv = d.clipped_interior(clip);
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = iv.lo + (iv.hi - iv.lo) * i / (n - 1.0);
  return xs;
}

}  // namespace

TEST_CASE("stein_kernel: normal kernel is identically one") {
  auto ev = make_ev(DistributionSpec::normal(), KernelMethod::direct_integral);
  CHECK_THAT(stein_kernel(ev, 0.0), WithinAbs(1.0, 1e-9));
  CHECK_THAT(stein_kernel(ev, 1.3), WithinAbs(1.0, 1e-9));
}

TEST_CASE("stein_kernel: exponential tau(x) = x") {
  auto ev = make_ev(DistributionSpec::exponential(1.0), KernelMethod::direct_integral);
  CHECK_THAT(stein_kernel(ev, 2.0), WithinRel(2.0, 1e-9));
  CHECK_THAT(stein_kernel(ev, 0.31), WithinRel(0.31, 1e-9));
}

TEST_CASE("stein_kernel: beta(2,2) closed form value") {
  auto ev = make_ev(DistributionSpec::beta_dist(2.0, 2.0));
  CHECK_THAT(stein_kernel(ev, 0.5), WithinAbs(0.0625, 1e-12));
  auto direct = make_ev(DistributionSpec::beta_dist(2.0, 2.0), KernelMethod::direct_integral);
  CHECK_THAT(stein_kernel(direct, 0.5), WithinRel(0.0625, 1e-9));
}

TEST_CASE("stein_kernel: errors at and beyond the support edge") {
  auto ev = make_ev(DistributionSpec::beta_dist(2.0, 2.0));
  CHECK_THROWS_AS(stein_kernel(ev, 1.5), std::domain_error);
  CHECK_THROWS_AS(stein_kernel(ev, 0.0), std::domain_error);
  auto heavy = make_ev(DistributionSpec::generalized_cauchy(0.9), KernelMethod::direct_integral);
  CHECK_THROWS_AS(stein_kernel(heavy, 0.0), std::domain_error);
}

TEST_CASE("hoeffding_kernel: values, symmetry, range") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  CHECK_THAT(hoeffding_kernel(u01, 0.5, 0.5), WithinAbs(0.25, 1e-14));
  CHECK_THAT(hoeffding_kernel(u01, 0.25, 0.75), WithinAbs(0.0625, 1e-14));
  CHECK(hoeffding_kernel(u01, 1e-12, 0.4) <= 1e-11);

  auto normal = make_distribution(DistributionSpec::normal());
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    const double x = g(rng), y = g(rng);
    const double k1 = hoeffding_kernel(normal, x, y);
    const double k2 = hoeffding_kernel(normal, y, x);
    CHECK(k1 == k2);
    CHECK(k1 >= 0.0);
    CHECK(k1 <= 0.25 + 1e-12);
  }
}

TEST_CASE("stein_kernel_via_hoeffding matches closed forms") {
  auto u01 = make_ev(DistributionSpec::uniform01(), KernelMethod::hoeffding_double);
  CHECK_THAT(stein_kernel(u01, 0.5), WithinRel(0.125, 1e-8));
  auto normal = make_ev(DistributionSpec::normal(), KernelMethod::hoeffding_double);
  CHECK_THAT(stein_kernel(normal, 1.0), WithinAbs(1.0, 1e-6));
  auto b22 = make_ev(DistributionSpec::beta_dist(2.0, 2.0), KernelMethod::hoeffding_double);
  CHECK_THAT(stein_kernel(b22, 0.25), WithinRel(0.25 * 0.75 / 4.0, 1e-8));
}

TEST_CASE("method agreement on interior grids") {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::normal(),
      DistributionSpec::beta_dist(2.0, 2.0),
      DistributionSpec::beta_dist(0.5, 0.5),
      DistributionSpec::gamma_dist(2.0, 1.0),
      DistributionSpec::exponential(1.0),
      DistributionSpec::generalized_cauchy(2.0),
      DistributionSpec::student(3.0),
  };
  for (const auto& spec : specs) {
    auto d = make_distribution(spec);
    INFO(d.label());
    KernelEvaluator cf(d), direct(d, KernelMethod::direct_integral),
        hoeff(d, KernelMethod::hoeffding_double);
    for (double x : interior_grid(d, 17)) {
      const double t_cf = stein_kernel(cf, x);
      const double t_d = stein_kernel(direct, x);
      const double t_h = stein_kernel(hoeff, x);
      CHECK_THAT(t_d, WithinRel(t_cf, 1e-6));
      CHECK_THAT(t_h, WithinRel(t_cf, 1e-6));
    }
  }
}

TEST_CASE("inverse_stein_operator: identity h reproduces the kernel") {
  auto e1 = make_ev(DistributionSpec::exponential(1.0));
  CHECK_THAT(inverse_stein_operator(e1, [](double y) { return y - 1.0; }, 1.0),
             WithinRel(1.0, 1e-8));
  auto normal = make_ev(DistributionSpec::normal());
  CHECK_THAT(inverse_stein_operator(normal, [](double y) { return y; }, 0.0),
             WithinAbs(1.0, 1e-8));
  CHECK_THAT(inverse_stein_operator(normal, [](double) { return 0.0; }, 0.7),
             WithinAbs(0.0, 1e-10));
}

TEST_CASE("stein_operator values") {
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(stein_operator(normal, [](double) { return 1.0; }, 2.0), WithinAbs(-2.0, 1e-8));
  CHECK_THAT(stein_operator(normal, [](double) { return 0.0; }, 0.4), WithinAbs(0.0, 1e-12));
  auto e1 = make_distribution(DistributionSpec::exponential(1.0));
  CHECK_THAT(stein_operator(e1, [](double) { return 1.0; }, 1.0), WithinAbs(-1.0, 1e-8));
}

TEST_CASE("stein_equation_residual vanishes") {
  auto normal = make_ev(DistributionSpec::normal());
  CHECK_THAT(stein_equation_residual(normal, [](double y) { return y; }, 0.7),
             WithinAbs(0.0, 1e-5));
  CHECK_THAT(stein_equation_residual(normal, [](double) { return 3.2; }, -0.4),
             WithinAbs(0.0, 1e-6));
  auto b22 = make_ev(DistributionSpec::beta_dist(2.0, 2.0));
  CHECK_THAT(stein_equation_residual(b22, [](double y) { return y; }, 0.3),
             WithinAbs(0.0, 1e-5));
}

TEST_CASE("stein identity: E[(X-mu)phi] = E[tau phi'] on a test corpus") {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::normal(),        DistributionSpec::beta_dist(2.0, 2.0),
      DistributionSpec::gamma_dist(2.0, 1.0), DistributionSpec::exponential(1.0),
      DistributionSpec::uniform01(),
  };
  struct Phi {
    RealFn f, fp;
  };
  const std::vector<Phi> corpus = {
      {[](double) { return 1.0; }, [](double) { return 0.0; }},
      {[](double x) { return x; }, [](double) { return 1.0; }},
      {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }},
      {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }},
      {[](double x) { return 1.0 / (1.0 + x * x); },
       [](double x) { return -2.0 * x / ((1.0 + x * x) * (1.0 + x * x)); }},
  };
  for (const auto& spec : specs) {
    auto ev = make_ev(spec);
    const double mu = ev.dist.mean();
    INFO(ev.dist.label());
    for (const auto& phi : corpus) {
      const double lhs =
          expectation(ev.dist, [&](double x) { return (x - mu) * phi.f(x); }).value;
      const double rhs =
          expectation(ev.dist, [&](double x) { return stein_kernel(ev, x) * phi.fp(x); },
                      ev.dist.clipped_interior(1e-12))
              .value;
      CHECK_THAT(lhs, WithinAbs(rhs, 1e-6));
    }
  }
}

TEST_CASE("E[tau] equals the variance") {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::normal(),
      DistributionSpec::beta_dist(2.0, 2.0),
      DistributionSpec::beta_dist(0.5, 0.5),
      DistributionSpec::gamma_dist(2.0, 1.0),
      DistributionSpec::exponential(1.0),
      DistributionSpec::generalized_cauchy(2.0),
      DistributionSpec::student(3.0),
      DistributionSpec::uniform01(),
      DistributionSpec::subbotin(1.5),
  };
  for (const auto& spec : specs) {
    auto ev = make_ev(spec);
    const double mu = ev.dist.mean();
    INFO(ev.dist.label());
    const double var =
        expectation(ev.dist, [mu](double x) { return (x - mu) * (x - mu); }).value;
    // E[tau] = Int tau p dx over the whole support; the numerator form stays
    // evaluable arbitrarily deep in the tails.
    const double e_tau =
        ev.dist.closed_form_kernel()
            ? expectation(ev.dist, ev.dist.closed_form_kernel()->tau).value
            : integrate([&](double x) { return stein_kernel_numerator(ev, x).value; },
                        ev.dist.support())
                  .value;
    CHECK_THAT(e_tau, WithinAbs(var, 1e-6));
  }
}

TEST_CASE("kernel positivity on interior grids") {
  for (const auto& spec :
       {DistributionSpec::normal(), DistributionSpec::beta_dist(0.5, 0.5),
        DistributionSpec::subbotin(1.5), DistributionSpec::subbotin(3.0),
        DistributionSpec::student(3.0)}) {
    auto ev = make_ev(spec, KernelMethod::direct_integral);
    INFO(ev.dist.label());
    for (double x : interior_grid(ev.dist, 21)) CHECK(stein_kernel(ev, x) > 0.0);
  }
}

TEST_CASE("strong log-concavity bound for the normal: tau <= 1") {
  auto ev = make_ev(DistributionSpec::normal(), KernelMethod::direct_integral);
  for (double x : interior_grid(ev.dist, 31)) CHECK(stein_kernel(ev, x) <= 1.0 + 1e-8);
}

TEST_CASE("subbotin kernel ordering against |x|^(2-alpha)") {
  // Integration by parts gives, for x > 0,
  //   tau_a(x) = x^(2-a) + (2-a) p(x)^-1 Int_x^inf y^(1-a) p(y) dy,
  // so tau lies strictly above |x|^(2-a) for a in (1,2) and strictly below it
  // for a > 2, at every x != 0.
  auto lo = make_ev(DistributionSpec::subbotin(1.5), KernelMethod::direct_integral);
  auto hi = make_ev(DistributionSpec::subbotin(3.0), KernelMethod::direct_integral);
  for (double x : {0.4, 0.9, 1.7, 2.6}) {
    CHECK(stein_kernel(lo, x) > std::pow(std::abs(x), 0.5));
    CHECK(stein_kernel(hi, x) < std::pow(std::abs(x), -1.0));
    CHECK(stein_kernel(lo, -x) > std::pow(std::abs(x), 0.5));
    CHECK(stein_kernel(hi, -x) < std::pow(std::abs(x), -1.0));
  }
}

TEST_CASE("stein_discrepancy values") {
  auto normal = make_ev(DistributionSpec::normal());
  CHECK_THAT(stein_discrepancy(normal, 2.0), WithinAbs(0.0, 1e-6));
  auto e1 = make_ev(DistributionSpec::exponential(1.0));
  CHECK_THAT(stein_discrepancy(e1, 2.0), WithinAbs(1.0, 1e-5));
  auto u01 = make_ev(DistributionSpec::uniform01());
  CHECK_THAT(stein_discrepancy(u01, 1.0), WithinAbs(1.0 - 1.0 / 12.0, 1e-7));
  CHECK_THROWS_AS(stein_discrepancy(u01, 0.5), std::invalid_argument);
}

TEST_CASE("stein_discrepancy: divergent integral is an error") {
  auto t3 = make_ev(DistributionSpec::student(3.0));
  CHECK_THROWS_AS(stein_discrepancy(t3, 2.0), numerical_error);
}

TEST_CASE("ksd_1d: shifted normal oracle") {
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(ksd_1d(normal, normal), WithinAbs(0.0, 1e-10));

  // q = N(theta, 1) via a pearson spec: p'/p = (theta - x)/1.
  auto shifted = [](double theta) {
    PearsonParams p;
    p.alpha = theta;
    p.beta0 = 1.0;
    return make_distribution(DistributionSpec::pearson_dist(p));
  };
  CHECK_THAT(ksd_1d(normal, shifted(0.5)), WithinAbs(0.25, 1e-6));
  CHECK_THAT(ksd_1d(normal, shifted(1.0)), WithinAbs(1.0, 1e-6));
}

TEST_CASE("ksd_1d: q vanishing inside the support is an error") {
  auto normal = make_distribution(DistributionSpec::normal());
  auto u01 = make_distribution(DistributionSpec::uniform01());
  CHECK_THROWS_AS(ksd_1d(normal, u01), numerical_error);
}
