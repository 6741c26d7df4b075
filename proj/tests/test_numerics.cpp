#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stein1d/numerics.hpp"

using namespace stein1d;

TEST_CASE("integrate: polynomial on a finite interval") {
  auto est = integrate([](double x) { return x * x; }, Interval::bounded(0.0, 1.0));
  CHECK(est.converged);
  CHECK_THAT(est.value, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("integrate: exponential tail on a semi-infinite interval") {
  for (auto tr : {InfiniteTransform::rational, InfiniteTransform::exponential}) {
    QuadratureConfig cfg;
    cfg.infinite_transform = tr;
    auto est = integrate([](double x) { return std::exp(-x); }, Interval::right_tail(0.0), cfg);
    CHECK(est.converged);
    CHECK_THAT(est.value, Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("integrate: integrable endpoint singularity") {
  auto est = integrate([](double x) { return 1.0 / std::sqrt(x); },
                       Interval::bounded(0.0, 1.0, /*lo_singular=*/true));
  CHECK(est.converged);
  CHECK_THAT(est.value, Catch::Matchers::WithinAbs(2.0, 1e-10));
}

TEST_CASE("integrate: whole line Gaussian") {
  auto est = integrate([](double x) { return std::exp(-0.5 * x * x); }, Interval::whole_line());
  CHECK(est.converged);
  CHECK_THAT(est.value, Catch::Matchers::WithinRel(std::sqrt(2.0 * M_PI), 1e-10));
}

TEST_CASE("integrate: both endpoints singular (arcsine density)") {
  auto est = integrate([](double x) { return 1.0 / (M_PI * std::sqrt(x * (1.0 - x))); },
                       Interval::bounded(0.0, 1.0, true, true));
  CHECK(est.converged);
  CHECK_THAT(est.value, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("integrate: NaN integrand is a hard error") {
  CHECK_THROWS_AS(integrate([](double x) { return std::sqrt(x - 0.5); },
                            Interval::bounded(0.0, 1.0)),
                  numerical_error);
}

TEST_CASE("integrate: non-convergence reports converged=false") {
  QuadratureConfig cfg;
  cfg.max_subdivisions = 12;
  cfg.abs_tol = 1e-300;
  cfg.rel_tol = 1e-15;
  auto est = integrate([](double x) { return std::cos(500.0 * x); },
                       Interval::bounded(0.0, 1.0), cfg);
  CHECK_FALSE(est.converged);
}

TEST_CASE("integrate: linearity on random smooth integrands") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = coef(rng), b = coef(rng), w1 = coef(rng), w2 = coef(rng);
    auto f = [a](double x) { return std::sin(a * x) + x * x; };
    auto g = [b](double x) { return std::cos(b * x) * std::exp(-x * x / 8.0); };
    auto combo = [&](double x) { return w1 * f(x) + w2 * g(x); };
    const Interval iv = Interval::bounded(-2.0, 3.0);
    auto ec = integrate(combo, iv);
    auto ef = integrate(f, iv);
    auto eg = integrate(g, iv);
    const double budget = ec.error_bound + std::abs(w1) * ef.error_bound +
                          std::abs(w2) * eg.error_bound + 1e-12;
    CHECK(std::abs(ec.value - w1 * ef.value - w2 * eg.value) <= budget);
  }
}

TEST_CASE("find_root: classic brackets") {
  const double sqrt2 = find_root([](double x) { return x * x - 2.0; }, Interval::bounded(0.0, 2.0));
  CHECK_THAT(sqrt2, Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-12));

  const double lin = find_root([](double x) { return x - 0.3; }, Interval::bounded(0.0, 1.0));
  CHECK_THAT(lin, Catch::Matchers::WithinAbs(0.3, 1e-12));

  const double z = find_root([](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)) - 0.5; },
                             Interval::bounded(-5.0, 5.0));
  CHECK_THAT(z, Catch::Matchers::WithinAbs(0.0, 1e-10));
}

TEST_CASE("find_root: missing sign change is an error") {
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, Interval::bounded(-1.0, 1.0)),
                  numerical_error);
}

TEST_CASE("derivative: polynomial, constant, exponential") {
  CHECK_THAT(derivative([](double x) { return x * x; }, 3.0),
             Catch::Matchers::WithinAbs(6.0, 1e-8));
  CHECK_THAT(derivative([](double) { return 4.2; }, -7.0), Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(derivative([](double x) { return std::exp(x); }, 0.0),
             Catch::Matchers::WithinAbs(1.0, 1e-8));
}

TEST_CASE("refine_supremum: unique maxima") {
  auto [x1, v1] = refine_supremum([](double x) { return -(x - 1.0) * (x - 1.0); },
                                  Interval::bounded(0.0, 3.0));
  CHECK_THAT(x1, Catch::Matchers::WithinAbs(1.0, 1e-6));
  CHECK_THAT(v1, Catch::Matchers::WithinAbs(0.0, 1e-10));

  auto [x2, v2] = refine_supremum([](double x) { return std::sin(x); }, Interval::bounded(0.0, M_PI));
  CHECK_THAT(x2, Catch::Matchers::WithinAbs(M_PI / 2.0, 1e-6));
  CHECK_THAT(v2, Catch::Matchers::WithinAbs(1.0, 1e-10));

  auto [x3, v3] = refine_supremum([](double x) { return x * std::exp(-x); }, Interval::right_tail(0.0));
  CHECK_THAT(x3, Catch::Matchers::WithinAbs(1.0, 1e-5));
  CHECK_THAT(v3, Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-9));
}

TEST_CASE("refine_supremum: never below the best grid sample") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 2.5);
  for (int trial = 0; trial < 10; ++trial) {
    const double k = u(rng);
    auto f = [k](double x) { return std::sin(k * x) - 0.1 * x * x; };
    const Interval iv = Interval::bounded(-4.0, 4.0);
    auto [xs, vs] = refine_supremum(f, iv, 64);
    (void)xs;
    double grid_best = -inf;
    for (int i = 1; i <= 64; ++i) {
      const double x = -4.0 + 8.0 * i / 65.0;
      grid_best = std::max(grid_best, f(x));
    }
    CHECK(vs >= grid_best - 1e-12);
  }
}

TEST_CASE("refine_supremum: NaN everywhere is an error") {
  CHECK_THROWS_AS(refine_supremum([](double) { return std::nan(""); }, Interval::bounded(0.0, 1.0)),
                  numerical_error);
}

TEST_CASE("convex_conjugate: quadratic psi") {
  auto psi = [](double lam) { return lam * lam; };
  CHECK_THAT(convex_conjugate(psi, 2.0, Interval::right_tail(0.0)),
             Catch::Matchers::WithinAbs(1.0, 1e-8));
  CHECK_THAT(convex_conjugate(psi, 0.0, Interval::right_tail(0.0)),
             Catch::Matchers::WithinAbs(0.0, 1e-8));
}

TEST_CASE("convex_conjugate: barrier psi with calculus oracle") {
  // maximize lam - lam^2/(1-lam) on (0,1): maximizer 1-1/sqrt(2), value 3-2sqrt(2)
  auto psi = [](double lam) {
    if (lam >= 1.0) return inf;
    return lam * lam / (1.0 - lam);
  };
  CHECK_THAT(convex_conjugate(psi, 1.0, Interval::bounded(0.0, 1.0)),
             Catch::Matchers::WithinAbs(3.0 - 2.0 * std::sqrt(2.0), 1e-8));
}

TEST_CASE("convex_conjugate: divergent objective reports +inf") {
  auto psi = [](double lam) { return std::sqrt(lam); };
  CHECK(std::isinf(convex_conjugate(psi, 1.0, Interval::right_tail(0.0))));
}

TEST_CASE("convex_conjugate: psi identically infinite is an error") {
  auto psi = [](double) { return inf; };
  CHECK_THROWS_AS(convex_conjugate(psi, 1.0, Interval::bounded(0.0, 1.0)), numerical_error);
}

TEST_CASE("interval validation") {
  CHECK_THROWS_AS(Interval::bounded(1.0, 1.0).validate(), std::invalid_argument);
  Interval bad = Interval::right_tail(0.0);
  bad.hi_singular = true;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
