#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stein1d/distribution.hpp"

using namespace stein1d;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<Distribution> registry() {
  return {
      make_distribution(DistributionSpec::normal()),
      make_distribution(DistributionSpec::beta_dist(2.0, 2.0)),
      make_distribution(DistributionSpec::beta_dist(0.5, 0.5)),
      make_distribution(DistributionSpec::gamma_dist(2.0, 1.0)),
      make_distribution(DistributionSpec::exponential(1.0)),
      make_distribution(DistributionSpec::generalized_cauchy(2.0)),
      make_distribution(DistributionSpec::student(3.0)),
      make_distribution(DistributionSpec::uniform01()),
      make_distribution(DistributionSpec::subbotin(1.5)),
  };
}

}  // namespace

TEST_CASE("make_distribution: beta(2,2) basics") {
  auto d = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  CHECK(d.support().lo == 0.0);
  CHECK(d.support().hi == 1.0);
  CHECK_THAT(d.mean(), WithinAbs(0.5, 1e-12));
  CHECK_THAT(d.pdf(0.5), WithinAbs(1.5, 1e-12));
}

TEST_CASE("make_distribution: validation errors name the constraint") {
  CHECK_THROWS_WITH(make_distribution(DistributionSpec::generalized_cauchy(0.4)),
                    Catch::Matchers::ContainsSubstring("beta > 1/2"));
  CHECK_THROWS_AS(make_distribution(DistributionSpec::beta_dist(-1.0, 2.0)),
                  std::invalid_argument);
  CHECK_THROWS_WITH(
      make_distribution(DistributionSpec::tabulated({{0.0, 1.0}, {0.5, -0.2}, {1.0, 1.0}})),
      Catch::Matchers::ContainsSubstring("positive"));
}

TEST_CASE("density values") {
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(density(normal, 0.0), WithinAbs(1.0 / std::sqrt(2.0 * M_PI), 1e-12));
  auto b22 = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  CHECK_THAT(density(b22, 0.5), WithinAbs(1.5, 1e-12));
  CHECK(density(b22, 2.0) == 0.0);
}

TEST_CASE("cdf values") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  CHECK_THAT(cdf(u01, 0.3), WithinAbs(0.3, 1e-15));
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(cdf(normal, 0.0), WithinAbs(0.5, 1e-15));
  auto e1 = make_distribution(DistributionSpec::exponential(1.0));
  CHECK_THAT(cdf(e1, 1.0), WithinAbs(1.0 - std::exp(-1.0), 1e-14));
}

TEST_CASE("quantile values") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  CHECK_THAT(quantile(u01, 0.25), WithinAbs(0.25, 1e-14));
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(quantile(normal, 0.5), WithinAbs(0.0, 1e-10));
  auto e1 = make_distribution(DistributionSpec::exponential(1.0));
  CHECK_THAT(quantile(e1, 0.5), WithinAbs(std::log(2.0), 1e-13));
  CHECK_THROWS_AS(quantile(u01, 1.5), std::invalid_argument);
}

TEST_CASE("mean values and infinite-mean error") {
  CHECK_THAT(mean(make_distribution(DistributionSpec::beta_dist(2.0, 5.0))),
             WithinAbs(2.0 / 7.0, 1e-12));
  CHECK_THAT(mean(make_distribution(DistributionSpec::gamma_dist(2.0, 3.0))),
             WithinAbs(6.0, 1e-12));
  CHECK_THAT(mean(make_distribution(DistributionSpec::normal())), WithinAbs(0.0, 1e-12));
  auto heavy = make_distribution(DistributionSpec::generalized_cauchy(0.9));
  CHECK_FALSE(heavy.has_finite_first_moment());
  CHECK_THROWS_WITH(mean(heavy), Catch::Matchers::ContainsSubstring("no finite mean"));
}

TEST_CASE("closed-form kernels") {
  auto b22 = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  REQUIRE(closed_form_kernel(b22).has_value());
  CHECK_THAT((*closed_form_kernel(b22))(0.5), WithinAbs(0.0625, 1e-15));

  auto t3 = make_distribution(DistributionSpec::student(3.0));
  REQUIRE(closed_form_kernel(t3).has_value());
  CHECK_THAT((*closed_form_kernel(t3))(0.0), WithinAbs(1.5, 1e-15));

  auto c2 = make_distribution(DistributionSpec::generalized_cauchy(2.0));
  REQUIRE(closed_form_kernel(c2).has_value());
  CHECK_THAT((*closed_form_kernel(c2))(1.0), WithinAbs(1.0, 1e-15));

  auto c09 = make_distribution(DistributionSpec::generalized_cauchy(0.9));
  CHECK_FALSE(closed_form_kernel(c09).has_value());
  CHECK_THAT(c09.kernel_absent_reason(),
             Catch::Matchers::ContainsSubstring("infinite first moment"));

  CHECK_FALSE(closed_form_kernel(make_distribution(DistributionSpec::subbotin(1.5))).has_value());
}

TEST_CASE("densities integrate to one across the registry") {
  for (const auto& d : registry()) {
    auto est = integrate([&](double x) { return d.pdf(x); }, d.support());
    INFO(d.label());
    CHECK(est.converged);
    CHECK(std::abs(est.value - 1.0) <= 1e-7);
  }
}

TEST_CASE("quantile of cdf is the identity on interior grids") {
  for (const auto& d : registry()) {
    INFO(d.label());
    for (int i = 1; i <= 9; ++i) {
      const double u = i / 10.0;
      const double x = d.quantile(u);
      CHECK_THAT(d.cdf(x), WithinAbs(u, 1e-9));
      CHECK(std::abs(d.quantile(d.cdf(x)) - x) <= 1e-7 * (1.0 + std::abs(x)));
    }
  }
}

TEST_CASE("cdf + survival stays near one, including deep tails") {
  for (const auto& d : registry()) {
    INFO(d.label());
    for (double u : {1e-7, 1e-4, 0.2, 0.5, 0.9, 1.0 - 1e-5}) {
      const double x = d.quantile(u);
      CHECK_THAT(d.cdf(x) + d.survival(x), WithinAbs(1.0, 1e-8));
    }
    // Deep-tail survival keeps relative precision.
    const double xq = d.quantile(1.0 - 1e-6);
    CHECK_THAT(d.survival(xq), WithinRel(1e-6, 1e-4));
  }
}

TEST_CASE("symmetric families have symmetric densities") {
  for (auto spec : {DistributionSpec::normal(), DistributionSpec::subbotin(1.5),
                    DistributionSpec::student(3.0), DistributionSpec::generalized_cauchy(2.0)}) {
    auto d = make_distribution(spec);
    INFO(d.label());
    for (double x : {0.3, 1.1, 2.7}) CHECK(d.pdf(x) == d.pdf(-x));
  }
  auto b = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  for (double x : {0.1, 0.25, 0.4})
    CHECK_THAT(b.pdf(0.5 + x), WithinRel(b.pdf(0.5 - x), 1e-12));
}

TEST_CASE("closed-form kernels are positive on the interior") {
  for (const auto& d : registry()) {
    auto k = d.closed_form_kernel();
    if (!k) continue;
    INFO(d.label());
    for (int i = 1; i <= 19; ++i) {
      const double x = d.quantile(i / 20.0);
      CHECK(k->tau(x) > 0.0);
    }
  }
}

TEST_CASE("potential and analytic potential derivative") {
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(normal.potential_prime(1.7), WithinAbs(1.7, 1e-12));
  auto e1 = make_distribution(DistributionSpec::exponential(1.0));
  CHECK_THAT(e1.potential_prime(0.4), WithinAbs(1.0, 1e-12));
  auto b22 = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  // phi' = -1/x + 1/(1-x)
  CHECK_THAT(b22.potential_prime(0.25), WithinAbs(-4.0 + 4.0 / 3.0, 1e-10));
}

TEST_CASE("pearson family reproduces the student distribution") {
  // Student(3): p'/p = -4x/(3+x^2)  ->  lambda=0, alpha=0, q(u) = (3+u^2)/4.
  PearsonParams p;
  p.lambda = 0.0;
  p.alpha = 0.0;
  p.beta0 = 0.75;
  p.beta1 = 0.0;
  p.beta2 = 0.25;
  auto pearson = make_distribution(DistributionSpec::pearson_dist(p));
  auto student = make_distribution(DistributionSpec::student(3.0));
  for (double x : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
    CHECK_THAT(pearson.pdf(x), WithinRel(student.pdf(x), 1e-7));
  }
  REQUIRE(pearson.closed_form_kernel().has_value());
  // tau = q(u)/(1-2*beta2) = (3+x^2)/2, matching the student kernel.
  CHECK_THAT(pearson.closed_form_kernel()->tau(1.0), WithinAbs(2.0, 1e-12));
  CHECK_THAT(pearson.mean(), WithinAbs(0.0, 1e-9));
}

TEST_CASE("pearson rejects a non-normalizable spec") {
  PearsonParams p;  // p'/p = (0 - x)/(-1) = x -> density exp(x^2/2), not normalizable
  p.beta0 = -1.0;
  CHECK_THROWS_AS(make_distribution(DistributionSpec::pearson_dist(p)), std::invalid_argument);
}

TEST_CASE("custom tabulated density: renormalized, interpolated, usable") {
  std::vector<std::pair<double, double>> tbl;
  for (int i = 0; i <= 40; ++i) {
    const double x = 2.0 * i / 40.0;
    tbl.emplace_back(x, 0.1 + x * (2.0 - x));
  }
  auto d = make_distribution(DistributionSpec::tabulated(tbl));
  auto norm = integrate([&](double x) { return d.pdf(x); }, d.support());
  CHECK_THAT(norm.value, WithinAbs(1.0, 1e-9));
  CHECK(d.has_finite_first_moment());
  CHECK_THAT(d.mean(), WithinAbs(1.0, 1e-6));  // symmetric table
  CHECK_THAT(d.cdf(2.0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(d.quantile(0.5), WithinAbs(1.0, 1e-7));
}
