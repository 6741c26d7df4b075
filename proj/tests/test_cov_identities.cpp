#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stein1d/cov_identities.hpp"

using namespace stein1d;
using Catch::Matchers::WithinAbs;

namespace {

TestFunction tf_id() {
  return {"id", [](double x) { return x; }, [](double) { return 1.0; }, 1.0};
}
TestFunction tf_const(double c) {
  return {"const", [c](double) { return c; }, [](double) { return 0.0; }, 0.0};
}
TestFunction tf_square() {
  return {"square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
          std::nullopt};
}
TestFunction tf_sin() {
  return {"sin", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0};
}
TestFunction tf_atan() {
  return {"atan", [](double x) { return std::atan(x); },
          [](double x) { return 1.0 / (1.0 + x * x); }, 1.0};
}
TestFunction tf_exp_quarter() {
  return {"exp_quarter", [](double x) { return std::exp(0.25 * x); },
          [](double x) { return 0.25 * std::exp(0.25 * x); }, std::nullopt};
}

}  // namespace

TEST_CASE("validate_test_function catches a wrong derivative") {
  TestFunction bad{"bad", [](double x) { return x * x; }, [](double x) { return 3.0 * x; },
                   std::nullopt};
  CHECK_THROWS_AS(validate_test_function(bad, Interval::bounded(0.0, 1.0)),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_test_function(tf_square(), Interval::bounded(0.0, 1.0)));
}

TEST_CASE("covariance_direct: variance oracles") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  CHECK_THAT(covariance_direct(u01, tf_id(), tf_id()), WithinAbs(1.0 / 12.0, 1e-10));
  auto b22 = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  CHECK_THAT(covariance_direct(b22, tf_id(), tf_id()), WithinAbs(0.05, 1e-10));
  CHECK_THAT(covariance_direct(b22, tf_const(3.0), tf_id()), WithinAbs(0.0, 1e-12));
}

TEST_CASE("covariance_hoeffding: oracles") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  CHECK_THAT(covariance_hoeffding(u01, tf_id(), tf_id()), WithinAbs(1.0 / 12.0, 1e-8));
  CHECK_THAT(covariance_hoeffding(u01, tf_id(), tf_const(2.0)), WithinAbs(0.0, 1e-12));
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(covariance_hoeffding(normal, tf_id(), tf_id()), WithinAbs(1.0, 1e-7));
}

TEST_CASE("covariance_inverse_operator: oracles") {
  auto normal = make_distribution(DistributionSpec::normal());
  CHECK_THAT(covariance_inverse_operator(normal, tf_id(), tf_id()), WithinAbs(1.0, 1e-7));
  auto e1 = make_distribution(DistributionSpec::exponential(1.0));
  CHECK_THAT(covariance_inverse_operator(e1, tf_id(), tf_id()), WithinAbs(1.0, 1e-7));
  CHECK_THAT(covariance_inverse_operator(e1, tf_const(1.0), tf_sin()), WithinAbs(0.0, 1e-12));
}

TEST_CASE("three-way agreement across distributions and function pairs") {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::normal(),        DistributionSpec::beta_dist(2.0, 2.0),
      DistributionSpec::gamma_dist(2.0, 1.0), DistributionSpec::exponential(1.0),
      DistributionSpec::uniform01(),
  };
  for (const auto& spec : specs) {
    auto d = make_distribution(spec);
    const bool compact = d.support().lo_finite() && d.support().hi_finite();
    std::vector<TestFunction> corpus = {tf_id(), tf_square(), tf_sin(), tf_atan()};
    if (compact) corpus.push_back(tf_exp_quarter());
    INFO(d.label());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (std::size_t j = i; j < corpus.size(); ++j) {
        const double c1 = covariance_direct(d, corpus[i], corpus[j]);
        const double c2 = covariance_hoeffding(d, corpus[i], corpus[j]);
        const double c3 = covariance_inverse_operator(d, corpus[i], corpus[j]);
        INFO(corpus[i].label << " x " << corpus[j].label);
        CHECK_THAT(c2, WithinAbs(c1, 1e-5));
        CHECK_THAT(c3, WithinAbs(c1, 1e-5));
        CHECK_THAT(c3, WithinAbs(c2, 1e-5));
      }
    }
  }
}

TEST_CASE("hoeffding covariance is symmetric") {
  auto b22 = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  const double a = covariance_hoeffding(b22, tf_id(), tf_sin());
  const double b = covariance_hoeffding(b22, tf_sin(), tf_id());
  CHECK_THAT(a, WithinAbs(b, 1e-9));
}

TEST_CASE("covariance inequality: |Cov(g,h)| <= E[|g'| tau] for 1-Lipschitz h") {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::normal(), DistributionSpec::exponential(1.0),
      DistributionSpec::beta_dist(2.0, 2.0)};
  for (const auto& spec : specs) {
    auto d = make_distribution(spec);
    auto tau = d.closed_form_kernel()->tau;
    INFO(d.label());
    for (const auto& g : {tf_id(), tf_sin(), tf_square()}) {
      for (const auto& h : {tf_id(), tf_sin(), tf_atan()}) {  // 1-Lipschitz h only
        const double cov = covariance_direct(d, g, h);
        const double bound =
            expectation(d, [&](double x) { return std::abs(g.f_prime(x)) * tau(x); }).value;
        INFO(g.label << " x " << h.label);
        CHECK(std::abs(cov) <= bound + 1e-7);
      }
    }
  }
}
