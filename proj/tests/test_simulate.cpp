#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "stein1d/simulate.hpp"

using namespace stein1d;
using Catch::Matchers::WithinAbs;

TEST_CASE("sample: reproducible and labeled") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  auto a = sample(u01, 1000, 42);
  auto b = sample(u01, 1000, 42);
  CHECK(a.values == b.values);
  CHECK(a.generator == std::string("splitmix64-counter-v1"));
  CHECK(a.distribution_label == "uniform01");
  auto c = sample(u01, 1000, 43);
  CHECK(a.values != c.values);
}

TEST_CASE("sample: CLT-level empirical means") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  const std::size_t n = 100000;
  auto s = sample(u01, n, 7);
  double mean = 0.0;
  for (double v : s.values) mean += v;
  mean /= n;
  CHECK_THAT(mean, WithinAbs(0.5, 3.0 / std::sqrt(12.0 * n)));

  auto e1 = make_distribution(DistributionSpec::exponential(1.0));
  auto se = sample(e1, n, 7);
  double emean = 0.0;
  for (double v : se.values) emean += v;
  emean /= n;
  CHECK_THAT(emean, WithinAbs(1.0, 3.0 / std::sqrt(static_cast<double>(n))));
}

TEST_CASE("empirical_tail limits") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  auto s = sample(u01, 1000, 1);
  CHECK(empirical_tail(s, -1e9, 0.0) == 1.0);
  CHECK(empirical_tail(s, 2.0, 0.0) == 0.0);
}

TEST_CASE("empirical tail matches the true normal tail at r = 2") {
  auto normal = make_distribution(DistributionSpec::normal());
  auto s = sample(normal, 1000000, 20240817);
  const double tail = empirical_tail(s, 2.0, 0.0);
  CHECK_THAT(tail, WithinAbs(0.02275, 5e-4));
}

TEST_CASE("interpolated sampling matches exact quantiles") {
  auto b22 = make_distribution(DistributionSpec::beta_dist(2.0, 2.0));
  auto s = sample(b22, 2000, 5);
  for (std::size_t k = 0; k < 50; ++k) {
    const double u = stein1d::detail::uniform_at(5, k);
    CHECK_THAT(s.values[k], WithinAbs(b22.quantile(u), 1e-6));
  }
}

TEST_CASE("sample CSV export") {
  auto u01 = make_distribution(DistributionSpec::uniform01());
  auto s = sample(u01, 10, 3);
  export_csv(s, "/tmp/stein1d_samples.csv");
  std::ifstream in("/tmp/stein1d_samples.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.find("splitmix64-counter-v1") != std::string::npos);
  std::getline(in, line);
  CHECK(line == "value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
  std::remove("/tmp/stein1d_samples.csv");
}
