// Races the concentration bounds against the exact and empirical tails of
// the exponential distribution.

#include <cstdio>

#include "stein1d/concentration.hpp"
#include "stein1d/simulate.hpp"

using namespace stein1d;

int main() {
  auto d = make_distribution(DistributionSpec::exponential(1.0));
  KernelEvaluator ev(d);
  auto prof = fit_profile(ev, report_grid(d, 201));
  auto stats = identity_moment_stats(d);
  auto mc = sample(d, 200000, 7);
  const double mu = d.mean();
  const auto [a, b] = *prof.sublinear;

  std::printf("%6s %12s %12s %12s %12s %12s\n", "r", "exact", "empirical", "subgamma",
              "mills_gamma", "fenchel");
  for (double r : {0.5, 1.0, 2.0, 4.0, 6.0, 9.0}) {
    std::printf("%6.2f %12.3e %12.3e %12.3e %12.3e %12.3e\n", r, d.survival(mu + r),
                empirical_tail(mc, r, mu), subgamma_bound(a, b, r),
                mills_gamma_bounds(a, b, r, stats).bounds.at("mills_gamma_right"),
                fenchel_tail_bound(ev, r, 1.0));
  }
  return 0;
}
