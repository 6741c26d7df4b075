// Prints a kernel grid next to the closed form for a few registry members.

#include <cstdio>

#include "stein1d/stein_core.hpp"
#include "stein1d/profile.hpp"

using namespace stein1d;

int main() {
  for (auto spec : {DistributionSpec::beta_dist(2.0, 2.0), DistributionSpec::exponential(1.0),
                    DistributionSpec::student(3.0)}) {
    auto d = make_distribution(spec);
    KernelEvaluator direct(d, KernelMethod::direct_integral);
    auto closed = d.closed_form_kernel();
    std::printf("# %s\n", d.label().c_str());
    std::printf("%12s %14s %14s\n", "x", "tau_numeric", "tau_closed");
    for (double x : report_grid(d, 9, 1e-3)) {
      std::printf("%12.6f %14.10f %14.10f\n", x, stein_kernel(direct, x), closed->tau(x));
    }
    std::printf("\n");
  }
  return 0;
}
