// Command-line runner for one-dimensional Stein kernel reports: kernel grids,
// inequality checks, concentration bound races, and tail reconstructions.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stein1d/report.hpp"

namespace {

using namespace stein1d;

Distribution distribution_from_arg(const std::string& spec_json) {
  return make_distribution(parse_spec_json(spec_json));
}

int run_kernel(const std::string& spec_json, int grid_points) {
  auto d = distribution_from_arg(spec_json);
  KernelEvaluator ev(d);
  auto xs = report_grid(d, grid_points);
  std::printf("# %s\n", d.label().c_str());
  std::printf("x,tau\n");
  for (double x : xs) std::printf("%.12g,%.12g\n", x, stein_kernel(ev, x));
  return 0;
}

int run_check(const std::string& kind, const std::string& spec_json) {
  auto d = distribution_from_arg(spec_json);
  KernelEvaluator ev(d);
  auto print = [](const InequalityReport& rep) {
    std::printf("%s: holds=%s lhs=%.10g rhs=%.10g slack=%.10g\n", rep.name.c_str(),
                rep.holds ? "true" : "false", rep.lhs, rep.rhs, rep.slack);
    for (const auto& [k, v] : rep.constants) std::printf("  %s = %.10g\n", k.c_str(), v);
    if (!rep.notes.empty()) std::printf("  notes: %s\n", rep.notes.c_str());
  };
  TestFunction id{"id", [](double x) { return x; }, [](double) { return 1.0; }, 1.0};
  TestFunction sin_f{"sin", [](double x) { return std::sin(x); },
                     [](double x) { return std::cos(x); }, 1.0};
  if (kind == "poincare") {
    print(weighted_poincare_report(ev, id));
    return 0;
  }
  if (kind == "logsobolev") {
    print(weighted_logsobolev_report(ev, sin_f));
    auto prof = fit_profile(ev, report_grid(d, 201));
    std::string notes;
    std::printf("feasibility: %s\n", to_string(logsobolev_feasibility(prof, d.support(), &notes)));
    if (!notes.empty()) std::printf("  %s\n", notes.c_str());
    return 0;
  }
  if (kind == "bl") {
    print(asymmetric_bl_report(ev, id, sin_f, 2.0, 2.0));
    return 0;
  }
  if (kind == "isoperimetry") {
    print(isoperimetric_constant(d));
    return 0;
  }
  throw std::invalid_argument("unknown check: " + kind +
                              " (expected poincare|logsobolev|bl|isoperimetry)");
}

int run_bounds(const std::string& spec_json, std::vector<double> r_grid) {
  auto d = distribution_from_arg(spec_json);
  KernelEvaluator ev(d);
  auto prof = fit_profile(ev, report_grid(d, 201));
  auto stats = identity_moment_stats(d);
  const double mu = d.mean();
  if (r_grid.empty()) {
    const double r_max = d.quantile(1.0 - 1e-6) - mu;
    for (int i = 1; i <= 10; ++i) r_grid.push_back(r_max * i / 10.0);
  }
  std::printf("r,exact_tail");
  if (prof.sup_bound) std::printf(",chernoff,mills_right,mills_abs");
  if (prof.sublinear) std::printf(",subgamma");
  if (prof.sublinear && prof.sublinear->first > 0.0) std::printf(",mills_gamma_right");
  std::printf(",fenchel\n");
  for (double r : r_grid) {
    std::printf("%.12g,%.12g", r, d.survival(mu + r));
    if (prof.sup_bound) {
      auto p = subgaussian_bounds(prof, stats, r);
      std::printf(",%.12g,%.12g,%.12g", p.bounds.at("chernoff"), p.bounds.at("mills_right"),
                  p.bounds.at("mills_abs"));
    }
    if (prof.sublinear)
      std::printf(",%.12g", subgamma_bound(prof.sublinear->first, prof.sublinear->second, r));
    if (prof.sublinear && prof.sublinear->first > 0.0)
      std::printf(",%.12g", mills_gamma_bounds(prof.sublinear->first, prof.sublinear->second, r,
                                               stats)
                                .bounds.at("mills_gamma_right"));
    std::printf(",%.12g\n", fenchel_tail_bound(ev, r, 12.0));
  }
  return 0;
}

int run_tails(const std::string& spec_json) {
  auto d = distribution_from_arg(spec_json);
  KernelEvaluator ev(d);
  const double mu = d.mean();
  std::printf("x,exact_tail,reconstructed\n");
  for (int i = 1; i <= 10; ++i) {
    const double x = mu + (d.quantile(1.0 - 1e-4) - mu) * i / 10.0;
    std::printf("%.12g,%.12g,%.12g\n", x, d.survival(x), tail_from_h(ev, mu, x));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-dimensional Stein kernels, functional inequalities and tail bounds"};
  app.require_subcommand(1);

  std::string config_path;
  auto* report_cmd = app.add_subcommand("report", "Run a JSON-configured report");
  report_cmd->add_option("config", config_path, "Report config JSON file")->required();

  std::string kernel_spec;
  int kernel_grid = 201;
  auto* kernel_cmd = app.add_subcommand("kernel", "Print a (x, tau) kernel grid");
  kernel_cmd->add_option("spec", kernel_spec, "Distribution spec JSON")->required();
  kernel_cmd->add_option("--grid", kernel_grid, "Grid points")->check(CLI::PositiveNumber);

  std::string check_kind, check_spec;
  auto* check_cmd = app.add_subcommand("check", "Run an inequality checker");
  check_cmd->add_option("kind", check_kind, "poincare|logsobolev|bl|isoperimetry")->required();
  check_cmd->add_option("spec", check_spec, "Distribution spec JSON")->required();

  std::string bounds_spec;
  std::vector<double> r_grid;
  auto* bounds_cmd = app.add_subcommand("bounds", "Race concentration bounds against the tail");
  bounds_cmd->add_option("spec", bounds_spec, "Distribution spec JSON")->required();
  bounds_cmd->add_option("--r-grid", r_grid, "Radii (comma separated)")->delimiter(',');

  std::string tails_spec;
  auto* tails_cmd = app.add_subcommand("tails", "Reconstruct tails from the kernel");
  tails_cmd->add_option("spec", tails_spec, "Distribution spec JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report_cmd->parsed()) {
      auto cfg = stein1d::load_report_config(config_path);
      auto doc = stein1d::run_report(cfg);
      if (cfg.output_path.empty()) std::cout << doc.dump(2) << "\n";
      return 0;
    }
    if (kernel_cmd->parsed()) return run_kernel(kernel_spec, kernel_grid);
    if (check_cmd->parsed()) return run_check(check_kind, check_spec);
    if (bounds_cmd->parsed()) return run_bounds(bounds_spec, r_grid);
    if (tails_cmd->parsed()) return run_tails(tails_spec);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const stein1d::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
