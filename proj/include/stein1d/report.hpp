#ifndef STEIN1D_REPORT_HPP
#define STEIN1D_REPORT_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "stein1d/functional_ineq.hpp"
#include "stein1d/simulate.hpp"
#include "stein1d/spec_io.hpp"
#include "stein1d/tails_density.hpp"

namespace stein1d {

inline constexpr int kReportSchemaVersion = 1;

struct ReportConfig {
  DistributionSpec distribution;
  std::vector<std::string> tasks;
  int grid_points = 201;
  double clip_quantile = 1e-6;
  QuadratureConfig quadrature;
  std::uint64_t seed = 0;
  std::size_t montecarlo_n = 100000;
  std::string output_path;
};

namespace detail {

inline const std::set<std::string>& known_tasks() {
  static const std::set<std::string> tasks = {
      "kernel_grid",  "poincare",       "logsobolev", "brascamp_lieb", "isoperimetry",
      "concentration", "tails",         "density_roundtrip", "montecarlo"};
  return tasks;
}

inline int thread_budget() {
  if (const char* env = std::getenv("STEIN1D_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// Index-sliced parallel for; writes by slot keep results deterministic
// regardless of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn) {
  const int threads = std::min<std::size_t>(thread_budget(), n == 0 ? 1 : n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Numeric field with its quadrature error bound, or tagged exact.
inline nlohmann::json tagged(double value, double error_bound) {
  return nlohmann::json{{"value", value}, {"error_bound", error_bound}};
}
inline nlohmann::json exact(double value) {
  return nlohmann::json{{"value", value}, {"exact", true}};
}
inline nlohmann::json tol_tagged(double value, const QuadratureConfig& cfg) {
  return tagged(value, std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value)));
}

inline nlohmann::json report_to_json(const InequalityReport& rep,
                                     const QuadratureConfig& cfg) {
  nlohmann::json j;
  j["name"] = rep.name;
  j["lhs"] = tol_tagged(rep.lhs, cfg);
  j["rhs"] = tol_tagged(rep.rhs, cfg);
  j["slack"] = tol_tagged(rep.slack, cfg);
  j["holds"] = rep.holds;
  nlohmann::json consts;
  for (const auto& [k, v] : rep.constants) consts[k] = tol_tagged(v, cfg);
  j["constants"] = consts;
  if (!rep.notes.empty()) j["notes"] = rep.notes;
  return j;
}

inline std::string csv_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << (c ? "," : "") << csv_cell(columns[c][r]);
    out << "\n";
  }
}

inline std::string output_stem(const std::string& output_path) {
  const auto dot = output_path.rfind(".json");
  return dot == std::string::npos ? output_path : output_path.substr(0, dot);
}

inline TestFunction report_corpus_id() {
  return {"id", [](double x) { return x; }, [](double) { return 1.0; }, 1.0};
}
inline TestFunction report_corpus_sin() {
  return {"sin", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0};
}

}  // namespace detail

inline ReportConfig parse_report_config(const nlohmann::json& j) {
  ReportConfig cfg;
  if (!j.contains("distribution"))
    throw std::invalid_argument("report config: missing 'distribution'");
  cfg.distribution = parse_spec_json(j.at("distribution"));
  if (!j.contains("tasks") || !j.at("tasks").is_array() || j.at("tasks").empty())
    throw std::invalid_argument("report config: requires at least one task");
  for (const auto& t : j.at("tasks")) {
    const std::string name = t.get<std::string>();
    if (!detail::known_tasks().count(name))
      throw std::invalid_argument("report config: unknown task '" + name + "'");
    cfg.tasks.push_back(name);
  }
  if (j.contains("grid")) {
    cfg.grid_points = j.at("grid").value("points", 201);
    cfg.clip_quantile = j.at("grid").value("clip_quantile", 1e-6);
  }
  if (cfg.grid_points < 2) throw std::invalid_argument("report config: grid.points must be >= 2");
  if (!(cfg.clip_quantile > 0.0 && cfg.clip_quantile <= 0.01))
    throw std::invalid_argument("report config: grid.clip_quantile must lie in (0, 0.01]");
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    cfg.quadrature.abs_tol = q.value("abs_tol", 1e-10);
    cfg.quadrature.rel_tol = q.value("rel_tol", 1e-8);
    cfg.quadrature.max_subdivisions = q.value("max_subdivisions", 2000);
    const std::string tr = q.value("infinite_transform", "rational");
    if (tr == "rational") {
      cfg.quadrature.infinite_transform = InfiniteTransform::rational;
    } else if (tr == "exponential") {
      cfg.quadrature.infinite_transform = InfiniteTransform::exponential;
    } else {
      throw std::invalid_argument("report config: unknown infinite_transform '" + tr + "'");
    }
    cfg.quadrature.validate();
  }
  cfg.seed = j.value("seed", 0ULL);
  cfg.montecarlo_n = j.value("montecarlo_n", 100000ULL);
  cfg.output_path = j.value("output_path", std::string());
  return cfg;
}

inline ReportConfig load_report_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open report config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("report config is not valid JSON: ") + e.what());
  }
  return parse_report_config(j);
}

/// Runs the configured tasks and returns the JSON report document. CSV side
/// files are written next to output_path when it is set. Task-level
/// hypothesis failures are recorded in the report rather than thrown.
inline nlohmann::json run_report(const ReportConfig& cfg) {
  if (cfg.tasks.empty()) throw std::invalid_argument("run_report: requires at least one task");
  auto d = make_distribution(cfg.distribution);
  KernelEvaluator ev(d, KernelMethod::closed_form, cfg.quadrature);
  const auto grid = report_grid(d, cfg.grid_points, cfg.clip_quantile);
  const std::string stem =
      cfg.output_path.empty() ? std::string() : detail::output_stem(cfg.output_path);

  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["distribution"] = spec_to_json(cfg.distribution);
  doc["label"] = d.label();
  doc["seed"] = cfg.seed;
  doc["generator"] = kGeneratorId;
  doc["grid"] = {{"points", cfg.grid_points}, {"clip_quantile", cfg.clip_quantile}};
  doc["mean"] = d.has_finite_first_moment() ? detail::exact(d.mean())
                                            : nlohmann::json{{"value", nullptr}};

  nlohmann::json tasks = nlohmann::json::object();
  const double mu = d.has_finite_first_moment() ? d.mean() : 0.0;

  for (const std::string& task : cfg.tasks) {
    nlohmann::json out;
    try {
      if (task == "kernel_grid") {
        std::vector<double> p(grid.size()), F(grid.size()), tau(grid.size()),
            tau_err(grid.size(), 0.0);
        const bool closed = d.closed_form_kernel().has_value();
        detail::parallel_for(grid.size(), [&](std::size_t i) {
          p[i] = d.pdf(grid[i]);
          F[i] = d.cdf(grid[i]);
          if (closed) {
            tau[i] = d.closed_form_kernel()->tau(grid[i]);
          } else {
            auto est = stein_kernel_numerator(ev, grid[i]);
            tau[i] = est.value / p[i];
            tau_err[i] = est.error_bound / p[i];
          }
        });
        out["points"] = grid.size();
        out["tau_tag"] = closed ? "exact" : "quadrature";
        if (!stem.empty()) {
          detail::write_csv(stem + "_grid.csv", {"x", "p", "F", "tau", "tau_error"},
                            {grid, p, F, tau, tau_err});
          out["csv"] = stem + "_grid.csv";
        } else {
          nlohmann::json rows = nlohmann::json::array();
          for (std::size_t i = 0; i < grid.size(); ++i)
            rows.push_back({grid[i], p[i], F[i], tau[i]});
          out["rows"] = rows;
        }
      } else if (task == "poincare") {
        out["id"] = detail::report_to_json(weighted_poincare_report(ev, detail::report_corpus_id()),
                                           cfg.quadrature);
        out["sin"] = detail::report_to_json(
            weighted_poincare_report(ev, detail::report_corpus_sin()), cfg.quadrature);
        if (auto k = d.closed_form_kernel()) {
          auto tau = k->tau;
          out["muckenhoupt"] = detail::report_to_json(
              muckenhoupt_poincare(d, [&d, tau](double t) { return tau(t) * d.pdf(t); }),
              cfg.quadrature);
        }
      } else if (task == "logsobolev") {
        out["sin"] = detail::report_to_json(
            weighted_logsobolev_report(ev, detail::report_corpus_sin()), cfg.quadrature);
        auto prof = fit_profile(ev, grid);
        std::string notes;
        try {
          out["feasibility"] = to_string(logsobolev_feasibility(prof, d.support(), &notes));
          out["feasibility_notes"] = notes;
        } catch (const std::invalid_argument& e) {
          out["feasibility"] = "error";
          out["feasibility_notes"] = e.what();
        }
      } else if (task == "brascamp_lieb") {
        out["id_id_1_inf"] = detail::report_to_json(
            asymmetric_bl_report(ev, detail::report_corpus_id(), detail::report_corpus_id(), 1.0,
                                 inf),
            cfg.quadrature);
        out["id_sin_2_2"] = detail::report_to_json(
            asymmetric_bl_report(ev, detail::report_corpus_id(), detail::report_corpus_sin(), 2.0,
                                 2.0),
            cfg.quadrature);
      } else if (task == "isoperimetry") {
        out = detail::report_to_json(isoperimetric_constant(d), cfg.quadrature);
      } else if (task == "concentration" || task == "montecarlo" || task == "tails") {
        auto prof = fit_profile(ev, grid);
        const double r_max = d.quantile(1.0 - 1e-6) - mu;
        std::vector<double> r_grid(20);
        for (int i = 0; i < 20; ++i) r_grid[i] = r_max * (i + 1) / 20.0;

        if (task == "concentration") {
          auto stats = identity_moment_stats(d);
          TailBoundCurve curve;
          curve.r_values = r_grid;
          std::vector<double> exact_tail(r_grid.size());
          for (std::size_t i = 0; i < r_grid.size(); ++i)
            exact_tail[i] = d.survival(mu + r_grid[i]);
          curve.series["exact_tail"] = exact_tail;
          auto add_series = [&](const std::string& name, const RealFn& fn) {
            std::vector<double> v(r_grid.size());
            for (std::size_t i = 0; i < r_grid.size(); ++i) v[i] = fn(r_grid[i]);
            curve.series[name] = std::move(v);
          };
          if (prof.sup_bound) {
            add_series("chernoff", [&](double r) {
              return subgaussian_bounds(prof, stats, r).bounds.at("chernoff");
            });
            add_series("mills_right", [&](double r) {
              return subgaussian_bounds(prof, stats, r).bounds.at("mills_right");
            });
            add_series("mills_abs", [&](double r) {
              return subgaussian_bounds(prof, stats, r).bounds.at("mills_abs");
            });
          }
          if (prof.sublinear) {
            const auto [a, b] = *prof.sublinear;
            add_series("subgamma", [&](double r) { return subgamma_bound(a, b, r); });
            if (a > 0.0) {
              add_series("mills_gamma_right", [&](double r) {
                return mills_gamma_bounds(a, b, r, stats).bounds.at("mills_gamma_right");
              });
            }
          }
          try {
            add_series("fenchel", [&](double r) { return fenchel_tail_bound(ev, r, 12.0); });
          } catch (const std::exception& e) {
            out["fenchel_note"] = e.what();  // psi_tau may be infinite for every lambda
          }
          out["constants"] = nlohmann::json::object();
          if (prof.sup_bound) out["constants"]["sup_bound"] = detail::exact(*prof.sup_bound);
          if (prof.inf_bound) out["constants"]["inf_bound"] = detail::exact(*prof.inf_bound);
          if (prof.sublinear) {
            out["constants"]["sublinear_a"] = detail::exact(prof.sublinear->first);
            out["constants"]["sublinear_b"] = detail::exact(prof.sublinear->second);
          }
          nlohmann::json series;
          for (const auto& [name, values] : curve.series) {
            nlohmann::json col = nlohmann::json::array();
            for (double v : values) col.push_back(v);
            series[name] = col;
          }
          out["r_values"] = curve.r_values;
          out["series"] = series;
          if (!stem.empty()) {
            std::vector<std::string> header = {"r"};
            std::vector<std::vector<double>> cols = {curve.r_values};
            for (const auto& [name, values] : curve.series) {
              header.push_back(name);
              cols.push_back(values);
            }
            detail::write_csv(stem + "_bounds.csv", header, cols);
            out["csv"] = stem + "_bounds.csv";
          }
        } else if (task == "montecarlo") {
          auto s = sample(d, cfg.montecarlo_n, cfg.seed);
          std::vector<double> emp(r_grid.size());
          for (std::size_t i = 0; i < r_grid.size(); ++i)
            emp[i] = empirical_tail(s, r_grid[i], mu);
          out["n"] = cfg.montecarlo_n;
          out["generator"] = s.generator;
          out["r_values"] = r_grid;
          out["empirical_tail"] = emp;
          double mean = 0.0;
          for (double v : s.values) mean += v;
          out["sample_mean"] = mean / static_cast<double>(s.n);
        } else {  // tails
          if (prof.inf_bound) {
            auto curve = monotone_R_profile(ev, prof, r_grid);
            out["monotone_R"] = curve.series.at("R");
            std::vector<double> lower(r_grid.size());
            for (std::size_t i = 0; i < r_grid.size(); ++i)
              lower[i] =
                  lower_tail_bound(ev, prof, r_grid[i], LowerTailVariant::unif()).value;
            out["lower_unif"] = lower;
            out["r_values"] = r_grid;
          } else {
            out["notes"] = "kernel not bounded below: lower tail bounds not applicable";
          }
          std::vector<double> probe, reconstructed, exact_sv;
          for (int i = 1; i <= 5; ++i) {
            const double x = mu + (d.quantile(1.0 - 1e-4) - mu) * i / 5.0;
            probe.push_back(x);
            reconstructed.push_back(tail_from_h(ev, mu, x));
            exact_sv.push_back(d.survival(x));
          }
          out["tail_probe_x"] = probe;
          out["tail_reconstructed"] = reconstructed;
          out["tail_exact"] = exact_sv;
        }
      } else if (task == "density_roundtrip") {
        auto xs = report_grid(d, std::min(cfg.grid_points, 51), 1e-4);
        auto ps = density_from_kernel_grid(ev, xs);
        double max_rel = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
          max_rel = std::max(max_rel, std::abs(ps[i] / d.pdf(xs[i]) - 1.0));
        out["points"] = xs.size();
        out["max_rel_error"] = detail::tagged(max_rel, cfg.quadrature.rel_tol);
      }
      tasks[task] = out;
    } catch (const std::exception& e) {
      tasks[task] = nlohmann::json{{"error", e.what()}};
    }
  }
  doc["tasks"] = tasks;
  if (!cfg.output_path.empty()) {
    std::ofstream os(cfg.output_path);
    if (!os) throw std::runtime_error("cannot write report: " + cfg.output_path);
    os << doc.dump(2) << "\n";
  }
  return doc;
}

}  // namespace stein1d

#endif  // STEIN1D_REPORT_HPP
