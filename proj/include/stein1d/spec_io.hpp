#ifndef STEIN1D_SPEC_IO_HPP
#define STEIN1D_SPEC_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stein1d/distribution.hpp"

namespace stein1d {

/// Table rows from a CSV file with columns x,p (header row optional).
inline std::vector<std::pair<double, double>> load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open table file: " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, p;
    if (ls >> x >> p) rows.emplace_back(x, p);
  }
  if (rows.size() < 2) throw std::invalid_argument("table file has fewer than two rows: " + path);
  return rows;
}

inline DistributionSpec parse_spec_json(const nlohmann::json& j) {
  if (!j.contains("family")) throw std::invalid_argument("distribution spec: missing 'family'");
  const std::string family = j.at("family").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  auto req = [&](const char* key) {
    if (!params.contains(key))
      throw std::invalid_argument("distribution spec: " + family + " requires params." + key);
    return params.at(key).get<double>();
  };
  if (family == "normal") return DistributionSpec::normal();
  if (family == "uniform01") return DistributionSpec::uniform01();
  if (family == "beta") return DistributionSpec::beta_dist(req("alpha"), req("beta"));
  if (family == "gamma") return DistributionSpec::gamma_dist(req("shape"), req("scale"));
  if (family == "exponential") return DistributionSpec::exponential(req("rate"));
  if (family == "generalized_cauchy") return DistributionSpec::generalized_cauchy(req("beta"));
  if (family == "subbotin") return DistributionSpec::subbotin(req("alpha"));
  if (family == "student") return DistributionSpec::student(req("alpha"));
  if (family == "pearson") {
    PearsonParams p;
    p.lambda = params.value("lambda", 0.0);
    p.alpha = params.value("alpha", 0.0);
    p.beta0 = req("beta0");
    p.beta1 = params.value("beta1", 0.0);
    p.beta2 = params.value("beta2", 0.0);
    p.support_lo = params.value("support_lo", -inf);
    p.support_hi = params.value("support_hi", inf);
    p.lo_singular = params.value("lo_singular", false);
    p.hi_singular = params.value("hi_singular", false);
    return DistributionSpec::pearson_dist(p);
  }
  if (family == "custom_tabulated") {
    if (params.contains("csv")) return DistributionSpec::tabulated(load_table_csv(params.at("csv")));
    if (params.contains("table")) {
      std::vector<std::pair<double, double>> rows;
      for (const auto& row : params.at("table"))
        rows.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
      return DistributionSpec::tabulated(std::move(rows));
    }
    throw std::invalid_argument("custom_tabulated requires params.csv or params.table");
  }
  throw std::invalid_argument("unknown family: " + family);
}

inline DistributionSpec parse_spec_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("distribution spec is not valid JSON: ") + e.what());
  }
  return parse_spec_json(j);
}

inline nlohmann::json spec_to_json(const DistributionSpec& spec) {
  nlohmann::json j;
  nlohmann::json p = nlohmann::json::object();
  switch (spec.family) {
    case FamilyKind::normal: j["family"] = "normal"; break;
    case FamilyKind::uniform01: j["family"] = "uniform01"; break;
    case FamilyKind::beta:
      j["family"] = "beta";
      p["alpha"] = spec.alpha;
      p["beta"] = spec.beta;
      break;
    case FamilyKind::gamma:
      j["family"] = "gamma";
      p["shape"] = spec.shape;
      p["scale"] = spec.scale;
      break;
    case FamilyKind::exponential:
      j["family"] = "exponential";
      p["rate"] = spec.rate;
      break;
    case FamilyKind::generalized_cauchy:
      j["family"] = "generalized_cauchy";
      p["beta"] = spec.beta;
      break;
    case FamilyKind::subbotin:
      j["family"] = "subbotin";
      p["alpha"] = spec.alpha;
      break;
    case FamilyKind::student:
      j["family"] = "student";
      p["alpha"] = spec.alpha;
      break;
    case FamilyKind::pearson:
      j["family"] = "pearson";
      p["lambda"] = spec.pearson.lambda;
      p["alpha"] = spec.pearson.alpha;
      p["beta0"] = spec.pearson.beta0;
      p["beta1"] = spec.pearson.beta1;
      p["beta2"] = spec.pearson.beta2;
      if (std::isfinite(spec.pearson.support_lo)) p["support_lo"] = spec.pearson.support_lo;
      if (std::isfinite(spec.pearson.support_hi)) p["support_hi"] = spec.pearson.support_hi;
      break;
    case FamilyKind::custom_tabulated: {
      j["family"] = "custom_tabulated";
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& [x, v] : spec.table) rows.push_back({x, v});
      p["table"] = rows;
      break;
    }
  }
  if (!p.empty()) j["params"] = p;
  return j;
}

}  // namespace stein1d

#endif  // STEIN1D_SPEC_IO_HPP
