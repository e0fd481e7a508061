#pragma once
// Probit dose-response for toxic gas exposure.
//
// For a steady-state concentration C (ppm) held for t minutes the toxic
// load is C^n * t, the probit is Y = a + b ln(load), and the probability of
// a critical dose is Phi(Y - 5), the standard normal CDF that printed
// probit tables discretize.

#include "erimap/error.hpp"
#include "erimap/json_util.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace erimap::hazard {

struct ProbitParams {
  double a = 0.0;
  double b = 1.0;
  double n = 1.0;
  std::string substance;
};

struct Exposure {
  double concentration_ppm = 0.0;
  double duration_min = 0.0;
};

inline ProbitParams chlorine() { return {-8.29, 0.92, 2.0, "chlorine"}; }

inline void validate(const ProbitParams& p) {
  require(std::isfinite(p.a) && std::isfinite(p.b) && p.b > 0.0 && std::isfinite(p.n) && p.n > 0.0,
          ErrorCode::InvalidSpec, "probit parameters for '" + p.substance + "' need b > 0 and n > 0");
}

/// Toxic load C^n * t in ppm^n * min.
inline double dose(const Exposure& e, double n) {
  require(std::isfinite(e.concentration_ppm) && e.concentration_ppm > 0.0 && std::isfinite(e.duration_min) &&
              e.duration_min > 0.0,
          ErrorCode::InvalidExposure, "exposure needs positive concentration and duration");
  return std::pow(e.concentration_ppm, n) * e.duration_min;
}

inline double probit_value(double dose_value, const ProbitParams& p) {
  require(dose_value > 0.0 && std::isfinite(dose_value), ErrorCode::NonPositiveDose, "dose must be positive");
  return p.a + p.b * std::log(dose_value);
}

inline double probit_to_probability(double y) { return 0.5 * std::erfc(-(y - 5.0) / std::sqrt(2.0)); }

/// Probability ratio (True, False) for a "critical gas dose" node.
inline std::vector<double> exposure_to_soft_evidence(const Exposure& e, const ProbitParams& p) {
  const double q = probit_to_probability(probit_value(dose(e, p.n), p));
  return {q, 1.0 - q};
}

/// Reads {"chlorine": {"a": -8.29, "b": 0.92, "n": 2}, ...}.
inline std::map<std::string, ProbitParams> substances_from_json(const nlohmann::json& j,
                                                                const std::string& where = "substances") {
  require(j.is_object(), ErrorCode::ParseError, where + ": expected an object keyed by substance");
  std::map<std::string, ProbitParams> out;
  for (const auto& [name, v] : j.items()) {
    const std::string at = where + "." + name;
    ProbitParams p{json_util::get<double>(v, "a", at), json_util::get<double>(v, "b", at),
                   json_util::get<double>(v, "n", at), name};
    validate(p);
    out.emplace(name, p);
  }
  return out;
}

inline std::map<std::string, ProbitParams> load_substances(const std::filesystem::path& path) {
  return substances_from_json(json_util::load(path), path.string());
}

}  // namespace erimap::hazard
