#pragma once

// JSON run configuration. Physical fields carry their unit in the key
// (dt_s, S_m2_s3, k_ve_N_m, ...). Every error names the offending field.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpsens/excitation.hpp"
#include "fpsens/model.hpp"
#include "fpsens/reliability.hpp"

namespace fpsens::app {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Fixed hyperplanes g_k = c_k - θ a_k·x with one amplitude parameter θ.
struct HyperplaneSpec {
  MatrixXd a;
  double theta = 1.0;
  std::string parameter = "theta";
};

struct WhiteNoiseSpectral {
  double S = 0.0;
  double omega_min = 0.0;
  double omega_max = 0.0;
  Index q = 1;
};

struct ModulatedExcitation {
  ModulatedCorrelationParams params;
  double eig_clip = 1e-12;
};

using ModelConfig = std::variant<SdofSpec, ShearBuildingSpec, HyperplaneSpec>;
using ExcitationConfig = std::variant<std::monostate, WhiteNoiseSpectral, ModulatedExcitation>;

enum class Method { isee, sdm, fdmis };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::isee: return "isee";
    case Method::sdm: return "sdm";
    case Method::fdmis: return "fdmis";
  }
  return "?";
}

struct EstimatorBlock {
  Method method = Method::isee;
  double tol = 0.1;
  std::uint64_t n_max = 10000;
  std::uint64_t min_samples = 10;
  std::uint64_t seed = 0;
  double fd_rel_step = 1e-3;
};

struct RunConfig {
  ModelConfig model;
  ExcitationConfig excitation;
  double dt = 0.0;
  double T = 0.0;
  std::vector<double> c;  // one per observer, or a single value for all
  bool symmetric = true;
  std::optional<std::vector<std::string>> parameters;  // unset: all model parameters
  EstimatorBlock estimator;
  json source;
};

namespace detail {

inline std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline const json& require(const json& obj, const std::string& prefix, const std::string& key) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(prefix, key), "missing");
  return *it;
}

inline double number(const json& obj, const std::string& prefix, const std::string& key) {
  const json& v = require(obj, prefix, key);
  if (!v.is_number()) throw ConfigError(join(prefix, key), "expected a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& prefix, const std::string& key, double fallback) {
  return obj.contains(key) ? number(obj, prefix, key) : fallback;
}

inline std::uint64_t count_or(const json& obj, const std::string& prefix, const std::string& key,
                              std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && d == static_cast<double>(static_cast<std::uint64_t>(d))) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(join(prefix, key), "expected a non-negative integer");
}

inline std::string text(const json& obj, const std::string& prefix, const std::string& key) {
  const json& v = require(obj, prefix, key);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json& obj, const std::string& prefix, const std::string& key) {
  const json& v = require(obj, prefix, key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(join(prefix, key), "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(join(prefix, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline ModelConfig parse_model(const json& j) {
  const std::string p = "model";
  const std::string type = text(j, p, "type");
  if (type == "sdof") {
    SdofSpec s;
    s.omega_n = number(j, p, "omega_n_rad_s");
    s.zeta_n = number(j, p, "zeta_n");
    if (!(s.omega_n > 0.0)) throw ConfigError("model.omega_n_rad_s", "must be positive");
    if (!(s.zeta_n > 0.0 && s.zeta_n < 1.0)) throw ConfigError("model.zeta_n", "must lie in (0, 1)");
    return s;
  }
  if (type == "shear_building") {
    ShearBuildingSpec s;
    s.masses = numbers(j, p, "masses_kg");
    s.stiffnesses = numbers(j, p, "stiffnesses_N_m");
    if (s.masses.size() != s.stiffnesses.size())
      throw ConfigError("model.stiffnesses_N_m", "length must equal model.masses_kg");
    if (j.contains("rayleigh")) {
      const json& r = j.at("rayleigh");
      RayleighSpec rs;
      rs.mode_a = static_cast<int>(count_or(r, "model.rayleigh", "mode_a", 1));
      rs.mode_b = static_cast<int>(count_or(r, "model.rayleigh", "mode_b", 2));
      rs.zeta = number(r, "model.rayleigh", "zeta");
      s.rayleigh = rs;
    }
    if (j.contains("dampers")) {
      const json& d = j.at("dampers");
      if (!d.is_array()) throw ConfigError("model.dampers", "expected an array");
      for (std::size_t i = 0; i < d.size(); ++i) {
        const std::string dp = "model.dampers[" + std::to_string(i) + "]";
        s.dampers.push_back({number(d[i], dp, "k_ve_N_m"), number(d[i], dp, "c_ve_N_s_m")});
      }
    }
    s.brace_cos = number_or(j, p, "brace_cos", 1.0);
    return s;
  }
  if (type == "hyperplanes") {
    const json& rows = require(j, p, "coefficients");
    if (!rows.is_array() || rows.empty()) throw ConfigError("model.coefficients", "expected a non-empty array of rows");
    HyperplaneSpec h;
    const std::size_t d = rows[0].is_array() ? rows[0].size() : 0;
    if (d == 0) throw ConfigError("model.coefficients[0]", "expected a non-empty row");
    h.a.resize(static_cast<Index>(rows.size()), static_cast<Index>(d));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::string rp = "model.coefficients[" + std::to_string(k) + "]";
      if (!rows[k].is_array() || rows[k].size() != d) throw ConfigError(rp, "every row needs the same length");
      for (std::size_t l = 0; l < d; ++l) {
        if (!rows[k][l].is_number()) throw ConfigError(rp, "expected numbers");
        h.a(static_cast<Index>(k), static_cast<Index>(l)) = rows[k][l].get<double>();
      }
    }
    h.theta = number_or(j, p, "theta", 1.0);
    if (j.contains("parameter")) h.parameter = text(j, p, "parameter");
    return h;
  }
  throw ConfigError("model.type", "unknown model type '" + type + "'");
}

inline ExcitationConfig parse_excitation(const json& root) {
  if (!root.contains("excitation")) return std::monostate{};
  const json& j = root.at("excitation");
  const std::string p = "excitation";
  const std::string type = text(j, p, "type");
  if (type == "none") return std::monostate{};
  if (type == "white_noise_spectral") {
    WhiteNoiseSpectral w;
    w.S = number(j, p, "S_m2_s3");
    w.omega_min = number_or(j, p, "omega_min_rad_s", 0.0);
    w.omega_max = number(j, p, "omega_max_rad_s");
    w.q = static_cast<Index>(count_or(j, p, "q", 0));
    if (!(w.S > 0.0)) throw ConfigError("excitation.S_m2_s3", "must be positive");
    if (w.q < 1) throw ConfigError("excitation.q", "must be at least 1");
    return w;
  }
  if (type == "modulated_correlation") {
    ModulatedExcitation m;
    auto& q = m.params;
    q.S0 = number(j, p, "S0_m2_s3");
    q.omega_g = number(j, p, "omega_g_rad_s");
    q.zeta_g = number(j, p, "zeta_g");
    q.t_a = number(j, p, "t_a_s");
    q.t_b = number(j, p, "t_b_s");
    q.t_c = number(j, p, "t_c_s");
    q.lambda = number(j, p, "lambda_1_s");
    m.eig_clip = number_or(j, p, "eig_clip", 1e-12);
    try {
      q.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("excitation", e.what());
    }
    return m;
  }
  throw ConfigError("excitation.type", "unknown excitation type '" + type + "'");
}

inline Method parse_method(const std::string& name) {
  if (name == "isee") return Method::isee;
  if (name == "sdm") return Method::sdm;
  if (name == "fdmis") return Method::fdmis;
  throw ConfigError("estimator.method", "expected isee, sdm or fdmis, got '" + name + "'");
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
  using namespace detail;
  RunConfig cfg;
  cfg.source = root;
  cfg.model = parse_model(require(root, "", "model"));
  cfg.excitation = parse_excitation(root);

  const bool dynamic = !std::holds_alternative<HyperplaneSpec>(cfg.model);
  if (dynamic) {
    if (std::holds_alternative<std::monostate>(cfg.excitation))
      throw ConfigError("excitation", "missing (required for dynamic models)");
    const json& g = require(root, "", "grid");
    cfg.dt = number(g, "grid", "dt_s");
    cfg.T = number(g, "grid", "T_s");
    try {
      (void)make_grid(cfg.dt, cfg.T);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("grid", e.what());
    }
  }

  const json& th = require(root, "", "thresholds");
  cfg.c = numbers(th, "thresholds", "c_m");
  for (double c : cfg.c)
    if (!(c > 0.0)) throw ConfigError("thresholds.c_m", "thresholds must be positive");
  cfg.symmetric = th.value("symmetric", true);

  if (root.contains("parameters")) {
    const json& ps = root.at("parameters");
    if (!ps.is_array()) throw ConfigError("parameters", "expected an array of names");
    std::vector<std::string> names;
    for (const auto& n : ps) {
      if (!n.is_string()) throw ConfigError("parameters", "expected parameter names");
      names.push_back(n.get<std::string>());
    }
    cfg.parameters = std::move(names);
  }

  const json empty = json::object();
  const json& est = root.contains("estimator") ? root.at("estimator") : empty;
  auto& e = cfg.estimator;
  if (est.contains("method")) e.method = parse_method(text(est, "estimator", "method"));
  e.tol = number_or(est, "estimator", "tol", e.tol);
  e.n_max = count_or(est, "estimator", "n_max", e.n_max);
  e.min_samples = count_or(est, "estimator", "min_samples", e.min_samples);
  e.seed = count_or(est, "estimator", "seed", e.seed);
  e.fd_rel_step = number_or(est, "estimator", "fd_rel_step", e.fd_rel_step);
  if (!(e.tol > 0.0 && e.tol < 1.0)) throw ConfigError("estimator.tol", "must lie in (0, 1)");
  if (e.n_max < 1) throw ConfigError("estimator.n_max", "must be at least 1");
  if (e.n_max < e.min_samples) throw ConfigError("estimator.n_max", "must be >= estimator.min_samples");
  if (!(e.fd_rel_step > 0.0)) throw ConfigError("estimator.fd_rel_step", "must be positive");
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("parse error: ") + e.what());
  }
  return parse_config(root);
}

}  // namespace fpsens::app
