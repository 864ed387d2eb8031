#pragma once

// Output files of a run:
//   estimates.csv | estimates.json  parameter, value, cov, n_evals, converged
//   history.csv                     j, parameter, mu_j, delta_j
//   run.json                        counters, timing, seed, config echo
// The first two depend only on the inputs and the seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpsens/app/runner.hpp"

namespace fpsens::app {

enum class Format { csv, json };

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

/// JSON has no inf/nan; those are written as strings.
inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline double from_json_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  return parse_double(j.get<std::string>());
}

inline json estimates_json(const RunReport& r) {
  json rows = json::array();
  for (const auto& e : r.estimates)
    rows.push_back({{"parameter", e.parameter},
                    {"value", json_number(e.value)},
                    {"cov", json_number(e.cov)},
                    {"n_evals", e.n_evals},
                    {"converged", e.converged}});
  return {{"method", method_name(r.method)}, {"seed", r.seed}, {"estimates", rows}};
}

inline std::vector<EstimateRow> read_estimates_json(const json& j) {
  std::vector<EstimateRow> out;
  for (const auto& row : j.at("estimates"))
    out.push_back({row.at("parameter").get<std::string>(), from_json_number(row.at("value")),
                   from_json_number(row.at("cov")), row.at("n_evals").get<std::uint64_t>(),
                   row.at("converged").get<bool>()});
  return out;
}

inline std::string estimates_csv(const RunReport& r) {
  std::string out = "parameter,value,cov,n_evals,converged\n";
  for (const auto& e : r.estimates)
    out += e.parameter + "," + format_double(e.value) + "," + format_double(e.cov) + "," +
           std::to_string(e.n_evals) + "," + (e.converged ? "true" : "false") + "\n";
  return out;
}

/// Rows ordered by sample index, then by parameter.
inline std::string history_csv(const RunReport& r) {
  std::string out = "j,parameter,mu_j,delta_j\n";
  std::size_t longest = 0;
  for (const auto& h : r.history) longest = std::max(longest, h.value.size());
  for (std::size_t j = 0; j < longest; ++j)
    for (const auto& h : r.history)
      if (j < h.value.size())
        out += std::to_string(j + 1) + "," + h.parameter + "," + format_double(h.value[j]) + "," +
               format_double(h.cov[j]) + "\n";
  return out;
}

inline json run_json(const RunReport& r) {
  return {{"method", method_name(r.method)},
          {"seed", r.seed},
          {"workers", r.workers},
          {"wall_time_s", r.wall_time_s},
          {"impulse_runs", r.counters.impulse_runs},
          {"sensitivity_runs", r.counters.sensitivity_runs},
          {"converged", r.converged()},
          {"config", r.config}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Writes the report files into `dir` (created if needed).
inline void emit(const RunReport& r, Format format, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (format == Format::json)
    write_text(dir / "estimates.json", estimates_json(r).dump(2) + "\n");
  else
    write_text(dir / "estimates.csv", estimates_csv(r));
  write_text(dir / "history.csv", history_csv(r));
  write_text(dir / "run.json", run_json(r).dump(2) + "\n");
}

}  // namespace fpsens::app
