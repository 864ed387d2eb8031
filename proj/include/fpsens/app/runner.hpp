#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpsens/app/config.hpp"
#include "fpsens/etdm.hpp"
#include "fpsens/excitation.hpp"
#include "fpsens/fdmis.hpp"
#include "fpsens/model.hpp"
#include "fpsens/parallel.hpp"
#include "fpsens/reliability.hpp"
#include "fpsens/response_map.hpp"
#include "fpsens/sdm.hpp"

namespace fpsens::app {

struct EstimateRow {
  std::string parameter;
  double value = 0.0;
  double cov = 0.0;
  std::uint64_t n_evals = 0;
  bool converged = false;
};

struct HistorySeries {
  std::string parameter;
  std::vector<double> value;
  std::vector<double> cov;
};

struct RunReport {
  Method method = Method::isee;
  std::vector<EstimateRow> estimates;
  std::vector<HistorySeries> history;
  AnalysisCounters counters;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  json config;

  bool converged() const {
    for (const auto& e : estimates)
      if (!e.converged) return false;
    return !estimates.empty();
  }
};

using AnyResponseMap = std::variant<ExplicitResponseMap, HyperplaneMap>;

/// Response map with its thresholds, after steps i-ii.
struct Analysis {
  std::unique_ptr<AnyResponseMap> map;
  Thresholds thresholds;
  AnalysisCounters counters;
};

inline bool is_dynamic(const RunConfig& cfg) { return !std::holds_alternative<HyperplaneSpec>(cfg.model); }

inline ModelSpec dynamic_spec(const RunConfig& cfg) {
  if (const auto* s = std::get_if<SdofSpec>(&cfg.model)) return *s;
  if (const auto* s = std::get_if<ShearBuildingSpec>(&cfg.model)) return *s;
  throw ConfigError("model.type", "not a dynamic model");
}

inline std::shared_ptr<const ExcitationBasis> build_basis(const RunConfig& cfg) {
  const TimeGrid grid = make_grid(cfg.dt, cfg.T);
  if (const auto* w = std::get_if<WhiteNoiseSpectral>(&cfg.excitation))
    return std::make_shared<const ExcitationBasis>(
        spectral_basis(white_noise_spectrum(w->S, w->omega_min, w->omega_max, w->q), grid));
  if (const auto* m = std::get_if<ModulatedExcitation>(&cfg.excitation))
    return std::make_shared<const ExcitationBasis>(
        orthogonal_basis(modulated_correlation(m->params), grid, m->eig_clip));
  throw ConfigError("excitation", "missing (required for dynamic models)");
}

/// Names of all design parameters the model exposes.
inline std::vector<std::string> model_parameters(const RunConfig& cfg) {
  if (const auto* h = std::get_if<HyperplaneSpec>(&cfg.model)) return {h->parameter};
  std::vector<std::string> out;
  const SystemModel model = build_model(dynamic_spec(cfg));
  for (const auto& p : model.parameters()) out.push_back(p.name);
  return out;
}

/// Requested parameters, validated against the model.
inline std::vector<std::string> resolve_parameters(const RunConfig& cfg) {
  const auto all = model_parameters(cfg);
  if (!cfg.parameters) return all;
  for (const auto& name : *cfg.parameters)
    if (std::find(all.begin(), all.end(), name) == all.end())
      throw ConfigError("parameters", "unknown design parameter '" + name + "'");
  return *cfg.parameters;
}

inline Thresholds resolve_thresholds(const RunConfig& cfg, Index observers) {
  Thresholds th;
  th.symmetric = cfg.symmetric;
  if (cfg.c.size() == 1)
    th.c.assign(static_cast<std::size_t>(observers), cfg.c.front());
  else if (static_cast<Index>(cfg.c.size()) == observers)
    th.c = cfg.c;
  else
    throw ConfigError("thresholds.c_m", "expected one value or one per observer (" + std::to_string(observers) + ")");
  return th;
}

inline HyperplaneMap hyperplane_map(const HyperplaneSpec& h, double theta, bool with_parameter) {
  if (!with_parameter) return HyperplaneMap(theta * h.a);
  return HyperplaneMap(theta * h.a, {h.parameter}, {h.a});
}

/// Steps i-ii: one impulse run, one sensitivity run per structural parameter.
inline Analysis build_analysis(const RunConfig& cfg, const std::vector<std::string>& parameters) {
  Analysis out;
  if (const auto* h = std::get_if<HyperplaneSpec>(&cfg.model)) {
    out.map = std::make_unique<AnyResponseMap>(hyperplane_map(*h, h->theta, !parameters.empty()));
    out.thresholds = resolve_thresholds(cfg, h->a.rows());
    return out;
  }
  const SystemModel model = build_model(dynamic_spec(cfg));
  auto basis = build_basis(cfg);
  ImpulseSeries series = build_impulse_series(model, basis->grid(), parameters, &out.counters);
  out.map = std::make_unique<AnyResponseMap>(std::in_place_type<ExplicitResponseMap>, basis, std::move(series));
  out.thresholds = resolve_thresholds(cfg, model.observers().size());
  return out;
}

/// Steps i-v for the configured estimator.
inline RunReport run(const RunConfig& cfg, unsigned workers = default_worker_count()) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.method = cfg.estimator.method;
  report.seed = cfg.estimator.seed;
  report.workers = workers;
  report.config = cfg.source;
  const auto& e = cfg.estimator;

  if (e.method == Method::isee) {
    Analysis a = build_analysis(cfg, {});
    std::visit(
        [&](const auto& map) {
          const ComponentTable table(map.norms(), a.thresholds);
          const auto est = isee_estimate(map, table, a.thresholds,
                                         {e.tol, e.n_max, e.min_samples, e.seed, workers});
          report.estimates.push_back({"P", est.value, est.cov, est.n_evals, est.converged});
          report.history.push_back(HistorySeries{"P", est.history_value, est.history_cov});
        },
        *a.map);
    report.counters = a.counters;
  } else if (e.method == Method::sdm) {
    const auto params = resolve_parameters(cfg);
    if (params.empty()) throw ConfigError("parameters", "sdm needs at least one parameter");
    Analysis a = build_analysis(cfg, params);
    std::visit(
        [&](const auto& map) {
          const ComponentTable table(map.norms(), a.thresholds);
          SdmConfig sc;
          sc.tol = e.tol;
          sc.n_max = e.n_max;
          sc.min_samples = e.min_samples;
          sc.seed = e.seed;
          sc.workers = workers;
          const auto est = sdm_estimate(map, table, a.thresholds, sc);
          const auto np = static_cast<std::size_t>(est.parameter_count());
          for (std::size_t p = 0; p < np; ++p) {
            report.estimates.push_back({est.names[p], est.mean[p], est.cov[p], est.n, est.converged[p]});
            HistorySeries h{est.names[p], {}, {}};
            for (std::uint64_t j = 0; j < est.n; ++j) {
              h.value.push_back(est.history_mean[j * np + p]);
              h.cov.push_back(est.history_cov[j * np + p]);
            }
            report.history.push_back(std::move(h));
          }
        },
        *a.map);
    report.counters = a.counters;
  } else {
    const auto params = resolve_parameters(cfg);
    if (params.empty()) throw ConfigError("parameters", "fdmis needs at least one parameter");
    const FdmisConfig fc{e.tol, e.n_max, e.min_samples, e.seed, workers};
    auto record = [&](const FdmisEstimate& est) {
      report.estimates.push_back({est.parameter, est.value, est.cov, est.n_evals, est.converged});
      report.history.push_back(HistorySeries{est.parameter, est.history_value, est.history_cov});
    };
    if (const auto* h = std::get_if<HyperplaneSpec>(&cfg.model)) {
      const auto th = resolve_thresholds(cfg, h->a.rows());
      for (const auto& name : params) {
        auto pair = build_perturbed_pair([&](double v) { return hyperplane_map(*h, v, false); }, name,
                                         h->theta, e.fd_rel_step, th);
        record(fdmis_estimate(pair, fc));
      }
    } else {
      const ModelSpec spec = dynamic_spec(cfg);
      auto basis = build_basis(cfg);
      const auto th = resolve_thresholds(cfg, static_cast<Index>(build_model(spec).observers().size()));
      ResponseMapOptions opts;
      opts.gram = std::make_shared<const MatrixXd>(gram_matrix(basis->psi()));
      for (const auto& name : params) {
        auto pair = build_perturbed_pair(spec, name, e.fd_rel_step, basis, th, &report.counters, opts);
        record(fdmis_estimate(pair, fc));
      }
    }
  }

  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace fpsens::app
