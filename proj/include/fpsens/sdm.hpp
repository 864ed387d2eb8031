#pragma once

// Surface decomposition estimator of ∂P/∂θ: the sensitivity is a sum of
// integrals over the constrained component hyperplanes, sampled jointly by
// drawing a component from a PMF and a Gaussian point on its hyperplane.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpsens/normal.hpp"
#include "fpsens/parallel.hpp"
#include "fpsens/random.hpp"
#include "fpsens/reliability.hpp"
#include "fpsens/response_map.hpp"
#include "fpsens/stats.hpp"

namespace fpsens {

struct SdmConfig {
  double tol = 0.1;
  std::uint64_t n_max = 10000;
  std::uint64_t min_samples = 10;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Stop once every parameter has δ < tol. Off: always run n_max samples.
  bool early_stop = true;
};

struct SensitivityEstimate {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> cov;
  std::vector<bool> converged;
  std::uint64_t n = 0;
  // Row-major N × P running values.
  std::vector<double> history_mean;
  std::vector<double> history_cov;

  bool all_converged() const {
    for (bool c : converged)
      if (!c) return false;
    return !converged.empty();
  }
  Index parameter_count() const { return static_cast<Index>(names.size()); }
};

/// x' = β u + (ξ - (ξ·u) u) for ξ ~ N(0, I): a Gaussian point on the
/// hyperplane u·x = β.
inline VectorXd sample_on_hyperplane(const VectorXd& u, double beta, Rng& rng) {
  VectorXd x = standard_normal_vector(rng, u.size());
  x += (beta - u.dot(x)) * u;
  return x;
}

/// 1 iff every signed component other than `id` is strictly safe at x.
template <LinearResponseMap Map>
int indicator(const Map& map, const Thresholds& th, const VectorXd& x, const SignedComponentId& id,
              typename Map::Workspace& ws) {
  map.project(x, ws);
  return others_safe(ws.responses, th, id) ? 1 : 0;
}

/// Algorithm: for j = 1.. draw (k,i,σ) ~ pmf and x on its hyperplane, then
/// temp_j[θ] = σ (b·x / ‖a‖) 𝟙(x) φ(β) / h(k,i,σ). One indicator evaluation
/// per sample serves all parameters.
template <LinearResponseMap Map>
SensitivityEstimate sdm_estimate(const Map& map, const ComponentTable& table, const Thresholds& th,
                                 const DiscretePmf& pmf, const SdmConfig& cfg) {
  if (table.observer_count() != map.observer_count() || table.step_count() != map.step_count())
    throw std::invalid_argument("sdm: table and response map disagree in shape");
  if (pmf.size() != table.size()) throw std::invalid_argument("sdm: pmf does not match the table");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw std::invalid_argument("sdm: tol must lie in (0, 1)");
  if (cfg.n_max < cfg.min_samples) throw std::invalid_argument("sdm: n_max must be >= min_samples");

  const Index np = map.parameter_count();
  if (np < 1) throw std::invalid_argument("sdm: the response map carries no parameters");
  SensitivityEstimate est;
  for (Index p = 0; p < np; ++p) est.names.emplace_back(map.parameter_name(p));
  std::vector<RunningMoments> moments(static_cast<std::size_t>(np));

  struct Space {
    typename Map::Workspace ws;
  };
  auto all_below = [&] {
    for (const auto& m : moments)
      if (!(m.cov() < cfg.tol)) return false;
    return true;
  };
  const BatchPlan plan{cfg.seed, cfg.n_max, 16, cfg.workers};
  est.n = run_batched(
      plan, [&] { return Space{map.make_workspace()}; },
      [&](Rng& rng, Space& sp) {
        const Index s = pmf.sample(uniform_open(rng));
        const ComponentRecord& rec = table[s];
        const VectorXd u = unit_vector(map, rec);
        const VectorXd x = sample_on_hyperplane(u, rec.beta, rng);
        std::vector<double> temp(static_cast<std::size_t>(np), 0.0);
        if (indicator(map, th, x, rec.id, sp.ws)) {
          const double scale = sign_value(rec.id.sign) * normal::pdf(rec.beta) / (rec.norm * pmf.probability(s));
          for (Index p = 0; p < np; ++p)
            temp[static_cast<std::size_t>(p)] = scale * map.sensitivity_dot(sp.ws, p, rec.id.k, rec.id.i);
        }
        return temp;
      },
      [&](const std::vector<double>& temp) {
        for (Index p = 0; p < np; ++p) {
          auto& m = moments[static_cast<std::size_t>(p)];
          m.add(temp[static_cast<std::size_t>(p)]);
          est.history_mean.push_back(m.mean());
          est.history_cov.push_back(m.cov());
        }
        return cfg.early_stop && moments.front().count() >= cfg.min_samples && all_below();
      });

  for (const auto& m : moments) {
    est.mean.push_back(m.mean());
    if (m.all_zero()) {
      est.cov.push_back(std::numeric_limits<double>::quiet_NaN());
      est.converged.push_back(false);
    } else {
      est.cov.push_back(m.cov());
      est.converged.push_back(m.count() >= cfg.min_samples && m.cov() < cfg.tol);
    }
  }
  return est;
}

template <LinearResponseMap Map>
SensitivityEstimate sdm_estimate(const Map& map, const ComponentTable& table, const Thresholds& th,
                                 const SdmConfig& cfg) {
  return sdm_estimate(map, table, th, importance_pmf(table), cfg);
}

}  // namespace fpsens
