#pragma once

// Finite-difference reference for ∂P/∂θ: ΔP = P(θ+Δθ) - P(θ) estimated with
// one importance density mixing the component-conditional densities of both
// the base and the perturbed system, then divided by Δθ.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpsens/etdm.hpp"
#include "fpsens/model.hpp"
#include "fpsens/parallel.hpp"
#include "fpsens/random.hpp"
#include "fpsens/reliability.hpp"
#include "fpsens/response_map.hpp"
#include "fpsens/stats.hpp"

namespace fpsens {

template <LinearResponseMap Map>
struct PerturbedPair {
  std::string parameter;
  double theta = 0.0;
  double delta_theta = 0.0;
  Thresholds thresholds;
  Map base;
  Map perturbed;
  ComponentTable base_table;
  ComponentTable perturbed_table;

  PerturbedPair(std::string name, double theta_value, double delta, Thresholds th, Map b, Map p)
      : parameter(std::move(name)),
        theta(theta_value),
        delta_theta(delta),
        thresholds(std::move(th)),
        base(std::move(b)),
        perturbed(std::move(p)),
        base_table(base.norms(), thresholds),
        perturbed_table(perturbed.norms(), thresholds) {
    if (delta_theta == 0.0 || !std::isfinite(delta_theta))
      throw std::invalid_argument("perturbed pair: Δθ must be finite and nonzero");
    if (base.dim() != perturbed.dim() || base.observer_count() != perturbed.observer_count() ||
        base.step_count() != perturbed.step_count())
      throw std::invalid_argument("perturbed pair: base and perturbed maps differ in shape");
  }

  /// Z_B = Σ P(θ) + Σ P(θ+Δθ).
  double total_probability() const {
    return base_table.total_probability() + perturbed_table.total_probability();
  }

  /// Same pair with the roles of base and perturbed exchanged (Δθ negated).
  PerturbedPair swapped() const {
    return PerturbedPair(parameter, theta + delta_theta, -delta_theta, thresholds, perturbed, base);
  }
};

/// Generic builder: `make_map(value)` returns the response map at θ = value.
template <class MakeMap>
auto build_perturbed_pair(MakeMap make_map, std::string name, double theta, double rel_step,
                          const Thresholds& th) {
  if (!(rel_step > 0.0)) throw std::invalid_argument("fdmis: rel_step must be positive");
  const double delta = theta * rel_step;
  if (delta == 0.0) throw std::invalid_argument("fdmis: θ = 0 gives a zero relative perturbation");
  auto base = make_map(theta);
  auto pert = make_map(theta + delta);
  using Map = decltype(base);
  return PerturbedPair<Map>(std::move(name), theta, delta, th, std::move(base), std::move(pert));
}

/// Dynamic-system builder: reruns the impulse analysis at θ(1 + rel_step)
/// on the same excitation basis.
inline PerturbedPair<ExplicitResponseMap> build_perturbed_pair(
    const ModelSpec& spec, std::string_view theta, double rel_step,
    std::shared_ptr<const ExcitationBasis> basis, const Thresholds& th,
    AnalysisCounters* counters = nullptr, ResponseMapOptions options = {}) {
  if (!basis) throw std::invalid_argument("fdmis: missing basis");
  if (!options.gram) options.gram = std::make_shared<const MatrixXd>(gram_matrix(basis->psi()));
  auto make_map = [&](double value) {
    const SystemModel model = build_model(with_parameter(spec, theta, value));
    return ExplicitResponseMap(basis, build_impulse_series(model, basis->grid(), {}, counters), options);
  };
  return build_perturbed_pair(make_map, std::string(theta), parameter_value(spec, theta), rel_step, th);
}

struct FdmisConfig {
  double target_cov = 0.02;
  std::uint64_t n_max = 1'000'000;
  std::uint64_t min_samples = 10;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct FdmisEstimate {
  std::string parameter;
  double value = 0.0;       // ΔP / Δθ
  double difference = 0.0;  // ΔP
  double cov = std::numeric_limits<double>::infinity();
  double delta_theta = 0.0;
  std::uint64_t n = 0;
  std::uint64_t n_evals = 0;       // two system evaluations per sample
  std::uint64_t full_samples = 0;  // samples that needed both evaluations
  bool converged = false;
  std::vector<double> history_value;
  std::vector<double> history_cov;
};

/// Summand Z_B [H(-G(x;θ+Δθ)) - H(-G(x;θ))] / #{failing components of
/// both families at x}, x drawn from the two-family mixture.
///
/// Slot j carries the same signed component in both families; it is drawn
/// with weight P_j + P'_j and the family is then chosen by a second uniform,
/// the larger-P family first. Exchanging base and perturbed therefore reuses
/// every draw and negates every summand.
///
/// The drawn component fails in its own family. If the same component of the
/// other family fails as well, both systems fail and the summand is 0
/// without a full evaluation; only the remaining samples scan every
/// component. The estimate is identical to scanning every sample.
template <LinearResponseMap Map>
FdmisEstimate fdmis_estimate(const PerturbedPair<Map>& pair, const FdmisConfig& cfg) {
  const auto& tb = pair.base_table;
  const auto& tp = pair.perturbed_table;
  std::vector<double> w(static_cast<std::size_t>(tb.size()));
  for (Index s = 0; s < tb.size(); ++s) w[static_cast<std::size_t>(s)] = tb[s].prob + tp[s].prob;
  const DiscretePmf pmf(std::move(w));
  const double z = pmf.total();

  struct Space {
    typename Map::Workspace base_ws;
    typename Map::Workspace pert_ws;
  };
  struct Draw {
    double summand = 0.0;
    bool full = false;
  };

  RunningMoments moments;
  FdmisEstimate est;
  est.parameter = pair.parameter;
  est.delta_theta = pair.delta_theta;
  const BatchPlan plan{cfg.seed, cfg.n_max, 16, cfg.workers};
  est.n = run_batched(
      plan, [&] { return Space{pair.base.make_workspace(), pair.perturbed.make_workspace()}; },
      [&](Rng& rng, Space& sp) -> Draw {
        const Index s = pmf.sample(uniform_open(rng));
        const double pb = tb[s].prob, pp = tp[s].prob;
        const bool base_first = pb >= pp;
        const bool pick_first = uniform_open(rng) * (pb + pp) < (base_first ? pb : pp);
        const bool pick_base = base_first == pick_first;

        const Map& own_map = pick_base ? pair.base : pair.perturbed;
        const Map& other_map = pick_base ? pair.perturbed : pair.base;
        const ComponentRecord& own = pick_base ? tb[s] : tp[s];
        const ComponentRecord& other = pick_base ? tp[s] : tb[s];

        const VectorXd u = unit_vector(own_map, own);
        const VectorXd x = sample_component_conditional(u, own.beta, rng);
        if (!other.excluded && component_g(other_map, other, x) <= 0.0) return {};

        auto& own_ws = pick_base ? sp.base_ws : sp.pert_ws;
        auto& other_ws = pick_base ? sp.pert_ws : sp.base_ws;
        own_map.project(x, own_ws);
        other_map.project(x, other_ws);
        const auto own_scan = scan_limit_states(own_ws.responses, pair.thresholds, &own.id);
        const auto other_scan = scan_limit_states(other_ws.responses, pair.thresholds);
        const double count = static_cast<double>(own_scan.failures + 1 + other_scan.failures);
        // Own family fails; the other fails iff any of its components does.
        const double h_other = other_scan.failures > 0 ? 1.0 : 0.0;
        const double diff = pick_base ? h_other - 1.0 : 1.0 - h_other;
        return {z * diff / count, true};
      },
      [&](const Draw& d) {
        moments.add(d.summand);
        if (d.full) ++est.full_samples;
        est.history_value.push_back(moments.mean() / pair.delta_theta);
        est.history_cov.push_back(moments.cov());
        return moments.count() >= cfg.min_samples && moments.cov() <= cfg.target_cov;
      });

  est.difference = moments.mean();
  est.value = est.difference / pair.delta_theta;
  est.cov = moments.cov();
  est.n_evals = 2 * est.n;
  est.converged = !moments.all_zero() && moments.count() >= cfg.min_samples && est.cov <= cfg.target_cov;
  return est;
}

}  // namespace fpsens
