#pragma once

// Component reliability of linear limit states g = c_k - σ a_{k,i}·x, the
// system limit state G = min g, and the mixture importance sampling estimator
// of the system failure probability.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fpsens/normal.hpp"
#include "fpsens/parallel.hpp"
#include "fpsens/random.hpp"
#include "fpsens/response_map.hpp"
#include "fpsens/stats.hpp"

namespace fpsens {

enum class Sign : int { plus = 1, minus = -1 };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

/// (k, i, σ), ordered lexicographically with + before −.
struct SignedComponentId {
  Index k = 0;
  Index i = 0;
  Sign sign = Sign::plus;

  friend bool operator==(const SignedComponentId&, const SignedComponentId&) = default;
  friend std::strong_ordering operator<=>(const SignedComponentId& a, const SignedComponentId& b) {
    if (auto c = a.k <=> b.k; c != 0) return c;
    if (auto c = a.i <=> b.i; c != 0) return c;
    return (a.sign == Sign::minus) <=> (b.sign == Sign::minus);
  }
};

/// Thresholds c_k per observer. Symmetric means failure is |s_k| >= c_k, so
/// each (k, i) gives an up-crossing (+) and a down-crossing (−) component.
struct Thresholds {
  std::vector<double> c;
  bool symmetric = true;
};

struct ComponentRecord {
  SignedComponentId id;
  double beta = 0.0;
  double prob = 0.0;
  double norm = 0.0;
  double threshold = 0.0;
  bool excluded = false;
};

/// All signed components with β = c/‖a‖ and P = Φ(−β). Records are stored
/// in id order; components with zero norm stay in place with P = 0 and are
/// listed in excluded().
class ComponentTable {
 public:
  ComponentTable(const MatrixXd& norms, const Thresholds& thresholds)
      : observers_(norms.rows()), steps_(norms.cols()), symmetric_(thresholds.symmetric) {
    if (static_cast<Index>(thresholds.c.size()) != observers_)
      throw std::invalid_argument("component table: need one threshold per observer");
    for (double c : thresholds.c)
      if (!(c > 0.0)) throw std::invalid_argument("component table: thresholds must be positive");
    const int signs = symmetric_ ? 2 : 1;
    records_.reserve(static_cast<std::size_t>(observers_ * steps_ * signs));
    CompensatedSum total;
    for (Index k = 0; k < observers_; ++k) {
      const double c = thresholds.c[static_cast<std::size_t>(k)];
      for (Index i = 0; i < steps_; ++i) {
        const double norm = norms(k, i);
        for (int s = 0; s < signs; ++s) {
          ComponentRecord r;
          r.id = {k, i, s == 0 ? Sign::plus : Sign::minus};
          r.norm = norm;
          r.threshold = c;
          if (!(norm > 0.0) || !std::isfinite(c / norm)) {
            r.excluded = true;
            r.beta = std::numeric_limits<double>::infinity();
            r.prob = 0.0;
            excluded_.push_back(r.id);
          } else {
            r.beta = c / norm;
            r.prob = normal::tail(r.beta);
          }
          total.add(r.prob);
          records_.push_back(r);
        }
      }
    }
    total_ = total.value();
  }

  Index observer_count() const { return observers_; }
  Index step_count() const { return steps_; }
  bool symmetric() const { return symmetric_; }
  Index size() const { return static_cast<Index>(records_.size()); }
  const std::vector<ComponentRecord>& records() const { return records_; }
  const ComponentRecord& operator[](Index slot) const { return records_[static_cast<std::size_t>(slot)]; }
  const std::vector<SignedComponentId>& excluded() const { return excluded_; }

  /// Σ P over all signed components (Z_A).
  double total_probability() const { return total_; }

  Index slot(const SignedComponentId& id) const {
    if (id.k < 0 || id.k >= observers_ || id.i < 0 || id.i >= steps_ || (!symmetric_ && id.sign == Sign::minus))
      throw std::out_of_range("component table: id out of range");
    const Index base = id.k * steps_ + id.i;
    return symmetric_ ? 2 * base + (id.sign == Sign::minus ? 1 : 0) : base;
  }
  const ComponentRecord& record(const SignedComponentId& id) const { return (*this)[slot(id)]; }

 private:
  Index observers_;
  Index steps_;
  bool symmetric_;
  std::vector<ComponentRecord> records_;
  std::vector<SignedComponentId> excluded_;
  double total_ = 0.0;
};

/// Discrete distribution over table slots with cumulative weights.
class DiscretePmf {
 public:
  explicit DiscretePmf(std::vector<double> weights) : weights_(std::move(weights)) {
    cumulative_.reserve(weights_.size());
    CompensatedSum s;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("pmf: weights must be finite and >= 0");
      s.add(w);
      cumulative_.push_back(s.value());
    }
    total_ = cumulative_.empty() ? 0.0 : cumulative_.back();
    if (!(total_ > 0.0)) throw std::invalid_argument("pmf: all weights are zero (no failure region)");
  }

  Index size() const { return static_cast<Index>(weights_.size()); }
  double total() const { return total_; }
  double weight(Index slot) const { return weights_[static_cast<std::size_t>(slot)]; }
  double probability(Index slot) const { return weight(slot) / total_; }

  /// Slot j with probability w_j / total for v uniform in (0, 1).
  Index sample(double v) const {
    const double target = v * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) {
      // v·total rounded up to total: take the last slot with positive weight.
      it = std::lower_bound(cumulative_.begin(), cumulative_.end(), total_);
    }
    return static_cast<Index>(it - cumulative_.begin());
  }

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// h(k,i,σ) ∝ P_{kiσ}.
inline DiscretePmf importance_pmf(const ComponentTable& table) {
  std::vector<double> w;
  w.reserve(table.records().size());
  for (const auto& r : table.records()) w.push_back(r.prob);
  return DiscretePmf(std::move(w));
}

/// Equal weight on every non-excluded component.
inline DiscretePmf uniform_pmf(const ComponentTable& table) {
  std::vector<double> w;
  w.reserve(table.records().size());
  for (const auto& r : table.records()) w.push_back(r.excluded ? 0.0 : 1.0);
  return DiscretePmf(std::move(w));
}

// ---------------------------------------------------------------------------
// Design points and component sampling

template <LinearResponseMap Map>
VectorXd unit_vector(const Map& map, const ComponentRecord& rec) {
  if (rec.excluded) throw std::invalid_argument("unit_vector: component is excluded (zero norm)");
  return (sign_value(rec.id.sign) / rec.norm) * map.coefficient_vector(rec.id.k, rec.id.i);
}

template <LinearResponseMap Map>
VectorXd design_point(const Map& map, const ComponentRecord& rec) {
  return rec.beta * unit_vector(map, rec);
}

/// g_{kiσ}(x) = c_k - σ a_{k,i}·x.
template <LinearResponseMap Map>
double component_g(const Map& map, const ComponentRecord& rec, const VectorXd& x) {
  return rec.threshold - sign_value(rec.id.sign) * map.response(rec.id.k, rec.id.i, x);
}

/// x ~ N(0, I) conditioned on u·x >= β: t u + (ξ - (ξ·u) u) with t drawn
/// from the normal tail beyond β.
inline VectorXd sample_component_conditional(const VectorXd& u, double beta, Rng& rng) {
  const double t = normal::truncated_tail_quantile(beta, uniform_open(rng));
  VectorXd x = standard_normal_vector(rng, u.size());
  x += (t - u.dot(x)) * u;
  return x;
}

// ---------------------------------------------------------------------------
// System limit state

struct LimitStateScan {
  double min_g = std::numeric_limits<double>::infinity();
  SignedComponentId argmin;
  std::uint64_t failures = 0;  // signed components with g <= 0
};

/// Scans every signed component given the projected responses (m × n).
/// `skip`, when set, is left out of the failure count and the minimum.
inline LimitStateScan scan_limit_states(const MatrixXd& responses, const Thresholds& th,
                                        const SignedComponentId* skip = nullptr) {
  LimitStateScan out;
  for (Index k = 0; k < responses.rows(); ++k) {
    const double c = th.c[static_cast<std::size_t>(k)];
    for (Index i = 0; i < responses.cols(); ++i) {
      const double r = responses(k, i);
      const double gp = c - r;
      const bool skip_p = skip && skip->k == k && skip->i == i && skip->sign == Sign::plus;
      if (!skip_p) {
        if (gp <= 0.0) ++out.failures;
        if (gp < out.min_g) out.min_g = gp, out.argmin = {k, i, Sign::plus};
      }
      if (th.symmetric) {
        const double gm = c + r;
        const bool skip_m = skip && skip->k == k && skip->i == i && skip->sign == Sign::minus;
        if (!skip_m) {
          if (gm <= 0.0) ++out.failures;
          if (gm < out.min_g) out.min_g = gm, out.argmin = {k, i, Sign::minus};
        }
      }
    }
  }
  return out;
}

/// True when g > 0 for every signed component other than `id`.
inline bool others_safe(const MatrixXd& responses, const Thresholds& th, const SignedComponentId& id) {
  for (Index k = 0; k < responses.rows(); ++k) {
    const double c = th.c[static_cast<std::size_t>(k)];
    for (Index i = 0; i < responses.cols(); ++i) {
      const double r = responses(k, i);
      const bool here = id.k == k && id.i == i;
      if (!(here && id.sign == Sign::plus) && !(c - r > 0.0)) return false;
      if (th.symmetric && !(here && id.sign == Sign::minus) && !(c + r > 0.0)) return false;
    }
  }
  return true;
}

/// G(x) = min over all signed components; one function evaluation.
template <LinearResponseMap Map>
LimitStateScan system_g(const Map& map, const Thresholds& th, const VectorXd& x,
                        typename Map::Workspace& ws) {
  map.project(x, ws);
  return scan_limit_states(ws.responses, th);
}

template <LinearResponseMap Map>
LimitStateScan system_g(const Map& map, const Thresholds& th, const VectorXd& x) {
  auto ws = map.make_workspace();
  return system_g(map, th, x, ws);
}

// ---------------------------------------------------------------------------
// ISEE estimator

struct EstimatorConfig {
  double target_cov = 0.1;
  std::uint64_t n_max = 10000;
  std::uint64_t min_samples = 10;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct ProbabilityEstimate {
  double value = 0.0;
  double cov = std::numeric_limits<double>::infinity();
  std::uint64_t n_evals = 0;
  bool converged = false;
  std::vector<double> history_value;
  std::vector<double> history_cov;
};

/// Mixture importance sampling over component-conditional densities:
/// P̂ = Z_A/N Σ 1 / #{failing signed components at x_j}.
template <LinearResponseMap Map>
ProbabilityEstimate isee_estimate(const Map& map, const ComponentTable& table, const Thresholds& th,
                                  const EstimatorConfig& cfg) {
  if (table.observer_count() != map.observer_count() || table.step_count() != map.step_count())
    throw std::invalid_argument("isee: table and response map disagree in shape");
  const DiscretePmf pmf = importance_pmf(table);
  const double z = pmf.total();

  struct Space {
    typename Map::Workspace ws;
  };
  RunningMoments moments;
  ProbabilityEstimate est;
  const BatchPlan plan{cfg.seed, cfg.n_max, 16, cfg.workers};
  const std::uint64_t n = run_batched(
      plan, [&] { return Space{map.make_workspace()}; },
      [&](Rng& rng, Space& sp) {
        const ComponentRecord& rec = table[pmf.sample(uniform_open(rng))];
        const VectorXd u = unit_vector(map, rec);
        const VectorXd x = sample_component_conditional(u, rec.beta, rng);
        map.project(x, sp.ws);
        // The sampled component fails by construction; count it regardless of rounding.
        const auto scan = scan_limit_states(sp.ws.responses, th, &rec.id);
        return z / static_cast<double>(scan.failures + 1);
      },
      [&](double summand) {
        moments.add(summand);
        est.history_value.push_back(moments.mean());
        est.history_cov.push_back(moments.cov());
        return moments.count() >= cfg.min_samples && moments.cov() <= cfg.target_cov;
      });
  est.value = moments.mean();
  est.cov = moments.cov();
  est.n_evals = n;
  est.converged = moments.count() >= cfg.min_samples && est.cov <= cfg.target_cov;
  return est;
}

}  // namespace fpsens
