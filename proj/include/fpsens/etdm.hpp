#pragma once

// Explicit time-domain representation of linear responses.
//
// A unit sampled excitation (F_1 = 1, F_j = 0 otherwise) is pushed through
// the Newmark average-acceleration scheme once; by linearity and time
// invariance of the scheme the response at t_i to any sampled excitation is
// the causal convolution r_i = Σ_{j<=i} h[i-j+1] F_j. With F_j = ψ_j·X this
// gives r_i = a_i·X, a_i = Σ_{j<=i} h[i-j+1] ψ_j. Sensitivity series b
// are obtained the same way from the differentiated equation of motion.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fpsens/excitation.hpp"
#include "fpsens/model.hpp"
#include "fpsens/response_map.hpp"

namespace fpsens {

// ---------------------------------------------------------------------------
// Newmark average-acceleration integrator (γ = 1/2, β = 1/4)

class NewmarkIntegrator {
 public:
  NewmarkIntegrator(const MatrixXd& mass, const MatrixXd& damping, const MatrixXd& stiffness,
                    double dt)
      : mass_(mass), damping_(damping), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("newmark: dt must be positive");
    c0_ = 4.0 / (dt * dt);
    c1_ = 2.0 / dt;
    c2_ = 4.0 / dt;
    const MatrixXd keff = stiffness + c1_ * damping + c0_ * mass;
    Eigen::FullPivLU<MatrixXd> lu(keff);
    if (!lu.isInvertible()) throw std::runtime_error("newmark: singular effective stiffness");
    keff_inv_ = lu.inverse();
    reset();
  }

  /// Rest state with zero load at t_0.
  void reset() {
    const Index n = mass_.rows();
    u_ = VectorXd::Zero(n);
    v_ = VectorXd::Zero(n);
    a_ = VectorXd::Zero(n);
  }

  /// Advances one step; `load` is the nodal load at the end of the step.
  void step(const VectorXd& load) {
    const VectorXd rhs = load + mass_ * (c0_ * u_ + c2_ * v_ + a_) + damping_ * (c1_ * u_ + v_);
    const VectorXd u_next = keff_inv_ * rhs;
    const VectorXd a_next = c0_ * (u_next - u_) - c2_ * v_ - a_;
    v_ += 0.5 * dt_ * (a_ + a_next);
    u_ = u_next;
    a_ = a_next;
  }

  const VectorXd& displacement() const { return u_; }
  const VectorXd& velocity() const { return v_; }
  const VectorXd& acceleration() const { return a_; }

 private:
  MatrixXd mass_;
  MatrixXd damping_;
  MatrixXd keff_inv_;
  double dt_;
  double c0_ = 0.0, c1_ = 0.0, c2_ = 0.0;
  VectorXd u_, v_, a_;
};

// ---------------------------------------------------------------------------
// Impulse and sensitivity series

/// Displacement/velocity/acceleration histories, one column per grid time.
struct StateHistory {
  MatrixXd disp;
  MatrixXd vel;
  MatrixXd acc;
};

/// First-column coefficients: h(k, i) = a^{s_k}_{i+1,1}; hs[p](k, i) = b^{s_k}_{i+1,1}.
struct ImpulseSeries {
  MatrixXd h;
  std::vector<std::string> parameters;
  std::vector<MatrixXd> hs;
  double dt = 0.0;

  Index observer_count() const { return h.rows(); }
  Index step_count() const { return h.cols(); }
};

struct ImpulseRun {
  ImpulseSeries series;
  StateHistory states;
};

namespace detail {

inline constexpr double blowup_limit = 1e12;

inline double observe(const ResponseObserver& o, const NewmarkIntegrator& nm) {
  return o.disp_row.dot(nm.displacement()) + o.vel_row.dot(nm.velocity()) +
         o.acc_row.dot(nm.acceleration());
}

inline void check_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite() || m.cwiseAbs().maxCoeff() > blowup_limit)
    throw std::runtime_error(std::string(what) + ": integration blew up");
}

}  // namespace detail

/// Observer responses (observers × n) to an arbitrary sampled excitation
/// F_1..F_n, integrated from rest.
inline MatrixXd direct_response(const SystemModel& model, const TimeGrid& grid,
                                std::span<const double> excitation) {
  if (static_cast<Index>(excitation.size()) != grid.n)
    throw std::invalid_argument("direct_response: excitation length must equal grid length");
  NewmarkIntegrator nm(model.mass(), model.damping(), model.stiffness(), grid.dt);
  const auto& obs = model.observers();
  MatrixXd out(static_cast<Index>(obs.size()), grid.n);
  for (Index i = 0; i < grid.n; ++i) {
    nm.step(model.orientation() * excitation[i]);
    for (std::size_t k = 0; k < obs.size(); ++k) out(static_cast<Index>(k), i) = detail::observe(obs[k], nm);
  }
  detail::check_finite(out, "direct_response");
  return out;
}

/// One time-history run under the unit sampled excitation F_1 = 1; keeps the
/// state histories for the sensitivity runs.
inline ImpulseRun impulse_response(const SystemModel& model, const TimeGrid& grid) {
  if (grid.n < 1) throw std::invalid_argument("impulse_response: empty grid");
  NewmarkIntegrator nm(model.mass(), model.damping(), model.stiffness(), grid.dt);
  const auto& obs = model.observers();
  const Index dofs = model.dof_count();
  ImpulseRun run;
  run.series.dt = grid.dt;
  run.series.h.resize(static_cast<Index>(obs.size()), grid.n);
  run.states.disp.resize(dofs, grid.n);
  run.states.vel.resize(dofs, grid.n);
  run.states.acc.resize(dofs, grid.n);
  const VectorXd zero = VectorXd::Zero(dofs);
  for (Index i = 0; i < grid.n; ++i) {
    nm.step(i == 0 ? VectorXd(model.orientation()) : zero);
    run.states.disp.col(i) = nm.displacement();
    run.states.vel.col(i) = nm.velocity();
    run.states.acc.col(i) = nm.acceleration();
    for (std::size_t k = 0; k < obs.size(); ++k)
      run.series.h(static_cast<Index>(k), i) = detail::observe(obs[k], nm);
  }
  detail::check_finite(run.series.h, "impulse_response");
  return run;
}

/// Integrates M ∂Ü + C ∂U̇ + K ∂U = dL F - (dM Ü + dC U̇ + dK U) from rest,
/// with U from the unit-impulse run; returns b (observers × n).
inline MatrixXd impulse_sensitivity(const SystemModel& model, std::string_view theta,
                                    const TimeGrid& grid, const ImpulseRun& base) {
  const ParameterBinding& p = model.parameter(theta);
  if (base.states.disp.cols() != grid.n || base.states.disp.rows() != model.dof_count())
    throw std::invalid_argument("impulse_sensitivity: base run carries no matching state history");
  NewmarkIntegrator nm(model.mass(), model.damping(), model.stiffness(), grid.dt);
  const auto& obs = model.observers();
  MatrixXd b(static_cast<Index>(obs.size()), grid.n);
  for (Index i = 0; i < grid.n; ++i) {
    VectorXd load = -(p.dM * base.states.acc.col(i) + p.dC * base.states.vel.col(i) +
                      p.dK * base.states.disp.col(i));
    if (i == 0) load += p.dL;
    nm.step(load);
    for (std::size_t k = 0; k < obs.size(); ++k) b(static_cast<Index>(k), i) = detail::observe(obs[k], nm);
  }
  detail::check_finite(b, "impulse_sensitivity");
  return b;
}

// ---------------------------------------------------------------------------
// Explicit coefficient vectors, projections and norms

/// r_i = Σ_{j<=i} h[i-j] z[j] for every i, with `h_reversed` = reverse(h).
inline void causal_convolution(const VectorXd& h_reversed, const VectorXd& z,
                               Eigen::Ref<RowVectorXd, 0, Eigen::InnerStride<>> out) {
  const Index n = z.size();
  for (Index i = 0; i < n; ++i)
    out[i] = h_reversed.segment(n - 1 - i, i + 1).dot(z.head(i + 1));
}

/// Σ_{j<=i} h[i-j] z[j] for one i.
inline double causal_convolution_at(const VectorXd& h_reversed, const VectorXd& z, Index i) {
  const Index n = z.size();
  return h_reversed.segment(n - 1 - i, i + 1).dot(z.head(i + 1));
}

/// a_i = Σ_{j<=i} h[i-j] ψ_j for a single series row and 0-based time index i.
inline VectorXd coefficient_vector(const RowVectorXd& h, const RowMatrixXd& psi, Index i) {
  const VectorXd weights = h.head(i + 1).reverse().transpose();
  return psi.topRows(i + 1).transpose() * weights;
}

/// G_jl = ψ_j·ψ_l (n × n).
inline MatrixXd gram_matrix(const RowMatrixXd& psi) {
  const Index n = psi.rows();
  MatrixXd gram = MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(MatrixXd(psi));
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return gram;
}

/// ‖a_i^{s_k}‖ for all (k, i) from the Gram matrix: ‖a_i‖² = (T G Tᵀ)_ii
/// with T the lower-triangular Toeplitz matrix of h.
inline MatrixXd coefficient_norms_from_gram(const MatrixXd& h, const MatrixXd& gram) {
  const Index n = gram.rows();
  if (h.cols() != n) throw std::invalid_argument("coefficient_norms: series/basis length mismatch");
  MatrixXd norms(h.rows(), n);
  MatrixXd toeplitz = MatrixXd::Zero(n, n);
  for (Index k = 0; k < h.rows(); ++k) {
    for (Index i = 0; i < n; ++i) toeplitz.row(i).head(i + 1) = h.row(k).head(i + 1).reverse();
    const MatrixXd w = toeplitz.triangularView<Eigen::Lower>() * gram;
    norms.row(k) = (w.array() * toeplitz.array()).rowwise().sum().max(0.0).sqrt().transpose();
  }
  return norms;
}

inline MatrixXd coefficient_norms(const MatrixXd& h, const RowMatrixXd& psi) {
  if (h.cols() != psi.rows()) throw std::invalid_argument("coefficient_norms: series/basis length mismatch");
  return coefficient_norms_from_gram(h, gram_matrix(psi));
}

inline MatrixXd coefficient_norms(const ImpulseSeries& series, const ExcitationBasis& basis) {
  return coefficient_norms(series.h, basis.psi());
}

/// r_i^{s_k}·x and b_i^{s_k}·x for all k, i: z = ψ x once, then causal
/// convolutions.
struct ProjectedSeries {
  MatrixXd responses;                 // observers × n
  std::vector<MatrixXd> sensitivities;  // per parameter, observers × n
};

inline ProjectedSeries project_series(const ImpulseSeries& series, const ExcitationBasis& basis,
                                      const VectorXd& x) {
  if (x.size() != basis.dim()) throw std::invalid_argument("project_series: dimension mismatch");
  if (series.step_count() != basis.steps())
    throw std::invalid_argument("project_series: series/basis length mismatch");
  const VectorXd z = basis.psi() * x;
  ProjectedSeries out;
  auto convolve_all = [&](const MatrixXd& h) {
    MatrixXd r(h.rows(), h.cols());
    for (Index k = 0; k < h.rows(); ++k) {
      const VectorXd hr = h.row(k).reverse().transpose();
      causal_convolution(hr, z, r.row(k));
    }
    return r;
  };
  out.responses = convolve_all(series.h);
  for (const auto& hs : series.hs) out.sensitivities.push_back(convolve_all(hs));
  return out;
}

/// b-vectors for a parameter that enters only through the excitation:
/// b_i = Σ_{j<=i} h[i-j] dψ_j. Returns one (n × d) matrix per observer.
inline std::vector<RowMatrixXd> excitation_param_sensitivity(const ImpulseSeries& series,
                                                             const RowMatrixXd& dpsi) {
  if (dpsi.rows() != series.step_count())
    throw std::invalid_argument("excitation_param_sensitivity: dψ row count mismatch");
  std::vector<RowMatrixXd> out;
  for (Index k = 0; k < series.observer_count(); ++k) {
    RowMatrixXd b(dpsi.rows(), dpsi.cols());
    for (Index i = 0; i < dpsi.rows(); ++i)
      b.row(i) = coefficient_vector(series.h.row(k), dpsi, i).transpose();
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Response map over the explicit representation

struct ResponseMapOptions {
  /// Cache every a_i^{s_k} explicitly when observers·n·d is at most this.
  std::int64_t materialize_limit = 8'000'000;
  /// Gram matrix of the basis, shared between maps built on the same basis.
  std::shared_ptr<const MatrixXd> gram;
};

/// All component responses a_{k,i}·x, their sensitivities b_{p,k,i}·x and
/// the norms ‖a_{k,i}‖, built from one excitation basis and impulse series.
class ExplicitResponseMap {
 public:
  struct Workspace {
    VectorXd z;
    std::vector<VectorXd> dz;  // per excitation parameter
    MatrixXd responses;        // observers × n
  };

  ExplicitResponseMap(std::shared_ptr<const ExcitationBasis> basis, ImpulseSeries series,
                      ResponseMapOptions options = {})
      : basis_(std::move(basis)), series_(std::move(series)) {
    if (!basis_) throw std::invalid_argument("response map: missing basis");
    if (series_.step_count() != basis_->steps())
      throw std::invalid_argument("response map: series/basis length mismatch");
    if (series_.hs.size() != series_.parameters.size())
      throw std::invalid_argument("response map: parameter names and series differ in count");
    h_rev_ = reversed(series_.h);
    for (const auto& hs : series_.hs) hs_rev_.push_back(reversed(hs));
    gram_ = options.gram ? std::move(options.gram)
                         : std::make_shared<const MatrixXd>(gram_matrix(basis_->psi()));
    if (gram_->rows() != step_count()) throw std::invalid_argument("response map: Gram size mismatch");
    norms_ = coefficient_norms_from_gram(series_.h, *gram_);

    const std::int64_t cells = static_cast<std::int64_t>(observer_count()) * step_count() * dim();
    if (cells <= options.materialize_limit) {
      rows_.resize(observer_count() * step_count(), dim());
      for (Index k = 0; k < observer_count(); ++k) {
        MatrixXd toeplitz = MatrixXd::Zero(step_count(), step_count());
        for (Index i = 0; i < step_count(); ++i)
          toeplitz.row(i).head(i + 1) = series_.h.row(k).head(i + 1).reverse();
        rows_.middleRows(k * step_count(), step_count()) =
            toeplitz.triangularView<Eigen::Lower>() * basis_->psi();
      }
    }
  }

  /// Adds a parameter acting only on the excitation, with basis derivative dψ.
  void add_excitation_parameter(std::string name, RowMatrixXd dpsi) {
    if (dpsi.rows() != basis_->steps() || dpsi.cols() != basis_->dim())
      throw std::invalid_argument("response map: dψ shape must match ψ");
    excitation_names_.push_back(std::move(name));
    dpsi_.push_back(std::move(dpsi));
  }

  Index observer_count() const { return series_.observer_count(); }
  Index step_count() const { return series_.step_count(); }
  Index dim() const { return basis_->dim(); }
  Index parameter_count() const {
    return static_cast<Index>(series_.parameters.size() + excitation_names_.size());
  }
  const std::string& parameter_name(Index p) const {
    const auto np = static_cast<Index>(series_.parameters.size());
    return p < np ? series_.parameters[p] : excitation_names_[p - np];
  }

  const MatrixXd& norms() const { return norms_; }
  const ImpulseSeries& series() const { return series_; }
  const ExcitationBasis& basis() const { return *basis_; }
  std::shared_ptr<const ExcitationBasis> basis_ptr() const { return basis_; }
  std::shared_ptr<const MatrixXd> gram_ptr() const { return gram_; }
  bool materialized() const { return rows_.rows() > 0; }

  VectorXd coefficient_vector(Index k, Index i) const {
    if (materialized()) return rows_.row(k * step_count() + i).transpose();
    return fpsens::coefficient_vector(series_.h.row(k), basis_->psi(), i);
  }

  /// a_{k,i}·x for a single component.
  double response(Index k, Index i, const VectorXd& x) const {
    if (materialized()) return rows_.row(k * step_count() + i).dot(x);
    return coefficient_vector(k, i).dot(x);
  }

  Workspace make_workspace() const {
    Workspace ws;
    ws.responses.resize(observer_count(), step_count());
    return ws;
  }

  void project(const VectorXd& x, Workspace& ws) const {
    if (x.size() != dim()) throw std::invalid_argument("response map: dimension mismatch");
    ws.z.noalias() = basis_->psi() * x;
    ws.responses.resize(observer_count(), step_count());
    for (Index k = 0; k < observer_count(); ++k) causal_convolution(h_rev_[k], ws.z, ws.responses.row(k));
    ws.dz.resize(dpsi_.size());
    for (std::size_t e = 0; e < dpsi_.size(); ++e) ws.dz[e].noalias() = dpsi_[e] * x;
  }

  /// b_{p,k,i}·x for the x last passed to project().
  double sensitivity_dot(const Workspace& ws, Index p, Index k, Index i) const {
    const auto np = static_cast<Index>(series_.parameters.size());
    if (p < np) return causal_convolution_at(hs_rev_[p][k], ws.z, i);
    return causal_convolution_at(h_rev_[k], ws.dz[p - np], i);
  }

 private:
  static std::vector<VectorXd> reversed(const MatrixXd& h) {
    std::vector<VectorXd> out;
    for (Index k = 0; k < h.rows(); ++k) out.emplace_back(h.row(k).reverse().transpose());
    return out;
  }

  std::shared_ptr<const ExcitationBasis> basis_;
  ImpulseSeries series_;
  std::vector<VectorXd> h_rev_;
  std::vector<std::vector<VectorXd>> hs_rev_;
  std::shared_ptr<const MatrixXd> gram_;
  MatrixXd norms_;
  RowMatrixXd rows_;
  std::vector<std::string> excitation_names_;
  std::vector<RowMatrixXd> dpsi_;
};

static_assert(LinearResponseMap<ExplicitResponseMap>);

// ---------------------------------------------------------------------------
// Steps i–ii: impulse run plus one sensitivity run per structural parameter

struct AnalysisCounters {
  std::uint64_t impulse_runs = 0;
  std::uint64_t sensitivity_runs = 0;
};

inline ImpulseSeries build_impulse_series(const SystemModel& model, const TimeGrid& grid,
                                          const std::vector<std::string>& parameters,
                                          AnalysisCounters* counters = nullptr) {
  ImpulseRun run = impulse_response(model, grid);
  if (counters) ++counters->impulse_runs;
  for (const auto& name : parameters) {
    run.series.hs.push_back(impulse_sensitivity(model, name, grid, run));
    run.series.parameters.push_back(name);
    if (counters) ++counters->sensitivity_runs;
  }
  return std::move(run.series);
}

}  // namespace fpsens
