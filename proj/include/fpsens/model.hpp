#pragma once

// Linear structural models M U'' + C U' + K U = L F(t), the exact derivatives
// of M, C, K, L with respect to named design parameters, and the linear
// response observers that define the monitored quantities.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace fpsens {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// dM/dθ, dC/dθ, dK/dθ, dL/dθ for one design parameter θ.
struct ParameterBinding {
  std::string name;
  MatrixXd dM;
  MatrixXd dC;
  MatrixXd dK;
  VectorXd dL;
  double value = 0.0;
};

/// Scalar response s = disp_row·U + vel_row·U' + acc_row·U''.
struct ResponseObserver {
  std::string name;
  RowVectorXd disp_row;
  RowVectorXd vel_row;
  RowVectorXd acc_row;
};

struct RayleighSpec {
  int mode_a = 1;  // 1-based mode numbers
  int mode_b = 2;
  double zeta = 0.05;
};

class SystemModel {
 public:
  SystemModel(MatrixXd mass, MatrixXd damping, MatrixXd stiffness, VectorXd orientation,
              std::vector<ParameterBinding> parameters, std::vector<ResponseObserver> observers)
      : mass_(std::move(mass)),
        damping_(std::move(damping)),
        stiffness_(std::move(stiffness)),
        orientation_(std::move(orientation)),
        parameters_(std::move(parameters)),
        observers_(std::move(observers)) {
    validate();
  }

  Index dof_count() const { return mass_.rows(); }
  const MatrixXd& mass() const { return mass_; }
  const MatrixXd& damping() const { return damping_; }
  const MatrixXd& stiffness() const { return stiffness_; }
  const VectorXd& orientation() const { return orientation_; }
  const std::vector<ParameterBinding>& parameters() const { return parameters_; }
  const std::vector<ResponseObserver>& observers() const { return observers_; }

  const ParameterBinding* find_parameter(std::string_view name) const {
    for (const auto& p : parameters_)
      if (p.name == name) return &p;
    return nullptr;
  }

  const ParameterBinding& parameter(std::string_view name) const {
    if (const auto* p = find_parameter(name)) return *p;
    throw std::invalid_argument("unknown design parameter '" + std::string(name) + "'");
  }

 private:
  void validate() const {
    const Index n = mass_.rows();
    if (n < 1) throw std::invalid_argument("model: dof_count must be positive");
    auto square = [n](const MatrixXd& m, const char* what) {
      if (m.rows() != n || m.cols() != n)
        throw std::invalid_argument(std::string("model: ") + what + " must be " +
                                    std::to_string(n) + "x" + std::to_string(n));
    };
    square(mass_, "mass");
    square(damping_, "damping");
    square(stiffness_, "stiffness");
    if (orientation_.size() != n) throw std::invalid_argument("model: orientation length mismatch");

    const double mscale = mass_.cwiseAbs().maxCoeff();
    if ((mass_ - mass_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mscale)
      throw std::invalid_argument("model: mass matrix is not symmetric");
    if (Eigen::LLT<MatrixXd>(mass_).info() != Eigen::Success)
      throw std::invalid_argument("model: mass matrix is not positive definite");
    const double kscale = std::max(stiffness_.cwiseAbs().maxCoeff(), 1e-300);
    if ((stiffness_ - stiffness_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * kscale)
      throw std::invalid_argument("model: stiffness matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> keig(stiffness_, Eigen::EigenvaluesOnly);
    if (keig.eigenvalues().minCoeff() < -1e-10 * kscale)
      throw std::invalid_argument("model: stiffness matrix is not positive semidefinite");

    std::set<std::string> names;
    for (const auto& p : parameters_) {
      if (!names.insert(p.name).second)
        throw std::invalid_argument("model: duplicate parameter name '" + p.name + "'");
      square(p.dM, "parameter dM");
      square(p.dC, "parameter dC");
      square(p.dK, "parameter dK");
      if (p.dL.size() != n) throw std::invalid_argument("model: parameter dL length mismatch");
    }
    for (const auto& o : observers_) {
      if (o.disp_row.size() != n || o.vel_row.size() != n || o.acc_row.size() != n)
        throw std::invalid_argument("model: observer '" + o.name + "' row length mismatch");
      if (o.disp_row.isZero(0) && o.vel_row.isZero(0) && o.acc_row.isZero(0))
        throw std::invalid_argument("model: observer '" + o.name + "' has all-zero rows");
    }
  }

  MatrixXd mass_;
  MatrixXd damping_;
  MatrixXd stiffness_;
  VectorXd orientation_;
  std::vector<ParameterBinding> parameters_;
  std::vector<ResponseObserver> observers_;
};

// ---------------------------------------------------------------------------
// Rayleigh damping

struct RayleighCoefficients {
  double a0 = 0.0;  // mass-proportional [1/s]
  double a1 = 0.0;  // stiffness-proportional [s]
};

/// Undamped circular frequencies of K φ = ω² M φ, ascending.
inline VectorXd modal_frequencies(const MatrixXd& mass, const MatrixXd& stiffness) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(stiffness, mass, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw std::runtime_error("modal_frequencies: eigen-solve failed");
  return ges.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

/// Coefficients giving damping ratio `zeta` exactly at ω_a and ω_b.
inline RayleighCoefficients rayleigh_from_frequencies(double omega_a, double omega_b, double zeta) {
  if (!(omega_a > 0.0 && omega_b > 0.0))
    throw std::invalid_argument("rayleigh: modal frequencies must be positive");
  if (std::abs(omega_b - omega_a) <= 1e-12 * std::max(omega_a, omega_b))
    throw std::runtime_error("rayleigh: repeated modal frequencies make the fit singular");
  // ζ = (a0/ω + a1 ω)/2 at both frequencies.
  return {2.0 * zeta * omega_a * omega_b / (omega_a + omega_b), 2.0 * zeta / (omega_a + omega_b)};
}

inline RayleighCoefficients rayleigh_coefficients(const MatrixXd& mass, const MatrixXd& stiffness,
                                                  const RayleighSpec& spec) {
  const Index n = mass.rows();
  if (!(spec.mode_a >= 1 && spec.mode_a < spec.mode_b && spec.mode_b <= n))
    throw std::invalid_argument("rayleigh: require 1 <= mode_a < mode_b <= dof_count");
  if (!(spec.zeta > 0.0 && spec.zeta < 1.0))
    throw std::invalid_argument("rayleigh: zeta must lie in (0, 1)");
  const VectorXd w = modal_frequencies(mass, stiffness);
  return rayleigh_from_frequencies(w[spec.mode_a - 1], w[spec.mode_b - 1], spec.zeta);
}

/// Modal damping ratio of a Rayleigh model at frequency ω.
inline double rayleigh_damping_ratio(const RayleighCoefficients& r, double omega) {
  return 0.5 * (r.a0 / omega + r.a1 * omega);
}

// ---------------------------------------------------------------------------
// Preset builders

/// Unit-mass oscillator u'' + 2ω_nζ_n u' + ω_n² u = -F(t).
inline SystemModel build_sdof(double omega_n, double zeta_n) {
  if (!(omega_n > 0.0)) throw std::invalid_argument("build_sdof: omega_n must be positive");
  if (!(zeta_n > 0.0 && zeta_n < 1.0))
    throw std::invalid_argument("build_sdof: zeta_n must lie in (0, 1)");
  const MatrixXd zero = MatrixXd::Zero(1, 1);
  const VectorXd zero_l = VectorXd::Zero(1);

  ParameterBinding w{"omega_n", zero, MatrixXd::Constant(1, 1, 2.0 * zeta_n),
                     MatrixXd::Constant(1, 1, 2.0 * omega_n), zero_l, omega_n};
  ParameterBinding z{"zeta_n", zero, MatrixXd::Constant(1, 1, 2.0 * omega_n), zero, zero_l, zeta_n};

  ResponseObserver u{"u", RowVectorXd::Ones(1), RowVectorXd::Zero(1), RowVectorXd::Zero(1)};
  return SystemModel(MatrixXd::Ones(1, 1), MatrixXd::Constant(1, 1, 2.0 * omega_n * zeta_n),
                     MatrixXd::Constant(1, 1, omega_n * omega_n), VectorXd::Constant(1, -1.0),
                     {std::move(w), std::move(z)}, {std::move(u)});
}

struct ViscoelasticDamper {
  double k_ve = 0.0;  // [N/m]
  double c_ve = 0.0;  // [N s/m]
};

struct ShearBuildingSpec {
  std::vector<double> masses;       // [kg], floor 1 at the bottom
  std::vector<double> stiffnesses;  // [N/m], story k between floors k-1 and k
  std::optional<RayleighSpec> rayleigh;
  std::vector<ViscoelasticDamper> dampers;  // empty, or one per story
  double brace_cos = 1.0;
};

/// Contribution of a unit spring across story `story` (0-based) of an
/// n-floor shear building: a 2x2 block, or 1x1 for the ground story.
inline MatrixXd story_pattern(Index n, Index story) {
  MatrixXd p = MatrixXd::Zero(n, n);
  p(story, story) += 1.0;
  if (story > 0) {
    p(story - 1, story - 1) += 1.0;
    p(story, story - 1) -= 1.0;
    p(story - 1, story) -= 1.0;
  }
  return p;
}

inline SystemModel build_shear_building(const ShearBuildingSpec& spec) {
  const Index n = static_cast<Index>(spec.masses.size());
  if (n < 1) throw std::invalid_argument("shear_building: at least one story required");
  if (static_cast<Index>(spec.stiffnesses.size()) != n)
    throw std::invalid_argument("shear_building: masses and stiffnesses differ in length");
  if (!spec.dampers.empty() && static_cast<Index>(spec.dampers.size()) != n)
    throw std::invalid_argument("shear_building: dampers must be empty or one per story");
  if (!(spec.brace_cos > 0.0 && spec.brace_cos <= 1.0))
    throw std::invalid_argument("shear_building: brace_cos must lie in (0, 1]");
  for (double m : spec.masses)
    if (!(m > 0.0)) throw std::invalid_argument("shear_building: masses must be positive");
  for (double k : spec.stiffnesses)
    if (!(k > 0.0)) throw std::invalid_argument("shear_building: stiffnesses must be positive");
  for (const auto& d : spec.dampers)
    if (!(d.k_ve > 0.0 && d.c_ve > 0.0))
      throw std::invalid_argument("shear_building: damper coefficients must be positive");

  MatrixXd mass = MatrixXd::Zero(n, n);
  MatrixXd k_struct = MatrixXd::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    mass(s, s) = spec.masses[s];
    k_struct += spec.stiffnesses[s] * story_pattern(n, s);
  }

  MatrixXd damping = MatrixXd::Zero(n, n);
  if (spec.rayleigh) {
    // Fitted on the bare frame; damper terms are added separately below.
    const auto r = rayleigh_coefficients(mass, k_struct, *spec.rayleigh);
    damping = r.a0 * mass + r.a1 * k_struct;
  }

  MatrixXd stiffness = k_struct;
  std::vector<ParameterBinding> params;
  const double proj = spec.brace_cos * spec.brace_cos;
  const MatrixXd zero = MatrixXd::Zero(n, n);
  const VectorXd zero_l = VectorXd::Zero(n);
  for (Index s = 0; s < static_cast<Index>(spec.dampers.size()); ++s) {
    const MatrixXd pattern = proj * story_pattern(n, s);
    stiffness += spec.dampers[s].k_ve * pattern;
    damping += spec.dampers[s].c_ve * pattern;
    params.push_back({"k_ve_" + std::to_string(s + 1), zero, zero, pattern, zero_l,
                      spec.dampers[s].k_ve});
  }
  for (Index s = 0; s < static_cast<Index>(spec.dampers.size()); ++s) {
    params.push_back({"c_ve_" + std::to_string(s + 1), zero, proj * story_pattern(n, s), zero,
                      zero_l, spec.dampers[s].c_ve});
  }

  std::vector<ResponseObserver> observers;
  for (Index s = 0; s < n; ++s) {
    RowVectorXd row = RowVectorXd::Zero(n);
    row[s] = 1.0;
    if (s > 0) row[s - 1] = -1.0;
    observers.push_back({"drift_" + std::to_string(s + 1), row, RowVectorXd::Zero(n),
                         RowVectorXd::Zero(n)});
  }

  VectorXd orientation = -(mass * VectorXd::Ones(n));
  return SystemModel(std::move(mass), std::move(damping), std::move(stiffness),
                     std::move(orientation), std::move(params), std::move(observers));
}

// ---------------------------------------------------------------------------
// Parametric model descriptions (rebuildable at perturbed parameter values)

struct SdofSpec {
  double omega_n = 4.0 * std::numbers::pi;
  double zeta_n = 0.05;
};

using ModelSpec = std::variant<SdofSpec, ShearBuildingSpec>;

inline SystemModel build_model(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> SystemModel {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SdofSpec>)
          return build_sdof(s.omega_n, s.zeta_n);
        else
          return build_shear_building(s);
      },
      spec);
}

namespace detail {

// Parses "k_ve_<story>" / "c_ve_<story>"; returns 0-based story or nullopt.
inline std::optional<std::size_t> damper_index(std::string_view name, std::string_view prefix,
                                               std::size_t count) {
  if (!name.starts_with(prefix)) return std::nullopt;
  const std::string digits(name.substr(prefix.size()));
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  const std::size_t story = std::stoul(digits);
  if (story < 1 || story > count) return std::nullopt;
  return story - 1;
}

}  // namespace detail

/// Mutable handle to the named parameter inside a spec; throws if unbound.
inline double& parameter_ref(ModelSpec& spec, std::string_view name) {
  if (auto* s = std::get_if<SdofSpec>(&spec)) {
    if (name == "omega_n") return s->omega_n;
    if (name == "zeta_n") return s->zeta_n;
  } else {
    auto& b = std::get<ShearBuildingSpec>(spec);
    if (auto k = detail::damper_index(name, "k_ve_", b.dampers.size())) return b.dampers[*k].k_ve;
    if (auto c = detail::damper_index(name, "c_ve_", b.dampers.size())) return b.dampers[*c].c_ve;
  }
  throw std::invalid_argument("unknown design parameter '" + std::string(name) + "'");
}

inline double parameter_value(ModelSpec spec, std::string_view name) {
  return parameter_ref(spec, name);
}

inline ModelSpec with_parameter(ModelSpec spec, std::string_view name, double value) {
  parameter_ref(spec, name) = value;
  return spec;
}

}  // namespace fpsens
