#pragma once

// Representation of a scalar zero-mean Gaussian excitation sampled on a
// uniform grid as F_i = ψ_i · X with X standard normal of dimension d.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace fpsens {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sample times t_i = i·dt for i = 1..n. Index 0 in code is t_1.
struct TimeGrid {
  double dt = 0.02;
  Index n = 1;

  double time(Index i) const { return static_cast<double>(i + 1) * dt; }
  double duration() const { return static_cast<double>(n) * dt; }
};

inline TimeGrid make_grid(double dt, double duration) {
  if (!(dt > 0.0)) throw std::invalid_argument("grid: dt must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("grid: duration must be positive");
  const double steps = duration / dt;
  const double rounded = std::round(steps);
  if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("grid: duration / dt must be a positive integer");
  return {dt, static_cast<Index>(rounded)};
}

/// Row i is ψ_i; d = psi.cols().
class ExcitationBasis {
 public:
  ExcitationBasis(RowMatrixXd psi, TimeGrid grid) : psi_(std::move(psi)), grid_(grid) {
    if (psi_.rows() != grid_.n)
      throw std::invalid_argument("excitation basis: row count must equal the grid length");
    if (psi_.cols() < 1) throw std::invalid_argument("excitation basis: empty random dimension");
  }

  const RowMatrixXd& psi() const { return psi_; }
  const TimeGrid& grid() const { return grid_; }
  Index steps() const { return psi_.rows(); }
  Index dim() const { return psi_.cols(); }

  ExcitationBasis scaled(double factor) const { return {psi_ * factor, grid_}; }

 private:
  RowMatrixXd psi_;
  TimeGrid grid_;
};

// ---------------------------------------------------------------------------
// Spectral representation

struct SpectrumModel {
  std::function<double(double omega, double t)> density;  // S_F(ω, t)
  double omega_min = 0.0;
  double omega_max = 0.0;
  Index q = 1;
};

inline SpectrumModel white_noise_spectrum(double intensity, double omega_min, double omega_max,
                                          Index q) {
  if (!(intensity > 0.0)) throw std::invalid_argument("white noise: intensity must be positive");
  return {[intensity](double, double) { return intensity; }, omega_min, omega_max, q};
}

/// ψ_i = √(2Δω) [√S(ω_k,t_i) cos ω_k t_i]_{k=1..q} ++ [√S(ω_k,t_i) sin ω_k t_i]_{k=1..q}
/// with ω_k = ω_min + (k - 1/2)Δω.
inline ExcitationBasis spectral_basis(const SpectrumModel& spec, const TimeGrid& grid) {
  if (!spec.density) throw std::invalid_argument("spectral basis: missing spectrum");
  if (spec.q < 1) throw std::invalid_argument("spectral basis: q must be at least 1");
  if (!(spec.omega_min >= 0.0 && spec.omega_min < spec.omega_max))
    throw std::invalid_argument("spectral basis: require 0 <= omega_min < omega_max");
  const double nyquist = std::numbers::pi / grid.dt;
  if (spec.omega_max > nyquist * (1.0 + 1e-12))
    throw std::invalid_argument("spectral basis: omega_max exceeds the Nyquist frequency pi/dt");

  const Index q = spec.q;
  const double dw = (spec.omega_max - spec.omega_min) / static_cast<double>(q);
  RowMatrixXd psi(grid.n, 2 * q);
  for (Index i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    for (Index k = 0; k < q; ++k) {
      const double w = spec.omega_min + (static_cast<double>(k) + 0.5) * dw;
      const double s = spec.density(w, t);
      if (!(s >= 0.0)) throw std::invalid_argument("spectral basis: negative spectral density");
      const double amp = std::sqrt(2.0 * dw * s);
      psi(i, k) = amp * std::cos(w * t);
      psi(i, q + k) = amp * std::sin(w * t);
    }
  }
  return {std::move(psi), grid};
}

// ---------------------------------------------------------------------------
// Orthogonal (eigen) decomposition of the sampled covariance

struct CorrelationModel {
  std::function<double(double t, double tau)> correlation;  // R_F(t, τ) = E[F(t) F(t+τ)]
};

inline Eigen::MatrixXd covariance_matrix(const CorrelationModel& corr, const TimeGrid& grid) {
  Eigen::MatrixXd cov(grid.n, grid.n);
  for (Index i = 0; i < grid.n; ++i) {
    const double ti = grid.time(i);
    for (Index j = i; j < grid.n; ++j) {
      const double v = corr.correlation(ti, grid.time(j) - ti);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

/// ψ = Ψ Λ^{1/2}, columns ordered by decreasing eigenvalue. Eigenvalues below
/// eig_clip·λ_max are dropped; one below -eig_clip·λ_max rejects the model.
inline ExcitationBasis orthogonal_basis(const CorrelationModel& corr, const TimeGrid& grid,
                                        double eig_clip = 1e-12) {
  if (!corr.correlation) throw std::invalid_argument("orthogonal basis: missing correlation");
  if (!(eig_clip >= 0.0)) throw std::invalid_argument("orthogonal basis: eig_clip must be >= 0");
  const Eigen::MatrixXd cov = covariance_matrix(corr, grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("orthogonal basis: eigen-decomposition failed");

  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const double lmax = lambda.maxCoeff();
  if (!(lmax > 0.0)) throw std::invalid_argument("orthogonal basis: covariance is identically zero");
  if (lambda.minCoeff() < -eig_clip * lmax)
    throw std::invalid_argument("orthogonal basis: covariance has a significantly negative eigenvalue");

  Index kept = 0;
  for (Index k = 0; k < lambda.size(); ++k)
    if (lambda[k] > eig_clip * lmax) ++kept;
  RowMatrixXd psi(grid.n, kept);
  Index col = 0;
  for (Index k = lambda.size() - 1; k >= 0; --k) {
    if (!(lambda[k] > eig_clip * lmax)) continue;
    psi.col(col++) = eig.eigenvectors().col(k) * std::sqrt(lambda[k]);
  }
  return {std::move(psi), grid};
}

// ---------------------------------------------------------------------------
// Uniformly modulated Kanai-Tajimi-type ground acceleration

struct ModulatedCorrelationParams {
  double S0 = 0.01;        // [m^2/s^3]
  double omega_g = 14.0;   // [rad/s]
  double zeta_g = 0.6;
  double t_a = 8.0;        // [s]
  double t_b = 20.0;       // [s]
  double t_c = 30.0;       // [s]
  double lambda = 0.1572;  // [1/s]

  void validate() const {
    if (!(S0 > 0.0)) throw std::invalid_argument("modulated correlation: S0 must be positive");
    if (!(omega_g > 0.0)) throw std::invalid_argument("modulated correlation: omega_g must be positive");
    if (!(zeta_g > 0.0 && zeta_g < 1.0))
      throw std::invalid_argument("modulated correlation: zeta_g must lie in (0, 1)");
    if (!(t_a > 0.0 && t_a < t_b && t_b < t_c))
      throw std::invalid_argument("modulated correlation: require 0 < t_a < t_b < t_c");
    if (!(lambda > 0.0)) throw std::invalid_argument("modulated correlation: lambda must be positive");
  }

  double omega_d() const { return omega_g * std::sqrt(1.0 - zeta_g * zeta_g); }
  double mu1() const { return omega_g * (1.0 + 4.0 * zeta_g * zeta_g) / zeta_g; }
  double mu2() const {
    return omega_g * (1.0 - 4.0 * zeta_g * zeta_g) / std::sqrt(1.0 - zeta_g * zeta_g);
  }
};

/// Envelope g(t): (t/t_a)² rising, 1 on the plateau, exponential decay after
/// t_b, zero outside [0, t_c].
inline double modulation(const ModulatedCorrelationParams& p, double t) {
  if (t < 0.0 || t > p.t_c) return 0.0;
  if (t <= p.t_a) return (t / p.t_a) * (t / p.t_a);
  if (t <= p.t_b) return 1.0;
  return std::exp(-p.lambda * (t - p.t_b));
}

/// Stationary correlation R₀(τ) of the unmodulated process.
inline double stationary_correlation(const ModulatedCorrelationParams& p, double tau) {
  const double a = std::abs(tau);
  const double wd = p.omega_d();
  return 0.5 * std::numbers::pi * p.S0 * std::exp(-p.zeta_g * p.omega_g * a) *
         (p.mu1() * std::cos(wd * tau) + p.mu2() * std::sin(wd * a));
}

inline CorrelationModel modulated_correlation(const ModulatedCorrelationParams& p) {
  p.validate();
  return {[p](double t, double tau) {
    return modulation(p, t) * modulation(p, t + tau) * stationary_correlation(p, tau);
  }};
}

}  // namespace fpsens
