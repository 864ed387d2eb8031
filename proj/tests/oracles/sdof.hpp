#pragma once

// Independent single-degree-of-freedom references.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

/// Continuous unit-impulse response of u'' + 2ζω u' + ω² u = δ(t).
inline double sdof_impulse(double omega, double zeta, double t) {
  if (t < 0.0) return 0.0;
  const double wd = omega * std::sqrt(1.0 - zeta * zeta);
  return std::exp(-zeta * omega * t) * std::sin(wd * t) / wd;
}

/// Stationary displacement variance under two-sided white noise of
/// intensity S (covariance 2πS δ(τ)).
inline double sdof_stationary_variance(double omega, double zeta, double S) {
  return std::numbers::pi * S / (2.0 * zeta * omega * omega * omega);
}

/// Trapezoidal-rule (average acceleration) recurrence for the scalar
/// oscillator in first-order form z = (u, v), load f at the step ends:
///   (I - dt/2 A) z_{j+1} = (I + dt/2 A) z_j + dt/2 (b_j + b_{j+1}),
/// A = [[0, 1], [-ω², -2ζω]], b = (0, f).
/// This is algebraically the same scheme as Newmark γ=1/2, β=1/4.
inline std::vector<double> trapezoidal_sdof(double omega, double zeta, double dt, const std::vector<double>& f) {
  const double a21 = -omega * omega, a22 = -2.0 * zeta * omega, h = 0.5 * dt;
  // Left matrix L = [[1, -h], [-h a21, 1 - h a22]], explicit inverse.
  const double l11 = 1.0, l12 = -h, l21 = -h * a21, l22 = 1.0 - h * a22;
  const double det = l11 * l22 - l12 * l21;
  double u = 0.0, v = 0.0, f_prev = 0.0;
  std::vector<double> out;
  out.reserve(f.size());
  for (double fj : f) {
    const double r1 = u + h * v;
    const double r2 = v + h * (a21 * u + a22 * v) + h * (f_prev + fj);
    const double un = (l22 * r1 - l12 * r2) / det;
    const double vn = (-l21 * r1 + l11 * r2) / det;
    u = un;
    v = vn;
    f_prev = fj;
    out.push_back(u);
  }
  return out;
}

}  // namespace oracle
