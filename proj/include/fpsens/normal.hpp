#pragma once

// Standard normal distribution: density, CDF, tail probability and their
// inverses, with the upper tail evaluated in a way that stays relatively
// accurate out to reliability indices of 8 and beyond.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fpsens::normal {

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343818684759;
inline constexpr double log_sqrt_2pi = 0.9189385332046727417803297364056176398614;

inline double pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

inline double log_pdf(double x) { return -0.5 * x * x - log_sqrt_2pi; }

/// Phi(x).
inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Phi(-x), through erfc so small tails keep full relative precision.
inline double tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// log Phi(-x). Falls back to the asymptotic Mills-ratio series once erfc
/// underflows.
inline double log_tail(double x) {
  if (x < 35.0) return std::log(tail(x));
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
  return log_pdf(x) - std::log(x) + std::log(series);
}

namespace detail {

// Acklam's rational approximation to the inverse CDF; relative error ~1e-9,
// used only as the starting point for the polishing steps below.
inline double acklam_inverse_cdf(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

/// Solves log Phi(-t) = log_p for t. Newton steps in log-probability inside a
/// bisection bracket; converges to |residual| <= 1e-12.
inline double inverse_tail_log(double log_p) {
  if (!(log_p < 0.0)) {
    if (log_p == 0.0) return -std::numeric_limits<double>::infinity();
    throw std::domain_error("inverse_tail_log: log-probability must be negative");
  }
  double t;
  if (log_p > -700.0) {
    t = -detail::acklam_inverse_cdf(std::exp(log_p));
  } else {
    // Leading-order asymptote of the tail: log p ~ -t^2/2 - log(t sqrt(2 pi)).
    t = std::sqrt(-2.0 * log_p);
    t = std::sqrt(-2.0 * (log_p + std::log(t) + log_sqrt_2pi));
  }

  double lo = -40.0;
  double hi = 40.0;
  while (log_tail(hi) > log_p) hi *= 2.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double lt = log_tail(t);
    const double f = lt - log_p;
    if (std::abs(f) <= 1e-12) break;
    // log_tail is strictly decreasing.
    if (f > 0.0) lo = t; else hi = t;
    const double slope = -std::exp(log_pdf(t) - lt);
    double next = t - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

/// t with Phi(-t) = p.
inline double inverse_tail(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_tail: p must lie in (0, 1)");
  return inverse_tail_log(std::log(p));
}

/// Phi^{-1}(p).
inline double inverse_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_cdf: p must lie in (0, 1)");
  return -inverse_tail(p);
}

/// Maps v in (0, 1) to a draw of a standard normal truncated to [beta, inf):
/// solves Phi(-t) = v * Phi(-beta) in the log domain.
inline double truncated_tail_quantile(double beta, double v) {
  return inverse_tail_log(std::log(v) + log_tail(beta));
}

}  // namespace fpsens::normal
