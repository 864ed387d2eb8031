#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace fpsens {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

/// Welford accumulator for the running mean of Monte Carlo summands and the
/// coefficient of variation of that mean.
class RunningMoments {
 public:
  void add(double v) {
    ++count_;
    if (v != 0.0) all_zero_ = false;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  bool all_zero() const { return all_zero_; }

  /// Unbiased sample variance (divisor count - 1); NaN below two samples.
  double sample_variance() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return m2_ / static_cast<double>(count_ - 1);
  }

  /// sd / (|mean| sqrt(count)). +inf when |mean| < 1e-300.
  double cov() const {
    if (count_ < 2) return std::numeric_limits<double>::infinity();
    if (std::abs(mean_) < 1e-300) return std::numeric_limits<double>::infinity();
    return std::sqrt(sample_variance()) / (std::abs(mean_) * std::sqrt(static_cast<double>(count_)));
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  bool all_zero_ = true;
};

}  // namespace fpsens
