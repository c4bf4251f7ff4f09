#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace grom3 {

/// Streaming log-sum-exp accumulator; -inf terms are absorbed correctly.
class LogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
  LogSumExp acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Smallest value fed to log() when a probability can be exactly zero
/// (Dirichlet draws underflow for shapes far below 1).
inline constexpr double kLogClamp = 1e-300;

inline double safe_log(double p) { return std::log(p < kLogClamp ? kLogClamp : p); }

}  // namespace grom3
