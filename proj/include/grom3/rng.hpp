#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace grom3 {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Self-contained random draws so that a (seed, substream) pair pins the whole
/// draw sequence, independent of the standard library's distribution code.
/// Uniforms take 53 mantissa bits from mt19937_64, normals use the Marsaglia
/// polar method, gammas Marsaglia-Tsang with the shape+1 power boost below 1,
/// categoricals invert the CDF on a single uniform, and Dirichlet vectors are
/// gamma draws normalized in log space so shapes far below 1 cannot underflow
/// to an all-zero vector.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent deterministic stream, e.g. one per subject or per replicate.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed) ^ splitmix64(0x5be1c0de00000000ULL + stream));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Gamma(shape, 1). Do not use directly for shape << 1 (underflows); the
  /// log-space variant below is safe for all shapes.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  /// log of a Gamma(shape, 1) draw; finite even for tiny shapes where the
  /// linear-space draw would underflow to zero.
  double log_gamma_draw(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape));
    const double u = uniform();
    return std::log(u) / shape + std::log(gamma(shape + 1.0));
  }

  double beta(double a, double b) {
    const double la = log_gamma_draw(a);
    const double lb = log_gamma_draw(b);
    const double m = std::max(la, lb);
    const double ea = std::exp(la - m);
    const double eb = std::exp(lb - m);
    return ea / (ea + eb);
  }

  /// Writes a Dirichlet(alpha) draw into out (same length as alpha).
  void dirichlet(std::span<const double> alpha, std::span<double> out) {
    const std::size_t k = alpha.size();
    double max_lg = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      out[i] = log_gamma_draw(alpha[i]);
      if (out[i] > max_lg) max_lg = out[i];
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      out[i] = std::exp(out[i] - max_lg);
      sum += out[i];
    }
    for (std::size_t i = 0; i < k; ++i) out[i] /= sum;
  }

  /// 0-based index drawn by inverse CDF on a single uniform; weights need not
  /// be normalized.
  int categorical_index(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  /// 0-based index from unnormalized log weights.
  int categorical_index_from_log(std::span<const double> log_weights) {
    double m = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights) m = std::max(m, lw);
    const double u = uniform();  // drawn unconditionally to keep the stream aligned
    if (m == -std::numeric_limits<double>::infinity()) return 0;
    double total = 0.0;
    for (double lw : log_weights) total += std::exp(lw - m);
    double target = u * total;
    for (std::size_t i = 0; i + 1 < log_weights.size(); ++i) {
      target -= std::exp(log_weights[i] - m);
      if (target <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(log_weights.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace grom3
