#include "csu/random.hpp"

#include <cmath>
#include <numbers>

namespace csu {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t index) {
  return RngStream(splitmix64(splitmix64(seed) ^ (index + 1) * 0xD1B54A32D192ED03ULL));
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(angle);
  has_cached_normal_ = true;
  return r * std::cos(angle);
}

double RngStream::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw Error("gamma shape must be > 0");
  if (shape < 1.0) {
    const double u = 1.0 - uniform();
    return log_gamma_variate(shape + 1.0) + std::log(u) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return std::log(d) + std::log(v);
  }
}

double RngStream::gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw Error("uniform_index: empty range");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

std::vector<Index> RngStream::permutation(Index n) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
  }
  return perm;
}

Matrix sample_standard_normal(RngStream& rng, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw DimensionError("sample_standard_normal: rows, cols must be >= 1");
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  return out;
}

Vector sample_beta(RngStream& rng, double alpha, Index n) {
  if (!(alpha > 0.0)) throw Error("sample_beta: alpha must be > 0");
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    // lambda = G1 / (G1 + G2) = 1 / (1 + exp(log G2 - log G1)); small shapes
    // underflow G itself, the log form does not.
    const double log_g1 = rng.log_gamma_variate(alpha);
    const double log_g2 = rng.log_gamma_variate(alpha);
    out(i) = 1.0 / (1.0 + std::exp(log_g2 - log_g1));
  }
  return out;
}

Matrix correlated_noise(RngStream& rng, const Eigen::Ref<const Matrix>& p_transform, Index n) {
  if (p_transform.rows() != p_transform.cols())
    throw DimensionError("correlated_noise: transform must be square");
  return sample_standard_normal(rng, n, p_transform.rows()) * p_transform;
}

}  // namespace csu
