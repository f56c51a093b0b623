#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "csu/tensor.hpp"

namespace csu {

/// Deterministic random stream.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// All distribution transforms are implemented here rather than taken from
/// <random>, so a given seed yields the same draws with any standard library.
/// A stream is not safe to share across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for sub-task `index` (e.g. a batch) of a seeded run.
  static RngStream derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang. Shapes below 1 use the
  /// G(a) = G(a + 1) * U^(1/a) boost.
  double gamma(double shape);

  /// log of a Gamma(shape, 1) draw, stable when the draw underflows.
  double log_gamma_variate(double shape);

  /// Uniform integer in [0, n) by rejection, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<Index> permutation(Index n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// rows x cols i.i.d. N(0, 1), filled row by row.
Matrix sample_standard_normal(RngStream& rng, Index rows, Index cols);

/// n i.i.d. Beta(alpha, alpha) draws as G1 / (G1 + G2).
Vector sample_beta(RngStream& rng, double alpha, Index n);

/// n x C rows of eps * P with eps standard normal (row-vector convention).
Matrix correlated_noise(RngStream& rng, const Eigen::Ref<const Matrix>& p_transform, Index n);

}  // namespace csu
