#pragma once

#include "csu/linalg.hpp"
#include "csu/tensor.hpp"

namespace csu {

inline constexpr double kDefaultEps = 1e-6;

/// Per-instance, per-channel style statistics, each B x C.
///
/// `sigma` is the population standard deviation over the H*W plane plus `eps`,
/// so every entry is at least `eps`.
struct InstanceStats {
  Matrix mu;
  Matrix sigma;
  double eps = kDefaultEps;

  Index batch() const { return mu.rows(); }
  Index channels() const { return mu.cols(); }
};

/// Channel-by-channel covariance of a B x C statistics matrix over the batch.
struct StatsCovariance {
  Matrix cov;     // C x C, exactly symmetric
  Vector center;  // column means
  Index batch_size = 0;

  Index channels() const { return cov.rows(); }
};

template <typename Scalar>
InstanceStats instance_stats(const FeatureMap<Scalar>& fm, double eps = kDefaultEps);

/// Population (1/B) covariance; symmetrized as (A + A^T) / 2. B = 1 gives zero.
StatsCovariance stats_covariance(const Eigen::Ref<const Matrix>& stats);

/// Normalizes to a correlation matrix. Channels whose variance is at or below
/// the rank tolerance get a unit row and column instead of NaN.
Matrix correlation_from_covariance(const Eigen::Ref<const Matrix>& cov);
Matrix correlation_from_covariance(const StatsCovariance& cov);

struct GaussianLogDensity {
  double log_density = 0.0;
  // |(I - Pi)(x - center)|^2 where Pi projects onto the support.
  double off_support_residual = 0.0;
  Index rank = 0;
};

/// Log-density of the degenerate normal N(center, cov) restricted to the
/// rank-k eigenspace of `cov`:
///   -(k/2) log(2 pi) - (1/2) log det*(cov) - (1/2) d^T cov^+ d,   d = x - center.
/// `eig` must be the eigendecomposition of `cov.cov`. Throws DegenerateError
/// when the support is empty.
GaussianLogDensity degenerate_gaussian_logpdf(const Eigen::Ref<const Vector>& x,
                                              const StatsCovariance& cov, const SymEig& eig);

}  // namespace csu
