#include "csu/stats.hpp"

#include <cmath>
#include <numbers>

namespace csu {

template <typename Scalar>
InstanceStats instance_stats(const FeatureMap<Scalar>& fm, double eps) {
  if (!(eps > 0.0)) throw ConfigError("instance_stats: eps must be > 0");
  const Shape& s = fm.shape();
  const double n = static_cast<double>(s.plane_size());
  InstanceStats out;
  out.eps = eps;
  out.mu.resize(s.batch, s.channels);
  out.sigma.resize(s.batch, s.channels);
  for (Index b = 0; b < s.batch; ++b) {
    for (Index c = 0; c < s.channels; ++c) {
      const Eigen::ArrayXd plane = fm.plane_array(b, c).template cast<double>();
      const double mean = plane.sum() / n;
      const double var = (plane - mean).square().sum() / n;
      out.mu(b, c) = mean;
      out.sigma(b, c) = std::sqrt(var) + eps;
    }
  }
  return out;
}

template InstanceStats instance_stats(const FeatureMap<float>&, double);
template InstanceStats instance_stats(const FeatureMap<double>&, double);

StatsCovariance stats_covariance(const Eigen::Ref<const Matrix>& stats) {
  if (stats.rows() < 1 || stats.cols() < 1)
    throw DimensionError("stats_covariance: empty statistics matrix");
  StatsCovariance out;
  out.batch_size = stats.rows();
  out.center = stats.colwise().mean().transpose();
  const Matrix centered = stats.rowwise() - out.center.transpose();
  const Matrix gram = (centered.transpose() * centered) / static_cast<double>(stats.rows());
  out.cov = 0.5 * (gram + gram.transpose());
  return out;
}

Matrix correlation_from_covariance(const Eigen::Ref<const Matrix>& cov) {
  const Index n = cov.rows();
  if (cov.cols() != n) throw DimensionError("correlation_from_covariance: matrix not square");
  const Vector diag = cov.diagonal();
  const double tol = rank_tolerance(n, diag.cwiseAbs().maxCoeff());
  Matrix corr = Matrix::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    if (diag(j) <= tol) continue;
    for (Index i = 0; i < n; ++i) {
      if (i == j || diag(i) <= tol) continue;
      corr(i, j) = cov(i, j) / std::sqrt(diag(i) * diag(j));
    }
  }
  return corr;
}

Matrix correlation_from_covariance(const StatsCovariance& cov) {
  return correlation_from_covariance(cov.cov);
}

GaussianLogDensity degenerate_gaussian_logpdf(const Eigen::Ref<const Vector>& x,
                                              const StatsCovariance& cov, const SymEig& eig) {
  const Index c = cov.channels();
  if (x.size() != c || eig.size() != c)
    throw DimensionError("degenerate_gaussian_logpdf: dimension mismatch");
  const PseudoLogDet pdet = pseudo_det_log(eig);
  if (pdet.rank == 0) throw DegenerateError("degenerate distribution with empty support");

  const Vector d = x - cov.center;
  double quad = 0.0;
  Vector projected = Vector::Zero(c);
  for (Index i = 0; i < c; ++i) {
    const double lambda = eig.eigenvalues(i);
    if (lambda <= eig.rank_tol) continue;
    const double coord = eig.eigenvectors.col(i).dot(d);
    quad += coord * coord / lambda;
    projected += coord * eig.eigenvectors.col(i);
  }

  GaussianLogDensity out;
  out.rank = pdet.rank;
  out.off_support_residual = (d - projected).squaredNorm();
  out.log_density = -0.5 * static_cast<double>(pdet.rank) * std::log(2.0 * std::numbers::pi) -
                    0.5 * pdet.log_det - 0.5 * quad;
  return out;
}

}  // namespace csu
