#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csu/augment.hpp"
#include "csu/linalg.hpp"
#include "csu/random.hpp"
#include "csu/stats.hpp"

namespace csu {

struct SpectrumReport {
  Vector eigenvalues;               // descending
  Vector explained_variance_ratio;  // cumulative, one entry per eigenvalue above rank_tol
  Index rank = 0;
  std::string source_tag;
};

SpectrumReport spectrum_report(const StatsCovariance& cov, std::string source_tag = {});

/// 2-Wasserstein distance between N(mean_a, cov_a) and N(mean_b, cov_b):
///   d^2 = |m_a - m_b|^2 + tr(A + B - 2 (A^1/2 B A^1/2)^1/2).
/// Roundoff negatives down to -1e-8 * max(1, tr A + tr B) are clamped to zero.
double gaussian_frechet_distance(const Eigen::Ref<const Vector>& mean_a,
                                 const Eigen::Ref<const Matrix>& cov_a,
                                 const Eigen::Ref<const Vector>& mean_b,
                                 const Eigen::Ref<const Matrix>& cov_b);

/// Synthetic style domain: i.i.d. N(0, 1) planes, mixed across channels per
/// pixel by `channel_mixing`, then scaled and shifted per channel.
struct DomainSpec {
  Index n_channels = 1;
  Vector mean_shift;
  Vector scale_shift;
  Matrix channel_mixing;
  Index n_instances = 1;
  Index height = 1;
  Index width = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// I + strength * 1 1^T / C: one dominant shared direction across channels.
Matrix uniform_mixing(Index channels, double strength);

FeatureMap<double> generate_domain(const DomainSpec& spec, RngStream& rng);
// Uses RngStream(spec.seed).
FeatureMap<double> generate_domain(const DomainSpec& spec);

/// Convex hull of 2-D points (Andrew's monotone chain), counter-clockwise.
class ConvexHull2d {
 public:
  explicit ConvexHull2d(const Eigen::Ref<const Eigen::MatrixX2d>& points);

  /// True when `p` is inside or within `tol` of the hull.
  bool contains(const Eigen::Vector2d& p, double tol) const;

  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  double extent() const { return extent_; }

 private:
  std::vector<Eigen::Vector2d> vertices_;
  double extent_ = 0.0;
};

struct MethodRun {
  std::string name;
  AugmentConfig config;
};

struct CoverageSetup {
  std::vector<DomainSpec> sources;
  DomainSpec target;
  std::vector<MethodRun> methods;
  Index batch_size = 32;
  Index epochs = 1;
  // Rescale dsu/csu perturbations to the first csu run's mean squared norm.
  bool match_energy = true;
};

struct MethodCoverage {
  std::string name;
  Method method = Method::identity;
  double frechet_to_target = 0.0;
  double out_of_hull_fraction = 0.0;
  double correlation_deviation = 0.0;
  double perturbation_energy = 0.0;  // before energy matching
  double energy_scale = 1.0;
  Index samples = 0;
};

struct CoverageReport {
  std::vector<MethodCoverage> methods;
  Matrix source_correlation;
  SpectrumReport source_spectrum;
};

/// Pools the source domains, augments their style statistics batch by batch
/// with every method, and scores each method:
///  - frechet_to_target: distance between Gaussians fitted to the augmented
///    (mu, |gamma|) rows and to the target domain's (mu, sigma) rows;
///  - out_of_hull_fraction: augmented mu rows outside the hull of the source
///    mu rows, both projected onto the top-2 source covariance eigenvectors;
///  - correlation_deviation: mean absolute entrywise difference between the
///    correlation of the mu perturbations (beta - mu) and the source mu
///    correlation. Zero when a method produced no perturbation.
CoverageReport coverage_experiment(const CoverageSetup& setup, RngStream& rng);

}  // namespace csu
