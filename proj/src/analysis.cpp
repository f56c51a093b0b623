#include "csu/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace csu {

SpectrumReport spectrum_report(const StatsCovariance& cov, std::string source_tag) {
  const SymEig eig = sym_eig(cov.cov);
  SpectrumReport out;
  out.source_tag = std::move(source_tag);
  out.eigenvalues = eig.eigenvalues;
  out.rank = numerical_rank(eig);
  out.explained_variance_ratio.resize(out.rank);
  if (out.rank == 0) return out;
  const double total = eig.eigenvalues.head(out.rank).sum();
  double running = 0.0;
  for (Index i = 0; i < out.rank; ++i) {
    running += eig.eigenvalues(i);
    out.explained_variance_ratio(i) = running / total;
  }
  out.explained_variance_ratio(out.rank - 1) = 1.0;
  return out;
}

namespace {

// Eigenvalues of a matrix that is PSD up to roundoff. Negatives within
// 1e-8 * (1 + lambda_max) are accepted, anything beyond is an error. Values at
// or below rank_tol are set to exactly zero: their square roots would
// otherwise inflate roundoff from eps to sqrt(eps).
SymEig roundoff_psd_eig(const Matrix& m, const char* what) {
  SymEig eig = sym_eig(0.5 * (m + m.transpose()));
  const double floor = -1e-8 * (1.0 + eig.eigenvalues.cwiseAbs().maxCoeff());
  if (eig.eigenvalues.minCoeff() < floor)
    throw NotPsdError(std::string("gaussian_frechet_distance: ") + what + " is not PSD");
  const double tol = eig.rank_tol;
  eig.eigenvalues = eig.eigenvalues.unaryExpr([tol](double v) { return v > tol ? v : 0.0; });
  return eig;
}

}  // namespace

double gaussian_frechet_distance(const Eigen::Ref<const Vector>& mean_a,
                                 const Eigen::Ref<const Matrix>& cov_a,
                                 const Eigen::Ref<const Vector>& mean_b,
                                 const Eigen::Ref<const Matrix>& cov_b) {
  const Index c = mean_a.size();
  if (mean_b.size() != c || cov_a.rows() != c || cov_a.cols() != c || cov_b.rows() != c ||
      cov_b.cols() != c)
    throw DimensionError("gaussian_frechet_distance: shape mismatch");

  const Matrix root_a = psd_sqrt(roundoff_psd_eig(cov_a, "cov_a"));
  roundoff_psd_eig(cov_b, "cov_b");
  const Matrix inner = root_a * cov_b * root_a;
  // tr (A^1/2 B A^1/2)^1/2 is the sum of the square roots of its eigenvalues.
  const double cross = roundoff_psd_eig(inner, "cross term").eigenvalues.cwiseSqrt().sum();

  const double traces = cov_a.trace() + cov_b.trace();
  const double d2 = (mean_a - mean_b).squaredNorm() + traces - 2.0 * cross;
  if (d2 >= 0.0) return std::sqrt(d2);
  if (d2 >= -1e-8 * std::max(1.0, traces)) return 0.0;
  throw Error("gaussian_frechet_distance: squared distance " + std::to_string(d2) +
              " below roundoff tolerance");
}

void DomainSpec::validate() const {
  if (n_channels < 1) throw ConfigError("n_channels must be >= 1");
  if (n_instances < 1) throw ConfigError("n_instances must be >= 1");
  if (height < 1 || width < 1) throw ConfigError("plane_dims must be >= 1");
  if (mean_shift.size() != n_channels)
    throw ConfigError("mean_shift must have n_channels entries");
  if (scale_shift.size() != n_channels)
    throw ConfigError("scale_shift must have n_channels entries");
  if (!mean_shift.allFinite()) throw ConfigError("mean_shift must be finite");
  if (!scale_shift.allFinite() || (scale_shift.array() <= 0.0).any())
    throw ConfigError("scale_shift entries must be > 0");
  if (channel_mixing.rows() != n_channels || channel_mixing.cols() != n_channels)
    throw ConfigError("channel_mixing must be n_channels x n_channels");
  if (!channel_mixing.allFinite()) throw ConfigError("channel_mixing must be finite");
}

Matrix uniform_mixing(Index channels, double strength) {
  return Matrix::Identity(channels, channels) +
         Matrix::Constant(channels, channels, strength / static_cast<double>(channels));
}

FeatureMap<double> generate_domain(const DomainSpec& spec, RngStream& rng) {
  spec.validate();
  const Index c = spec.n_channels;
  const Index plane = spec.height * spec.width;
  const Shape shape{spec.n_instances, c, spec.height, spec.width};
  std::vector<double> data(static_cast<std::size_t>(shape.numel()));
  for (Index b = 0; b < spec.n_instances; ++b) {
    const Matrix base = sample_standard_normal(rng, c, plane);
    const Matrix mixed = spec.channel_mixing * base;
    double* dst = data.data() + b * c * plane;
    for (Index ch = 0; ch < c; ++ch)
      for (Index k = 0; k < plane; ++k)
        dst[ch * plane + k] = spec.scale_shift(ch) * mixed(ch, k) + spec.mean_shift(ch);
  }
  return FeatureMap<double>::create(shape, std::move(data));
}

FeatureMap<double> generate_domain(const DomainSpec& spec) {
  RngStream rng(spec.seed);
  return generate_domain(spec, rng);
}

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

ConvexHull2d::ConvexHull2d(const Eigen::Ref<const Eigen::MatrixX2d>& points) {
  if (points.rows() < 1) throw DimensionError("ConvexHull2d: no points");
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(points.rows()));
  for (Index i = 0; i < points.rows(); ++i) pts.emplace_back(points(i, 0), points(i, 1));
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const Eigen::Vector2d lo = points.colwise().minCoeff();
  const Eigen::Vector2d hi = points.colwise().maxCoeff();
  extent_ = (hi - lo).norm();

  if (pts.size() < 3) {
    vertices_ = pts;
    return;
  }
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  vertices_ = std::move(hull);
}

bool ConvexHull2d::contains(const Eigen::Vector2d& p, double tol) const {
  const std::size_t n = vertices_.size();
  if (n == 1) return (p - vertices_[0]).norm() <= tol;
  if (n == 2) return segment_distance(p, vertices_[0], vertices_[1]) <= tol;
  // Collinear inputs leave fewer than three hull vertices after the chain.
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = vertices_[i];
    const Eigen::Vector2d& b = vertices_[(i + 1) % n];
    const double edge = (b - a).norm();
    if (cross(a, b, p) < -tol * edge) return false;
  }
  return true;
}

namespace {

struct StatRows {
  Matrix mu;
  Matrix sigma;
};

StatRows stats_rows(const FeatureMap<double>& fm, double eps) {
  InstanceStats s = instance_stats(fm, eps);
  return {std::move(s.mu), std::move(s.sigma)};
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

struct Perturbations {
  Matrix base_mu;
  Matrix base_sigma;
  Matrix delta_mu;
  Matrix delta_sigma;
};

double mean_squared_norm(const Perturbations& p) {
  if (p.delta_mu.rows() == 0) return 0.0;
  return (p.delta_mu.squaredNorm() + p.delta_sigma.squaredNorm()) /
         static_cast<double>(p.delta_mu.rows());
}

}  // namespace

CoverageReport coverage_experiment(const CoverageSetup& setup, RngStream& rng) {
  if (setup.sources.size() < 2) throw ConfigError("coverage_experiment needs >= 2 source domains");
  if (setup.methods.empty()) throw ConfigError("coverage_experiment needs at least one method");
  if (setup.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (setup.epochs < 1) throw ConfigError("epochs must be >= 1");
  const Index channels = setup.sources.front().n_channels;
  for (const auto& s : setup.sources)
    if (s.n_channels != channels) throw ConfigError("source domains disagree on n_channels");
  if (setup.target.n_channels != channels)
    throw ConfigError("target domain n_channels differs from the sources");
  for (const auto& m : setup.methods) m.config.validate();

  const double eps = setup.methods.front().config.eps;

  // Pooled source statistics, one row per instance.
  std::vector<Matrix> mus;
  std::vector<Matrix> sigmas;
  Index total = 0;
  for (const auto& spec : setup.sources) {
    StatRows r = stats_rows(generate_domain(spec), eps);
    total += r.mu.rows();
    mus.push_back(std::move(r.mu));
    sigmas.push_back(std::move(r.sigma));
  }
  Matrix source_mu(total, channels);
  Matrix source_sigma(total, channels);
  for (std::size_t i = 0, row = 0; i < mus.size(); ++i) {
    source_mu.middleRows(static_cast<Index>(row), mus[i].rows()) = mus[i];
    source_sigma.middleRows(static_cast<Index>(row), sigmas[i].rows()) = sigmas[i];
    row += static_cast<std::size_t>(mus[i].rows());
  }

  const StatRows target = stats_rows(generate_domain(setup.target), eps);
  const StatsCovariance target_fit = stats_covariance(hstack(target.mu, target.sigma));

  const StatsCovariance source_cov = stats_covariance(source_mu);
  CoverageReport report;
  report.source_correlation = correlation_from_covariance(source_cov);
  report.source_spectrum = spectrum_report(source_cov, "source mu");

  // Hull of the source mu rows in the plane of the top-2 eigenvectors.
  const SymEig source_eig = sym_eig(source_cov.cov);
  Eigen::MatrixX2d basis = Eigen::MatrixX2d::Zero(channels, 2);
  basis.leftCols(std::min<Index>(2, channels)) =
      source_eig.eigenvectors.leftCols(std::min<Index>(2, channels));
  auto project = [&](const Matrix& rows) -> Eigen::MatrixX2d {
    return (rows.rowwise() - source_cov.center.transpose()) * basis;
  };
  const ConvexHull2d hull(project(source_mu));
  const double hull_tol = 1e-9 * (1.0 + hull.extent());

  // Shared batch schedule; every method sees the same batches.
  std::vector<std::vector<Index>> batches;
  for (Index e = 0; e < setup.epochs; ++e) {
    const std::vector<Index> order = rng.permutation(total);
    for (Index start = 0; start < total; start += setup.batch_size) {
      const Index end = std::min(total, start + setup.batch_size);
      batches.emplace_back(order.begin() + start, order.begin() + end);
    }
  }
  std::vector<std::uint64_t> method_seeds;
  for (std::size_t m = 0; m < setup.methods.size(); ++m) method_seeds.push_back(rng.next_u64());

  std::vector<Perturbations> perturbs;
  for (std::size_t m = 0; m < setup.methods.size(); ++m) {
    const AugmentConfig& cfg = setup.methods[m].config;
    RngStream method_rng(method_seeds[m]);
    Perturbations p;
    p.base_mu.resize(total * setup.epochs, channels);
    p.base_sigma.resize(total * setup.epochs, channels);
    p.delta_mu.resize(total * setup.epochs, channels);
    p.delta_sigma.resize(total * setup.epochs, channels);
    Index row = 0;
    for (const auto& batch : batches) {
      InstanceStats stats;
      stats.mu = gather_rows(source_mu, batch);
      stats.sigma = gather_rows(source_sigma, batch);
      stats.eps = cfg.eps;
      const AugmentedStats aug = augment_stats(stats, cfg, method_rng);
      const Index n = stats.batch();
      p.base_mu.middleRows(row, n) = stats.mu;
      p.base_sigma.middleRows(row, n) = stats.sigma;
      p.delta_mu.middleRows(row, n) = aug.beta - stats.mu;
      p.delta_sigma.middleRows(row, n) = aug.gamma - stats.sigma;
      row += n;
    }
    perturbs.push_back(std::move(p));
  }

  double reference_energy = -1.0;
  for (std::size_t m = 0; m < setup.methods.size(); ++m) {
    if (setup.methods[m].config.method == Method::csu) {
      reference_energy = mean_squared_norm(perturbs[m]);
      break;
    }
  }

  for (std::size_t m = 0; m < setup.methods.size(); ++m) {
    const MethodRun& run = setup.methods[m];
    const Perturbations& p = perturbs[m];
    MethodCoverage cov;
    cov.name = run.name;
    cov.method = run.config.method;
    cov.samples = p.delta_mu.rows();
    cov.perturbation_energy = mean_squared_norm(p);
    const bool matched = run.config.method == Method::csu || run.config.method == Method::dsu;
    if (setup.match_energy && matched && reference_energy > 0.0 && cov.perturbation_energy > 0.0)
      cov.energy_scale = std::sqrt(reference_energy / cov.perturbation_energy);

    const Matrix aug_mu = p.base_mu + cov.energy_scale * p.delta_mu;
    const Matrix aug_sigma = (p.base_sigma + cov.energy_scale * p.delta_sigma).cwiseAbs();

    const StatsCovariance aug_fit = stats_covariance(hstack(aug_mu, aug_sigma));
    cov.frechet_to_target =
        gaussian_frechet_distance(aug_fit.center, aug_fit.cov, target_fit.center, target_fit.cov);

    const Eigen::MatrixX2d projected = project(aug_mu);
    Index outside = 0;
    for (Index i = 0; i < projected.rows(); ++i)
      if (!hull.contains(projected.row(i).transpose(), hull_tol)) ++outside;
    cov.out_of_hull_fraction = static_cast<double>(outside) / static_cast<double>(cov.samples);

    if (p.delta_mu.squaredNorm() > 0.0) {
      const Matrix corr = correlation_from_covariance(stats_covariance(p.delta_mu));
      cov.correlation_deviation =
          (corr - report.source_correlation).cwiseAbs().mean();
    }
    report.methods.push_back(std::move(cov));
  }
  return report;
}

}  // namespace csu
