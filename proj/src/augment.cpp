#include "csu/augment.hpp"

#include <cmath>

#include "csu/linalg.hpp"

namespace csu {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::csu: return "csu";
    case Method::dsu: return "dsu";
    case Method::mixstyle: return "mixstyle";
    case Method::padain: return "padain";
    case Method::identity: return "identity";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::csu, Method::dsu, Method::mixstyle, Method::padain, Method::identity})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected csu, dsu, mixstyle, padain or identity)");
}

void AugmentConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (!(gate_p >= 0.0 && gate_p <= 1.0)) throw ConfigError("gate_p must be in [0, 1]");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be > 0");
  if (fixed_intensity && !std::isfinite(*fixed_intensity))
    throw ConfigError("fixed intensity must be finite");
}

namespace {

AugmentedStats passthrough(const InstanceStats& stats, bool gated) {
  AugmentedStats out;
  out.beta = stats.mu;
  out.gamma = stats.sigma;
  out.gated = gated;
  return out;
}

// P = Q diag(sqrt(lambda)) Q^T of a batch covariance. The covariance is a Gram
// matrix, so any negative eigenvalue is roundoff and is zeroed.
Matrix covariance_transform(const Matrix& cov) {
  SymEig eig = sym_eig(cov);
  eig.eigenvalues = eig.eigenvalues.cwiseMax(0.0);
  return psd_sqrt(eig);
}

Vector intensities(RngStream& rng, const AugmentConfig& cfg, Index n) {
  Vector lambda = sample_beta(rng, cfg.alpha, n);
  if (cfg.fixed_intensity) lambda.setConstant(*cfg.fixed_intensity);
  return lambda;
}

}  // namespace

AugmentedStats csu_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (rng.uniform() < cfg.gate_p) return passthrough(stats, true);

  const Index batch = stats.batch();
  const Matrix p_mu = covariance_transform(stats_covariance(stats.mu).cov);
  const Matrix p_sigma = covariance_transform(stats_covariance(stats.sigma).cov);
  const Matrix noise_mu = correlated_noise(rng, p_mu, batch);
  const Matrix noise_sigma = correlated_noise(rng, p_sigma, batch);

  AugmentedStats out;
  out.lambda_used = intensities(rng, cfg, batch);
  out.beta = stats.mu + out.lambda_used.asDiagonal() * noise_mu;
  out.gamma = stats.sigma + out.lambda_used.asDiagonal() * noise_sigma;
  return out;
}

AugmentedStats dsu_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (rng.uniform() < cfg.gate_p) return passthrough(stats, true);

  const Index batch = stats.batch();
  const Index channels = stats.channels();
  const Vector scale_mu = stats_covariance(stats.mu).cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Vector scale_sigma =
      stats_covariance(stats.sigma).cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Matrix noise_mu = sample_standard_normal(rng, batch, channels);
  const Matrix noise_sigma = sample_standard_normal(rng, batch, channels);

  AugmentedStats out;
  out.beta = stats.mu + noise_mu * scale_mu.asDiagonal();
  out.gamma = stats.sigma + noise_sigma * scale_sigma.asDiagonal();
  return out;
}

AugmentedStats mixstyle_stats(const InstanceStats& stats, const AugmentConfig& cfg,
                              RngStream& rng) {
  cfg.validate();
  if (rng.uniform() < cfg.gate_p) return passthrough(stats, true);

  const Index batch = stats.batch();
  AugmentedStats out;
  out.permutation = rng.permutation(batch);
  out.lambda_used = intensities(rng, cfg, batch);
  out.beta.resize(batch, stats.channels());
  out.gamma.resize(batch, stats.channels());
  for (Index b = 0; b < batch; ++b) {
    const Index partner = out.permutation[static_cast<std::size_t>(b)];
    const double lambda = out.lambda_used(b);
    out.beta.row(b) = lambda * stats.mu.row(b) + (1.0 - lambda) * stats.mu.row(partner);
    out.gamma.row(b) = lambda * stats.sigma.row(b) + (1.0 - lambda) * stats.sigma.row(partner);
  }
  return out;
}

AugmentedStats padain_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (!(rng.uniform() < cfg.gate_p)) return passthrough(stats, true);

  const Index batch = stats.batch();
  AugmentedStats out;
  out.permutation = rng.permutation(batch);
  out.beta.resize(batch, stats.channels());
  out.gamma.resize(batch, stats.channels());
  for (Index b = 0; b < batch; ++b) {
    const Index partner = out.permutation[static_cast<std::size_t>(b)];
    out.beta.row(b) = stats.mu.row(partner);
    out.gamma.row(b) = stats.sigma.row(partner);
  }
  return out;
}

AugmentedStats augment_stats(const InstanceStats& stats, const AugmentConfig& cfg,
                             RngStream& rng) {
  switch (cfg.method) {
    case Method::csu: return csu_stats(stats, cfg, rng);
    case Method::dsu: return dsu_stats(stats, cfg, rng);
    case Method::mixstyle: return mixstyle_stats(stats, cfg, rng);
    case Method::padain: return padain_stats(stats, cfg, rng);
    case Method::identity: cfg.validate(); return passthrough(stats, false);
  }
  throw ConfigError("unhandled method");
}

template <typename Scalar>
FeatureMap<Scalar> reassemble(const FeatureMap<Scalar>& fm, const InstanceStats& stats,
                              const AugmentedStats& aug) {
  if (aug.gated) return fm;
  const Shape& s = fm.shape();
  if (stats.batch() != s.batch || stats.channels() != s.channels ||
      aug.beta.rows() != s.batch || aug.beta.cols() != s.channels ||
      aug.gamma.rows() != s.batch || aug.gamma.cols() != s.channels)
    throw DimensionError("reassemble: statistics do not match feature map " + to_string(s));

  std::vector<Scalar> out(static_cast<std::size_t>(s.numel()));
  const Index plane = s.plane_size();
  for (Index b = 0; b < s.batch; ++b) {
    for (Index c = 0; c < s.channels; ++c) {
      const double mu = stats.mu(b, c);
      const double scale = aug.gamma(b, c) / stats.sigma(b, c);
      const double shift = aug.beta(b, c);
      auto x = fm.plane_array(b, c);
      Scalar* dst = out.data() + (b * s.channels + c) * plane;
      for (Index k = 0; k < plane; ++k)
        dst[k] = static_cast<Scalar>(scale * (static_cast<double>(x(k)) - mu) + shift);
    }
  }
  return FeatureMap<Scalar>::create(s, std::move(out));
}

template <typename Scalar>
Augmented<Scalar> augment(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg, RngStream& rng) {
  cfg.validate();
  const InstanceStats stats = instance_stats(fm, cfg.eps);
  AugmentedStats aug = augment_stats(stats, cfg, rng);
  if (cfg.method == Method::identity) return {fm, std::move(aug)};
  FeatureMap<Scalar> out = reassemble(fm, stats, aug);
  return {std::move(out), std::move(aug)};
}

namespace {

template <typename Scalar>
FeatureMap<Scalar> forward_as(Method method, const FeatureMap<Scalar>& fm,
                              const AugmentConfig& cfg, RngStream& rng) {
  AugmentConfig c = cfg;
  c.method = method;
  return augment(fm, c, rng).output;
}

}  // namespace

template <typename Scalar>
FeatureMap<Scalar> csu_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                               RngStream& rng) {
  return forward_as(Method::csu, fm, cfg, rng);
}

template <typename Scalar>
FeatureMap<Scalar> dsu_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                               RngStream& rng) {
  return forward_as(Method::dsu, fm, cfg, rng);
}

template <typename Scalar>
FeatureMap<Scalar> mixstyle_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                                    RngStream& rng) {
  return forward_as(Method::mixstyle, fm, cfg, rng);
}

template <typename Scalar>
FeatureMap<Scalar> padain_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                                  RngStream& rng) {
  return forward_as(Method::padain, fm, cfg, rng);
}

#define CSU_INSTANTIATE(Scalar)                                                                  \
  template FeatureMap<Scalar> reassemble(const FeatureMap<Scalar>&, const InstanceStats&,        \
                                         const AugmentedStats&);                                 \
  template Augmented<Scalar> augment(const FeatureMap<Scalar>&, const AugmentConfig&,            \
                                     RngStream&);                                                \
  template FeatureMap<Scalar> csu_forward(const FeatureMap<Scalar>&, const AugmentConfig&,       \
                                          RngStream&);                                           \
  template FeatureMap<Scalar> dsu_forward(const FeatureMap<Scalar>&, const AugmentConfig&,       \
                                          RngStream&);                                           \
  template FeatureMap<Scalar> mixstyle_forward(const FeatureMap<Scalar>&, const AugmentConfig&,  \
                                               RngStream&);                                      \
  template FeatureMap<Scalar> padain_forward(const FeatureMap<Scalar>&, const AugmentConfig&,    \
                                             RngStream&);

CSU_INSTANTIATE(float)
CSU_INSTANTIATE(double)

#undef CSU_INSTANTIATE

}  // namespace csu
