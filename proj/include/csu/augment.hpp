#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csu/random.hpp"
#include "csu/stats.hpp"
#include "csu/tensor.hpp"

namespace csu {

enum class Method { csu, dsu, mixstyle, padain, identity };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// Augmenter settings.
///
/// gate_p has the meaning of the reference pseudo-code for csu, dsu and
/// mixstyle: a uniform draw u < gate_p *skips* augmentation, so the batch is
/// perturbed with probability 1 - gate_p. For padain the permutation is
/// *applied* when u < gate_p.
struct AugmentConfig {
  Method method = Method::csu;
  double alpha = 0.3;
  double gate_p = 0.5;
  double eps = kDefaultEps;
  std::uint64_t seed = 0;
  // Replaces the Beta(alpha, alpha) intensity draw with a constant. The Beta
  // draws are still consumed so the rest of the stream is unchanged.
  std::optional<double> fixed_intensity;

  void validate() const;
};

struct AugmentedStats {
  Matrix beta;   // augmented means, B x C
  Matrix gamma;  // augmented standard deviations, B x C (not clamped)
  Vector lambda_used;  // per-instance intensities; empty when the method has none
  std::vector<Index> permutation;  // mixstyle / padain partner indices
  bool gated = false;  // batch passed through unchanged
};

AugmentedStats csu_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng);
AugmentedStats dsu_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng);
AugmentedStats mixstyle_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng);
AugmentedStats padain_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng);

/// Dispatches on cfg.method. identity returns the input statistics, ungated.
AugmentedStats augment_stats(const InstanceStats& stats, const AugmentConfig& cfg, RngStream& rng);

/// out = gamma * (x - mu) / sigma + beta, per (b, c) plane. A gated result
/// returns `fm` untouched.
template <typename Scalar>
FeatureMap<Scalar> reassemble(const FeatureMap<Scalar>& fm, const InstanceStats& stats,
                              const AugmentedStats& aug);

template <typename Scalar>
struct Augmented {
  FeatureMap<Scalar> output;
  AugmentedStats stats;
};

/// Full forward pass for cfg.method: statistics, perturbation, reassembly.
template <typename Scalar>
Augmented<Scalar> augment(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg, RngStream& rng);

template <typename Scalar>
FeatureMap<Scalar> csu_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                               RngStream& rng);
template <typename Scalar>
FeatureMap<Scalar> dsu_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                               RngStream& rng);
template <typename Scalar>
FeatureMap<Scalar> mixstyle_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                                    RngStream& rng);
template <typename Scalar>
FeatureMap<Scalar> padain_forward(const FeatureMap<Scalar>& fm, const AugmentConfig& cfg,
                                  RngStream& rng);

}  // namespace csu
