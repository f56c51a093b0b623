#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "csu/tensor.hpp"

namespace csu {

// On-disk feature map, all integers little-endian:
//   bytes 0-7    "CSUFMAP1"
//   byte  8      dtype, 0 = float32, 1 = float64
//   bytes 9-11   reserved, zero
//   bytes 12-27  B, C, H, W as uint32
//   bytes 28-    B*C*H*W scalars, (b, c, h, w) row-major
inline constexpr char kFeatureMapMagic[8] = {'C', 'S', 'U', 'F', 'M', 'A', 'P', '1'};
inline constexpr std::size_t kFeatureMapHeaderSize = 28;

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

using AnyFeatureMap = std::variant<FeatureMap<float>, FeatureMap<double>>;

std::vector<std::uint8_t> encode_feature_map(const AnyFeatureMap& fm);
AnyFeatureMap decode_feature_map(std::span<const std::uint8_t> bytes);

AnyFeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const std::filesystem::path& path, const AnyFeatureMap& fm);

}  // namespace csu
