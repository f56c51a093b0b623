#pragma once

#include <filesystem>
#include <string_view>

#include "csu/analysis.hpp"

namespace csu {

/// Parses a harness configuration:
///
///   {
///     "batch_size": 64, "epochs": 4, "match_energy": true,
///     "sources": [<domain>, <domain>, ...],
///     "target": <domain>,
///     "methods": [{"name": "csu", "method": "csu", "alpha": 0.3,
///                  "gate_p": 0.5, "eps": 1e-6, "fixed_intensity": 1.0}, ...]
///   }
///
/// where <domain> is
///
///   {"n_channels": 16, "n_instances": 256, "plane_dims": [8, 8], "seed": 1,
///    "mean_shift": 0.0 | [C values], "scale_shift": 1.0 | [C values],
///    "channel_mixing": "identity" | {"uniform": 5.0} | [[C x C]]}
///
/// Errors are ConfigError with the JSON path of the offending field,
/// e.g. "$.sources[1].scale_shift[3]: must be > 0".
CoverageSetup parse_harness_config(std::string_view json_text);
CoverageSetup load_harness_config(const std::filesystem::path& path);

}  // namespace csu
