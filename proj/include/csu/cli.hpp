#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "csu/augment.hpp"
#include "csu/report.hpp"

namespace csu::cli {

struct AugmentOptions {
  std::string input;
  std::string output;
  AugmentConfig config;
  std::optional<Index> batch_size;  // whole file when unset
};

struct AnalyzeOptions {
  std::string input;
  std::string report;
  StatKind stat = StatKind::mu;
  ReportFormat format = ReportFormat::csv;
  double eps = kDefaultEps;
};

struct HarnessOptions {
  std::string config;
  std::string report;
  std::uint64_t seed = 0;
  ReportFormat format = ReportFormat::csv;
};

// Each command returns the process exit code: 0 on success, 1 on any I/O or
// validation failure (message on `err`).
int cmd_augment(const AugmentOptions& opts, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_harness(const HarnessOptions& opts, std::ostream& out, std::ostream& err);

/// Parses `args` (args[0] is the program name) and runs the chosen subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csu::cli
