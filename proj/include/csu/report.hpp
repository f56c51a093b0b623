#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include "csu/analysis.hpp"
#include "csu/io.hpp"
#include "csu/stats.hpp"

namespace csu {

enum class StatKind { mu, sigma };
enum class ReportFormat { csv, json };

StatKind parse_stat_kind(std::string_view name);
ReportFormat parse_report_format(std::string_view name);

/// Covariance, correlation and spectrum of one style statistic over a batch.
struct AnalysisReport {
  StatKind stat = StatKind::mu;
  Index batch = 0;
  Index channels = 0;
  StatsCovariance covariance;
  Matrix correlation;
  SpectrumReport spectrum;
};

AnalysisReport analyze_feature_map(const AnyFeatureMap& fm, StatKind stat, double eps);

// CSV layout (one record per line, fixed order):
//   stat,<mu|sigma>
//   batch,<B>
//   channels,<C>
//   rank,<k>
//   eigenvalues,<C values>
//   explained_variance_ratio,<k values>
//   covariance            followed by C rows of C values
//   correlation           followed by C rows of C values
// JSON carries the same keys in the same order.
void write_analysis_report(std::ostream& os, const AnalysisReport& report, ReportFormat format);

// CSV header:
//   name,method,frechet_to_target,out_of_hull_fraction,correlation_deviation,
//   perturbation_energy,energy_scale,samples
// JSON: {"methods": [...same keys...], "source_spectrum": {...}}
void write_coverage_report(std::ostream& os, const CoverageReport& report, ReportFormat format);

/// Shortest decimal string that round-trips to `x`.
std::string format_double(double x);

}  // namespace csu
