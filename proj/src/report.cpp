#include "csu/report.hpp"

#include <charconv>
#include <variant>

#include <json.hpp>

namespace csu {

using ordered_json = nlohmann::ordered_json;

StatKind parse_stat_kind(std::string_view name) {
  if (name == "mu") return StatKind::mu;
  if (name == "sigma") return StatKind::sigma;
  throw ConfigError("unknown stat '" + std::string(name) + "' (expected mu or sigma)");
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

AnalysisReport analyze_feature_map(const AnyFeatureMap& fm, StatKind stat, double eps) {
  const InstanceStats stats = std::visit([&](const auto& m) { return instance_stats(m, eps); }, fm);
  AnalysisReport out;
  out.stat = stat;
  out.batch = stats.batch();
  out.channels = stats.channels();
  out.covariance = stats_covariance(stat == StatKind::mu ? stats.mu : stats.sigma);
  out.correlation = correlation_from_covariance(out.covariance);
  out.spectrum = spectrum_report(out.covariance, stat == StatKind::mu ? "mu" : "sigma");
  return out;
}

namespace {

void csv_values(std::ostream& os, const Eigen::Ref<const Vector>& v) {
  for (Index i = 0; i < v.size(); ++i) os << ',' << format_double(v(i));
}

void csv_matrix(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

ordered_json json_vector(const Eigen::Ref<const Vector>& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json json_matrix(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(json_vector(m.row(i).transpose()));
  return rows;
}

ordered_json json_spectrum(const SpectrumReport& s) {
  ordered_json j;
  j["source_tag"] = s.source_tag;
  j["rank"] = s.rank;
  j["eigenvalues"] = json_vector(s.eigenvalues);
  j["explained_variance_ratio"] = json_vector(s.explained_variance_ratio);
  return j;
}

}  // namespace

void write_analysis_report(std::ostream& os, const AnalysisReport& r, ReportFormat format) {
  const char* stat = r.stat == StatKind::mu ? "mu" : "sigma";
  if (format == ReportFormat::json) {
    ordered_json j;
    j["stat"] = stat;
    j["batch"] = r.batch;
    j["channels"] = r.channels;
    j["rank"] = r.spectrum.rank;
    j["eigenvalues"] = json_vector(r.spectrum.eigenvalues);
    j["explained_variance_ratio"] = json_vector(r.spectrum.explained_variance_ratio);
    j["covariance"] = json_matrix(r.covariance.cov);
    j["correlation"] = json_matrix(r.correlation);
    os << j.dump(2) << '\n';
    return;
  }
  os << "stat," << stat << '\n';
  os << "batch," << r.batch << '\n';
  os << "channels," << r.channels << '\n';
  os << "rank," << r.spectrum.rank << '\n';
  os << "eigenvalues";
  csv_values(os, r.spectrum.eigenvalues);
  os << "\nexplained_variance_ratio";
  csv_values(os, r.spectrum.explained_variance_ratio);
  os << "\ncovariance\n";
  csv_matrix(os, r.covariance.cov);
  os << "correlation\n";
  csv_matrix(os, r.correlation);
}

void write_coverage_report(std::ostream& os, const CoverageReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    ordered_json j;
    ordered_json methods = ordered_json::array();
    for (const auto& m : report.methods) {
      ordered_json row;
      row["name"] = m.name;
      row["method"] = std::string(to_string(m.method));
      row["frechet_to_target"] = m.frechet_to_target;
      row["out_of_hull_fraction"] = m.out_of_hull_fraction;
      row["correlation_deviation"] = m.correlation_deviation;
      row["perturbation_energy"] = m.perturbation_energy;
      row["energy_scale"] = m.energy_scale;
      row["samples"] = m.samples;
      methods.push_back(std::move(row));
    }
    j["methods"] = std::move(methods);
    j["source_spectrum"] = json_spectrum(report.source_spectrum);
    os << j.dump(2) << '\n';
    return;
  }
  os << "name,method,frechet_to_target,out_of_hull_fraction,correlation_deviation,"
        "perturbation_energy,energy_scale,samples\n";
  for (const auto& m : report.methods) {
    os << m.name << ',' << to_string(m.method) << ',' << format_double(m.frechet_to_target) << ','
       << format_double(m.out_of_hull_fraction) << ',' << format_double(m.correlation_deviation)
       << ',' << format_double(m.perturbation_energy) << ',' << format_double(m.energy_scale)
       << ',' << m.samples << '\n';
  }
}

}  // namespace csu
