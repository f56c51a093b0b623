#include "csu/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "csu/harness_config.hpp"
#include "csu/io.hpp"

namespace csu::cli {

namespace {

bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  if (std::filesystem::equivalent(a, b, ec)) return true;
  std::error_code ec_a;
  std::error_code ec_b;
  const auto ca = std::filesystem::weakly_canonical(a, ec_a);
  const auto cb = std::filesystem::weakly_canonical(b, ec_b);
  return !ec_a && !ec_b && ca == cb;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw FormatError("write failed for " + path);
}

struct BatchSummary {
  Index batches = 0;
  Index gated = 0;
  double lambda_sum = 0.0;
  Index lambda_count = 0;
};

template <typename Scalar>
FeatureMap<Scalar> augment_batches(const FeatureMap<Scalar>& fm, const AugmentOptions& opts,
                                   BatchSummary& summary) {
  const Index total = fm.shape().batch;
  const Index step = opts.batch_size.value_or(total);
  std::vector<FeatureMap<Scalar>> parts;
  for (Index start = 0, index = 0; start < total; start += step, ++index) {
    const Index n = std::min(step, total - start);
    // Per-batch streams make each batch's draws independent of the others.
    RngStream rng = RngStream::derive(opts.config.seed, static_cast<std::uint64_t>(index));
    Augmented<Scalar> r = augment(fm.slice_batch(start, n), opts.config, rng);
    ++summary.batches;
    if (r.stats.gated) ++summary.gated;
    summary.lambda_sum += r.stats.lambda_used.sum();
    summary.lambda_count += r.stats.lambda_used.size();
    parts.push_back(std::move(r.output));
  }
  return concat_batches<Scalar>(parts);
}

}  // namespace

int cmd_augment(const AugmentOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    opts.config.validate();
    if (opts.batch_size && *opts.batch_size < 1) throw ConfigError("--batch-size must be >= 1");
    if (same_file(opts.input, opts.output))
      throw ConfigError("--output must differ from --input");
    const AnyFeatureMap input = read_feature_map(opts.input);
    BatchSummary summary;
    const AnyFeatureMap result = std::visit(
        [&](const auto& fm) -> AnyFeatureMap { return augment_batches(fm, opts, summary); }, input);
    write_feature_map(opts.output, result);

    nlohmann::ordered_json j;
    j["method"] = std::string(to_string(opts.config.method));
    j["instances"] = std::visit([](const auto& fm) { return fm.shape().batch; }, input);
    j["batches"] = summary.batches;
    j["gated"] = summary.gated;
    if (summary.lambda_count > 0)
      j["lambda_mean"] = summary.lambda_sum / static_cast<double>(summary.lambda_count);
    else
      j["lambda_mean"] = nullptr;
    out << j.dump() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "csu augment: " << e.what() << '\n';
    return 1;
  }
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (!(opts.eps > 0.0)) throw ConfigError("--eps must be > 0");
    if (same_file(opts.input, opts.report)) throw ConfigError("--report must differ from --input");
    const AnalysisReport report = analyze_feature_map(read_feature_map(opts.input), opts.stat, opts.eps);
    std::ostringstream os;
    write_analysis_report(os, report, opts.format);
    write_text(opts.report, os.str());
    out << "rank " << report.spectrum.rank << " of " << report.channels << " channels, batch "
        << report.batch << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "csu analyze: " << e.what() << '\n';
    return 1;
  }
}

int cmd_harness(const HarnessOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (same_file(opts.config, opts.report)) throw ConfigError("--report must differ from --config");
    const CoverageSetup setup = load_harness_config(opts.config);
    RngStream rng(opts.seed);
    const CoverageReport report = coverage_experiment(setup, rng);
    std::ostringstream os;
    write_coverage_report(os, report, opts.format);
    write_text(opts.report, os.str());
    for (const auto& m : report.methods)
      out << m.name << ": correlation_deviation " << format_double(m.correlation_deviation)
          << ", out_of_hull_fraction " << format_double(m.out_of_hull_fraction) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "csu harness: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlated style uncertainty augmentation and analysis", "csu"};
  app.require_subcommand(1);

  AugmentOptions aug;
  std::string aug_method = "csu";
  Index aug_batch = 0;
  auto* augment_cmd = app.add_subcommand("augment", "Augment a feature map file");
  augment_cmd->add_option("--input", aug.input, "Input feature map")->required();
  augment_cmd->add_option("--output", aug.output, "Output feature map")->required();
  augment_cmd->add_option("--method", aug_method, "csu|dsu|mixstyle|padain|identity")
      ->check(CLI::IsMember({"csu", "dsu", "mixstyle", "padain", "identity"}));
  augment_cmd->add_option("--alpha", aug.config.alpha, "Beta(alpha, alpha) shape");
  augment_cmd->add_option("--gate-p", aug.config.gate_p, "Gate probability");
  augment_cmd->add_option("--eps", aug.config.eps, "Sigma floor");
  augment_cmd->add_option("--seed", aug.config.seed, "PRNG seed");
  auto* batch_opt = augment_cmd->add_option("--batch-size", aug_batch, "Instances per batch");

  AnalyzeOptions ana;
  std::string ana_stat = "mu";
  std::string ana_format = "csv";
  auto* analyze_cmd = app.add_subcommand("analyze", "Covariance, correlation and spectrum report");
  analyze_cmd->add_option("--input", ana.input, "Input feature map")->required();
  analyze_cmd->add_option("--report", ana.report, "Report path")->required();
  analyze_cmd->add_option("--stat", ana_stat, "mu|sigma")->check(CLI::IsMember({"mu", "sigma"}));
  analyze_cmd->add_option("--format", ana_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  analyze_cmd->add_option("--eps", ana.eps, "Sigma floor");

  HarnessOptions har;
  std::string har_format = "csv";
  auto* harness_cmd = app.add_subcommand("harness", "Run the synthetic domain coverage experiment");
  harness_cmd->add_option("--config", har.config, "Harness JSON config")->required();
  harness_cmd->add_option("--report", har.report, "Report path")->required();
  harness_cmd->add_option("--seed", har.seed, "PRNG seed");
  harness_cmd->add_option("--format", har_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (augment_cmd->parsed()) {
    aug.config.method = parse_method(aug_method);
    if (batch_opt->count() > 0) aug.batch_size = aug_batch;
    return cmd_augment(aug, out, err);
  }
  if (analyze_cmd->parsed()) {
    ana.stat = parse_stat_kind(ana_stat);
    ana.format = parse_report_format(ana_format);
    return cmd_analyze(ana, out, err);
  }
  har.format = parse_report_format(har_format);
  return cmd_harness(har, out, err);
}

}  // namespace csu::cli
