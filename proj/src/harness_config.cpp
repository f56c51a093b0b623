#include "csu/harness_config.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace csu {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

Index count(const json& j, const std::string& path, Index min) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < min) fail(path, "must be >= " + std::to_string(min));
  return static_cast<Index>(v);
}

std::uint64_t seed_value(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

// A scalar broadcast to n entries, or an array of exactly n numbers.
Vector vector_field(const json& j, const std::string& path, Index n, bool positive) {
  Vector v(n);
  if (j.is_number()) {
    v.setConstant(number(j, path));
  } else if (j.is_array()) {
    if (static_cast<Index>(j.size()) != n)
      fail(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
    for (Index i = 0; i < n; ++i) v(i) = number(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  } else {
    fail(path, "expected a number or an array of numbers");
  }
  if (positive)
    for (Index i = 0; i < n; ++i)
      if (!(v(i) > 0.0))
        fail(j.is_array() ? path + "[" + std::to_string(i) + "]" : path, "must be > 0");
  return v;
}

Matrix mixing_field(const json& j, const std::string& path, Index n) {
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") fail(path, "unknown mixing '" + j.get<std::string>() + "'");
    return Matrix::Identity(n, n);
  }
  if (j.is_object()) {
    return uniform_mixing(n, number(require(j, path, "uniform"), path + ".uniform"));
  }
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    fail(path, "expected \"identity\", {\"uniform\": s} or a " + std::to_string(n) + "x" +
                   std::to_string(n) + " array");
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      fail(row_path, "expected " + std::to_string(n) + " entries");
    for (Index c = 0; c < n; ++c)
      m(r, c) = number(row[static_cast<std::size_t>(c)], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

DomainSpec parse_domain(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  DomainSpec d;
  d.n_channels = count(require(j, path, "n_channels"), path + ".n_channels", 1);
  d.n_instances = count(require(j, path, "n_instances"), path + ".n_instances", 1);
  const json& dims = require(j, path, "plane_dims");
  if (!dims.is_array() || dims.size() != 2) fail(path + ".plane_dims", "expected [H, W]");
  d.height = count(dims[0], path + ".plane_dims[0]", 1);
  d.width = count(dims[1], path + ".plane_dims[1]", 1);
  d.seed = j.contains("seed") ? seed_value(j["seed"], path + ".seed") : 0;
  d.mean_shift = j.contains("mean_shift")
                     ? vector_field(j["mean_shift"], path + ".mean_shift", d.n_channels, false)
                     : Vector::Zero(d.n_channels);
  d.scale_shift = j.contains("scale_shift")
                      ? vector_field(j["scale_shift"], path + ".scale_shift", d.n_channels, true)
                      : Vector::Ones(d.n_channels);
  d.channel_mixing = j.contains("channel_mixing")
                         ? mixing_field(j["channel_mixing"], path + ".channel_mixing", d.n_channels)
                         : Matrix::Identity(d.n_channels, d.n_channels);
  return d;
}

MethodRun parse_method_run(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const json& m = require(j, path, "method");
  if (!m.is_string()) fail(path + ".method", "expected a string");
  MethodRun run;
  try {
    run.config.method = parse_method(m.get<std::string>());
  } catch (const ConfigError& e) {
    fail(path + ".method", e.what());
  }
  run.name = std::string(to_string(run.config.method));
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail(path + ".name", "expected a string");
    run.name = j["name"].get<std::string>();
    if (run.name.empty() || run.name.find_first_of(",\n\r\"") != std::string::npos)
      fail(path + ".name", "must be non-empty without commas, quotes or newlines");
  }
  if (j.contains("alpha")) run.config.alpha = number(j["alpha"], path + ".alpha");
  if (j.contains("gate_p")) run.config.gate_p = number(j["gate_p"], path + ".gate_p");
  if (j.contains("eps")) run.config.eps = number(j["eps"], path + ".eps");
  if (j.contains("fixed_intensity"))
    run.config.fixed_intensity = number(j["fixed_intensity"], path + ".fixed_intensity");
  if (!(run.config.alpha > 0.0)) fail(path + ".alpha", "must be > 0");
  if (!(run.config.gate_p >= 0.0 && run.config.gate_p <= 1.0)) fail(path + ".gate_p", "must be in [0, 1]");
  if (!(run.config.eps > 0.0)) fail(path + ".eps", "must be > 0");
  return run;
}

}  // namespace

CoverageSetup parse_harness_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("$: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("$", "expected an object");

  CoverageSetup setup;
  if (root.contains("batch_size")) setup.batch_size = count(root["batch_size"], "$.batch_size", 1);
  if (root.contains("epochs")) setup.epochs = count(root["epochs"], "$.epochs", 1);
  if (root.contains("match_energy")) {
    if (!root["match_energy"].is_boolean()) fail("$.match_energy", "expected a boolean");
    setup.match_energy = root["match_energy"].get<bool>();
  }

  const json& sources = require(root, "$", "sources");
  if (!sources.is_array() || sources.size() < 2) fail("$.sources", "expected at least 2 domains");
  for (std::size_t i = 0; i < sources.size(); ++i)
    setup.sources.push_back(parse_domain(sources[i], "$.sources[" + std::to_string(i) + "]"));
  setup.target = parse_domain(require(root, "$", "target"), "$.target");

  const json& methods = require(root, "$", "methods");
  if (!methods.is_array() || methods.empty()) fail("$.methods", "expected a non-empty array");
  for (std::size_t i = 0; i < methods.size(); ++i)
    setup.methods.push_back(parse_method_run(methods[i], "$.methods[" + std::to_string(i) + "]"));

  const Index channels = setup.sources.front().n_channels;
  for (std::size_t i = 0; i < setup.sources.size(); ++i)
    if (setup.sources[i].n_channels != channels)
      fail("$.sources[" + std::to_string(i) + "].n_channels", "all domains must share n_channels");
  if (setup.target.n_channels != channels)
    fail("$.target.n_channels", "must match the source domains");
  return setup;
}

CoverageSetup load_harness_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_harness_config(text);
}

}  // namespace csu
