#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "csu/io.hpp"
#include "csu/report.hpp"
#include "test_util.hpp"

using namespace csu;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "csu_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Independent header builder for the decoder tests.
std::vector<std::uint8_t> header(const char* magic, std::uint8_t dtype, std::uint32_t b,
                                 std::uint32_t c, std::uint32_t h, std::uint32_t w) {
  std::vector<std::uint8_t> out(magic, magic + 8);
  out.push_back(dtype);
  out.insert(out.end(), {0, 0, 0});
  for (std::uint32_t v : {b, c, h, w})
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  return out;
}

void append_f32(std::vector<std::uint8_t>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("a 1x1x1x1 float32 map is a 32-byte file with the documented layout") {
  const AnyFeatureMap fm = make_feature_map<float>({1, 1, 1, 1}, {3.0f});
  const auto path = temp_file("one.fmap");
  write_feature_map(path, fm);
  CHECK(std::filesystem::file_size(path) == 32);

  std::vector<std::uint8_t> want = header("CSUFMAP1", 0, 1, 1, 1, 1);
  append_f32(want, 3.0f);
  CHECK(encode_feature_map(fm) == want);

  std::ifstream is(path, std::ios::binary);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), {});
  CHECK(bytes == want);
}

TEST_CASE("round trip is bit-exact for both dtypes") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_int_distribution<Index> dim(1, 6);
    const Shape s{dim(gen), dim(gen), dim(gen), dim(gen)};
    const auto f32 = testing::random_feature_map<float>(gen, s);
    const auto f64 = testing::random_feature_map<double>(gen, s);
    const auto path = temp_file("rt.fmap");

    write_feature_map(path, f32);
    const AnyFeatureMap back32 = read_feature_map(path);
    REQUIRE(std::holds_alternative<FeatureMap<float>>(back32));
    const auto& g32 = std::get<FeatureMap<float>>(back32);
    CHECK(g32.shape() == s);
    CHECK(std::memcmp(g32.data().data(), f32.data().data(), f32.data().size_bytes()) == 0);

    write_feature_map(path, f64);
    const AnyFeatureMap back64 = read_feature_map(path);
    REQUIRE(std::holds_alternative<FeatureMap<double>>(back64));
    const auto& g64 = std::get<FeatureMap<double>>(back64);
    CHECK(std::memcmp(g64.data().data(), f64.data().data(), f64.data().size_bytes()) == 0);
  }
  // Extreme but finite values survive.
  const AnyFeatureMap edge = make_feature_map<double>(
      {1, 1, 1, 4}, {std::numeric_limits<double>::denorm_min(), -0.0,
                     std::numeric_limits<double>::max(), -std::numeric_limits<double>::lowest()});
  const AnyFeatureMap back = decode_feature_map(encode_feature_map(edge));
  const auto& a = std::get<FeatureMap<double>>(edge);
  const auto& b = std::get<FeatureMap<double>>(back);
  CHECK(std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0);
}

TEST_CASE("decoder rejects malformed files") {
  std::vector<std::uint8_t> good = header("CSUFMAP1", 0, 1, 1, 1, 2);
  append_f32(good, 1.0f);
  append_f32(good, 2.0f);
  CHECK_NOTHROW(decode_feature_map(good));

  std::vector<std::uint8_t> magic = good;
  magic[7] = '2';
  CHECK_THROWS_WITH_AS(decode_feature_map(magic), doctest::Contains("magic"), FormatError);

  std::vector<std::uint8_t> dtype = good;
  dtype[8] = 2;
  CHECK_THROWS_AS(decode_feature_map(dtype), FormatError);

  std::vector<std::uint8_t> reserved = good;
  reserved[10] = 1;
  CHECK_THROWS_AS(decode_feature_map(reserved), FormatError);

  CHECK_THROWS_AS(decode_feature_map(std::span(good).first(20)), FormatError);
  CHECK_THROWS_WITH_AS(decode_feature_map(std::span(good).first(good.size() - 1)),
                       doctest::Contains("truncated"), FormatError);

  std::vector<std::uint8_t> trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_feature_map(trailing), FormatError);

  std::vector<std::uint8_t> zero_dim = header("CSUFMAP1", 1, 1, 0, 1, 1);
  CHECK_THROWS_AS(decode_feature_map(zero_dim), FormatError);

  std::vector<std::uint8_t> huge = header("CSUFMAP1", 1, 0xffffffffu, 0xffffffffu, 0xffffffffu, 2);
  CHECK_THROWS_AS(decode_feature_map(huge), FormatError);

  std::vector<std::uint8_t> nan = header("CSUFMAP1", 0, 1, 1, 1, 2);
  append_f32(nan, 1.0f);
  append_f32(nan, std::numeric_limits<float>::quiet_NaN());
  CHECK_THROWS_AS(decode_feature_map(nan), NonFiniteError);

  CHECK_THROWS_AS(read_feature_map(temp_file("missing.fmap")), FormatError);
}

TEST_CASE("format_double round-trips") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(nd(gen), static_cast<int>(gen() % 200) - 100);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("analysis report CSV layout for the two-instance example") {
  // Two instances whose channel planes are constant, so mu rows are [1,2] and [3,4].
  const AnyFeatureMap fm = make_feature_map<double>({2, 2, 1, 2}, {1, 1, 2, 2, 3, 3, 4, 4});
  const AnalysisReport r = analyze_feature_map(fm, StatKind::mu, 1e-6);
  CHECK(r.covariance.cov == Matrix::Constant(2, 2, 1.0));
  CHECK(r.spectrum.rank == 1);
  std::ostringstream os;
  write_analysis_report(os, r, ReportFormat::csv);
  const auto l = lines(os.str());
  REQUIRE(l.size() == 12);
  CHECK(l[0] == "stat,mu");
  CHECK(l[1] == "batch,2");
  CHECK(l[2] == "channels,2");
  CHECK(l[3] == "rank,1");
  CHECK(l[4].rfind("eigenvalues,2,", 0) == 0);
  CHECK(l[5] == "explained_variance_ratio,1");
  CHECK(l[6] == "covariance");
  CHECK(l[7] == "1,1");
  CHECK(l[8] == "1,1");
  CHECK(l[9] == "correlation");
  CHECK(l[10] == "1,1");
  CHECK(l[11] == "1,1");
}

TEST_CASE("analysis report JSON keys and constant input fallback") {
  const AnyFeatureMap fm = make_feature_map<float>({3, 3, 2, 2}, std::vector<float>(36, 2.0f));
  const AnalysisReport r = analyze_feature_map(fm, StatKind::sigma, 1e-6);
  CHECK(r.spectrum.rank == 0);
  CHECK(r.correlation == Matrix::Identity(3, 3));
  std::ostringstream os;
  write_analysis_report(os, r, ReportFormat::json);
  const auto j = nlohmann::ordered_json::parse(os.str());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"stat", "batch", "channels", "rank", "eigenvalues",
                                         "explained_variance_ratio", "covariance", "correlation"});
  CHECK(j["stat"] == "sigma");
  CHECK(j["rank"] == 0);
  CHECK(j["explained_variance_ratio"].empty());
  CHECK(j["correlation"][1] == nlohmann::json::array({0.0, 1.0, 0.0}));
}

TEST_CASE("coverage report CSV header and JSON") {
  CoverageReport r;
  MethodCoverage m;
  m.name = "csu";
  m.method = Method::csu;
  m.frechet_to_target = 1.5;
  m.samples = 10;
  r.methods.push_back(m);
  r.source_spectrum.eigenvalues = Eigen::Vector2d(2, 1);
  r.source_spectrum.explained_variance_ratio = Eigen::Vector2d(2.0 / 3.0, 1);
  r.source_spectrum.rank = 2;
  std::ostringstream csv;
  write_coverage_report(csv, r, ReportFormat::csv);
  const auto l = lines(csv.str());
  REQUIRE(l.size() == 2);
  CHECK(l[0] ==
        "name,method,frechet_to_target,out_of_hull_fraction,correlation_deviation,"
        "perturbation_energy,energy_scale,samples");
  CHECK(l[1] == "csu,csu,1.5,0,0,0,1,10");

  std::ostringstream js;
  write_coverage_report(js, r, ReportFormat::json);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j["methods"][0]["name"] == "csu");
  CHECK(j["methods"][0]["samples"] == 10);
  CHECK(j["source_spectrum"]["rank"] == 2);
}

TEST_CASE("report option parsers") {
  CHECK(parse_stat_kind("sigma") == StatKind::sigma);
  CHECK(parse_report_format("json") == ReportFormat::json);
  CHECK_THROWS_AS(parse_stat_kind("var"), ConfigError);
  CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
}
