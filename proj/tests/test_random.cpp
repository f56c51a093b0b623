#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "csu/linalg.hpp"
#include "csu/random.hpp"
#include "test_util.hpp"

using namespace csu;

TEST_CASE("streams with the same seed agree and reseeding is deterministic") {
  RngStream a(42);
  RngStream b(42);
  CHECK(sample_standard_normal(a, 2, 3) == sample_standard_normal(b, 2, 3));
  CHECK(a.next_u64() == b.next_u64());

  // The engine is the standard mt19937_64, so its 10000th output is fixed.
  RngStream d(5489);
  for (int i = 0; i < 9999; ++i) d.next_u64();
  CHECK(d.next_u64() == 9981545732273789042ULL);
}

TEST_CASE("different seeds give different first draws") {
  std::set<double> firsts;
  for (std::uint64_t seed = 0; seed < 64; ++seed) firsts.insert(RngStream(seed).normal());
  CHECK(firsts.size() == 64);
}

TEST_CASE("derive gives distinct, reproducible sub-streams") {
  CHECK(RngStream::derive(7, 0).next_u64() == RngStream::derive(7, 0).next_u64());
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100; ++i) seen.insert(RngStream::derive(7, i).next_u64());
  seen.insert(RngStream::derive(8, 0).next_u64());
  CHECK(seen.size() == 101);
}

TEST_CASE("uniform stays in [0, 1) and has the right mean") {
  RngStream rng(3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n) + 1e-12);
}

TEST_CASE("standard normal moments over 1e6 draws") {
  RngStream rng(2024);
  const Matrix x = sample_standard_normal(rng, 1000, 1000);
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.01);
  // Fourth moment of a standard normal is 3.
  CHECK(std::abs(x.array().pow(4).mean() - 3.0) < 0.05);
}

TEST_CASE("sample_standard_normal rejects empty shapes") {
  RngStream rng(1);
  CHECK_THROWS_AS(sample_standard_normal(rng, 0, 3), DimensionError);
  CHECK_THROWS_AS(sample_standard_normal(rng, 2, 0), DimensionError);
}

TEST_CASE("sample_beta support, symmetry and variance") {
  for (double alpha : {0.1, 0.3, 1.0, 2.5}) {
    RngStream rng(static_cast<std::uint64_t>(alpha * 1000));
    const Index n = 400000;
    const Vector v = sample_beta(rng, alpha, n);
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= 1.0);
    const double mean = v.mean();
    const double var = (v.array() - mean).square().mean();
    const double want_var = 1.0 / (4.0 * (2.0 * alpha + 1.0));
    CHECK(std::abs(mean - 0.5) < 0.005);
    CHECK(std::abs(var - want_var) < 0.05 * want_var);
  }
}

TEST_CASE("sample_beta and gamma reject a non-positive shape") {
  RngStream rng(1);
  CHECK_THROWS_AS(sample_beta(rng, 0.0, 3), Error);
  CHECK_THROWS_AS(sample_beta(rng, -1.0, 3), Error);
  CHECK_THROWS_AS(rng.gamma(0.0), Error);
}

TEST_CASE("gamma mean matches the shape") {
  for (double shape : {0.2, 0.7, 1.0, 4.0}) {
    RngStream rng(99);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += rng.gamma(shape);
    // Gamma(k, 1) has variance k, so 4 standard errors is sqrt(k / n) * 4.
    CHECK(std::abs(sum / n - shape) < 4.0 * std::sqrt(shape / n));
  }
}

TEST_CASE("log_gamma_variate stays finite for tiny shapes") {
  RngStream rng(12);
  for (int i = 0; i < 10000; ++i) CHECK(std::isfinite(rng.log_gamma_variate(0.01)));
}

TEST_CASE("uniform_index is unbiased over a small range") {
  RngStream rng(77);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_index(6)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  CHECK_THROWS_AS(rng.uniform_index(0), Error);
}

TEST_CASE("permutation is a bijection and uniform over S3") {
  RngStream rng(5);
  std::map<std::vector<Index>, int> counts;
  for (int i = 0; i < 60000; ++i) {
    auto p = rng.permutation(3);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<Index>{0, 1, 2});
    ++counts[p];
  }
  CHECK(counts.size() == 6);
  for (const auto& [perm, c] : counts) CHECK(std::abs(c - 10000) < 400);
  CHECK(rng.permutation(1) == std::vector<Index>{0});
}

TEST_CASE("correlated_noise with identity, zero and rank-1 transforms") {
  RngStream a(10);
  RngStream b(10);
  CHECK(correlated_noise(a, Matrix::Identity(4, 4), 7) == sample_standard_normal(b, 7, 4));

  RngStream z(1);
  CHECK(correlated_noise(z, Matrix::Zero(3, 3), 5).isZero(0.0));

  Matrix cov(2, 2);
  cov << 1, 1, 1, 1;
  const Matrix p = psd_sqrt(sym_eig(cov));
  RngStream r(3);
  const Matrix x = correlated_noise(r, p, 1000);
  CHECK((x.col(0) - x.col(1)).cwiseAbs().maxCoeff() < 1e-6);

  CHECK_THROWS_AS(correlated_noise(r, Matrix::Zero(2, 3), 4), DimensionError);
}

TEST_CASE("correlated_noise covariance tracks P P^T") {
  std::mt19937_64 gen(1);
  const Matrix sigma = testing::random_psd(gen, 5, 8) / 8.0;
  const Matrix p = psd_sqrt(sym_eig(sigma));
  RngStream rng(4);
  const Index n = 100000;
  const Matrix x = correlated_noise(rng, p, n);
  const Matrix emp = (x.transpose() * x) / static_cast<double>(n);
  const double scale = sigma.cwiseAbs().maxCoeff();
  CHECK((emp - sigma).cwiseAbs().maxCoeff() < 0.05 * scale);
}
