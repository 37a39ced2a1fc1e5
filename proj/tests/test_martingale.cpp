#include <doctest.h>

#include <json.hpp>
#include <random>

#include "dyadic/core.hpp"
#include "dyadic/martingale.hpp"
#include "dyadic/walsh.hpp"
#include "dyadic/weight_analysis.hpp"
#include "dyadic/summability.hpp"
#include "oracles.hpp"

using namespace dyadic;

namespace {
constexpr double kTol = 1e-9;          // absolute, transform identities
constexpr double kSpectralTol = 1e-10;  // absolute, band-restriction invariance
constexpr double kDoobSlack = 1e-12;    // weak-(1,1) inequality slack

std::vector<WeightFamily> monotone_families() {
  return {WeightFamily::ones(), WeightFamily::harmonic(), WeightFamily::t3(2.0), WeightFamily::ones().scaled(0.5),
          from_matrix(fejer_matrix()), from_matrix(cesaro_matrix(constant_sequence(0.5)))};
}
}  // namespace

TEST_CASE("IndexSet validation") {
  CHECK_THROWS_AS(IndexSet({}), ValidationError);
  CHECK_THROWS_AS(IndexSet({3, 3}), ValidationError);
  CHECK_THROWS_AS(IndexSet({4, 2}), ValidationError);
  CHECK_THROWS_AS(IndexSet({0, 2}), ValidationError);
  const IndexSet r = IndexSet::range(2, 5);
  CHECK(r.values() == std::vector<std::uint64_t>{2, 3, 4, 5});
  CHECK(r.max() == 5);
}

TEST_CASE("conditional expectations") {
  const int N = 8;
  const DyadicGrid f = oracle::random_grid(N, 1);
  CHECK(max_abs_diff(cond_exp(f, 0), constant_grid(N, mean_value(f))) <= kTol);
  CHECK(max_abs_diff(cond_exp(f, N), f) == 0.0);
  for (int k = 0; k <= N; ++k) {
    const DyadicGrid e = cond_exp(f, k);
    CHECK(max_abs_diff(e, oracle::block_average(f, k)) <= kTol);
    CHECK(max_abs_diff(e, oracle::xor_convolve(f, oracle::dirichlet(std::uint64_t{1} << k, N))) <= kTol);
  }
  CHECK_THROWS_AS(cond_exp(f, N + 1), ValidationError);
  CHECK_THROWS_AS(cond_exp(f, -1), ValidationError);
}

TEST_CASE("martingale differences") {
  const int N = 7;
  const DyadicGrid f = oracle::random_grid(N, 2);
  DyadicGrid sum(N);
  for (int k = 0; k < N; ++k) {
    const DyadicGrid d = mdiff(f, k);
    sum += d;
    const SpectrumVector s = fwht(d);
    for (std::size_t j = 0; j < s.coefficients.size(); ++j) {
      const bool in_band = j >= (std::size_t{1} << k) && j < (std::size_t{2} << k);
      if (!in_band) CHECK(std::abs(s.coefficients[j]) <= kSpectralTol);
    }
    CHECK(max_abs(mdiff(constant_grid(N, 3.0), k)) <= kTol);
  }
  CHECK(max_abs_diff(sum, f - constant_grid(N, mean_value(f))) <= kTol);
  for (std::uint64_t m = 1; m < 128; ++m) {
    const int band = WalshIndex(m).order();
    for (int k = 0; k < N; ++k) {
      const DyadicGrid expect = k == band ? walsh(m, N) : DyadicGrid(N);
      CHECK(max_abs_diff(mdiff(walsh(m, N), k), expect) <= kTol);
    }
  }
  CHECK_THROWS_AS(mdiff(f, N), ValidationError);
}

TEST_CASE("Doob maximal function") {
  const int N = 8;
  CHECK(max_abs_diff(doob_max(constant_grid(N, -2.0)), constant_grid(N, 2.0)) == 0.0);
  for (std::uint64_t n : {1u, 6u, 200u}) CHECK(max_abs_diff(doob_max(walsh(n, N)), constant_grid(N, 1.0)) <= kTol);
  const DyadicGrid f = oracle::random_grid(N, 3);
  CHECK(max_abs_diff(doob_max(f), oracle::doob_max(f)) <= kTol);
}

TEST_CASE("Doob weak-(1,1) inequality on random nonnegative grids") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const DyadicGrid f = oracle::random_grid(8, seed, 0.0, 1.0) * oracle::random_grid(8, seed + 1000, 0.0, 1.0);
    CHECK(norms(doob_max(f)).weak_l1 <= l1_norm(f) + kDoobSlack);
  }
}

TEST_CASE("square function and H1 norm") {
  const int N = 7;
  CHECK(max_abs_diff(square_function(constant_grid(N, -1.5)), constant_grid(N, 1.5)) <= kTol);
  CHECK(max_abs(square_function(constant_grid(N, -1.5), false)) == 0.0);
  for (std::uint64_t m : {1u, 2u, 5u, 100u}) {
    CHECK(max_abs_diff(square_function(walsh(m, N)), constant_grid(N, 1.0)) <= kTol);
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DyadicGrid f = oracle::random_grid(N, seed);
    CHECK(l1_norm(f) <= h1_norm(f) + kTol);
  }
}

TEST_CASE("martingale transform with unit weights recovers partial sums") {
  const int N = 8;
  const DyadicGrid f = oracle::random_grid(N, 4);
  for (std::uint64_t n = 1; n < 256; ++n) {
    const TransformResult r = mtransform(f, n, WeightFamily::ones());
    CHECK(r.op == "martingale_transform");
    CHECK(r.grid.resolution() == N);
    CHECK(max_abs_diff(walsh(n, N) * r.grid, partial_sum(f, n)) <= kTol);
  }
  for (int k = 0; k < N; ++k) {
    const std::uint64_t n = std::uint64_t{1} << k;
    CHECK(max_abs_diff(mtransform(f, n, WeightFamily::ones()).grid, mdiff(f * rademacher(k, N), k)) <= kTol);
  }
  CHECK_THROWS_AS(mtransform(f, 256, WeightFamily::ones()), ValidationError);
  CHECK_THROWS_AS(mtransform(f, 0, WeightFamily::ones()), ValidationError);
}

TEST_CASE("martingale transform matches the block-average oracle and is linear in the weights") {
  const int N = 7;
  const DyadicGrid f = oracle::random_grid(N, 5);
  std::mt19937_64 rng(6);
  for (const auto& omega : monotone_families()) {
    for (int t = 0; t < 15; ++t) {
      const std::uint64_t n = 1 + rng() % 127;
      const DyadicGrid m = mtransform(f, n, omega).grid;
      CHECK(max_abs_diff(m, oracle::mtransform(f, n, omega.row(n))) <= kTol);
      CHECK(max_abs_diff(mtransform(f, n, omega.scaled(3.0)).grid, 3.0 * m) <= kTol);
    }
  }
}

TEST_CASE("Carleson kernel spectrum and convolution representation") {
  const int N = 8;
  for (int k = 0; k < N; ++k) {
    const std::uint64_t n = std::uint64_t{1} << k;
    CHECK(max_abs_diff(carleson_kernel(n, WeightFamily::ones(), N), rademacher(k, N) * dirichlet(n, N)) <= kTol);
  }
  for (const auto& omega : {WeightFamily::ones(), WeightFamily::harmonic()}) {
    const std::uint64_t n = 21;
    const SpectrumVector s = fwht(carleson_kernel(n, omega, N));
    const auto w = omega.row(n);
    for (std::size_t j = 0; j < s.coefficients.size(); ++j) {
      const int band = j == 0 ? -1 : WalshIndex(j).order();
      const double expect = band >= 0 && ((n >> band) & 1u) ? w[band] : 0.0;
      CHECK(std::abs(s.coefficients[j] - expect) <= kSpectralTol);
    }
  }
  const DyadicGrid f = oracle::random_grid(N, 7);
  std::mt19937_64 rng(8);
  for (const auto& omega : monotone_families()) {
    for (int t = 0; t < 10; ++t) {
      const std::uint64_t n = 1 + rng() % 255;
      const DyadicGrid conv = xor_convolve(f * walsh(n, N), carleson_kernel(n, omega, N));
      CHECK(max_abs_diff(conv, mtransform(f, n, omega).grid) <= kTol);
    }
  }
  CHECK_THROWS_AS(carleson_kernel(256, WeightFamily::ones(), N), ValidationError);
}

TEST_CASE("transform depends only on the selected spectral bands") {
  const int N = 8;
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const std::uint64_t n = 1 + rng() % 255;
    const DyadicGrid f = oracle::random_grid(N, 50 + t);
    const DyadicGrid wn = walsh(n, N);
    SpectrumVector s = fwht(f * wn);
    for (std::size_t j = 0; j < s.coefficients.size(); ++j) {
      const bool keep = j > 0 && ((n >> WalshIndex(j).order()) & 1u);
      if (!keep) s.coefficients[j] = 0.0;
    }
    const DyadicGrid g = inverse_fwht(s) * wn;
    const auto omega = WeightFamily::harmonic();
    CHECK(max_abs_diff(mtransform(g, n, omega).grid, mtransform(f, n, omega).grid) <= kSpectralTol);
  }
}

TEST_CASE("Carleson maximal operator") {
  const int N = 8;
  const DyadicGrid f = oracle::random_grid(N, 10);
  const auto omega = WeightFamily::harmonic();
  DyadicGrid single = mtransform(f, 37, omega).grid;
  for (auto& v : single.samples()) v = std::abs(v);
  CHECK(max_abs_diff(carleson_max(f, omega, IndexSet({37})).grid, single) == 0.0);

  const TransformResult all = carleson_max(f, WeightFamily::ones(), IndexSet::range(1, 255));
  CHECK(all.op == "carleson_max");
  DyadicGrid sup(N);
  for (std::uint64_t n = 1; n < 256; ++n) {
    const DyadicGrid s = oracle::partial_sum(f, n);
    for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], std::abs(s[i]));
  }
  CHECK(max_abs_diff(all.grid, sup) <= kTol);

  const DyadicGrid small = carleson_max(f, omega, IndexSet({3, 40, 100})).grid;
  const DyadicGrid big = carleson_max(f, omega, IndexSet({3, 17, 40, 99, 100})).grid;
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] <= big[i]);
  CHECK_THROWS_AS(carleson_max(f, omega, IndexSet({256})), ValidationError);
}

TEST_CASE("pointwise domination bound") {
  const int N = 8;
  std::mt19937_64 rng(12);
  for (const auto& omega : monotone_families()) {
    for (int t = 0; t < 10; ++t) {
      const std::uint64_t n = 1 + rng() % 255;
      const DyadicGrid f = oracle::random_grid(N, 200 + t);
      const DyadicGrid m = mtransform(f, n, omega).grid;
      const DyadicGrid bound = domination_bound(f, n, omega);
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(m[i]) <= bound[i] + kTol);
    }
  }
}

TEST_CASE("transform sidecar") {
  const DyadicGrid f = oracle::random_grid(5, 13);
  const auto j = nlohmann::json::parse(sidecar_json(mtransform(f, 9, WeightFamily::harmonic())));
  CHECK(j.at("operator") == "martingale_transform");
  CHECK(j.at("n") == 9);
  CHECK(j.at("weights") == "harmonic");
  CHECK(j.at("resolution") == 5);
  const auto k = nlohmann::json::parse(sidecar_json(carleson_max(f, WeightFamily::ones(), IndexSet({2, 7}))));
  CHECK(k.at("index_set") == nlohmann::json::array({2, 7}));
  CHECK_FALSE(k.contains("n"));
}
