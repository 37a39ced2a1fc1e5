#include <doctest.h>

#include <cmath>
#include <random>

#include "dyadic/core.hpp"
#include "dyadic/martingale.hpp"
#include "dyadic/summability.hpp"
#include "dyadic/walsh.hpp"
#include "dyadic/weight_analysis.hpp"
#include "oracles.hpp"

using namespace dyadic;

namespace {
constexpr double kRowSumTol = 1e-12;    // absolute, row sums
constexpr double kEntryTol = 1e-12;     // relative, entries vs oracle rows
constexpr double kRatioTol = 1e-12;     // relative, Cesaro ratio identity
constexpr double kEigenTol = 1e-10;     // absolute, eigenrelation
constexpr double kKernelTol = 1e-9;     // absolute, kernel and mean identities
constexpr double kDecompTol = 1e-8;     // relative to ||V_n||_inf

struct Named {
  SummabilityMatrix T;
  std::function<std::vector<double>(std::uint64_t)> oracle_row;
};

std::vector<Named> families() {
  auto ceil_half = [](std::uint64_t n) { return (n + 1) / 2; };
  auto floor_sqrt = [](std::uint64_t n) {
    std::uint64_t r = 0;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
  };
  return {
      {partial_sum_matrix(),
       [](std::uint64_t n) {
         std::vector<double> r(n + 1, 0.0);
         r[n] = 1.0;
         return r;
       }},
      {fejer_matrix(), [](std::uint64_t n) { return oracle::cesaro_row(n, 1.0); }},
      {cesaro_matrix(constant_sequence(0.5)), [](std::uint64_t n) { return oracle::cesaro_row(n, 0.5); }},
      {cesaro_matrix(inv_log2_sequence()),
       [](std::uint64_t n) { return oracle::cesaro_row(n, n <= 2 ? 1.0 : 1.0 / std::log2(static_cast<double>(n))); }},
      {vallee_poussin_matrix(ceil_half_sequence()),
       [=](std::uint64_t n) { return oracle::vallee_poussin_row(n, ceil_half(n)); }},
      {vallee_poussin_matrix(floor_sqrt_sequence()),
       [=](std::uint64_t n) { return oracle::vallee_poussin_row(n, floor_sqrt(n)); }},
      {norlund_log_matrix(), [](std::uint64_t n) { return oracle::norlund_log_row(n); }},
      {norlund_matrix(harmonic_sequence()),
       [](std::uint64_t n) { return oracle::norlund_row(n, [](std::uint64_t k) { return 1.0 / (k + 1.0); }); }},
      {norlund_matrix(geometric_sequence()),
       [](std::uint64_t n) { return oracle::norlund_row(n, [](std::uint64_t k) { return std::ldexp(1.0, -static_cast<int>(k)); }); }},
      {norlund_matrix(constant_sequence(1.0)),
       [](std::uint64_t n) { return oracle::norlund_row(n, [](std::uint64_t) { return 1.0; }); }},
  };
}
}  // namespace

TEST_CASE("matrix entries match the family definitions") {
  for (const auto& f : families()) {
    CAPTURE(f.T.id());
    for (std::uint64_t n = 1; n <= 300; n += (n < 40 ? 1 : 37)) {
      const auto row = f.T.row(n);
      const auto expect = f.oracle_row(n);
      REQUIRE(row.size() == n + 1);
      for (std::uint64_t k = 0; k <= n; ++k) {
        CHECK(std::abs(row[k] - expect[k]) <= kEntryTol * std::max(1e-300, std::abs(expect[k])) + 1e-300);
        CHECK(f.T.entry(k, n) == row[k]);
      }
    }
  }
}

TEST_CASE("Cesaro with alpha = 1 is the Fejer matrix and equals Norlund with q = 1") {
  const auto C = fejer_matrix();
  const auto Nq = norlund_matrix(constant_sequence(1.0));
  for (std::uint64_t n = 1; n <= 200; ++n) {
    const auto a = C.row(n), b = Nq.row(n);
    for (std::uint64_t k = 0; k <= n; ++k) {
      CHECK(a[k] == doctest::Approx(1.0 / (n + 1.0)).epsilon(1e-14));
      CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-14));
    }
  }
}

TEST_CASE("matrix invariants: nonnegative, rowwise monotone, rows sum to one") {
  for (const auto& f : families()) {
    CAPTURE(f.T.id());
    for (std::uint64_t n = 1; n <= 4096; n = n < 64 ? n + 1 : n * 2 + 1) {
      const auto row = f.T.row(n);
      long double sum = 0;
      for (std::uint64_t k = 0; k <= n; ++k) {
        CHECK(row[k] >= 0.0);
        sum += row[k];
        if (k < n) {
          const bool exempt = f.T.monotone_except_last() && k == n - 1;
          if (!exempt) CHECK(row[k] <= row[k + 1]);
        }
      }
      CHECK(std::abs(static_cast<double>(sum) - 1.0) <= kRowSumTol);
    }
  }
}

TEST_CASE("Norlund-log rows sum to one up to 2^12") {
  const auto T = norlund_log_matrix();
  for (std::uint64_t n = 1; n <= 4096; ++n) {
    const auto row = T.row(n);
    long double s = 0;
    for (double v : row) s += v;
    CHECK(std::abs(static_cast<double>(s) - 1.0) <= kRowSumTol);
    CHECK(row[n] == 0.0);
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(make_matrix(MatrixFamily::cesaro, constant_sequence(1.5)), ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::cesaro, constant_sequence(0.0)), ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::vallee_poussin, ParamSequence{"n+1", [](std::uint64_t n) { return n + 1.0; }}),
                  ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::vallee_poussin, constant_sequence(0.0)), ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::vallee_poussin, constant_sequence(1.5)), ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::norlund, ParamSequence{"k", [](std::uint64_t k) { return k + 1.0; }}),
                  ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::norlund, constant_sequence(-1.0)), ValidationError);
  CHECK_THROWS_AS(make_matrix(MatrixFamily::cesaro, ParamSequence{}), ValidationError);
  CHECK_THROWS_AS(partial_sum_matrix().row(0), ValidationError);
  CHECK_NOTHROW(make_matrix(MatrixFamily::norlund_log, ParamSequence{}));
}

TEST_CASE("A-numbers") {
  for (std::uint64_t m = 0; m <= 50; ++m) CHECK(a_number(m, 1.0) == doctest::Approx(m + 1.0).epsilon(1e-14));
  for (double beta : {0.1, 0.5, 0.9}) {
    for (std::uint64_t m : {1u, 7u, 100u, 9999u, 10000u, 10001u, 50000u}) {
      CHECK(a_number(m, beta) == doctest::Approx(static_cast<double>(oracle::a_number(m, beta))).epsilon(1e-11));
    }
  }
}

TEST_CASE("tail sums and tilde quantities") {
  for (const auto& f : families()) {
    CAPTURE(f.T.id());
    for (std::uint64_t n : {1u, 2u, 3u, 7u, 21u, 64u, 100u, 777u}) {
      const auto row = f.oracle_row(n);
      const TailSums ts = tail_sums(f.T, n);
      CHECK(std::abs(ts.tail(0) - 1.0) <= kRowSumTol);
      for (std::uint64_t m = 0; m <= n + 1; ++m) {
        const double brute = oracle::tilde(row, m);
        CHECK(ts.tilde(m) == ts.tail(n - m + 1));
        CHECK(std::abs(ts.tilde(m) - brute) <= 1e-12);
        CHECK(std::abs(f.T.tilde(m, n) - brute) <= 1e-12);
        CHECK(std::abs(f.T.tail(n - m + 1, n) - brute) <= 1e-12);
      }
      const auto dyadic = f.T.dyadic_tildes(n);
      const int order = WalshIndex(n).order();
      REQUIRE(dyadic.size() == static_cast<std::size_t>(order) + 1);
      for (int s = 0; s <= order; ++s) {
        CHECK(std::abs(dyadic[s] - oracle::tilde(row, std::uint64_t{1} << s)) <= 1e-12);
        if (s > 0) CHECK(dyadic[s - 1] <= dyadic[s]);
      }
    }
  }
}

TEST_CASE("tilde examples for Fejer, de la Vallee Poussin and partial sums") {
  const auto F = fejer_matrix();
  const auto V = vallee_poussin_matrix(floor_sqrt_sequence());
  const auto P = partial_sum_matrix();
  for (std::uint64_t n = 1; n <= 1000; n += 7) {
    for (int s = 0; s <= WalshIndex(n).order(); ++s) {
      const std::uint64_t m = std::uint64_t{1} << s;
      CHECK(F.tilde(m, n) == doctest::Approx(static_cast<double>(m) / (n + 1.0)).epsilon(1e-13));
      const double lam = V.parameter()(n);
      CHECK(V.tilde(m, n) <= std::min(static_cast<double>(m) / (lam + 1.0), 1.0) + 1e-15);
      CHECK(P.tilde(m, n) == 1.0);
    }
  }
}

TEST_CASE("tilde chain over the digits of n") {
  std::mt19937_64 rng(21);
  for (const auto& f : families()) {
    CAPTURE(f.T.id());
    for (int t = 0; t < 60; ++t) {
      const std::uint64_t n = 1 + rng() % 3000;
      const WalshIndex w(n);
      for (int s = 0; s <= w.order(); ++s) {
        if (!w.digit(s)) continue;
        const double lo = f.T.tilde(std::uint64_t{1} << s, n);
        const double mid = f.T.tilde(w.lower(s), n);
        const double hi = f.T.tilde(std::min<std::uint64_t>(std::uint64_t{2} << s, n + 1), n);
        CHECK(lo <= mid);
        CHECK(mid <= hi);
        const bool exempt = f.T.monotone_except_last() && s == 0;
        if (!exempt) CHECK(hi <= 2.0 * lo * (1.0 + kRatioTol));
      }
    }
  }
}

TEST_CASE("Cesaro ratio identity") {
  for (double alpha : {1.0, 0.5, 0.25}) {
    const auto C = cesaro_matrix(constant_sequence(alpha));
    for (std::uint64_t n : {100u, 1000u, 4095u}) {
      for (int s = 1; s <= WalshIndex(n).order(); ++s) {
        const double ratio = C.tilde(std::uint64_t{1} << s, n) / C.tilde(std::uint64_t{1} << (s - 1), n);
        long double prod = 1;
        for (std::uint64_t k = std::uint64_t{1} << (s - 1); k < (std::uint64_t{1} << s); ++k) prod *= 1.0L + alpha / k;
        CHECK(std::abs(ratio - static_cast<double>(prod)) <= kRatioTol * ratio);
        if (alpha == 1.0) CHECK(std::abs(ratio - 2.0) <= kRatioTol);
      }
    }
  }
}

TEST_CASE("eigenrelation T_n(w_l) = T_n^(l+1) w_l") {
  const int N = 6;
  for (const auto& f : families()) {
    CAPTURE(f.T.id());
    for (std::uint64_t n = 1; n <= 64; ++n) {
      const TailSums ts = tail_sums(f.T, n);
      for (std::uint64_t l = 0; l < n; ++l) {
        const DyadicGrid w = walsh(l, N);
        CHECK(max_abs_diff(mean(f.T, w, n), ts.tail(l + 1) * w) <= kEigenTol);
      }
    }
  }
}

TEST_CASE("means against direct partial-sum averages and kernels") {
  const int N = 6;
  const DyadicGrid f = oracle::random_grid(N, 31);
  for (const auto& fam : families()) {
    CAPTURE(fam.T.id());
    for (std::uint64_t n : {1u, 2u, 3u, 10u, 33u, 63u, 64u}) {
      const auto row = fam.oracle_row(n);
      const DyadicGrid m = mean(fam.T, f, n);
      CHECK(max_abs_diff(m, oracle::mean(row, f)) <= kKernelTol);
      const DyadicGrid v = kernel(fam.T, n, N);
      CHECK(max_abs_diff(v, oracle::kernel(row, N)) <= kKernelTol);
      CHECK(max_abs_diff(m, xor_convolve(f, v)) <= kKernelTol);
    }
  }
  for (std::uint64_t n = 1; n <= 64; ++n) {
    CHECK(max_abs_diff(mean(partial_sum_matrix(), f, n), partial_sum(f, n)) <= kKernelTol);
  }
  CHECK(max_abs_diff(mean(fejer_matrix(), walsh(2, 3), 3), 0.25 * walsh(2, 3)) <= kKernelTol);
  CHECK_THROWS_AS(mean(fejer_matrix(), f, 65), ValidationError);
  CHECK_THROWS_AS(kernel(fejer_matrix(), 65, N), ValidationError);
}

TEST_CASE("three-part kernel decomposition") {
  const int N = 9;
  std::mt19937_64 rng(41);
  for (const auto& fam : families()) {
    CAPTURE(fam.T.id());
    std::vector<std::uint64_t> ns = {1, 2, 3, 255, 256, 257, 511};
    for (int t = 0; t < 8; ++t) ns.push_back(1 + rng() % 511);
    for (std::uint64_t n : ns) {
      CAPTURE(n);
      const KernelDecomposition d = decompose(fam.T, n, N);
      const DyadicGrid expect = walsh(n, N) * oracle::kernel(fam.oracle_row(n), N);
      const DyadicGrid sum = d.v1 + d.v2 + d.v3;
      const double scale = oracle::max_abs(expect);
      const double err = oracle::max_diff(sum, expect);
      CHECK(err <= kDecompTol * (scale > 0 ? scale : 1.0));
      CHECK(d.rel_error <= kDecompTol);

      // V3 is P_n with weights T~_{n(s),n}; the report also carries the
      // T~_{2^s,n} variant.
      const WalshIndex w(n);
      std::vector<double> chain(w.order() + 1, 0.0), dyadic(w.order() + 1, 0.0);
      double ratio = 1.0;
      for (int s = 0; s <= w.order(); ++s) {
        chain[s] = fam.T.tilde(w.lower(s), n);
        dyadic[s] = fam.T.tilde(std::uint64_t{1} << s, n);
        if (w.digit(s) && dyadic[s] > 0) ratio = std::max(ratio, chain[s] / dyadic[s]);
      }
      CHECK(max_abs_diff(d.v3, carleson_kernel_weights(n, chain, N)) <= kKernelTol);
      CHECK(max_abs_diff(d.p_variant, carleson_kernel_weights(n, dyadic, N)) <= kKernelTol);
      CHECK(d.weight_ratio_max == doctest::Approx(ratio).epsilon(1e-12));
    }
  }
}

TEST_CASE("Fejer decomposition at dyadic n") {
  const int N = 9;
  for (int k = 0; k <= 8; ++k) {
    const std::uint64_t n = std::uint64_t{1} << k;
    const KernelDecomposition d = decompose(fejer_matrix(), n, N);
    const DyadicGrid expect = walsh(n, N) * oracle::kernel(oracle::cesaro_row(n, 1.0), N);
    CHECK(oracle::max_diff(d.v1 + d.v2 + d.v3, expect) <= kDecompTol * oracle::max_abs(expect));
  }
}

TEST_CASE("Lebesgue constants and the boundedness index") {
  CHECK(lebesgue_constant(partial_sum_matrix(), 3, 2) == 1.5);
  for (std::uint64_t n = 1; n <= 5000; n += 13) {
    CHECK(boundedness_index(partial_sum_matrix(), n) == WalshIndex(n).order() + 1.0);
    double geometric = 0;
    for (int s = 0; s <= WalshIndex(n).order(); ++s) geometric += std::ldexp(1.0, s) / (n + 1.0);
    const double fej = boundedness_index(fejer_matrix(), n);
    CHECK(fej == doctest::Approx(geometric).epsilon(1e-13));
    CHECK(fej <= 2.0);
  }
  for (std::uint64_t n : {5u, 17u, 100u}) {
    CHECK(lebesgue_constant(fejer_matrix(), n, 8) == doctest::Approx(oracle::l1(oracle::kernel(oracle::cesaro_row(n, 1.0), 8))));
  }
}
