#pragma once

// Brute-force reference implementations. Each one follows the textbook
// definition directly (real-valued points, digit products, double loops)
// and shares no code with the library beyond the DyadicGrid container.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "dyadic/core.hpp"

namespace oracle {

using dyadic::DyadicGrid;

// Digit x_j of the midpoint of sample interval i, read from the real number.
inline int point_digit(std::size_t i, int N, int j) {
  const double x = (static_cast<double>(i) + 0.5) * std::ldexp(1.0, -N);
  return static_cast<int>(std::floor(x * std::ldexp(1.0, j + 1))) % 2;
}

// w_n(x) = prod_j r_j(x)^{eps_j(n)}, r_j(x) = (-1)^{x_j}.
inline double walsh_value(std::uint64_t n, std::size_t i, int N) {
  double v = 1.0;
  for (int j = 0; j < 64 && (n >> j); ++j) {
    if ((n >> j) & 1u) v *= point_digit(i, N, j) ? -1.0 : 1.0;
  }
  return v;
}

inline DyadicGrid walsh(std::uint64_t n, int N) {
  DyadicGrid g(N);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = walsh_value(n, i, N);
  return g;
}

inline DyadicGrid dirichlet(std::uint64_t n, int N) {
  DyadicGrid g(N);
  for (std::uint64_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += walsh_value(j, i, N);
  }
  return g;
}

// n K_n = sum_{k=1}^n D_k.
inline DyadicGrid fejer_sum(std::uint64_t n, int N) {
  DyadicGrid g(N);
  for (std::uint64_t k = 1; k <= n; ++k) g += dirichlet(k, N);
  return g;
}

inline double integral(const DyadicGrid& f) {
  double s = 0;
  for (double v : f.samples()) s += v;
  return s * std::ldexp(1.0, -f.resolution());
}

inline double l1(const DyadicGrid& f) {
  double s = 0;
  for (double v : f.samples()) s += std::abs(v);
  return s * std::ldexp(1.0, -f.resolution());
}

// f^(n) = int f w_n.
inline std::vector<double> coefficients(const DyadicGrid& f) {
  const int N = f.resolution();
  std::vector<double> c(f.size(), 0.0);
  for (std::uint64_t n = 0; n < f.size(); ++n) {
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * walsh_value(n, i, N);
    c[n] = s * std::ldexp(1.0, -N);
  }
  return c;
}

// sum_k c_k w_k.
inline DyadicGrid synthesize(const std::vector<double>& c, int N) {
  DyadicGrid g(N);
  for (std::uint64_t k = 0; k < c.size(); ++k) {
    if (c[k] == 0.0) continue;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c[k] * walsh_value(k, i, N);
  }
  return g;
}

// (f*g)[i] = 2^-N sum_j f[i xor j] g[j].
inline DyadicGrid xor_convolve(const DyadicGrid& f, const DyadicGrid& g) {
  DyadicGrid out(f.resolution());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < f.size(); ++j) s += f[i ^ j] * g[j];
    out[i] = s * std::ldexp(1.0, -f.resolution());
  }
  return out;
}

// E_k f: average over the rank-k interval containing each sample.
inline DyadicGrid block_average(const DyadicGrid& f, int k) {
  const int N = f.resolution();
  const std::size_t len = std::size_t{1} << (N - k);
  DyadicGrid out(N);
  for (std::size_t start = 0; start < f.size(); start += len) {
    double s = 0;
    for (std::size_t i = start; i < start + len; ++i) s += f[i];
    for (std::size_t i = start; i < start + len; ++i) out[i] = s / static_cast<double>(len);
  }
  return out;
}

// S_n f from direct coefficients.
inline DyadicGrid partial_sum(const DyadicGrid& f, std::uint64_t n) {
  auto c = coefficients(f);
  for (std::uint64_t k = n; k < c.size(); ++k) c[k] = 0.0;
  return synthesize(c, f.resolution());
}

// sum_k eps_k(n) weights[k] (E_{k+1} - E_k)(f w_n).
inline DyadicGrid mtransform(const DyadicGrid& f, std::uint64_t n, const std::vector<double>& weights) {
  const int N = f.resolution();
  DyadicGrid fw = f * walsh(n, N);
  DyadicGrid out(N);
  for (int k = 0; k < N; ++k) {
    if (!((n >> k) & 1u)) continue;
    out += weights.at(k) * (block_average(fw, k + 1) - block_average(fw, k));
  }
  return out;
}

// max_k |E_k f|.
inline DyadicGrid doob_max(const DyadicGrid& f) {
  DyadicGrid out(f.resolution());
  for (int k = 0; k <= f.resolution(); ++k) {
    const DyadicGrid e = block_average(f, k);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::max(out[i], std::abs(e[i]));
  }
  return out;
}

// sup_t t |{|f| >= t}| over sample values t.
inline double weak_l1(const DyadicGrid& f) {
  double best = 0;
  for (double t : f.samples()) {
    const double a = std::abs(t);
    std::size_t count = 0;
    for (double v : f.samples()) count += std::abs(v) >= a ? 1 : 0;
    best = std::max(best, a * static_cast<double>(count) * std::ldexp(1.0, -f.resolution()));
  }
  return best;
}

// A_m^beta = prod_{j=1}^m (beta + j) / j in long double.
inline long double a_number(std::uint64_t m, long double beta) {
  long double a = 1.0L;
  for (std::uint64_t j = 1; j <= m; ++j) a *= (beta + j) / j;
  return a;
}

// Matrix rows straight from the family definitions.
inline std::vector<double> cesaro_row(std::uint64_t n, double alpha) {
  std::vector<double> r(n + 1);
  const long double denom = a_number(n, alpha);
  for (std::uint64_t k = 0; k <= n; ++k) r[k] = static_cast<double>(a_number(n - k, alpha - 1.0L) / denom);
  return r;
}

inline std::vector<double> vallee_poussin_row(std::uint64_t n, std::uint64_t lambda) {
  std::vector<double> r(n + 1, 0.0);
  for (std::uint64_t k = n - lambda; k <= n; ++k) r[k] = 1.0 / (static_cast<double>(lambda) + 1.0);
  return r;
}

inline std::vector<double> norlund_log_row(std::uint64_t n) {
  long double ln = 0;
  for (std::uint64_t k = 1; k <= n; ++k) ln += 1.0L / k;
  std::vector<double> r(n + 1, 0.0);
  for (std::uint64_t k = 0; k < n; ++k) r[k] = static_cast<double>(1.0L / (ln * (n - k)));
  return r;
}

inline std::vector<double> norlund_row(std::uint64_t n, const std::function<double(std::uint64_t)>& q) {
  long double Q = 0;
  for (std::uint64_t j = 0; j <= n; ++j) Q += q(j);
  std::vector<double> r(n + 1);
  for (std::uint64_t k = 0; k <= n; ++k) r[k] = static_cast<double>(q(n - k) / Q);
  return r;
}

// sum_{k=1}^n t_k S_k f from direct partial sums.
inline DyadicGrid mean(const std::vector<double>& row, const DyadicGrid& f) {
  const auto c = coefficients(f);
  DyadicGrid out(f.resolution());
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] == 0.0) continue;
    auto ck = c;
    for (std::uint64_t l = k; l < ck.size(); ++l) ck[l] = 0.0;
    out += row[k] * synthesize(ck, f.resolution());
  }
  return out;
}

// sum_{k=1}^n t_k D_k.
inline DyadicGrid kernel(const std::vector<double>& row, int N) {
  DyadicGrid out(N);
  DyadicGrid d(N);
  for (std::size_t k = 1; k < row.size(); ++k) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += walsh_value(k - 1, i, N);
    if (row[k] != 0.0) out += row[k] * d;
  }
  return out;
}

// T~_{m,n} = sum_{l<m} t_{n-l,n}.
inline double tilde(const std::vector<double>& row, std::uint64_t m) {
  const std::uint64_t n = row.size() - 1;
  long double s = 0;
  for (std::uint64_t l = 0; l < m; ++l) s += row[n - l];
  return static_cast<double>(s);
}

// Exhaustive version of the greedy (n_m, m) selection: reach[m] is the
// least n satisfying the condition after reach[m-1], found by checking
// every pair (m, n) in the range.
struct Prop2Oracle {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t stopped_at_m = 0;
  double certificate = 0;
};

inline Prop2Oracle prop2(const std::vector<double>& a) {
  const std::size_t K = a.size();
  // ok[m][n] = (n >= m and a_{n-m} >= a_n / 2).
  std::vector<std::vector<char>> ok(K + 2, std::vector<char>(K, 0));
  for (std::size_t m = 1; m <= K + 1; ++m) {
    for (std::size_t n = 0; n < K; ++n) ok[m][n] = n >= m && 2.0 * a[n - m] >= a[n];
  }
  Prop2Oracle out;
  long long prev = -1;
  for (std::size_t m = 1; m <= K + 1; ++m) {
    std::optional<std::size_t> hit;
    for (std::size_t n = 0; n < K; ++n) {
      if (static_cast<long long>(n) > prev && ok[m][n]) {
        hit = n;
        break;
      }
    }
    if (!hit) {
      out.stopped_at_m = m;
      break;
    }
    out.pairs.emplace_back(*hit, m);
    prev = static_cast<long long>(*hit);
  }
  for (std::size_t n = 0; n < K; ++n) {
    double A = 0;
    for (std::size_t j = 0; j <= n; ++j) A += a[j];
    out.certificate = std::max(out.certificate, A / a[n]);
  }
  return out;
}

inline DyadicGrid random_grid(int N, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  DyadicGrid g(N);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = U(rng);
  return g;
}

inline double max_diff(const DyadicGrid& a, const DyadicGrid& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const DyadicGrid& a) {
  double m = 0;
  for (double v : a.samples()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace oracle
