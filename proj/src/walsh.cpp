#include "dyadic/walsh.hpp"

#include <bit>

namespace dyadic {

namespace {

std::uint64_t grid_size(int N) { return std::uint64_t{1} << N; }

// acc += w_j.
void accumulate_walsh(std::vector<double>& acc, std::uint64_t j,
                      const std::vector<std::uint64_t>& rev) {
  for (std::uint64_t i = 0; i < acc.size(); ++i) {
    acc[i] += (std::popcount(j & rev[i]) & 1) ? -1.0 : 1.0;
  }
}

void check_index(std::uint64_t n, int N, bool inclusive, const char* what) {
  check_resolution(N);
  const std::uint64_t limit = grid_size(N);
  if (inclusive ? n > limit : n >= limit) {
    throw ValidationError(std::string(what) + ": index " + std::to_string(n) +
                          (inclusive ? " exceeds 2^N = " : " must be below 2^N = ") +
                          std::to_string(limit));
  }
}

}  // namespace

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::walsh: return "walsh";
    case KernelKind::rademacher: return "rademacher";
    case KernelKind::dirichlet: return "dirichlet";
    case KernelKind::fejer_sum: return "fejer_sum";
  }
  return "unknown";
}

DyadicGrid walsh(std::uint64_t n, int N) {
  check_index(n, N, false, "walsh");
  DyadicGrid g(N);
  const auto rev = bit_reversal_table(N);
  for (std::uint64_t i = 0; i < g.size(); ++i) {
    g[i] = (std::popcount(n & rev[i]) & 1) ? -1.0 : 1.0;
  }
  return g;
}

DyadicGrid rademacher(int k, int N) {
  if (k < 0 || k >= N) {
    throw ValidationError("rademacher: digit " + std::to_string(k) + " outside [0, N)");
  }
  return walsh(std::uint64_t{1} << k, N);
}

DyadicGrid dirichlet(std::uint64_t n, int N) {
  check_index(n, N, true, "dirichlet");
  DyadicGrid g(N);
  const auto rev = bit_reversal_table(N);
  for (std::uint64_t j = 0; j < n; ++j) accumulate_walsh(g.samples(), j, rev);
  return g;
}

DyadicGrid fejer_sum(std::uint64_t n, int N) {
  check_index(n, N, true, "fejer_sum");
  DyadicGrid total(N);
  std::vector<double> d(total.size(), 0.0);
  const auto rev = bit_reversal_table(N);
  for (std::uint64_t k = 1; k <= n; ++k) {
    accumulate_walsh(d, k - 1, rev);
    for (std::size_t i = 0; i < d.size(); ++i) total[i] += d[i];
  }
  return total;
}

DyadicGrid partial_sum(const DyadicGrid& f, std::uint64_t n) {
  check_index(n, f.resolution(), true, "partial_sum");
  SpectrumVector s = fwht(f);
  for (std::uint64_t k = n; k < s.coefficients.size(); ++k) s.coefficients[k] = 0.0;
  return inverse_fwht(s);
}

KernelGrid make_kernel(KernelKind kind, std::uint64_t parameter, int N) {
  switch (kind) {
    case KernelKind::walsh: return {kind, parameter, walsh(parameter, N)};
    case KernelKind::rademacher: return {kind, parameter, rademacher(static_cast<int>(parameter), N)};
    case KernelKind::dirichlet: return {kind, parameter, dirichlet(parameter, N)};
    case KernelKind::fejer_sum: return {kind, parameter, fejer_sum(parameter, N)};
  }
  throw ValidationError("unknown kernel kind");
}

}  // namespace dyadic
