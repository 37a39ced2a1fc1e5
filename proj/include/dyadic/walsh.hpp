#pragma once

#include <cstdint>
#include <string>

#include "dyadic/core.hpp"

namespace dyadic {

enum class KernelKind { walsh, rademacher, dirichlet, fejer_sum };

// A grid together with the kernel it samples.
struct KernelGrid {
  KernelKind kind;
  std::uint64_t parameter;
  DyadicGrid grid;
};

std::string kernel_name(KernelKind kind);

// w_n = prod_j r_j^{eps_j(n)}. Requires n < 2^N.
DyadicGrid walsh(std::uint64_t n, int N);
// r_k = w_{2^k}. Requires k < N.
DyadicGrid rademacher(int k, int N);
// D_n = sum_{j<n} w_j, accumulated term by term. Requires n <= 2^N.
DyadicGrid dirichlet(std::uint64_t n, int N);
// n K_n = sum_{k=1}^n D_k; the zero grid for n = 0. Requires n <= 2^N.
DyadicGrid fejer_sum(std::uint64_t n, int N);
// S_n f = sum_{k<n} f^(k) w_k by spectral truncation. Requires n <= 2^N.
DyadicGrid partial_sum(const DyadicGrid& f, std::uint64_t n);

KernelGrid make_kernel(KernelKind kind, std::uint64_t parameter, int N);

}  // namespace dyadic
