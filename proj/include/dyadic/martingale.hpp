#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyadic/core.hpp"
#include "dyadic/weights.hpp"

namespace dyadic {

// Sorted, strictly increasing, nonempty list of positive indices.
class IndexSet {
 public:
  explicit IndexSet(std::vector<std::uint64_t> values);
  // {lo, lo+1, ..., hi}.
  static IndexSet range(std::uint64_t lo, std::uint64_t hi);

  const std::vector<std::uint64_t>& values() const { return values_; }
  std::uint64_t max() const { return values_.back(); }

 private:
  std::vector<std::uint64_t> values_;
};

struct TransformResult {
  DyadicGrid grid;
  std::string op;  // "martingale_transform" or "carleson_max"
  std::vector<std::uint64_t> indices;
  std::string weights;
  int resolution = 0;
};

// JSON sidecar {operator, n | index_set, weights, resolution}.
std::string sidecar_json(const TransformResult& r);

// levels[k] holds the 2^k block averages of g on rank-k intervals;
// levels[N] is g itself.
std::vector<std::vector<double>> block_pyramid(const std::vector<double>& g, int N);

// E_k f, 0 <= k <= N.
DyadicGrid cond_exp(const DyadicGrid& f, int k);
// E_{k+1} f - E_k f, 0 <= k < N.
DyadicGrid mdiff(const DyadicGrid& f, int k);
// max_{0<=k<=N} |E_k f|.
DyadicGrid doob_max(const DyadicGrid& f);

// (|E_0 f|^2 + sum_{k=1}^N |E_k f - E_{k-1} f|^2)^{1/2}; the first term is
// dropped when include_mean_term is false.
DyadicGrid square_function(const DyadicGrid& f, bool include_mean_term = true);
double h1_norm(const DyadicGrid& f, bool include_mean_term = true);

// M_n(Omega) f = sum_k eps_k(n) Omega_k(n) (E_{k+1} - E_k)(f w_n), 1 <= n < 2^N.
TransformResult mtransform(const DyadicGrid& f, std::uint64_t n, const WeightFamily& omega);
// Same with explicit weights[k], k = 0..|n|.
DyadicGrid mtransform_weights(const DyadicGrid& f, std::uint64_t n, const std::vector<double>& weights);

// P_n(Omega) = sum_k eps_k(n) Omega_k(n) r_k D_{2^k}, built by accumulating
// the Dirichlet kernels. Requires 1 <= n < 2^N.
DyadicGrid carleson_kernel(std::uint64_t n, const WeightFamily& omega, int N);
DyadicGrid carleson_kernel_weights(std::uint64_t n, const std::vector<double>& weights, int N);

// sup_{n in S} |M_n(Omega) f|, scanning S in ascending order.
TransformResult carleson_max(const DyadicGrid& f, const WeightFamily& omega, const IndexSet& S);

// E*(|f|) [sum_{k=1}^{|n|+1} |eps_{k-1} - eps_k| Omega_{k-1} + Omega_{|n|}], the
// pointwise majorant of |M_n(Omega) f| for nondecreasing weights obtained by
// summation by parts. The last term of the first sum equals Omega_{|n|}.
DyadicGrid domination_bound(const DyadicGrid& f, std::uint64_t n, const WeightFamily& omega);

}  // namespace dyadic
