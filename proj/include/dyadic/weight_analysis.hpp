#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/summability.hpp"
#include "dyadic/weights.hpp"

namespace dyadic {

// Omega_s(n) = T~_{2^s,n}.
WeightFamily from_matrix(const SummabilityMatrix& T);
WeightFamily t3_family(double L);

// sum_{k=0}^{|n|} |eps_{k-1}(n) - eps_k(n)| Omega_k(n).
double variation_sum(const WeightFamily& omega, std::uint64_t n);
// sum_{k=0}^{|n|} Omega_k(n).
double omega_sum(const WeightFamily& omega, std::uint64_t n);
// Same for an order-only family at order m.
double omega_sum_by_order(const WeightFamily& omega, int order);

struct ScaleExtrema {
  double min = 0;
  double max = 0;
};
// Extrema of Omega_{|n|}(n) over the given indices.
ScaleExtrema top_scale_stats(const WeightFamily& omega, const std::vector<std::uint64_t>& ns);

// Index set near the top scale: kappa|n| < k <= |n|, or |n| - w_n < k <= |n|.
class ConeSpec {
 public:
  static ConeSpec kappa(double kappa);
  static ConeSpec omega(ParamSequence width);

  bool is_kappa() const { return !width_.fn; }
  double kappa_value() const { return kappa_; }
  const ParamSequence& width_sequence() const { return width_; }
  std::string id() const;

  bool contains(int k, std::uint64_t n) const;
  // (1-kappa)|n|/2 or w_n; w_n may be real.
  double real_width(std::uint64_t n) const;
  // h(n) = floor(real_width(n)).
  int width(std::uint64_t n) const;
  // Smallest k in the cone at n.
  int lowest(std::uint64_t n) const;

  // Omega variant only: w_n nondecreasing and |n|/w_n nondecreasing over
  // the given indices (sorted ascending), with w_n >= 1.
  void validate(const std::vector<std::uint64_t>& ns) const;
  // Every (k, n) of this cone lies in the other one, for the given n.
  bool subset_of(const ConeSpec& other, const std::vector<std::uint64_t>& ns) const;

 private:
  double kappa_ = 0.5;
  ParamSequence width_;
};

// 2^m, 2^{m+1}-1 and per_order-2 seeded random indices of each order m.
std::vector<std::uint64_t> sample_indices(int order_lo, int order_hi, int per_order, std::uint64_t seed);

struct RatioRow {
  int order = 0;
  std::size_t count = 0;
  double min = 0, max = 0, mean = 0;
  double max_dev = 0;  // max |ratio - L|
  double top_dev = 0;  // max |ratio - L| at k = |n|
};

struct RatioScan {
  double candidate = 1.0;
  std::vector<RatioRow> rows;
  // max_dev does not increase from one order to the next (slack 1e-12).
  bool shrinking = false;
};

// Ratios Omega_k(n)/Omega_{k-1}(n) over cone members with k >= 1, grouped
// by |n|.
RatioScan cone_ratio_scan(const WeightFamily& omega, const ConeSpec& cone,
                          const std::vector<std::uint64_t>& ns, double candidate = 1.0);

struct GammaRow {
  std::uint64_t n = 0;
  int order = 0;
  int width = 0;
  int gamma = 1;
  bool fallback = false;
  double lme = 0;       // Omega_{|n|-gamma}(n)
  double top = 0;       // Omega_{|n|}(n)
  bool e_bound = false; // lme >= Omega_{|n|}(n)/e
  // max theta_k over the window that would be needed for gamma+1 (NaN when
  // gamma equals the cone width).
  double blocking_theta = 0;
  double variation_sum = 0;
  double omega_sum = 0;
};

struct DivergenceResult {
  std::vector<GammaRow> rows;
  std::vector<std::pair<int, int>> inf_gamma_by_order;  // (m, inf_{|n|>=m} gamma)
  bool gamma_grows = false;
  double sup_gamma_ratio = 0;  // sup gamma(n)/|n|
  double c_empirical = 0;
  bool refused = false;
  // Refusal certificate.
  double ratio_floor = 0;  // min Omega_k/Omega_{k-1} over cone rows
  ScaleExtrema top_scale;
  std::optional<double> log_bound;  // log_beta(C/c) when the floor exceeds 1
  bool gamma_within_log_bound = true;
};

// gamma(n) = the largest 1 <= j <= h(n) with max_{|n|-j<k<=|n|} theta_k(n) <= 1/j,
// theta_k = Omega_k/Omega_{k-1} - 1; fallback 1. Indices must be sorted and of
// order >= 1.
DivergenceResult divergence_search(const WeightFamily& omega, const ConeSpec& cone,
                                   const std::vector<std::uint64_t>& ns);

struct Prop2Result {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (n_m, gamma_m = m)
  double c = 0.5;
  bool stopped = false;
  std::size_t stopped_at_m = 0;
  bool range_exhausted = false;  // stopped because m exceeded the range
  std::optional<double> certificate;  // sup_n A_n / a_n
  std::size_t certificate_argmax = 0;
};

// For m = 1, 2, ...: the next n > n_{m-1} with n >= m and a_{n-m} >= a_n/2.
// Stops at the first m without such n and reports sup A_n/a_n,
// A_n = sum_{j<=n} a_j. The sequence must be positive and nondecreasing.
Prop2Result prop2_search(const std::vector<double>& a);

// a_k = Q_{2^k}, k = 0..k_max, for a Norlund sequence q.
std::vector<double> norlund_dyadic_sequence(const ParamSequence& q, int k_max);

}  // namespace dyadic
