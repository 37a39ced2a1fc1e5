#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dyadic/core.hpp"
#include "dyadic/summability.hpp"
#include "dyadic/weights.hpp"

namespace dyadic {

// A divergence sequence n -> gamma(n). per_order is set when gamma depends
// on n only through |n|; then G_a is computed without enumerating indices.
struct GammaSpec {
  std::string tag;
  std::function<std::int64_t(int order)> per_order;
  std::function<std::int64_t(std::uint64_t n)> per_n;

  static GammaSpec half_order();       // floor(|n|/2)
  static GammaSpec order_minus_one();  // |n| - 1
  static GammaSpec constant(std::int64_t c);
};

// Block construction parameters. The window holds global digits
// offset() .. a-1; local digit d is global digit offset()+d.
struct BlockParams {
  int a = 0;
  std::int64_t G = -1;  // -1 when built directly from eta
  int eta = 0;

  int offset() const { return a - 2 * eta - 1; }
  int width() const { return 2 * eta + 1; }
};

// G_a = inf{gamma(n) : 2^{a/2} <= n < 2^a}, eta_a = min(floor(a/8), floor(G_a/2)).
BlockParams block_params(int a, const GammaSpec& gamma);
// Explicit block length, for demos and tests.
BlockParams block_params_direct(int a, int eta);

// literal: E_a = {x_{a-eta} xor x_{a-2eta-1} = 1}, threshold rule on all eta
// block digits. coarse_pair: E_a = {x_{a-eta} xor x_{a-2eta} = 1}, the
// coarsest block digit of n_a is 0 and the threshold rule runs on the
// remaining eta-1 digits (needs eta >= 2).
enum class EaRule { literal, coarse_pair };
std::string rule_name(EaRule rule);
EaRule parse_rule(const std::string& name);

// W_a on the window (resolution 2 eta + 1).
DyadicGrid witness_poly(const BlockParams& p);
// Copies a windowed grid onto a full grid of resolution N >= a.
DyadicGrid embed(const BlockParams& p, const DyadicGrid& windowed, int N);
// Window sample index of a full-grid sample index.
std::uint64_t window_index(const BlockParams& p, std::uint64_t full_index, int N);

bool e_a_member(const BlockParams& p, std::uint64_t x, EaRule rule);
// Bit mask of the chosen block digits eps_{a-2eta+j}, bit j.
std::uint64_t block_choice(const BlockParams& p, std::uint64_t x, EaRule rule);
// n_a(x) >> offset(), i.e. n_a(x) in window digits.
std::uint64_t choose_n(const BlockParams& p, std::uint64_t x, EaRule rule);
// n_a(x) itself when it fits in 64 bits.
std::optional<std::uint64_t> global_index(const BlockParams& p, std::uint64_t local_n);
// #{k in block : eps_k r_k(x) has the sign of sum_k eps_k r_k(x)}.
int alignment_count(const BlockParams& p, std::uint64_t x, EaRule rule);

struct WitnessOptions {
  EaRule rule = EaRule::literal;
  double c0 = 0.3;
  double c_empirical = 1.0;
  // Evaluate M_n per distinct n on the full window instead of the shared
  // pyramid (slower; used as a cross-check).
  bool per_index_transform = false;
};

struct WitnessReport {
  int a = 0;
  int eta = 0;
  std::string rule;
  double l1_norm = 0;
  double e_a_measure = 0;
  double min_on_Ea = 0;
  double median_on_Ea = 0;
  double weak_ratio = 0;
  double lambda = 0;
  double c_empirical = 0;
  double closed_form_max_err = 0;
  int min_alignment = 0;
  std::size_t distinct_indices = 0;
};

// Evaluates M_{n_a(x)}(Omega) W_a at every x in E_a by conditional
// expectations (W_a w_n = W_a for every chosen n, so one pyramid of W_a
// serves all n), compares with the closed form and computes the weak ratio
// lambda |{x in E_a : |M| > lambda}| / ||W_a||_1 with lambda = c0 sqrt(eta) c.
WitnessReport witness_eval(const BlockParams& p, const WeightFamily& omega, const WitnessOptions& opts = {});
std::string to_json(const WitnessReport& r);

// W / gamma^{1/4}.
DyadicGrid lemma1_scale(const DyadicGrid& w, double gamma);

// Union of rank-`rank` dyadic intervals.
struct DyadicSet {
  int rank = 0;
  std::vector<std::uint8_t> members;  // size 2^rank

  double measure() const;
  DyadicGrid indicator(int N) const;
  static DyadicSet whole(int rank);
  static DyadicSet random(int rank, double density, std::mt19937_64& rng);
};

struct Lemma2Result {
  DyadicGrid w0;
  DyadicGrid target;  // alpha r_b 1_A
  double min_tail = 0;     // min T_{2^{b+2}}^{(k+1)} over 2^b <= k < 2^{b+1}
  double proof_bound = 0;  // (2^{b+1}+1)/(2^{b+2}+1)
  double reproduction_error = 0;
  double l1 = 0;
  double l2 = 0;
  double l2_bound = 0;  // alpha |A|^{1/2} / min_tail
};

// W^0 with spectrum in [2^b, 2^{b+1}) and T_{2^{b+2}}(W^0) = alpha r_b 1_A.
Lemma2Result lemma2_poly(const SummabilityMatrix& T, int b, const DyadicSet& A, double alpha, int N);

struct DemoTerm {
  int b = 0;
  double alpha = 1;
  DyadicSet A;
  int a = 0;
  int eta = 1;
};

struct DemoTermReport {
  int b = 0, a = 0, eta = 0;
  double alpha = 0;
  double a_measure = 0;
  double w0_l1 = 0;
  double w1_l1 = 0;
  // At n = 2^{b+2} on A.
  double low_observed = 0;
  double low_cross = 0;  // ||T_n(f0 - W^0)||_inf on A
  // max over earlier W^1_l of ||T_n(W^1_l) - T_n^{(2^{a_l})} W^1_l||_inf.
  double partial_sum_form_error = 0;
  // At n_a(x), x in E_a.
  double witness_min = 0;
  double witness_predicted = 0;  // eta^{1/4} c_T / 3
  double witness_cross = 0;      // max |T_n(f0 - W^1)| at those x
  // Scale separation b+1 < a-2eta and a < b_next/2 - 1, and gamma > k^8 2^{4b}.
  bool asymptotic_schedule = false;
};

struct F0Report {
  int N = 0;
  double f0_l1 = 0;
  double l1_bound = 0;
  std::vector<DemoTermReport> terms;
};

// f0 = sum_k (W^0_{b_k} + W^1_{a_k}) on a grid of resolution N, with W^1 the
// witness scaled by eta^{-1/4}. Requires 1 <= K <= 4,
// b_k + 1 < a_k - 2 eta_k, a_k <= N, b_k + 2 <= N and a_k <= b_{k+1}.
F0Report f0_demo(const SummabilityMatrix& T, const std::vector<DemoTerm>& schedule, int N,
                 EaRule rule = EaRule::literal);

}  // namespace dyadic
