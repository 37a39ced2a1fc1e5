#include "dyadic/witness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "dyadic/martingale.hpp"
#include "dyadic/walsh.hpp"
#include "dyadic/weight_analysis.hpp"

namespace dyadic {

GammaSpec GammaSpec::half_order() {
  GammaSpec g;
  g.tag = "half_order";
  g.per_order = [](int m) { return static_cast<std::int64_t>(m / 2); };
  return g;
}

GammaSpec GammaSpec::order_minus_one() {
  GammaSpec g;
  g.tag = "order_minus_one";
  g.per_order = [](int m) { return static_cast<std::int64_t>(m - 1); };
  return g;
}

GammaSpec GammaSpec::constant(std::int64_t c) {
  GammaSpec g;
  g.tag = "const(" + std::to_string(c) + ")";
  g.per_order = [c](int) { return c; };
  return g;
}

namespace {

void check_window(int a, int eta) {
  if (eta < 1) throw ValidationError("block length must be at least 1");
  if (a - 2 * eta - 1 < 0) {
    throw ValidationError("window [a-2eta-1, a-1] starts below digit 0 (a=" + std::to_string(a) +
                          ", eta=" + std::to_string(eta) + ")");
  }
  if (2 * eta + 1 > resolution_cap()) {
    throw ValidationError("window width " + std::to_string(2 * eta + 1) + " exceeds the resolution cap " +
                          std::to_string(resolution_cap()));
  }
}

// Smallest integer >= 2^{a/2}.
std::uint64_t ceil_sqrt_pow2(int a) {
  if (a % 2 == 0) return std::uint64_t{1} << (a / 2);
  const std::uint64_t target = std::uint64_t{1} << a;
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(target)));
  while (r * r > target) --r;
  while ((r + 1) * (r + 1) <= target) ++r;
  return r * r == target ? r : r + 1;
}

int local_digit(std::uint64_t x, int d, int R) { return static_cast<int>((x >> (R - 1 - d)) & 1u); }

// Low eta bits: bit j is local digit 1+j (global a-2eta+j).
std::uint64_t block_bits(const BlockParams& p, std::uint64_t x) {
  const int R = p.width();
  std::uint64_t bits = 0;
  for (int j = 0; j < p.eta; ++j) bits |= static_cast<std::uint64_t>(local_digit(x, 1 + j, R)) << j;
  return bits;
}

std::uint64_t reverse_bits(std::uint64_t v, int R) { return bit_reverse(v, R); }

}  // namespace

BlockParams block_params(int a, const GammaSpec& gamma) {
  if (a < 8) throw ValidationError("block_params: a must be at least 8");
  std::int64_t G = std::numeric_limits<std::int64_t>::max();
  if (gamma.per_order) {
    for (int m = a / 2; m <= a - 1; ++m) G = std::min(G, gamma.per_order(m));
  } else if (gamma.per_n) {
    if (a > 24) {
      throw ValidationError("block_params: a per-index gamma is enumerated and limited to a <= 24; "
                            "give an order formula for larger a");
    }
    for (std::uint64_t n = ceil_sqrt_pow2(a); n < (std::uint64_t{1} << a); ++n) G = std::min(G, gamma.per_n(n));
  } else {
    throw ValidationError("block_params: gamma has no evaluator");
  }
  BlockParams p;
  p.a = a;
  p.G = G;
  p.eta = static_cast<int>(std::min<std::int64_t>(a / 8, G < 0 ? 0 : G / 2));
  if (p.eta < 1) {
    throw ValidationError("scale too small: eta_a = min(floor(a/8), floor(G_a/2)) = 0 for a=" + std::to_string(a) +
                          ", G_a=" + std::to_string(G) + "; increase a or use a gamma with G_a >= 2");
  }
  check_window(a, p.eta);
  return p;
}

BlockParams block_params_direct(int a, int eta) {
  check_window(a, eta);
  BlockParams p;
  p.a = a;
  p.eta = eta;
  return p;
}

std::string rule_name(EaRule rule) { return rule == EaRule::literal ? "literal" : "coarse_pair"; }

EaRule parse_rule(const std::string& name) {
  if (name == "literal") return EaRule::literal;
  if (name == "coarse_pair") return EaRule::coarse_pair;
  throw ValidationError("unknown E_a rule '" + name + "' (expected literal or coarse_pair)");
}

DyadicGrid witness_poly(const BlockParams& p) {
  const int R = p.width();
  const int eta = p.eta;
  DyadicGrid w(R);
  const double scale = std::ldexp(1.0, eta) / std::sqrt(static_cast<double>(eta));
  for (std::uint64_t x = 0; x < w.size(); ++x) {
    bool same = true;
    int ones = 0;
    for (int j = 0; j < eta; ++j) {
      const int lo = local_digit(x, 1 + j, R);
      same = same && lo == local_digit(x, eta + 1 + j, R);
      ones += lo;
    }
    // prod (1 + r_p r_q) is 2^eta where the copies agree, else 0.
    w[x] = same ? scale * (eta - 2 * ones) : 0.0;
  }
  return w;
}

std::uint64_t window_index(const BlockParams& p, std::uint64_t full_index, int N) {
  return (full_index >> (N - p.a)) & ((std::uint64_t{1} << p.width()) - 1);
}

DyadicGrid embed(const BlockParams& p, const DyadicGrid& windowed, int N) {
  if (windowed.resolution() != p.width()) throw ValidationError("embed: grid is not a window grid");
  if (N < p.a) throw ValidationError("embed: resolution must be at least a");
  DyadicGrid out(N);
  for (std::uint64_t i = 0; i < out.size(); ++i) out[i] = windowed[window_index(p, i, N)];
  return out;
}

bool e_a_member(const BlockParams& p, std::uint64_t x, EaRule rule) {
  const int R = p.width();
  const int other = rule == EaRule::literal ? 0 : 1;
  return (local_digit(x, p.eta + 1, R) ^ local_digit(x, other, R)) == 1;
}

std::uint64_t block_choice(const BlockParams& p, std::uint64_t x, EaRule rule) {
  const int eta = p.eta;
  const std::uint64_t full = (std::uint64_t{1} << eta) - 1;
  const std::uint64_t bits = block_bits(p, x);
  std::uint64_t eps = 0;
  if (rule == EaRule::literal) {
    eps = 3 * std::popcount(bits) >= eta ? bits : (~bits & full);
  } else {
    if (eta < 2) throw ValidationError("coarse_pair rule needs eta >= 2");
    const std::uint64_t rest = bits & ~std::uint64_t{1};
    eps = 3 * std::popcount(rest) >= eta - 1 ? rest : (~bits & full & ~std::uint64_t{1});
  }
  if (eps == 0) throw std::logic_error("block_choice: chosen block is all zero");
  return eps;
}

std::uint64_t choose_n(const BlockParams& p, std::uint64_t x, EaRule rule) {
  const std::uint64_t lambda = block_choice(p, x, rule) << 1;
  return lambda + (lambda << p.eta);
}

std::optional<std::uint64_t> global_index(const BlockParams& p, std::uint64_t local_n) {
  const int len = std::bit_width(local_n);
  if (p.offset() + len > 64) return std::nullopt;
  return local_n << p.offset();
}

int alignment_count(const BlockParams& p, std::uint64_t x, EaRule rule) {
  const std::uint64_t eps = block_choice(p, x, rule);
  const int R = p.width();
  int plus = 0, minus = 0;
  for (int j = 0; j < p.eta; ++j) {
    if (!((eps >> j) & 1u)) continue;
    if (local_digit(x, 1 + j, R)) {
      ++minus;
    } else {
      ++plus;
    }
  }
  if (plus > minus) return plus;
  if (minus > plus) return minus;
  return 0;
}

namespace {

// Weights Omega_{offset+d}(n) for local digits d = 0..R-1 (zero where n has
// no digit).
std::vector<double> window_weights(const BlockParams& p, const WeightFamily& omega, std::uint64_t local_n) {
  const int R = p.width();
  const int o = p.offset();
  const int local_order = std::bit_width(local_n) - 1;
  std::vector<double> out(R, 0.0);
  if (omega.order_only()) {
    for (int d = 0; d <= local_order; ++d) {
      if ((local_n >> d) & 1u) out[d] = omega.omega_by_order(o + d, o + local_order);
    }
    return out;
  }
  if (p.a > 40) {
    throw ValidationError("weight family '" + omega.id() + "' needs the full index n; use a <= 40 or an order-only family");
  }
  const auto n = global_index(p, local_n);
  const auto row = omega.row(*n);
  for (int d = 0; d <= local_order; ++d) {
    if ((local_n >> d) & 1u) out[d] = row[o + d];
  }
  return out;
}

double closed_form(const BlockParams& p, std::uint64_t x, std::uint64_t eps, std::uint64_t local_n,
                   const std::vector<double>& wt, EaRule rule) {
  const int R = p.width();
  double sum = 0;
  for (int j = 0; j < p.eta; ++j) {
    if (!((eps >> j) & 1u)) continue;
    sum += wt[1 + j] * (local_digit(x, 1 + j, R) ? -1.0 : 1.0);
  }
  sum /= std::sqrt(static_cast<double>(p.eta));
  if (rule == EaRule::literal) {
    const bool odd = std::popcount(reverse_bits(local_n, R) & x) & 1;
    if (odd) sum = -sum;
  }
  return sum;
}

double transform_at(const std::vector<std::vector<double>>& levels, std::uint64_t x, std::uint64_t local_n,
                    const std::vector<double>& wt, int R) {
  double v = 0;
  for (int d = 0; d < R; ++d) {
    if (!((local_n >> d) & 1u)) continue;
    v += wt[d] * (levels[d + 1][x >> (R - d - 1)] - levels[d][x >> (R - d)]);
  }
  return v;
}

}  // namespace

WitnessReport witness_eval(const BlockParams& p, const WeightFamily& omega, const WitnessOptions& opts) {
  check_window(p.a, p.eta);
  const int R = p.width();
  const int eta = p.eta;
  const EaRule rule = opts.rule;
  if (rule == EaRule::coarse_pair && eta < 2) throw ValidationError("coarse_pair rule needs eta >= 2");

  WitnessReport rep;
  rep.a = p.a;
  rep.eta = eta;
  rep.rule = rule_name(rule);
  rep.c_empirical = opts.c_empirical;
  rep.lambda = opts.c0 * std::sqrt(static_cast<double>(eta)) * opts.c_empirical;

  DyadicGrid w = witness_poly(p);
  rep.l1_norm = l1_norm(w);

  const std::size_t patterns = std::size_t{1} << eta;
  std::vector<std::vector<double>> weight_table(patterns);
  auto weights_for = [&](std::uint64_t eps) -> const std::vector<double>& {
    auto& slot = weight_table[eps];
    if (slot.empty()) {
      const std::uint64_t lambda = eps << 1;
      slot = window_weights(p, omega, lambda + (lambda << eta));
    }
    return slot;
  };

  std::vector<double> values;
  values.reserve(w.size() / 2);
  std::size_t members = 0;
  rep.min_alignment = std::numeric_limits<int>::max();
  auto record = [&](std::uint64_t x, std::uint64_t eps, double m) {
    const std::uint64_t lambda = eps << 1;
    const std::uint64_t local_n = lambda + (lambda << eta);
    const double cf = closed_form(p, x, eps, local_n, weights_for(eps), rule);
    rep.closed_form_max_err = std::max(rep.closed_form_max_err, std::abs(m - cf));
    rep.min_alignment = std::min(rep.min_alignment, alignment_count(p, x, rule));
    values.push_back(std::abs(m));
  };

  if (!opts.per_index_transform) {
    const auto levels = block_pyramid(w.samples(), R);
    for (std::uint64_t x = 0; x < w.size(); ++x) {
      if (!e_a_member(p, x, rule)) continue;
      ++members;
      const std::uint64_t eps = block_choice(p, x, rule);
      const std::uint64_t lambda = eps << 1;
      record(x, eps, transform_at(levels, x, lambda + (lambda << eta), weights_for(eps), R));
    }
  } else {
    // Group the members of E_a by their index, then run the full transform
    // M_n(Omega) W_a once per index.
    std::vector<std::vector<std::uint64_t>> by_pattern(patterns);
    for (std::uint64_t x = 0; x < w.size(); ++x) {
      if (!e_a_member(p, x, rule)) continue;
      ++members;
      by_pattern[block_choice(p, x, rule)].push_back(x);
    }
    for (std::uint64_t eps = 0; eps < patterns; ++eps) {
      if (by_pattern[eps].empty()) continue;
      const std::uint64_t lambda = eps << 1;
      const std::uint64_t local_n = lambda + (lambda << eta);
      const auto& wt = weights_for(eps);
      std::vector<double> row(wt.begin(), wt.begin() + std::bit_width(local_n));
      const DyadicGrid m = mtransform_weights(w, local_n, row);
      for (std::uint64_t x : by_pattern[eps]) record(x, eps, m[x]);
    }
  }

  std::size_t distinct = 0;
  for (const auto& slot : weight_table) distinct += slot.empty() ? 0 : 1;
  rep.distinct_indices = distinct;
  rep.e_a_measure = std::ldexp(static_cast<double>(members), -R);
  if (values.empty()) {
    rep.min_alignment = 0;
    return rep;
  }
  std::size_t above = 0;
  for (double v : values) above += v > rep.lambda ? 1 : 0;
  rep.min_on_Ea = *std::min_element(values.begin(), values.end());
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  rep.median_on_Ea = *mid;
  rep.weak_ratio = rep.lambda * std::ldexp(static_cast<double>(above), -R) / rep.l1_norm;
  return rep;
}

std::string to_json(const WitnessReport& r) {
  nlohmann::ordered_json j;
  j["a"] = r.a;
  j["eta"] = r.eta;
  j["l1_norm"] = r.l1_norm;
  j["e_a_measure"] = r.e_a_measure;
  j["min_on_Ea"] = r.min_on_Ea;
  j["weak_ratio"] = r.weak_ratio;
  j["lambda"] = r.lambda;
  j["c_empirical"] = r.c_empirical;
  j["median_on_Ea"] = r.median_on_Ea;
  j["closed_form_max_err"] = r.closed_form_max_err;
  j["min_alignment"] = r.min_alignment;
  j["rule"] = r.rule;
  return j.dump();
}

DyadicGrid lemma1_scale(const DyadicGrid& w, double gamma) {
  if (!(gamma >= 1.0)) throw ValidationError("lemma1_scale: gamma must be >= 1");
  return (1.0 / std::pow(gamma, 0.25)) * w;
}

double DyadicSet::measure() const {
  std::size_t count = 0;
  for (auto m : members) count += m ? 1 : 0;
  return std::ldexp(static_cast<double>(count), -rank);
}

DyadicGrid DyadicSet::indicator(int N) const {
  if (N < rank) throw ValidationError("DyadicSet::indicator: resolution below the set's rank");
  DyadicGrid g(N);
  for (std::uint64_t i = 0; i < g.size(); ++i) g[i] = members[i >> (N - rank)] ? 1.0 : 0.0;
  return g;
}

DyadicSet DyadicSet::whole(int rank) {
  DyadicSet s;
  s.rank = rank;
  s.members.assign(std::size_t{1} << rank, 1);
  return s;
}

DyadicSet DyadicSet::random(int rank, double density, std::mt19937_64& rng) {
  DyadicSet s;
  s.rank = rank;
  s.members.assign(std::size_t{1} << rank, 0);
  for (auto& m : s.members) m = unit_double(rng) < density ? 1 : 0;
  if (std::none_of(s.members.begin(), s.members.end(), [](auto v) { return v != 0; })) s.members[0] = 1;
  return s;
}

Lemma2Result lemma2_poly(const SummabilityMatrix& T, int b, const DyadicSet& A, double alpha, int N) {
  if (b < 0 || b + 2 > N) throw ValidationError("lemma2_poly: need 0 <= b and b + 2 <= N");
  if (A.rank > b) throw ValidationError("lemma2_poly: A must be a union of intervals of rank <= b");
  if (A.members.size() != (std::size_t{1} << A.rank)) throw ValidationError("lemma2_poly: malformed set");
  if (A.measure() == 0) throw ValidationError("lemma2_poly: A is empty");

  Lemma2Result res;
  res.target = rademacher(b, N) * A.indicator(N);
  res.target *= alpha;
  const std::uint64_t n = std::uint64_t{1} << (b + 2);
  const TailSums ts = tail_sums(T, n);
  const std::uint64_t band_lo = std::uint64_t{1} << b, band_hi = std::uint64_t{1} << (b + 1);
  res.min_tail = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = band_lo; k < band_hi; ++k) res.min_tail = std::min(res.min_tail, ts.tail(k + 1));
  res.proof_bound = static_cast<double>(n - (band_hi - 1)) / static_cast<double>(n + 1);
  if (!(res.min_tail > 0)) {
    throw ValidationError("lemma2_poly: tail sums vanish on the band [2^b, 2^{b+1}) for " + T.id());
  }
  SpectrumVector s = fwht(res.target);
  for (std::uint64_t k = 0; k < s.coefficients.size(); ++k) {
    if (k >= band_lo && k < band_hi) {
      s.coefficients[k] /= ts.tail(k + 1);
    } else {
      s.coefficients[k] = 0.0;
    }
  }
  res.w0 = inverse_fwht(s);
  res.reproduction_error = max_abs_diff(mean(T, res.w0, n), res.target);
  const Norms nm = norms(res.w0);
  res.l1 = nm.l1;
  res.l2 = nm.l2;
  res.l2_bound = std::abs(alpha) * std::sqrt(A.measure()) / res.min_tail;
  return res;
}

F0Report f0_demo(const SummabilityMatrix& T, const std::vector<DemoTerm>& schedule, int N, EaRule rule) {
  check_resolution(N);
  const std::size_t K = schedule.size();
  if (K < 1 || K > 4) throw ValidationError("f0_demo: schedule must have 1 to 4 terms");
  for (std::size_t k = 0; k < K; ++k) {
    const DemoTerm& t = schedule[k];
    const std::string where = "f0_demo term " + std::to_string(k + 1) + ": ";
    if (t.b < 0 || t.b + 2 > N) throw ValidationError(where + "need b + 2 <= N");
    if (t.a > N) throw ValidationError(where + "need a <= N");
    check_window(t.a, t.eta);
    if (!(t.b + 1 < t.a - 2 * t.eta)) throw ValidationError(where + "need b + 1 < a - 2 eta (spectral separation)");
    if (k + 1 < K && t.a > schedule[k + 1].b) throw ValidationError(where + "need a_k <= b_{k+1}");
    if (rule == EaRule::coarse_pair && t.eta < 2) throw ValidationError(where + "coarse_pair needs eta >= 2");
  }

  F0Report rep;
  rep.N = N;
  std::vector<DyadicGrid> w0(K), w1(K);
  std::vector<BlockParams> params(K);
  DyadicGrid f0(N);
  for (std::size_t k = 0; k < K; ++k) {
    const DemoTerm& t = schedule[k];
    w0[k] = lemma2_poly(T, t.b, t.A, t.alpha, N).w0;
    params[k] = block_params_direct(t.a, t.eta);
    w1[k] = lemma1_scale(embed(params[k], witness_poly(params[k]), N), t.eta);
    f0 += w0[k];
    f0 += w1[k];
  }
  rep.f0_l1 = l1_norm(f0);

  for (std::size_t k = 0; k < K; ++k) {
    const DemoTerm& t = schedule[k];
    DemoTermReport r;
    r.b = t.b;
    r.a = t.a;
    r.eta = t.eta;
    r.alpha = t.alpha;
    r.a_measure = t.A.measure();
    r.w0_l1 = l1_norm(w0[k]);
    r.w1_l1 = l1_norm(w1[k]);
    rep.l1_bound += r.w0_l1 + r.w1_l1;

    const std::uint64_t nb = std::uint64_t{1} << (t.b + 2);
    const DyadicGrid mean_f0 = mean(T, f0, nb);
    const DyadicGrid cross = mean(T, f0 - w0[k], nb);
    r.low_observed = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < f0.size(); ++i) {
      if (!t.A.members[i >> (N - t.A.rank)]) continue;
      r.low_observed = std::min(r.low_observed, std::abs(mean_f0[i]));
      r.low_cross = std::max(r.low_cross, std::abs(cross[i]));
    }
    const TailSums ts = tail_sums(T, nb);
    for (std::size_t l = 0; l < k; ++l) {
      const double weight = ts.tail(std::uint64_t{1} << schedule[l].a);
      DyadicGrid diff = mean(T, w1[l], nb);
      diff -= weight * w1[l];
      r.partial_sum_form_error = std::max(r.partial_sum_form_error, max_abs(diff));
    }

    // Witness indices n_a(x) on E_a.
    std::map<std::uint64_t, std::vector<std::uint64_t>> groups;
    for (std::uint64_t i = 0; i < f0.size(); ++i) {
      const std::uint64_t x = window_index(params[k], i, N);
      if (!e_a_member(params[k], x, rule)) continue;
      groups[*global_index(params[k], choose_n(params[k], x, rule))].push_back(i);
    }
    r.witness_min = std::numeric_limits<double>::infinity();
    double c_T = std::numeric_limits<double>::infinity();
    for (const auto& [n, xs] : groups) {
      const DyadicGrid m_all = mean(T, f0, n);
      const DyadicGrid m_rest = mean(T, f0 - w1[k], n);
      for (std::uint64_t i : xs) {
        r.witness_min = std::min(r.witness_min, std::abs(m_all[i]));
        r.witness_cross = std::max(r.witness_cross, std::abs(m_rest[i]));
      }
      c_T = std::min(c_T, T.tilde(std::uint64_t{1} << (t.a - 2 * t.eta), n));
    }
    r.witness_predicted = std::pow(static_cast<double>(t.eta), 0.25) * c_T / 3.0;

    bool separated = t.b + 1 < t.a - 2 * t.eta;
    if (k + 1 < K) separated = separated && t.a < schedule[k + 1].b / 2.0 - 1.0;
    const double log2_needed = 8.0 * std::log2(static_cast<double>(k + 1)) + 4.0 * t.b;
    r.asymptotic_schedule = separated && std::log2(static_cast<double>(t.eta)) > log2_needed;
    rep.terms.push_back(r);
  }
  return rep;
}

}  // namespace dyadic
