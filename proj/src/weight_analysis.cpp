#include "dyadic/weight_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "dyadic/core.hpp"

namespace dyadic {

WeightFamily from_matrix(const SummabilityMatrix& T) {
  return WeightFamily(
      "from_matrix(" + T.id() + ")",
      WeightFamily::ByIndex([T](int k, std::uint64_t n) { return T.tilde(std::uint64_t{1} << k, n); }),
      WeightFamily::RowFn([T](std::uint64_t n) { return T.dyadic_tildes(n); }));
}

WeightFamily t3_family(double L) { return WeightFamily::t3(L); }

double variation_sum(const WeightFamily& omega, std::uint64_t n) {
  const WalshIndex idx(n);
  const auto w = omega.row(n);
  double sum = 0;
  for (int k = 0; k <= idx.order(); ++k) sum += std::abs(idx.digit(k - 1) - idx.digit(k)) * w[k];
  return sum;
}

double omega_sum(const WeightFamily& omega, std::uint64_t n) {
  double sum = 0;
  for (double v : omega.row(n)) sum += v;
  return sum;
}

double omega_sum_by_order(const WeightFamily& omega, int order) {
  double sum = 0;
  for (double v : omega.row_by_order(order)) sum += v;
  return sum;
}

ScaleExtrema top_scale_stats(const WeightFamily& omega, const std::vector<std::uint64_t>& ns) {
  if (ns.empty()) throw ValidationError("top_scale_stats: empty range");
  ScaleExtrema e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::uint64_t n : ns) {
    const double v = omega.omega(WalshIndex(n).order(), n);
    e.min = std::min(e.min, v);
    e.max = std::max(e.max, v);
  }
  return e;
}

ConeSpec ConeSpec::kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ValidationError("cone kappa must lie in (0,1)");
  ConeSpec c;
  c.kappa_ = kappa;
  return c;
}

ConeSpec ConeSpec::omega(ParamSequence width) {
  if (!width.fn) throw ValidationError("omega cone needs a width sequence");
  ConeSpec c;
  c.width_ = std::move(width);
  return c;
}

std::string ConeSpec::id() const {
  if (is_kappa()) return "kappa(" + format_double(kappa_) + ")";
  return "omega(" + width_.tag + ")";
}

double ConeSpec::real_width(std::uint64_t n) const {
  const int m = WalshIndex(n).order();
  if (is_kappa()) return (1.0 - kappa_) * m / 2.0;
  const double w = width_(n);
  if (!std::isfinite(w) || w < 0) {
    throw ValidationError("cone width w_" + std::to_string(n) + " must be finite and nonnegative");
  }
  return w;
}

int ConeSpec::width(std::uint64_t n) const { return static_cast<int>(std::floor(real_width(n))); }

bool ConeSpec::contains(int k, std::uint64_t n) const {
  const int m = WalshIndex(n).order();
  if (k > m) return false;
  if (is_kappa()) return kappa_ * m < k;
  return m - real_width(n) < k;
}

int ConeSpec::lowest(std::uint64_t n) const {
  const int m = WalshIndex(n).order();
  if (is_kappa()) return static_cast<int>(std::floor(kappa_ * m)) + 1;
  return std::max(0, static_cast<int>(std::floor(m - real_width(n))) + 1);
}

void ConeSpec::validate(const std::vector<std::uint64_t>& ns) const {
  if (is_kappa()) return;
  double prev_w = -1, prev_q = -1;
  for (std::uint64_t n : ns) {
    const double w = real_width(n);
    if (w < 1) throw ValidationError("omega cone: width at n=" + std::to_string(n) + " must be >= 1");
    const double q = WalshIndex(n).order() / w;
    if (w < prev_w) throw ValidationError("omega cone: width decreases at n=" + std::to_string(n));
    if (q < prev_q) throw ValidationError("omega cone: |n|/w_n decreases at n=" + std::to_string(n));
    prev_w = w;
    prev_q = q;
  }
}

bool ConeSpec::subset_of(const ConeSpec& other, const std::vector<std::uint64_t>& ns) const {
  for (std::uint64_t n : ns) {
    const int m = WalshIndex(n).order();
    for (int k = lowest(n); k <= m; ++k) {
      if (contains(k, n) && !other.contains(k, n)) return false;
    }
  }
  return true;
}

std::vector<std::uint64_t> sample_indices(int order_lo, int order_hi, int per_order, std::uint64_t seed) {
  if (order_lo < 0 || order_hi > 62 || order_lo > order_hi) {
    throw ValidationError("sample_indices: orders must satisfy 0 <= lo <= hi <= 62");
  }
  if (per_order < 1) throw ValidationError("sample_indices: need at least one index per order");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> out;
  for (int m = order_lo; m <= order_hi; ++m) {
    const std::uint64_t lo = std::uint64_t{1} << m;
    const std::uint64_t hi = (lo << 1) - 1;
    std::vector<std::uint64_t> picks{lo};
    if (per_order >= 2 && hi != lo) picks.push_back(hi);
    while (static_cast<int>(picks.size()) < per_order && hi - lo + 1 > picks.size()) {
      const std::uint64_t v = lo + rng() % (hi - lo + 1);
      if (std::find(picks.begin(), picks.end(), v) == picks.end()) picks.push_back(v);
    }
    std::sort(picks.begin(), picks.end());
    out.insert(out.end(), picks.begin(), picks.end());
  }
  return out;
}

RatioScan cone_ratio_scan(const WeightFamily& omega, const ConeSpec& cone, const std::vector<std::uint64_t>& ns,
                          double candidate) {
  cone.validate(ns);
  RatioScan scan;
  scan.candidate = candidate;
  std::map<int, RatioRow> by_order;
  std::map<int, double> sums;
  for (std::uint64_t n : ns) {
    const int m = WalshIndex(n).order();
    const auto w = omega.row(n);
    const int k_lo = std::max(1, cone.lowest(n));
    if (k_lo > m) throw ValidationError("cone has no member with k >= 1 at |n| = " + std::to_string(m));
    auto [it, fresh] = by_order.try_emplace(m);
    RatioRow& row = it->second;
    if (fresh) {
      row.order = m;
      row.min = std::numeric_limits<double>::infinity();
      row.max = -std::numeric_limits<double>::infinity();
    }
    for (int k = k_lo; k <= m; ++k) {
      const double r = w[k - 1] > 0 ? w[k] / w[k - 1] : std::numeric_limits<double>::infinity();
      row.min = std::min(row.min, r);
      row.max = std::max(row.max, r);
      sums[m] += r;
      ++row.count;
      const double dev = std::abs(r - candidate);
      row.max_dev = std::max(row.max_dev, dev);
      if (k == m) row.top_dev = std::max(row.top_dev, dev);
    }
  }
  for (auto& [m, row] : by_order) {
    row.mean = sums[m] / static_cast<double>(row.count);
    scan.rows.push_back(row);
  }
  scan.shrinking = true;
  for (std::size_t i = 1; i < scan.rows.size(); ++i) {
    if (scan.rows[i].max_dev > scan.rows[i - 1].max_dev + 1e-12) scan.shrinking = false;
  }
  return scan;
}

DivergenceResult divergence_search(const WeightFamily& omega, const ConeSpec& cone,
                                   const std::vector<std::uint64_t>& ns) {
  if (ns.empty()) throw ValidationError("divergence_search: empty range");
  if (!std::is_sorted(ns.begin(), ns.end())) throw ValidationError("divergence_search: indices must be sorted");
  cone.validate(ns);
  DivergenceResult res;
  res.ratio_floor = std::numeric_limits<double>::infinity();
  res.c_empirical = std::numeric_limits<double>::infinity();
  for (std::uint64_t n : ns) {
    const int m = WalshIndex(n).order();
    if (m < 1) throw ValidationError("divergence_search: indices need |n| >= 1");
    const auto w = omega.row(n);
    // theta[k] for k = 1..m.
    std::vector<double> theta(m + 1, 0.0);
    for (int k = 1; k <= m; ++k) {
      theta[k] = w[k - 1] > 0 ? w[k] / w[k - 1] - 1.0 : std::numeric_limits<double>::infinity();
    }
    for (int k = std::max(1, cone.lowest(n)); k <= m; ++k) res.ratio_floor = std::min(res.ratio_floor, theta[k] + 1.0);

    GammaRow row;
    row.n = n;
    row.order = m;
    row.width = std::min(cone.width(n), m);
    row.gamma = 0;
    // max theta over (m-j, m] grows with j while 1/j shrinks, so the
    // admissible j form an initial segment.
    double window_max = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= row.width; ++j) {
      window_max = std::max(window_max, theta[m - j + 1]);
      if (window_max <= 1.0 / j) {
        row.gamma = j;
      } else {
        break;
      }
    }
    if (row.gamma == 0) {
      row.gamma = 1;
      row.fallback = true;
    }
    if (row.gamma < row.width) {
      double bm = -std::numeric_limits<double>::infinity();
      for (int k = m - row.gamma; k <= m; ++k) bm = std::max(bm, theta[k]);
      row.blocking_theta = bm;
    } else {
      row.blocking_theta = std::numeric_limits<double>::quiet_NaN();
    }
    row.lme = w[m - row.gamma];
    row.top = w[m];
    row.e_bound = row.lme >= row.top / std::exp(1.0);
    row.variation_sum = variation_sum(omega, n);
    row.omega_sum = 0;
    for (double v : w) row.omega_sum += v;
    res.c_empirical = std::min(res.c_empirical, row.lme);
    res.sup_gamma_ratio = std::max(res.sup_gamma_ratio, static_cast<double>(row.gamma) / m);
    res.rows.push_back(row);
  }

  // inf over |n| >= m of gamma, for each order present.
  std::map<int, int> min_by_order;
  for (const auto& r : res.rows) {
    auto it = min_by_order.find(r.order);
    if (it == min_by_order.end() || r.gamma < it->second) min_by_order[r.order] = r.gamma;
  }
  int running = std::numeric_limits<int>::max();
  for (auto it = min_by_order.rbegin(); it != min_by_order.rend(); ++it) {
    running = std::min(running, it->second);
    res.inf_gamma_by_order.emplace_back(it->first, running);
  }
  std::reverse(res.inf_gamma_by_order.begin(), res.inf_gamma_by_order.end());
  res.gamma_grows = res.inf_gamma_by_order.back().second > res.inf_gamma_by_order.front().second;
  res.refused = !res.gamma_grows || !(res.c_empirical > 0);

  res.top_scale = top_scale_stats(omega, ns);
  if (res.ratio_floor > 1.0 && res.c_empirical > 0) {
    res.log_bound = std::log(res.top_scale.max / res.c_empirical) / std::log(res.ratio_floor);
    int max_gamma = 0;
    for (const auto& r : res.rows) max_gamma = std::max(max_gamma, r.gamma);
    res.gamma_within_log_bound = max_gamma <= *res.log_bound + 1e-12;
  }
  return res;
}

Prop2Result prop2_search(const std::vector<double>& a) {
  if (a.empty()) throw ValidationError("prop2_search: empty sequence");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] > 0) || !std::isfinite(a[k])) {
      throw ValidationError("prop2_search: a_" + std::to_string(k) + " must be positive and finite");
    }
    if (k > 0 && a[k] < a[k - 1]) {
      throw ValidationError("prop2_search: sequence decreases at k = " + std::to_string(k));
    }
  }
  Prop2Result res;
  const std::size_t last = a.size() - 1;
  std::size_t prev = 0;
  bool have_prev = false;
  for (std::size_t m = 1;; ++m) {
    std::size_t start = std::max(m, have_prev ? prev + 1 : std::size_t{0});
    std::optional<std::size_t> found;
    for (std::size_t n = start; n <= last; ++n) {
      if (a[n - m] >= 0.5 * a[n]) {
        found = n;
        break;
      }
    }
    if (!found) {
      res.stopped = true;
      res.stopped_at_m = m;
      res.range_exhausted = start > last;
      break;
    }
    res.pairs.emplace_back(*found, m);
    prev = *found;
    have_prev = true;
  }
  double partial = 0, best = 0;
  for (std::size_t n = 0; n <= last; ++n) {
    partial += a[n];
    const double r = partial / a[n];
    if (r > best) {
      best = r;
      res.certificate_argmax = n;
    }
  }
  res.certificate = best;
  return res;
}

std::vector<double> norlund_dyadic_sequence(const ParamSequence& q, int k_max) {
  if (k_max < 0 || k_max > 30) throw ValidationError("norlund_dyadic_sequence: k_max must be in [0,30]");
  const std::uint64_t top = std::uint64_t{1} << k_max;
  std::vector<double> out;
  long double Q = 0;
  std::uint64_t next = 1;
  for (std::uint64_t j = 0; j <= top; ++j) {
    Q += q(j);
    if (j == next) {
      out.push_back(static_cast<double>(Q));
      next <<= 1;
    }
  }
  return out;
}

}  // namespace dyadic
