#include "dyadic/martingale.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "dyadic/walsh.hpp"

namespace dyadic {

IndexSet::IndexSet(std::vector<std::uint64_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("index set must be nonempty");
  if (values_.front() == 0) throw ValidationError("index set entries must be positive");
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] <= values_[i - 1]) {
      throw ValidationError("index set must be strictly increasing (position " + std::to_string(i) + ")");
    }
  }
}

IndexSet IndexSet::range(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw ValidationError("empty index range");
  std::vector<std::uint64_t> v;
  v.reserve(hi - lo + 1);
  for (std::uint64_t n = lo; n <= hi; ++n) v.push_back(n);
  return IndexSet(std::move(v));
}

std::string sidecar_json(const TransformResult& r) {
  nlohmann::ordered_json j;
  j["operator"] = r.op;
  if (r.indices.size() == 1 && r.op == "martingale_transform") {
    j["n"] = r.indices.front();
  } else {
    j["index_set"] = r.indices;
  }
  j["weights"] = r.weights;
  j["resolution"] = r.resolution;
  return j.dump(2);
}

std::vector<std::vector<double>> block_pyramid(const std::vector<double>& g, int N) {
  std::vector<std::vector<double>> levels(N + 1);
  levels[N] = g;
  for (int k = N - 1; k >= 0; --k) {
    const auto& finer = levels[k + 1];
    auto& coarse = levels[k];
    coarse.resize(std::size_t{1} << k);
    for (std::size_t b = 0; b < coarse.size(); ++b) coarse[b] = 0.5 * (finer[2 * b] + finer[2 * b + 1]);
  }
  return levels;
}

DyadicGrid cond_exp(const DyadicGrid& f, int k) {
  const int N = f.resolution();
  if (k < 0 || k > N) throw ValidationError("cond_exp: level " + std::to_string(k) + " outside [0, N]");
  const std::size_t block = std::size_t{1} << (N - k);
  DyadicGrid out(N);
  for (std::size_t start = 0; start < f.size(); start += block) {
    double sum = 0;
    for (std::size_t i = start; i < start + block; ++i) sum += f[i];
    const double avg = sum / static_cast<double>(block);
    for (std::size_t i = start; i < start + block; ++i) out[i] = avg;
  }
  return out;
}

DyadicGrid mdiff(const DyadicGrid& f, int k) {
  if (k < 0 || k >= f.resolution()) {
    throw ValidationError("mdiff: level " + std::to_string(k) + " outside [0, N)");
  }
  return cond_exp(f, k + 1) - cond_exp(f, k);
}

DyadicGrid doob_max(const DyadicGrid& f) {
  const int N = f.resolution();
  const auto levels = block_pyramid(f.samples(), N);
  DyadicGrid out(N);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double m = 0;
    for (int k = 0; k <= N; ++k) m = std::max(m, std::abs(levels[k][i >> (N - k)]));
    out[i] = m;
  }
  return out;
}

DyadicGrid square_function(const DyadicGrid& f, bool include_mean_term) {
  const int N = f.resolution();
  const auto levels = block_pyramid(f.samples(), N);
  DyadicGrid out(N);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double sq = include_mean_term ? levels[0][0] * levels[0][0] : 0.0;
    for (int k = 1; k <= N; ++k) {
      const double d = levels[k][i >> (N - k)] - levels[k - 1][i >> (N - k + 1)];
      sq += d * d;
    }
    out[i] = std::sqrt(sq);
  }
  return out;
}

double h1_norm(const DyadicGrid& f, bool include_mean_term) {
  return l1_norm(square_function(f, include_mean_term));
}

namespace {

void check_transform_index(std::uint64_t n, int N, const char* what) {
  if (n == 0) throw ValidationError(std::string(what) + ": n must be at least 1");
  if (N >= 64 || n >= (std::uint64_t{1} << N)) {
    throw ValidationError(std::string(what) + ": n = " + std::to_string(n) + " must be below 2^N");
  }
}

void check_weight_row(std::uint64_t n, const std::vector<double>& weights) {
  const int order = WalshIndex(n).order();
  if (weights.size() != static_cast<std::size_t>(order) + 1) {
    throw ValidationError("weight row for n=" + std::to_string(n) + " must have |n|+1 entries");
  }
}

}  // namespace

DyadicGrid mtransform_weights(const DyadicGrid& f, std::uint64_t n, const std::vector<double>& weights) {
  const int N = f.resolution();
  check_transform_index(n, N, "mtransform");
  check_weight_row(n, weights);
  const auto rev = bit_reversal_table(N);
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (std::popcount(n & rev[i]) & 1) ? -f[i] : f[i];
  const auto levels = block_pyramid(g, N);
  const int order = WalshIndex(n).order();
  DyadicGrid out(N);
  for (int k = 0; k <= order; ++k) {
    if (((n >> k) & 1u) == 0) continue;
    const double w = weights[k];
    const auto& fine = levels[k + 1];
    const auto& coarse = levels[k];
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += w * (fine[i >> (N - k - 1)] - coarse[i >> (N - k)]);
    }
  }
  return out;
}

TransformResult mtransform(const DyadicGrid& f, std::uint64_t n, const WeightFamily& omega) {
  check_transform_index(n, f.resolution(), "mtransform");
  TransformResult r;
  r.grid = mtransform_weights(f, n, omega.row(n));
  r.op = "martingale_transform";
  r.indices = {n};
  r.weights = omega.id();
  r.resolution = f.resolution();
  return r;
}

DyadicGrid carleson_kernel_weights(std::uint64_t n, const std::vector<double>& weights, int N) {
  check_resolution(N);
  check_transform_index(n, N, "carleson_kernel");
  check_weight_row(n, weights);
  const int order = WalshIndex(n).order();
  const auto rev = bit_reversal_table(N);
  const std::size_t size = std::size_t{1} << N;
  std::vector<double> d(size, 0.0);
  DyadicGrid out(N);
  std::uint64_t j = 0;
  for (int k = 0; k <= order; ++k) {
    // Bring d up to D_{2^k}.
    for (; j < (std::uint64_t{1} << k); ++j) {
      for (std::size_t i = 0; i < size; ++i) d[i] += (std::popcount(j & rev[i]) & 1) ? -1.0 : 1.0;
    }
    if (((n >> k) & 1u) == 0) continue;
    const std::uint64_t bit = std::uint64_t{1} << k;
    for (std::size_t i = 0; i < size; ++i) {
      const double r = (rev[i] & bit) ? -1.0 : 1.0;
      out[i] += weights[k] * r * d[i];
    }
  }
  return out;
}

DyadicGrid carleson_kernel(std::uint64_t n, const WeightFamily& omega, int N) {
  check_transform_index(n, N, "carleson_kernel");
  return carleson_kernel_weights(n, omega.row(n), N);
}

TransformResult carleson_max(const DyadicGrid& f, const WeightFamily& omega, const IndexSet& S) {
  const int N = f.resolution();
  if (N >= 64 || S.max() >= (std::uint64_t{1} << N)) {
    throw ValidationError("carleson_max: index " + std::to_string(S.max()) + " overflows the grid");
  }
  DyadicGrid best(N);
  for (std::uint64_t n : S.values()) {
    const DyadicGrid m = mtransform_weights(f, n, omega.row(n));
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], std::abs(m[i]));
  }
  TransformResult r;
  r.grid = std::move(best);
  r.op = "carleson_max";
  r.indices = S.values();
  r.weights = omega.id();
  r.resolution = N;
  return r;
}

DyadicGrid domination_bound(const DyadicGrid& f, std::uint64_t n, const WeightFamily& omega) {
  const WalshIndex idx(n);
  const int order = idx.order();
  const auto w = omega.row(n);
  // The k = |n|+1 term of the first sum (digit |n| switches off) is kept.
  double factor = w[order];
  for (int k = 1; k <= order + 1; ++k) factor += std::abs(idx.digit(k - 1) - idx.digit(k)) * w[k - 1];
  DyadicGrid a = f;
  for (double& v : a.samples()) v = std::abs(v);
  DyadicGrid out = doob_max(a);
  out *= factor;
  return out;
}

}  // namespace dyadic
