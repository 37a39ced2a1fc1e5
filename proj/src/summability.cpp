#include "dyadic/summability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "dyadic/walsh.hpp"

namespace dyadic {

namespace {

constexpr std::uint64_t kDirectProductLimit = 10000;
constexpr std::uint64_t kValidationRange = 4096;

std::string num(std::uint64_t v) { return std::to_string(v); }

// Running compensated sum in extended precision.
class Accumulator {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const { return sum_ + comp_; }

 private:
  long double sum_ = 0;
  long double comp_ = 0;
};

void require_row_index(std::uint64_t n) {
  if (n == 0) throw ValidationError("summability rows start at n = 1");
}

}  // namespace

std::string family_name(MatrixFamily f) {
  switch (f) {
    case MatrixFamily::partial_sum: return "partial_sum";
    case MatrixFamily::vallee_poussin: return "vallee_poussin";
    case MatrixFamily::cesaro: return "cesaro";
    case MatrixFamily::norlund_log: return "norlund_log";
    case MatrixFamily::norlund: return "norlund";
  }
  return "unknown";
}

ParamSequence constant_sequence(double c) {
  return {"const(" + format_double(c) + ")", [c](std::uint64_t) { return c; }};
}

ParamSequence ceil_half_sequence() {
  return {"ceil_half", [](std::uint64_t n) { return static_cast<double>((n + 1) / 2); }};
}

ParamSequence floor_sqrt_sequence() {
  return {"floor_sqrt", [](std::uint64_t n) {
            auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
            while (r * r > n) --r;
            while ((r + 1) * (r + 1) <= n) ++r;
            return static_cast<double>(r);
          }};
}

ParamSequence inv_log2_sequence() {
  return {"inv_log2", [](std::uint64_t n) {
            if (n <= 2) return 1.0;
            return 1.0 / std::log2(static_cast<double>(n));
          }};
}

ParamSequence harmonic_sequence() {
  return {"harmonic", [](std::uint64_t k) { return 1.0 / (static_cast<double>(k) + 1.0); }};
}

ParamSequence geometric_sequence() {
  return {"geometric", [](std::uint64_t k) { return k > 2000 ? 0.0 : std::ldexp(1.0, -static_cast<int>(k)); }};
}

ParamSequence table_sequence(std::string tag, std::vector<double> values) {
  return {std::move(tag), [v = std::move(values)](std::uint64_t n) {
            if (n >= v.size()) {
              throw ValidationError("sequence table has " + num(v.size()) + " entries, index " + num(n) +
                                    " requested");
            }
            return v[n];
          }};
}

double a_number(std::uint64_t m, double beta) {
  if (m <= kDirectProductLimit) {
    double a = 1.0;
    for (std::uint64_t j = 1; j <= m; ++j) a *= (beta + static_cast<double>(j)) / static_cast<double>(j);
    return a;
  }
  Accumulator log_a;
  for (std::uint64_t j = 1; j <= m; ++j) log_a.add(std::log1p(static_cast<long double>(beta) / j));
  return static_cast<double>(std::exp(log_a.value()));
}

SummabilityMatrix::SummabilityMatrix(MatrixFamily family, ParamSequence param)
    : family_(family), param_(std::move(param)) {}

std::string SummabilityMatrix::id() const {
  switch (family_) {
    case MatrixFamily::partial_sum:
    case MatrixFamily::norlund_log: return family_name(family_);
    default: return family_name(family_) + "(" + param_.tag + ")";
  }
}

namespace {

std::uint64_t vp_lambda(const ParamSequence& seq, std::uint64_t n) {
  const double lam = seq(n);
  if (!std::isfinite(lam) || lam != std::floor(lam)) {
    throw ValidationError("vallee_poussin: lambda_" + num(n) + " = " + format_double(lam) + " is not an integer");
  }
  if (lam < 1 || lam > static_cast<double>(n)) {
    throw ValidationError("vallee_poussin: lambda_" + num(n) + " = " + format_double(lam) +
                          " must satisfy 1 <= lambda_n <= n");
  }
  return static_cast<std::uint64_t>(lam);
}

double cesaro_alpha(const ParamSequence& seq, std::uint64_t n) {
  const double a = seq(n);
  if (!(a > 0.0 && a <= 1.0)) {
    throw ValidationError("cesaro: alpha_" + num(n) + " = " + format_double(a) + " outside (0,1]");
  }
  return a;
}

// Prefix sums Q_0..Q_n of q, validating q >= 0 and nonincreasing.
std::vector<long double> norlund_prefix(const ParamSequence& q, std::uint64_t n) {
  std::vector<long double> Q(n + 1);
  Accumulator acc;
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k <= n; ++k) {
    const double v = q(k);
    if (!std::isfinite(v) || v < 0) {
      throw ValidationError("norlund: q_" + num(k) + " = " + format_double(v) + " must be finite and >= 0");
    }
    if (v > prev) {
      throw ValidationError("norlund: q is increasing at k = " + num(k) + " (q must be nonincreasing)");
    }
    prev = v;
    acc.add(v);
    Q[k] = acc.value();
  }
  if (!(Q[n] > 0)) throw ValidationError("norlund: Q_" + num(n) + " must be positive");
  return Q;
}

// Harmonic numbers H_0..H_n.
std::vector<long double> harmonic_prefix(std::uint64_t n) {
  std::vector<long double> H(n + 1, 0.0L);
  Accumulator acc;
  for (std::uint64_t j = 1; j <= n; ++j) {
    acc.add(1.0L / j);
    H[j] = acc.value();
  }
  return H;
}

// L[m] = log A_m^alpha = sum_{j<=m} log1p(alpha/j), m = 0..n.
std::vector<long double> cesaro_log_prefix(double alpha, std::uint64_t n) {
  std::vector<long double> L(n + 1, 0.0L);
  Accumulator acc;
  for (std::uint64_t j = 1; j <= n; ++j) {
    acc.add(std::log1p(static_cast<long double>(alpha) / j));
    L[j] = acc.value();
  }
  return L;
}

}  // namespace

std::vector<double> SummabilityMatrix::row(std::uint64_t n) const {
  require_row_index(n);
  std::vector<double> t(n + 1, 0.0);
  switch (family_) {
    case MatrixFamily::partial_sum:
      t[n] = 1.0;
      break;
    case MatrixFamily::vallee_poussin: {
      const std::uint64_t lam = vp_lambda(param_, n);
      for (std::uint64_t k = n - lam; k <= n; ++k) t[k] = 1.0 / static_cast<double>(lam + 1);
      break;
    }
    case MatrixFamily::cesaro: {
      const double alpha = cesaro_alpha(param_, n);
      const double beta = alpha - 1.0;
      const double denom = a_number(n, alpha);
      // A_j^{alpha-1} for j = 0..n.
      std::vector<double> A(n + 1, 1.0);
      Accumulator log_a;
      for (std::uint64_t j = 1; j <= n; ++j) {
        log_a.add(std::log1p(static_cast<long double>(beta) / j));
        A[j] = j <= kDirectProductLimit ? A[j - 1] * (beta + static_cast<double>(j)) / static_cast<double>(j)
                                        : static_cast<double>(std::exp(log_a.value()));
      }
      for (std::uint64_t k = 0; k <= n; ++k) t[k] = A[n - k] / denom;
      break;
    }
    case MatrixFamily::norlund_log: {
      const auto H = harmonic_prefix(n);
      for (std::uint64_t k = 0; k < n; ++k) t[k] = static_cast<double>(1.0L / (H[n] * (n - k)));
      t[n] = 0.0;
      break;
    }
    case MatrixFamily::norlund: {
      const auto Q = norlund_prefix(param_, n);
      for (std::uint64_t k = 0; k <= n; ++k) t[k] = static_cast<double>(param_(n - k) / Q[n]);
      break;
    }
  }
  return t;
}

double SummabilityMatrix::entry(std::uint64_t k, std::uint64_t n) const {
  if (k > n) return 0.0;
  return row(n)[k];
}

double SummabilityMatrix::tilde(std::uint64_t m, std::uint64_t n) const {
  require_row_index(n);
  if (m > n + 1) throw ValidationError("tilde: m = " + num(m) + " exceeds n+1 = " + num(n + 1));
  if (m == 0) return 0.0;
  switch (family_) {
    case MatrixFamily::partial_sum:
      return 1.0;
    case MatrixFamily::vallee_poussin: {
      const std::uint64_t lam = vp_lambda(param_, n);
      return static_cast<double>(std::min(m, lam + 1)) / static_cast<double>(lam + 1);
    }
    case MatrixFamily::cesaro: {
      const double alpha = cesaro_alpha(param_, n);
      if (m == n + 1) return 1.0;
      // A_{m-1}^alpha / A_n^alpha = prod_{j=m}^n j/(j+alpha).
      if (n - m + 1 <= kDirectProductLimit) {
        double r = 1.0;
        for (std::uint64_t j = m; j <= n; ++j) r *= static_cast<double>(j) / (static_cast<double>(j) + alpha);
        return r;
      }
      Accumulator acc;
      for (std::uint64_t j = m; j <= n; ++j) acc.add(-std::log1p(static_cast<long double>(alpha) / j));
      return static_cast<double>(std::exp(acc.value()));
    }
    case MatrixFamily::norlund_log: {
      const auto H = harmonic_prefix(n);
      return static_cast<double>(H[m - 1] / H[n]);
    }
    case MatrixFamily::norlund: {
      const auto Q = norlund_prefix(param_, n);
      return static_cast<double>(Q[m - 1] / Q[n]);
    }
  }
  return 0.0;
}

std::vector<double> SummabilityMatrix::dyadic_tildes(std::uint64_t n) const {
  require_row_index(n);
  const int order = WalshIndex(n).order();
  std::vector<double> out(order + 1);
  switch (family_) {
    case MatrixFamily::partial_sum:
      std::fill(out.begin(), out.end(), 1.0);
      break;
    case MatrixFamily::vallee_poussin: {
      const std::uint64_t lam = vp_lambda(param_, n);
      for (int s = 0; s <= order; ++s) {
        out[s] = static_cast<double>(std::min(std::uint64_t{1} << s, lam + 1)) / static_cast<double>(lam + 1);
      }
      break;
    }
    case MatrixFamily::cesaro: {
      const double alpha = cesaro_alpha(param_, n);
      const auto L = cesaro_log_prefix(alpha, n);
      for (int s = 0; s <= order; ++s) {
        out[s] = static_cast<double>(std::exp(L[(std::uint64_t{1} << s) - 1] - L[n]));
      }
      break;
    }
    case MatrixFamily::norlund_log: {
      const auto H = harmonic_prefix(n);
      for (int s = 0; s <= order; ++s) out[s] = static_cast<double>(H[(std::uint64_t{1} << s) - 1] / H[n]);
      break;
    }
    case MatrixFamily::norlund: {
      const auto Q = norlund_prefix(param_, n);
      for (int s = 0; s <= order; ++s) out[s] = static_cast<double>(Q[(std::uint64_t{1} << s) - 1] / Q[n]);
      break;
    }
  }
  return out;
}

double SummabilityMatrix::tail(std::uint64_t m, std::uint64_t n) const {
  if (m > n + 1) throw ValidationError("tail: m = " + num(m) + " exceeds n+1");
  return tilde(n + 1 - m, n);
}

void SummabilityMatrix::validate(std::uint64_t n_max) const {
  switch (family_) {
    case MatrixFamily::partial_sum:
    case MatrixFamily::norlund_log:
      return;
    case MatrixFamily::vallee_poussin:
      for (std::uint64_t n = 1; n <= n_max; ++n) vp_lambda(param_, n);
      return;
    case MatrixFamily::cesaro:
      for (std::uint64_t n = 1; n <= n_max; ++n) cesaro_alpha(param_, n);
      return;
    case MatrixFamily::norlund:
      norlund_prefix(param_, n_max);
      return;
  }
}

SummabilityMatrix partial_sum_matrix() { return SummabilityMatrix(MatrixFamily::partial_sum, {"", {}}); }
SummabilityMatrix vallee_poussin_matrix(ParamSequence lambda) {
  return make_matrix(MatrixFamily::vallee_poussin, std::move(lambda));
}
SummabilityMatrix cesaro_matrix(ParamSequence alpha) { return make_matrix(MatrixFamily::cesaro, std::move(alpha)); }
SummabilityMatrix fejer_matrix() { return cesaro_matrix(constant_sequence(1.0)); }
SummabilityMatrix norlund_log_matrix() { return SummabilityMatrix(MatrixFamily::norlund_log, {"", {}}); }
SummabilityMatrix norlund_matrix(ParamSequence q) { return make_matrix(MatrixFamily::norlund, std::move(q)); }

SummabilityMatrix make_matrix(MatrixFamily family, ParamSequence param) {
  const bool needs_param = family == MatrixFamily::vallee_poussin || family == MatrixFamily::cesaro ||
                           family == MatrixFamily::norlund;
  if (needs_param && !param.fn) throw ValidationError(family_name(family) + " needs a parameter sequence");
  if (!needs_param) param = {"", {}};
  SummabilityMatrix T(family, std::move(param));
  T.validate(kValidationRange);
  return T;
}

TailSums tail_sums(const SummabilityMatrix& T, std::uint64_t n) {
  const auto t = T.row(n);
  TailSums ts;
  ts.n = n;
  ts.suffix.assign(n + 2, 0.0);
  for (std::uint64_t m = n + 1; m-- > 0;) ts.suffix[m] = ts.suffix[m + 1] + t[m];
  return ts;
}

namespace {

void check_mean_index(std::uint64_t n, int N, const char* what) {
  if (n == 0) throw ValidationError(std::string(what) + ": n must be at least 1");
  if (N < 64 && n > (std::uint64_t{1} << N)) {
    throw ValidationError(std::string(what) + ": n = " + num(n) + " exceeds 2^N");
  }
}

}  // namespace

DyadicGrid mean(const SummabilityMatrix& T, const DyadicGrid& f, std::uint64_t n) {
  check_mean_index(n, f.resolution(), "mean");
  const TailSums ts = tail_sums(T, n);
  SpectrumVector s = fwht(f);
  for (std::uint64_t l = 0; l < s.coefficients.size(); ++l) {
    s.coefficients[l] *= l < n ? ts.suffix[l + 1] : 0.0;
  }
  return inverse_fwht(s);
}

DyadicGrid kernel(const SummabilityMatrix& T, std::uint64_t n, int N) {
  check_resolution(N);
  check_mean_index(n, N, "kernel");
  const auto t = T.row(n);
  const auto rev = bit_reversal_table(N);
  const std::size_t size = std::size_t{1} << N;
  std::vector<double> d(size, 0.0);
  DyadicGrid out(N);
  for (std::uint64_t k = 1; k <= n; ++k) {
    const std::uint64_t j = k - 1;
    for (std::size_t i = 0; i < size; ++i) d[i] += (std::popcount(j & rev[i]) & 1) ? -1.0 : 1.0;
    if (t[k] == 0.0) continue;
    for (std::size_t i = 0; i < size; ++i) out[i] += t[k] * d[i];
  }
  return out;
}

KernelDecomposition decompose(const SummabilityMatrix& T, std::uint64_t n, int N) {
  check_resolution(N);
  if (n == 0 || N >= 64 || n >= (std::uint64_t{1} << N)) {
    throw ValidationError("decompose: need 1 <= n < 2^N, got n = " + num(n));
  }
  const WalshIndex idx(n);
  const int order = idx.order();
  const auto t = T.row(n);
  const TailSums ts = tail_sums(T, n);
  const auto rev = bit_reversal_table(N);
  const std::size_t size = std::size_t{1} << N;

  std::vector<std::vector<double>> inner(order + 1), boundary(order + 1);
  for (int s = 0; s <= order; ++s) {
    if (idx.digit(s)) {
      inner[s].assign(size, 0.0);
      boundary[s].assign(size, 0.0);
    }
  }
  KernelDecomposition out{DyadicGrid(N), DyadicGrid(N), DyadicGrid(N), DyadicGrid(N), DyadicGrid(N)};

  // One pass over k = 1..2^{|n|} keeps D_k and k K_k.
  std::vector<double> d(size, 0.0), fk(size, 0.0);
  const std::uint64_t k_max = std::uint64_t{1} << order;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    const std::uint64_t j = k - 1;
    for (std::size_t i = 0; i < size; ++i) {
      d[i] += (std::popcount(j & rev[i]) & 1) ? -1.0 : 1.0;
      fk[i] += d[i];
    }
    for (int s = 0; s <= order; ++s) {
      if (!idx.digit(s)) continue;
      const std::uint64_t top = idx.upper(s);
      const std::uint64_t two_s = std::uint64_t{1} << s;
      if (k + 2 <= two_s) {
        const double coef = t[top - k] - t[top - k - 1];
        if (coef != 0.0) {
          for (std::size_t i = 0; i < size; ++i) inner[s][i] += coef * fk[i];
        }
      }
      if (k + 1 == two_s) {
        const double coef = t[idx.upper(s + 1) + 1];
        for (std::size_t i = 0; i < size; ++i) boundary[s][i] = coef * fk[i];
      }
      if (k == two_s) {
        const double v3_weight = ts.tail(idx.upper(s + 1) + 1);
        const double p_weight = ts.omega(s);
        for (std::size_t i = 0; i < size; ++i) {
          const double r = (rev[i] & two_s) ? -1.0 : 1.0;
          out.v3[i] += v3_weight * r * d[i];
          out.p_variant[i] += p_weight * r * d[i];
        }
        double ratio = 1.0;
        if (p_weight > 0) {
          ratio = v3_weight / p_weight;
        } else if (v3_weight > 0) {
          ratio = std::numeric_limits<double>::infinity();
        }
        out.weight_ratio_max = std::max(out.weight_ratio_max, ratio);
      }
    }
  }

  for (int s = 0; s <= order; ++s) {
    if (!idx.digit(s)) continue;
    const std::uint64_t mod_index = idx.lower(s) ^ ((std::uint64_t{1} << s) - 1);
    for (std::size_t i = 0; i < size; ++i) {
      const double pre = (std::popcount(mod_index & rev[i]) & 1) ? -1.0 : 1.0;
      out.v1[i] -= pre * inner[s][i];
      out.v2[i] -= pre * boundary[s][i];
    }
  }

  const DyadicGrid V = kernel(T, n, N);
  out.modulated_kernel = walsh(n, N) * V;
  const double scale = max_abs(V);
  for (std::size_t i = 0; i < size; ++i) {
    const double err = std::abs(out.v1[i] + out.v2[i] + out.v3[i] - out.modulated_kernel[i]);
    if (err > out.abs_error) {
      out.abs_error = err;
      out.worst_index = i;
    }
  }
  out.rel_error = scale > 0 ? out.abs_error / scale : out.abs_error;
  return out;
}

double lebesgue_constant(const SummabilityMatrix& T, std::uint64_t n, int N) { return l1_norm(kernel(T, n, N)); }

double boundedness_index(const SummabilityMatrix& T, std::uint64_t n) {
  double sum = 0;
  for (double v : T.dyadic_tildes(n)) sum += v;
  return sum;
}

}  // namespace dyadic
