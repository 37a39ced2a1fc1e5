#include "dyadic/core.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dyadic {

namespace {

int cap_from_env() {
  const char* raw = std::getenv(kResolutionCapEnv);
  if (raw == nullptr || *raw == '\0') return kDefaultResolutionCap;
  int value = 0;
  auto [ptr, ec] = std::from_chars(raw, raw + std::char_traits<char>::length(raw), value);
  if (ec != std::errc() || *ptr != '\0' || value < 0 || value > 40) {
    throw ValidationError(std::string(kResolutionCapEnv) + " must be an integer in [0,40], got '" +
                          raw + "'");
  }
  return value;
}

std::atomic<int>& cap_slot() {
  static std::atomic<int> slot{cap_from_env()};
  return slot;
}

}  // namespace

int resolution_cap() { return cap_slot().load(std::memory_order_relaxed); }

void set_resolution_cap(int cap) {
  if (cap < 0 || cap > 40) throw ValidationError("resolution cap must be in [0,40]");
  cap_slot().store(cap, std::memory_order_relaxed);
}

void check_resolution(int N) {
  if (N < 0) throw ValidationError("negative resolution " + std::to_string(N));
  if (N > resolution_cap()) {
    throw ValidationError("resolution " + std::to_string(N) + " exceeds the cap " +
                          std::to_string(resolution_cap()) + " (set " + kResolutionCapEnv +
                          " or --cap to raise it)");
  }
}

DyadicGrid::DyadicGrid(int resolution) : resolution_(resolution) {
  check_resolution(resolution);
  samples_.assign(std::size_t{1} << resolution, 0.0);
}

DyadicGrid::DyadicGrid(int resolution, std::vector<double> samples)
    : resolution_(resolution), samples_(std::move(samples)) {
  check_resolution(resolution);
  if (samples_.size() != (std::size_t{1} << resolution)) {
    throw ValidationError("grid of resolution " + std::to_string(resolution) + " needs " +
                          std::to_string(std::size_t{1} << resolution) + " samples, got " +
                          std::to_string(samples_.size()));
  }
  check_finite();
}

void DyadicGrid::check_finite() const {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw ValidationError("non-finite sample at index " + std::to_string(i));
    }
  }
}

void require_same_resolution(const DyadicGrid& a, const DyadicGrid& b, const char* what) {
  if (a.resolution() != b.resolution()) {
    throw ValidationError(std::string(what) + ": resolution mismatch (" +
                          std::to_string(a.resolution()) + " vs " + std::to_string(b.resolution()) +
                          ")");
  }
}

DyadicGrid& DyadicGrid::operator+=(const DyadicGrid& other) {
  require_same_resolution(*this, other, "grid addition");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  return *this;
}

DyadicGrid& DyadicGrid::operator-=(const DyadicGrid& other) {
  require_same_resolution(*this, other, "grid subtraction");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
  return *this;
}

DyadicGrid& DyadicGrid::operator*=(const DyadicGrid& other) {
  require_same_resolution(*this, other, "grid product");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] *= other.samples_[i];
  return *this;
}

DyadicGrid& DyadicGrid::operator*=(double c) {
  for (double& v : samples_) v *= c;
  return *this;
}

DyadicGrid operator+(DyadicGrid a, const DyadicGrid& b) { return a += b; }
DyadicGrid operator-(DyadicGrid a, const DyadicGrid& b) { return a -= b; }
DyadicGrid operator*(DyadicGrid a, const DyadicGrid& b) { return a *= b; }
DyadicGrid operator*(double c, DyadicGrid a) { return a *= c; }

DyadicGrid constant_grid(int N, double c) {
  DyadicGrid g(N);
  std::fill(g.samples().begin(), g.samples().end(), c);
  return g;
}

int WalshIndex::digit(int j) const {
  if (j < 0 || j >= 64) return 0;
  return static_cast<int>((value_ >> j) & 1u);
}

int WalshIndex::order() const {
  if (value_ == 0) throw DomainError("order |n| is undefined for n = 0");
  return 63 - std::countl_zero(value_);
}

std::uint64_t WalshIndex::upper(int s) const {
  if (s <= 0) return value_;
  if (s >= 64) return 0;
  return (value_ >> s) << s;
}

std::uint64_t WalshIndex::lower(int s) const {
  if (s < 0) return 0;
  if (s >= 63) return value_;
  return value_ & ((std::uint64_t{1} << (s + 1)) - 1);
}

DigitInfo bit_digits(WalshIndex n, int s) {
  if (s < 0) throw DomainError("digit position must be nonnegative");
  return {n.order(), n.digit(s), n.upper(s), n.lower(s)};
}

double l1_norm(const DyadicGrid& f) {
  double sum = 0;
  for (double v : f.samples()) sum += std::abs(v);
  return std::ldexp(sum, -f.resolution());
}

double mean_value(const DyadicGrid& f) {
  double sum = 0;
  for (double v : f.samples()) sum += v;
  return std::ldexp(sum, -f.resolution());
}

double max_abs(const DyadicGrid& f) {
  double m = 0;
  for (double v : f.samples()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const DyadicGrid& a, const DyadicGrid& b) {
  require_same_resolution(a, b, "max_abs_diff");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Norms norms(const DyadicGrid& f) {
  Norms out;
  double sq = 0;
  std::vector<double> mags(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    mags[i] = std::abs(f[i]);
    sq += f[i] * f[i];
  }
  out.l1 = l1_norm(f);
  out.l2 = std::sqrt(std::ldexp(sq, -f.resolution()));
  out.linf = max_abs(f);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  // After sorting descending, the count of samples >= mags[i] is the end
  // of its run of equal values.
  for (std::size_t i = 0; i < mags.size();) {
    std::size_t j = i;
    while (j < mags.size() && mags[j] == mags[i]) ++j;
    out.weak_l1 = std::max(out.weak_l1, mags[i] * std::ldexp(static_cast<double>(j), -f.resolution()));
    i = j;
  }
  return out;
}

std::uint64_t bit_reverse(std::uint64_t i, int N) {
  if (N == 0) return 0;
  std::uint64_t r = 0;
  for (int b = 0; b < N; ++b) r |= ((i >> b) & 1u) << (N - 1 - b);
  return r;
}

namespace {

// In-place Hadamard butterfly: out[m] = sum_i in[i] (-1)^{popcount(m & i)}.
void hadamard(std::vector<double>& v) {
  const std::size_t n = v.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = v[j];
        const double y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

}  // namespace

std::vector<std::uint64_t> bit_reversal_table(int N) {
  std::vector<std::uint64_t> rev(std::size_t{1} << N, 0);
  for (std::size_t i = 1; i < rev.size(); ++i) {
    rev[i] = (rev[i >> 1] >> 1) | (std::uint64_t{i & 1u} << (N - 1));
  }
  return rev;
}

// w_n at sample i is (-1)^{popcount(n & rev(i))}, so the Paley coefficient
// n sits at Hadamard index rev(n).
SpectrumVector fwht(const DyadicGrid& f) {
  const int N = f.resolution();
  std::vector<double> work = f.samples();
  hadamard(work);
  SpectrumVector s;
  s.resolution = N;
  s.coefficients.resize(work.size());
  if (N == 0) {
    s.coefficients[0] = work[0];
    return s;
  }
  const auto rev = bit_reversal_table(N);
  for (std::size_t n = 0; n < work.size(); ++n) {
    s.coefficients[n] = std::ldexp(work[rev[n]], -N);
  }
  return s;
}

DyadicGrid inverse_fwht(const SpectrumVector& s) {
  const int N = s.resolution;
  if (s.coefficients.size() != (std::size_t{1} << N)) {
    throw ValidationError("spectrum length does not match its resolution");
  }
  std::vector<double> work(s.coefficients.size());
  if (N == 0) {
    work[0] = s.coefficients[0];
  } else {
    const auto rev = bit_reversal_table(N);
    for (std::size_t m = 0; m < work.size(); ++m) work[m] = s.coefficients[rev[m]];
    hadamard(work);
  }
  return DyadicGrid(N, std::move(work));
}

DyadicGrid inverse_fwht(const SpectrumVector& s, int N) {
  if (s.resolution != N) {
    throw ValidationError("inverse_fwht: resolution mismatch (" + std::to_string(s.resolution) +
                          " vs " + std::to_string(N) + ")");
  }
  return inverse_fwht(s);
}

DyadicGrid xor_convolve(const DyadicGrid& f, const DyadicGrid& g) {
  require_same_resolution(f, g, "xor_convolve");
  SpectrumVector a = fwht(f);
  const SpectrumVector b = fwht(g);
  for (std::size_t n = 0; n < a.coefficients.size(); ++n) a.coefficients[n] *= b.coefficients[n];
  return inverse_fwht(a);
}

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

DyadicGrid random_grid(int N, std::mt19937_64& rng, double lo, double hi) {
  DyadicGrid g(N);
  for (double& v : g.samples()) v = lo + (hi - lo) * unit_double(rng);
  return g;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void write_grid_csv(std::ostream& out, const DyadicGrid& f) {
  out << "index,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << i << ',' << format_double(f[i]) << '\n';
}

void write_grid_csv(const std::string& path, const DyadicGrid& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_grid_csv(out, f);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DyadicGrid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "index,value") {
    throw ValidationError("grid CSV must start with the header 'index,value'");
  }
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ValidationError("grid CSV row " + std::to_string(row) + ": expected 'index,value'");
    }
    const std::string idx_s = trim(line.substr(0, comma));
    const std::string val_s = trim(line.substr(comma + 1));
    std::uint64_t idx = 0;
    auto r1 = std::from_chars(idx_s.data(), idx_s.data() + idx_s.size(), idx);
    if (r1.ec != std::errc() || r1.ptr != idx_s.data() + idx_s.size()) {
      throw ValidationError("grid CSV row " + std::to_string(row) + ": bad index '" + idx_s + "'");
    }
    double v = 0;
    auto r2 = std::from_chars(val_s.data(), val_s.data() + val_s.size(), v);
    if (r2.ec != std::errc() || r2.ptr != val_s.data() + val_s.size()) {
      throw ValidationError("grid CSV row " + std::to_string(row) + ": bad value '" + val_s + "'");
    }
    if (idx < values.size()) {
      throw ValidationError("grid CSV: duplicate or out-of-order index " + std::to_string(idx));
    }
    if (idx > values.size()) {
      throw ValidationError("grid CSV: gap before index " + std::to_string(idx) + " (expected " +
                            std::to_string(values.size()) + ")");
    }
    values.push_back(v);
  }
  if (values.empty() || !std::has_single_bit(values.size())) {
    throw ValidationError("grid CSV must contain 2^N rows, got " + std::to_string(values.size()));
  }
  const int N = std::countr_zero(values.size());
  return DyadicGrid(N, std::move(values));
}

DyadicGrid read_grid_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_grid_csv(in);
}

}  // namespace dyadic
