#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyadic {

// Thrown for bad parameters, malformed input files and cap violations.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a quantity is undefined (e.g. the order of 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

constexpr int kDefaultResolutionCap = 26;
constexpr const char* kResolutionCapEnv = "DYADIC_RESOLUTION_CAP";

// Largest admissible grid resolution. Reads DYADIC_RESOLUTION_CAP once;
// set_resolution_cap() overrides it for the rest of the process.
int resolution_cap();
void set_resolution_cap(int cap);

// Throws ValidationError unless 0 <= N <= resolution_cap().
void check_resolution(int N);

// Step function on [0,1) sampled on the 2^N rank-N dyadic intervals.
// Sample i is the value on [i 2^-N, (i+1) 2^-N); digit x_j of the points
// in that interval is bit N-1-j of i.
class DyadicGrid {
 public:
  DyadicGrid() = default;
  explicit DyadicGrid(int resolution);
  DyadicGrid(int resolution, std::vector<double> samples);

  int resolution() const { return resolution_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  double& operator[](std::size_t i) { return samples_[i]; }
  const std::vector<double>& samples() const { return samples_; }
  std::vector<double>& samples() { return samples_; }

  // Throws ValidationError if any sample is NaN or infinite.
  void check_finite() const;

  DyadicGrid& operator+=(const DyadicGrid& other);
  DyadicGrid& operator-=(const DyadicGrid& other);
  DyadicGrid& operator*=(const DyadicGrid& other);
  DyadicGrid& operator*=(double c);

 private:
  int resolution_ = 0;
  std::vector<double> samples_{0.0};
};

DyadicGrid operator+(DyadicGrid a, const DyadicGrid& b);
DyadicGrid operator-(DyadicGrid a, const DyadicGrid& b);
DyadicGrid operator*(DyadicGrid a, const DyadicGrid& b);
DyadicGrid operator*(double c, DyadicGrid a);
DyadicGrid constant_grid(int N, double c);
void require_same_resolution(const DyadicGrid& a, const DyadicGrid& b, const char* what);

// Nonnegative integer with dyadic digit accessors.
class WalshIndex {
 public:
  constexpr WalshIndex() = default;
  constexpr explicit WalshIndex(std::uint64_t v) : value_(v) {}

  constexpr std::uint64_t value() const { return value_; }
  // eps_j(n); zero for j < 0 (the eps_{-1} = 0 convention) and j >= 64.
  int digit(int j) const;
  // |n| = position of the highest set digit. DomainError for n = 0.
  int order() const;
  // n^(s) = sum_{j >= s} eps_j 2^j.
  std::uint64_t upper(int s) const;
  // n(s) = sum_{j <= s} eps_j 2^j; zero for s < 0.
  std::uint64_t lower(int s) const;

 private:
  std::uint64_t value_ = 0;
};

struct DigitInfo {
  int order;
  int digit;
  std::uint64_t upper;
  std::uint64_t lower;
};

// (|n|, eps_s(n), n^(s), n(s)). DomainError for n = 0.
DigitInfo bit_digits(WalshIndex n, int s);

// Walsh-Fourier coefficients f^(n) = int f w_n, indexed by n.
struct SpectrumVector {
  int resolution = 0;
  std::vector<double> coefficients;
};

struct Norms {
  double l1 = 0;
  double l2 = 0;
  double linf = 0;
  // sup_v v |{|f| >= v}| over the sample values v of |f|. For step
  // functions this equals the supremum with strict inequality.
  double weak_l1 = 0;
};

Norms norms(const DyadicGrid& f);
double l1_norm(const DyadicGrid& f);
double mean_value(const DyadicGrid& f);
double max_abs_diff(const DyadicGrid& a, const DyadicGrid& b);
double max_abs(const DyadicGrid& f);

// Reverses the low N bits of i.
std::uint64_t bit_reverse(std::uint64_t i, int N);
// bit_reverse(i, N) for every i < 2^N.
std::vector<std::uint64_t> bit_reversal_table(int N);

// Fast Walsh-Hadamard transform in the Paley ordering with the 2^-N
// normalisation, so the coefficient of w_n is returned at index n.
SpectrumVector fwht(const DyadicGrid& f);
DyadicGrid inverse_fwht(const SpectrumVector& s);
// Same as inverse_fwht but checks the target resolution.
DyadicGrid inverse_fwht(const SpectrumVector& s, int N);

// (f*g)[i] = 2^-N sum_j f[i xor j] g[j], via the transform.
DyadicGrid xor_convolve(const DyadicGrid& f, const DyadicGrid& g);

// Uniform double in [0,1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_double(std::mt19937_64& rng);
// Samples uniform in [lo, hi).
DyadicGrid random_grid(int N, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);

// Grid CSV: header "index,value", one row per sample, ascending index.
void write_grid_csv(std::ostream& out, const DyadicGrid& f);
void write_grid_csv(const std::string& path, const DyadicGrid& f);
DyadicGrid read_grid_csv(std::istream& in);
DyadicGrid read_grid_csv(const std::string& path);

// Shortest round-trip decimal representation used by every CSV writer.
std::string format_double(double v);

}  // namespace dyadic
