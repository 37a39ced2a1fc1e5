#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dyadic/core.hpp"

namespace dyadic {

// A named real sequence n -> value (lambda_n, alpha_n or q_k).
struct ParamSequence {
  std::string tag;
  std::function<double(std::uint64_t)> fn;

  double operator()(std::uint64_t n) const { return fn(n); }
};

enum class MatrixFamily { partial_sum, vallee_poussin, cesaro, norlund_log, norlund };

std::string family_name(MatrixFamily f);

// Lower-triangular summability matrix t_{k,n}, 0 <= k <= n.
class SummabilityMatrix {
 public:
  SummabilityMatrix(MatrixFamily family, ParamSequence param);

  MatrixFamily family() const { return family_; }
  const ParamSequence& parameter() const { return param_; }
  std::string id() const;
  // Rowwise monotonicity may fail at k = n-1 (t_{n,n} = 0 for norlund_log).
  bool monotone_except_last() const { return family_ == MatrixFamily::norlund_log; }

  // Row t_{0,n} .. t_{n,n}; validates the parameters this row uses.
  std::vector<double> row(std::uint64_t n) const;
  double entry(std::uint64_t k, std::uint64_t n) const;

  // T~_{m,n} = sum_{l<m} t_{n-l,n} for 0 <= m <= n+1, via the family's
  // closed form.
  double tilde(std::uint64_t m, std::uint64_t n) const;
  // T~_{2^s,n} for s = 0..|n| in one pass over the row.
  std::vector<double> dyadic_tildes(std::uint64_t n) const;
  // T_n^(m) = sum_{l=m}^n t_{l,n} = T~_{n-m+1,n}, 0 <= m <= n+1.
  double tail(std::uint64_t m, std::uint64_t n) const;

  // Throws ValidationError naming the first bad n if the parameters are
  // invalid somewhere in 1..n_max.
  void validate(std::uint64_t n_max) const;

 private:
  MatrixFamily family_;
  ParamSequence param_;
};

// Parameter sequences used by the built-in families.
ParamSequence constant_sequence(double c);
ParamSequence ceil_half_sequence();       // ceil(n/2)
ParamSequence floor_sqrt_sequence();      // floor(sqrt n)
ParamSequence inv_log2_sequence();        // 1/log2(n), clamped to 1 for n <= 2
ParamSequence harmonic_sequence();        // 1/(k+1)
ParamSequence geometric_sequence();       // 2^-k
ParamSequence table_sequence(std::string tag, std::vector<double> values);

SummabilityMatrix partial_sum_matrix();
SummabilityMatrix vallee_poussin_matrix(ParamSequence lambda);
SummabilityMatrix cesaro_matrix(ParamSequence alpha);
SummabilityMatrix fejer_matrix();  // cesaro with alpha = 1
SummabilityMatrix norlund_log_matrix();
SummabilityMatrix norlund_matrix(ParamSequence q);

// Validates on n <= 4096 before returning.
SummabilityMatrix make_matrix(MatrixFamily family, ParamSequence param);

// A_m^beta = prod_{j=1}^m (1 + beta/j); direct product up to m = 10^4,
// log-space accumulation above.
double a_number(std::uint64_t m, double beta);

// Suffix sums of one row, accumulated from the top.
struct TailSums {
  std::uint64_t n = 0;
  std::vector<double> suffix;  // suffix[m] = T_n^(m), m = 0..n+1

  double tail(std::uint64_t m) const { return suffix.at(m); }
  double tilde(std::uint64_t m) const { return suffix.at(n + 1 - m); }
  // Omega_s(n) = T~_{2^s,n}.
  double omega(int s) const { return tilde(std::uint64_t{1} << s); }
};

TailSums tail_sums(const SummabilityMatrix& T, std::uint64_t n);

// sum_{k=1}^n t_{k,n} S_k f, computed with the multiplier T_n^(l+1) at
// frequency l < n. Accepts 1 <= n <= 2^N.
DyadicGrid mean(const SummabilityMatrix& T, const DyadicGrid& f, std::uint64_t n);
// V_n = sum_{k=1}^n t_{k,n} D_k by accumulation. Accepts 1 <= n <= 2^N.
DyadicGrid kernel(const SummabilityMatrix& T, std::uint64_t n, int N);

struct KernelDecomposition {
  DyadicGrid v1, v2, v3;
  // w_n V_n.
  DyadicGrid modulated_kernel;
  // V3 with T~_{2^s,n} in place of T~_{n(s),n}, i.e. P_n(Omega) for the
  // matrix weights.
  DyadicGrid p_variant;
  // max_s T~_{n(s),n} / T~_{2^s,n} over the digits of n.
  double weight_ratio_max = 1.0;
  // max |v1+v2+v3 - w_n V_n|, and the same divided by ||V_n||_inf (left
  // absolute when the kernel vanishes).
  double abs_error = 0.0;
  double rel_error = 0.0;
  std::size_t worst_index = 0;
};

// Three-part decomposition of w_n V_n; n < 2^N.
KernelDecomposition decompose(const SummabilityMatrix& T, std::uint64_t n, int N);

// ||V_n||_1.
double lebesgue_constant(const SummabilityMatrix& T, std::uint64_t n, int N);
// sum_{s=0}^{|n|} T~_{2^s,n}.
double boundedness_index(const SummabilityMatrix& T, std::uint64_t n);

}  // namespace dyadic
