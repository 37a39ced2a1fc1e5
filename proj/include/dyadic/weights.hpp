#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dyadic {

// Weights Omega_k(n), 0 <= k <= |n|, nondecreasing in k.
//
// Families whose values depend on n only through |n| are "order-only";
// they can be evaluated for orders beyond 64 bits, which the block
// construction needs for large block lengths.
class WeightFamily {
 public:
  using ByIndex = std::function<double(int k, std::uint64_t n)>;
  using ByOrder = std::function<double(int k, int order)>;
  using RowFn = std::function<std::vector<double>(std::uint64_t n)>;

  // General family given per (k, n); row_fn, if set, returns the whole
  // row k = 0..|n| at once.
  WeightFamily(std::string id, ByIndex fn, RowFn row_fn = {});
  // Order-only family.
  WeightFamily(std::string id, ByOrder fn);

  static WeightFamily ones();
  // Omega_k(n) = 1/(|n| - k + 1).
  static WeightFamily harmonic();
  // Counterexample family with base L > 1: L^{-w} for k <= |n| - w and
  // L^{k-|n|} above, where w = floor(log_L(|n|+1) / 2).
  static WeightFamily t3(double L);

  const std::string& id() const { return id_; }
  bool order_only() const { return static_cast<bool>(by_order_); }

  double omega(int k, std::uint64_t n) const;
  // Only for order-only families.
  double omega_by_order(int k, int order) const;
  // Omega_0(n) .. Omega_{|n|}(n).
  std::vector<double> row(std::uint64_t n) const;
  std::vector<double> row_by_order(int order) const;

  // c * Omega.
  WeightFamily scaled(double c) const;

 private:
  std::string id_;
  ByIndex by_index_;
  ByOrder by_order_;
  RowFn row_fn_;
};

// The exponent w in the t3 family: the largest w with L^{2w} <= order + 1.
int t3_exponent(double L, int order);

}  // namespace dyadic
