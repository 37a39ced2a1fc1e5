#include "dyadic/weights.hpp"

#include <cmath>
#include <utility>

#include "dyadic/core.hpp"

namespace dyadic {

WeightFamily::WeightFamily(std::string id, ByIndex fn, RowFn row_fn)
    : id_(std::move(id)), by_index_(std::move(fn)), row_fn_(std::move(row_fn)) {}

WeightFamily::WeightFamily(std::string id, ByOrder fn) : id_(std::move(id)), by_order_(std::move(fn)) {
  by_index_ = [f = by_order_](int k, std::uint64_t n) { return f(k, WalshIndex(n).order()); };
}

double WeightFamily::omega(int k, std::uint64_t n) const {
  const int order = WalshIndex(n).order();
  if (k < 0 || k > order) {
    throw DomainError("weight index k=" + std::to_string(k) + " outside [0, |n|] for n=" +
                      std::to_string(n));
  }
  return by_index_(k, n);
}

double WeightFamily::omega_by_order(int k, int order) const {
  if (!by_order_) throw ValidationError("weight family '" + id_ + "' needs the full index n");
  if (order < 0 || k < 0 || k > order) {
    throw DomainError("weight index k=" + std::to_string(k) + " outside [0, " + std::to_string(order) + "]");
  }
  return by_order_(k, order);
}

std::vector<double> WeightFamily::row(std::uint64_t n) const {
  const int order = WalshIndex(n).order();
  if (row_fn_) return row_fn_(n);
  std::vector<double> out(order + 1);
  for (int k = 0; k <= order; ++k) out[k] = by_index_(k, n);
  return out;
}

std::vector<double> WeightFamily::row_by_order(int order) const {
  std::vector<double> out(order + 1);
  for (int k = 0; k <= order; ++k) out[k] = omega_by_order(k, order);
  return out;
}

WeightFamily WeightFamily::scaled(double c) const {
  const std::string sid = id_ + "*" + format_double(c);
  if (by_order_) {
    return WeightFamily(sid, ByOrder([f = by_order_, c](int k, int order) { return c * f(k, order); }));
  }
  RowFn row;
  if (row_fn_) {
    row = [f = row_fn_, c](std::uint64_t n) {
      auto r = f(n);
      for (double& v : r) v *= c;
      return r;
    };
  }
  return WeightFamily(sid, ByIndex([f = by_index_, c](int k, std::uint64_t n) { return c * f(k, n); }),
                      row);
}

WeightFamily WeightFamily::ones() {
  return WeightFamily("ones", ByOrder([](int, int) { return 1.0; }));
}

WeightFamily WeightFamily::harmonic() {
  return WeightFamily("harmonic", ByOrder([](int k, int order) { return 1.0 / (order - k + 1); }));
}

int t3_exponent(double L, int order) {
  int w = 0;
  double power = L * L;
  while (power <= order + 1.0) {
    ++w;
    power *= L * L;
  }
  return w;
}

WeightFamily WeightFamily::t3(double L) {
  if (!(L > 1.0) || !std::isfinite(L)) throw ValidationError("t3 family needs a finite base L > 1");
  return WeightFamily("t3(L=" + format_double(L) + ")", ByOrder([L](int k, int order) {
                        const int w = t3_exponent(L, order);
                        if (k <= order - w) return std::pow(L, -w);
                        return std::pow(L, k - order);
                      }));
}

}  // namespace dyadic
