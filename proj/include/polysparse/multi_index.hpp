#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace polysparse {

/// Exponent vector of a monomial: alpha[j] is the power of variable x_j.
struct MultiIndex {
  std::vector<int> alpha;

  int degree() const { return std::accumulate(alpha.begin(), alpha.end(), 0); }

  bool involves(int var) const { return alpha[static_cast<std::size_t>(var)] != 0; }

  bool all_even() const {
    for (int a : alpha)
      if (a % 2 != 0) return false;
    return true;
  }

  bool operator==(const MultiIndex& other) const { return alpha == other.alpha; }
};

/// Canonical column order: total degree ascending, then lexicographically
/// descending on the exponent vector. This puts the unit indexes
/// e_1,...,e_n first, in that order.
inline bool basis_order_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  return a.alpha > b.alpha;
}

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out))
    throw std::overflow_error("integer overflow in monomial counting");
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out))
    throw std::overflow_error("integer overflow in monomial counting");
  return out;
}

// Combinatorial binomial: C(a, k) = 0 for a < k (k > 0), C(a, 0) = 1.
// Overflow raises instead of wrapping.
inline std::int64_t checked_binomial(std::int64_t a, std::int64_t k) {
  if (k < 0) return 0;
  if (k == 0) return 1;
  if (a < k) return 0;
  k = std::min(k, a - k);
  std::int64_t result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // result * (a - k + i) is divisible by i at every step.
    result = checked_mul(result, a - k + i) / i;
  }
  return result;
}

}  // namespace detail

}  // namespace polysparse
