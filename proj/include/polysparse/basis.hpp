#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "polysparse/multi_index.hpp"

namespace polysparse {

/// Number of monomials of degree 1..d in n variables:
/// M = sum_{q=1}^{d} C(n+q-1, q), with overflow detection.
inline std::int64_t monomial_count(int n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("monomial_count: require n >= 1 and d >= 1");
  std::int64_t m = 0;
  for (int q = 1; q <= d; ++q)
    m = detail::checked_add(m, detail::checked_binomial(n + q - 1, q));
  return m;
}

/// Number of monomials of degree <= d that involve a fixed variable:
/// m = sum_{q=0}^{d-1} (d-q) * C(n+q-2, q).
inline std::int64_t group_size(int n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("group_size: require n >= 1 and d >= 1");
  std::int64_t m = 0;
  for (int q = 0; q <= d - 1; ++q)
    m = detail::checked_add(m, detail::checked_mul(d - q, detail::checked_binomial(n + q - 2, q)));
  return m;
}

/// Same count by complementary counting, m = sum_{q=1}^{d} q/(n-1) * C(n+q-2, q).
/// Undefined for n = 1; q * C(n+q-2, q) is always divisible by n-1.
inline std::int64_t group_size_by_complement(int n, int d) {
  if (n < 2 || d < 1) throw std::invalid_argument("group_size_by_complement: require n >= 2 and d >= 1");
  std::int64_t m = 0;
  for (int q = 1; q <= d; ++q) {
    std::int64_t t = detail::checked_mul(q, detail::checked_binomial(n + q - 2, q));
    m = detail::checked_add(m, t / (n - 1));
  }
  return m;
}

/// Ordered monomial basis of all degrees 1..d in n variables.
/// Columns follow basis_order_less; the first n columns are x_1,...,x_n.
struct MonomialBasis {
  int n = 0;
  int d = 0;
  std::vector<MultiIndex> indexes;

  Eigen::Index size() const { return static_cast<Eigen::Index>(indexes.size()); }

  /// Column of a given exponent vector, or -1 if absent.
  Eigen::Index find(const MultiIndex& alpha) const {
    auto it = std::lower_bound(indexes.begin(), indexes.end(), alpha, basis_order_less);
    if (it == indexes.end() || !(*it == alpha)) return -1;
    return static_cast<Eigen::Index>(it - indexes.begin());
  }
};

namespace detail {

inline void enumerate_degree(int n, int q, int var, MultiIndex& scratch,
                             std::vector<MultiIndex>& out) {
  if (var == n - 1) {
    scratch.alpha[static_cast<std::size_t>(var)] = q;
    out.push_back(scratch);
    return;
  }
  // Descending leading exponent gives lexicographically descending order.
  for (int a = q; a >= 0; --a) {
    scratch.alpha[static_cast<std::size_t>(var)] = a;
    enumerate_degree(n, q - a, var + 1, scratch, out);
  }
  scratch.alpha[static_cast<std::size_t>(var)] = 0;
}

}  // namespace detail

inline MonomialBasis enumerate_basis(int n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("enumerate_basis: require n >= 1 and d >= 1");
  const std::int64_t m = monomial_count(n, d);
  if (m > (std::int64_t{1} << 31))
    throw std::overflow_error("enumerate_basis: basis too large to index");
  MonomialBasis basis;
  basis.n = n;
  basis.d = d;
  basis.indexes.reserve(static_cast<std::size_t>(m));
  MultiIndex scratch;
  scratch.alpha.assign(static_cast<std::size_t>(n), 0);
  for (int q = 1; q <= d; ++q) detail::enumerate_degree(n, q, 0, scratch, basis.indexes);
  return basis;
}

/// phi(x): all monomials of x in basis order. Powers are recomputed per
/// monomial; basis sizes of interest keep this cheap.
inline Eigen::VectorXd lift(const MonomialBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.n) throw std::invalid_argument("lift: dimension mismatch");
  Eigen::VectorXd phi(basis.size());
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    double value = 1.0;
    const auto& alpha = basis.indexes[static_cast<std::size_t>(k)].alpha;
    for (int j = 0; j < basis.n; ++j) {
      for (int p = 0; p < alpha[static_cast<std::size_t>(j)]; ++p) value *= x[j];
    }
    phi[k] = value;
  }
  return phi;
}

/// Linear inverse of the lifting: the first n components of phi.
inline Eigen::VectorXd unlift(const MonomialBasis& basis, const Eigen::VectorXd& phi) {
  if (phi.size() != basis.size()) throw std::invalid_argument("unlift: dimension mismatch");
  return phi.head(basis.n);
}

}  // namespace polysparse
