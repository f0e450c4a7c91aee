#include <catch2/catch_amalgamated.hpp>

#include "polysparse/basis.hpp"
#include "polysparse/rng.hpp"
#include "polysparse/system.hpp"

using namespace polysparse;

namespace {

MultiIndex mi(std::vector<int> alpha) {
  MultiIndex m;
  m.alpha = std::move(alpha);
  return m;
}

Eigen::VectorXd random_sparse(int n, int k, CounterRng& rng) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  // fill the first k slots with nonzeros, then swap around
  for (int i = 0; i < k; ++i) x[i] = rng.next_gaussian() + (rng.next_uniform() > 0.5 ? 2.0 : -2.0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(x[i], x[j]);
  }
  return x;
}

}  // namespace

TEST_CASE("monomial_count matches the binomial sum", "[basis]") {
  CHECK(monomial_count(2, 2) == 5);
  CHECK(monomial_count(3, 2) == 9);
  CHECK(monomial_count(5, 4) == 125);
  CHECK(monomial_count(20, 2) == 230);
  for (int n = 1; n <= 12; ++n) CHECK(monomial_count(n, 1) == n);
  CHECK_THROWS_AS(monomial_count(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(monomial_count(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(monomial_count(1000, 40), std::overflow_error);
}

TEST_CASE("enumerate_basis produces the canonical ordering", "[basis]") {
  const MonomialBasis b = enumerate_basis(2, 2);
  REQUIRE(b.size() == 5);
  CHECK(b.indexes[0] == mi({1, 0}));
  CHECK(b.indexes[1] == mi({0, 1}));
  CHECK(b.indexes[2] == mi({2, 0}));
  CHECK(b.indexes[3] == mi({1, 1}));
  CHECK(b.indexes[4] == mi({0, 2}));

  const MonomialBasis chain = enumerate_basis(1, 3);
  REQUIRE(chain.size() == 3);
  CHECK(chain.indexes[0] == mi({1}));
  CHECK(chain.indexes[1] == mi({2}));
  CHECK(chain.indexes[2] == mi({3}));

  CHECK(enumerate_basis(5, 4).size() == 125);
  CHECK_THROWS_AS(enumerate_basis(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_basis(1, 0), std::invalid_argument);
}

TEST_CASE("basis invariants over an (n, d) grid", "[basis]") {
  for (int n = 1; n <= 7; ++n) {
    for (int d = 1; d <= 4; ++d) {
      const MonomialBasis b = enumerate_basis(n, d);
      REQUIRE(b.size() == monomial_count(n, d));
      // first n entries are the unit multi-indexes
      for (int j = 0; j < n; ++j) {
        CHECK(b.indexes[static_cast<std::size_t>(j)].degree() == 1);
        CHECK(b.indexes[static_cast<std::size_t>(j)].alpha[static_cast<std::size_t>(j)] == 1);
      }
      // strictly ordered (hence duplicate-free), degrees within [1, d]
      for (Eigen::Index k = 0; k + 1 < b.size(); ++k)
        CHECK(basis_order_less(b.indexes[static_cast<std::size_t>(k)],
                               b.indexes[static_cast<std::size_t>(k + 1)]));
      for (const auto& alpha : b.indexes) {
        CHECK(alpha.degree() >= 1);
        CHECK(alpha.degree() <= d);
      }
      // find() inverts the ordering
      for (Eigen::Index k = 0; k < b.size(); ++k)
        CHECK(b.find(b.indexes[static_cast<std::size_t>(k)]) == k);
    }
  }
}

TEST_CASE("group_size agrees with both counting routes", "[basis]") {
  CHECK(group_size(2, 2) == 3);
  CHECK(group_size(3, 2) == 4);
  for (int n = 1; n <= 10; ++n) CHECK(group_size(n, 1) == 1);
  for (int n = 2; n <= 30; ++n)
    for (int d = 1; d <= 8; ++d) CHECK(group_size(n, d) == group_size_by_complement(n, d));
}

TEST_CASE("lift and unlift", "[basis]") {
  const MonomialBasis b = enumerate_basis(2, 2);
  Eigen::VectorXd x(2);
  x << 2, 3;
  const Eigen::VectorXd phi = lift(b, x);
  Eigen::VectorXd expected(5);
  expected << 2, 3, 4, 6, 9;
  CHECK((phi - expected).norm() == 0.0);

  x << 1, 0;
  expected << 1, 0, 1, 0, 0;
  CHECK((lift(b, x) - expected).norm() == 0.0);

  CHECK(lift(b, Eigen::VectorXd::Zero(2)).isZero());

  Eigen::VectorXd tail(5);
  tail << 1, 2, 9, 9, 9;
  CHECK(unlift(b, tail) == Eigen::Vector2d(1, 2));
  CHECK(unlift(b, Eigen::VectorXd::Zero(5)).isZero());

  CounterRng rng(11, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    const int d = 1 + static_cast<int>(rng.next_u64() % 4);
    const MonomialBasis basis = enumerate_basis(n, d);
    Eigen::VectorXd point(n);
    for (int j = 0; j < n; ++j) point[j] = rng.next_gaussian();
    CHECK((unlift(basis, lift(basis, point)) - point).norm() == 0.0);
  }
}

TEST_CASE("zero pattern of the lifting follows the variable support", "[basis]") {
  CounterRng rng(12, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 6);
    const int d = 1 + static_cast<int>(rng.next_u64() % 4);
    const int k = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n + 1));
    const MonomialBasis basis = enumerate_basis(n, d);
    const Eigen::VectorXd x = random_sparse(n, k, rng);
    const Eigen::VectorXd phi = lift(basis, x);
    for (Eigen::Index col = 0; col < basis.size(); ++col) {
      const auto& alpha = basis.indexes[static_cast<std::size_t>(col)];
      for (int j = 0; j < n; ++j)
        if (x[j] == 0.0 && alpha.involves(j)) CHECK(phi[col] == 0.0);
    }
  }
}

TEST_CASE("lifted vectors are at least as sparse (ratio bound)", "[basis][property]") {
  CounterRng rng(13, 0, 0);
  int cases = 0;
  for (int n = 2; n <= 9; ++n) {
    for (int d = 1; d <= 4; ++d) {
      const MonomialBasis basis = enumerate_basis(n, d);
      for (int k = 0; k <= n; k += 2) {
        const Eigen::VectorXd x = random_sparse(n, k, rng);
        const Eigen::VectorXd phi = lift(basis, x);
        const double lifted_l0 = static_cast<double>((phi.array() != 0.0).count());
        const double x_l0 = static_cast<double>((x.array() != 0.0).count());
        CHECK(lifted_l0 / static_cast<double>(basis.size()) <= x_l0 / n + 1e-15);
        ++cases;
      }
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("high-degree regime sharpens the sparsity ratio", "[basis][property]") {
  CounterRng rng(14, 0, 0);
  int cases = 0;
  for (int d = 3; d <= 4; ++d) {
    for (int k = 1; k <= 4; ++k) {
      for (int extra = 0; extra < 13; ++extra) {
        const int n = d * (k + d) + extra;
        const MonomialBasis basis = enumerate_basis(n, d);
        const Eigen::VectorXd x = random_sparse(n, k, rng);
        const Eigen::VectorXd phi = lift(basis, x);
        const double lifted_l0 = static_cast<double>((phi.array() != 0.0).count());
        CHECK(lifted_l0 / static_cast<double>(basis.size()) <=
              2.0 * k / (static_cast<double>(d) * n) + 1e-15);
        ++cases;
      }
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("binomial ratio inequalities", "[basis][property]") {
  // (1/a) C(a+c-1, c) >= (1/b) C(b+c-1, c) whenever a >= b
  int cases = 0;
  for (int b = 1; b <= 12; ++b)
    for (int a = b; a <= b + 12; a += 3)
      for (int c = 1; c <= 6; ++c) {
        const double lhs = static_cast<double>(detail::checked_binomial(a + c - 1, c)) / a;
        const double rhs = static_cast<double>(detail::checked_binomial(b + c - 1, c)) / b;
        CHECK(lhs >= rhs);
        ++cases;
      }
  CHECK(cases >= 100);

  // (1/a) sum_{q=2}^d C(a+q-1, q) >= (d/b) sum_{q=2}^d C(b+q-1, q) for a >= d(b+d)
  cases = 0;
  for (int b = 1; b <= 6; ++b)
    for (int d = 2; d <= 6; ++d)
      for (int extra = 0; extra < 5; ++extra) {
        const int a = d * (b + d) + extra * 3;
        double lhs = 0, rhs = 0;
        for (int q = 2; q <= d; ++q) {
          lhs += static_cast<double>(detail::checked_binomial(a + q - 1, q));
          rhs += static_cast<double>(detail::checked_binomial(b + q - 1, q));
        }
        CHECK(lhs / a >= static_cast<double>(d) / b * rhs);
        ++cases;
      }
  CHECK(cases >= 100);
}

TEST_CASE("evaluate returns equation residuals", "[basis]") {
  const MonomialBasis basis = enumerate_basis(3, 2);
  CounterRng rng(15, 0, 0);
  Eigen::MatrixXd A(4, basis.size());
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = rng.next_gaussian();
  Eigen::VectorXd b(4), x0(3), e(4);
  for (int i = 0; i < 4; ++i) b[i] = rng.next_gaussian();
  x0 << 1.5, 0, -2;
  for (int i = 0; i < 4; ++i) e[i] = rng.next_gaussian();

  PolynomialSystem exact{basis, A, b, A * lift(basis, x0) + b};
  CHECK(evaluate(exact, x0).norm() <= 1e-12 * exact.y.norm());

  PolynomialSystem trivial{basis, Eigen::MatrixXd::Zero(4, basis.size()),
                           Eigen::VectorXd::Zero(4), e};
  CHECK((evaluate(trivial, x0) - e).norm() == 0.0);

  PolynomialSystem noisy{basis, A, b, A * lift(basis, x0) + b + e};
  CHECK((evaluate(noisy, x0) - e).norm() <= 1e-12 * e.norm());
}
