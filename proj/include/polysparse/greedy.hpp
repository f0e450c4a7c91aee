#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "polysparse/grouping.hpp"
#include "polysparse/system.hpp"

namespace polysparse {

struct GreedyConfig {
  // Residual threshold compared against the squared l2 residual
  // ||A_S phi_S + b - y||_2^2. Zero assumes a feasible system.
  double epsilon = 0.0;
  int max_support = -1;  // defaults to n
  bool enumerate_all = false;
  long combination_budget = 1000000;  // cap on least-squares solves
};

struct GreedySolution {
  std::vector<Eigen::Index> support;
  Eigen::VectorXd phi_hat;
  Eigen::VectorXd x_hat;
  double residual_sq = 0.0;
};

struct GreedyResult {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd phi_hat;
  std::vector<Eigen::Index> support;
  double residual_sq = 0.0;
  long ls_solves = 0;
  bool infeasible = false;
  bool nonterminating = false;
  std::vector<GreedySolution> all_solutions;  // populated by enumerate_all sweeps
};

/// Columns of the lifted support: monomials whose variables all lie in
/// var_support.
inline std::vector<Eigen::Index> support_columns(const MonomialBasis& basis,
                                                 const std::vector<Eigen::Index>& var_support) {
  std::vector<char> in(static_cast<std::size_t>(basis.n), 0);
  for (Eigen::Index j : var_support) {
    if (j < 0 || j >= basis.n) throw std::invalid_argument("support_columns: variable out of range");
    in[static_cast<std::size_t>(j)] = 1;
  }
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    const auto& alpha = basis.indexes[static_cast<std::size_t>(k)].alpha;
    bool ok = true;
    for (int j = 0; j < basis.n && ok; ++j)
      if (alpha[static_cast<std::size_t>(j)] != 0 && !in[static_cast<std::size_t>(j)]) ok = false;
    if (ok) cols.push_back(k);
  }
  return cols;
}

/// Minimum-norm least squares via a rank-revealing factorization; returns
/// the solution and the exact squared residual.
inline std::pair<Eigen::VectorXd, double> least_squares_min_norm(const Eigen::MatrixXd& A_S,
                                                                 const Eigen::VectorXd& rhs) {
  if (A_S.cols() < 1) throw std::invalid_argument("least_squares_min_norm: empty matrix");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A_S);
  Eigen::VectorXd phi = cod.solve(rhs);
  const double residual_sq = (A_S * phi - rhs).squaredNorm();
  return {phi, residual_sq};
}

namespace detail {

/// With epsilon = 0 a feasible system still leaves least-squares round-off
/// in the residual; comparisons use this scale-aware floor.
inline double effective_epsilon(double epsilon, const Eigen::VectorXd& rhs) {
  return std::max(epsilon, 1e-18 * (1.0 + rhs.squaredNorm()));
}

struct LsContext {
  const PolynomialSystem* system;
  Eigen::VectorXd rhs;
  long solves = 0;

  explicit LsContext(const PolynomialSystem& sys) : system(&sys), rhs(sys.y - sys.b) {}

  /// Least squares restricted to the lifted support of vars; phi scattered
  /// to full length.
  GreedySolution fit(const std::vector<Eigen::Index>& vars) {
    GreedySolution sol;
    sol.support = vars;
    sol.phi_hat = Eigen::VectorXd::Zero(system->basis.size());
    if (vars.empty()) {
      sol.residual_sq = rhs.squaredNorm();
    } else {
      const std::vector<Eigen::Index> cols = support_columns(system->basis, vars);
      Eigen::MatrixXd A_S(system->equations(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) A_S.col(static_cast<Eigen::Index>(i)) = system->A.col(cols[i]);
      auto [phi_S, residual_sq] = least_squares_min_norm(A_S, rhs);
      ++solves;
      for (std::size_t i = 0; i < cols.size(); ++i) sol.phi_hat[cols[i]] = phi_S[static_cast<Eigen::Index>(i)];
      sol.residual_sq = residual_sq;
    }
    sol.x_hat = unlift(system->basis, sol.phi_hat);
    return sol;
  }
};

inline bool next_combination(std::vector<Eigen::Index>& combo, Eigen::Index n) {
  const int k = static_cast<int>(combo.size());
  for (int i = k - 1; i >= 0; --i) {
    if (combo[static_cast<std::size_t>(i)] < n - (k - i)) {
      ++combo[static_cast<std::size_t>(i)];
      for (int t = i + 1; t < k; ++t)
        combo[static_cast<std::size_t>(t)] = combo[static_cast<std::size_t>(t - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Exact greedy search: sweeps supports by cardinality (combinations in
/// lexicographic order) and returns the first one whose least-squares
/// residual meets the threshold. enumerate_all finishes the winning
/// cardinality level and collects every solution found there. An empty
/// support is checked first, ahead of the cardinality loop.
inline GreedyResult ega(const PolynomialSystem& system, const GreedyConfig& config) {
  system.validate();
  if (config.epsilon < 0) throw std::invalid_argument("ega: negative epsilon");
  const Eigen::Index n = system.basis.n;
  const int max_support = config.max_support < 0 ? static_cast<int>(n)
                                                 : std::min<int>(config.max_support, static_cast<int>(n));
  detail::LsContext ctx(system);
  const double eps = detail::effective_epsilon(config.epsilon, ctx.rhs);

  GreedyResult result;
  GreedySolution empty = ctx.fit({});
  if (empty.residual_sq <= eps) {
    result.x_hat = empty.x_hat;
    result.phi_hat = empty.phi_hat;
    result.support = empty.support;
    result.residual_sq = empty.residual_sq;
    result.ls_solves = ctx.solves;
    if (config.enumerate_all) result.all_solutions.push_back(empty);
    return result;
  }

  GreedySolution best;
  best.residual_sq = std::numeric_limits<double>::infinity();
  for (int nhat = 1; nhat <= max_support; ++nhat) {
    bool found = false;
    std::vector<Eigen::Index> combo(static_cast<std::size_t>(nhat));
    for (int i = 0; i < nhat; ++i) combo[static_cast<std::size_t>(i)] = i;
    do {
      if (ctx.solves >= config.combination_budget)
        throw std::runtime_error("ega: combination budget exhausted");
      GreedySolution sol = ctx.fit(combo);
      if (sol.residual_sq < best.residual_sq) best = sol;
      if (sol.residual_sq <= eps) {
        found = true;
        if (!config.enumerate_all) {
          result.x_hat = sol.x_hat;
          result.phi_hat = sol.phi_hat;
          result.support = sol.support;
          result.residual_sq = sol.residual_sq;
          result.ls_solves = ctx.solves;
          return result;
        }
        result.all_solutions.push_back(std::move(sol));
      }
    } while (detail::next_combination(combo, n));
    if (found) {
      const GreedySolution& first = result.all_solutions.front();
      result.x_hat = first.x_hat;
      result.phi_hat = first.phi_hat;
      result.support = first.support;
      result.residual_sq = first.residual_sq;
      result.ls_solves = ctx.solves;
      return result;
    }
  }

  result.infeasible = true;  // no support within the budget met the threshold
  result.x_hat = best.x_hat;
  result.phi_hat = best.phi_hat;
  result.support = best.support;
  result.residual_sq = best.residual_sq;
  result.ls_solves = ctx.solves;
  return result;
}

/// Approximate greedy search: grows the support one variable at a time,
/// picking the candidate with the smallest least-squares residual
/// (re-estimated from scratch each round, ties to the lowest index).
inline GreedyResult aga(const PolynomialSystem& system, const GreedyConfig& config) {
  system.validate();
  if (config.epsilon < 0) throw std::invalid_argument("aga: negative epsilon");
  const Eigen::Index n = system.basis.n;
  const int max_support = config.max_support < 0 ? static_cast<int>(n)
                                                 : std::min<int>(config.max_support, static_cast<int>(n));
  detail::LsContext ctx(system);
  const double eps = detail::effective_epsilon(config.epsilon, ctx.rhs);

  GreedyResult result;
  GreedySolution current = ctx.fit({});
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> support;

  while (current.residual_sq > eps && static_cast<int>(support.size()) < max_support) {
    GreedySolution best_candidate;
    best_candidate.residual_sq = std::numeric_limits<double>::infinity();
    Eigen::Index best_var = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      std::vector<Eigen::Index> trial = support;
      trial.push_back(j);
      std::sort(trial.begin(), trial.end());
      GreedySolution sol = ctx.fit(trial);
      if (sol.residual_sq < best_candidate.residual_sq) {
        best_candidate = std::move(sol);
        best_var = j;
      }
    }
    if (best_var < 0) break;
    used[static_cast<std::size_t>(best_var)] = 1;
    support.push_back(best_var);
    std::sort(support.begin(), support.end());
    current = std::move(best_candidate);
  }

  result.x_hat = current.x_hat;
  result.phi_hat = current.phi_hat;
  result.support = current.support;
  result.residual_sq = current.residual_sq;
  result.ls_solves = ctx.solves;
  result.nonterminating = current.residual_sq > eps;
  return result;
}

}  // namespace polysparse
