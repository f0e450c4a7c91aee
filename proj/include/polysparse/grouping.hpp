#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "polysparse/basis.hpp"

namespace polysparse {

/// Variable groups over basis columns. Group j collects every column whose
/// monomial involves x_j; weights are the column 2-norms of A. Columns with
/// (relatively) vanishing norm are dropped from active_columns, and
/// active_index_sets restrict each group to the surviving columns.
struct GroupStructure {
  std::vector<std::vector<Eigen::Index>> index_sets;         // I_j over all columns
  std::vector<std::vector<Eigen::Index>> active_index_sets;  // I_j restricted to active columns
  Eigen::VectorXd weights;                                   // column 2-norms of A
  std::vector<Eigen::Index> active_columns;                  // sorted, weights above threshold
  std::vector<Eigen::Index> even_set;                        // columns with all-even exponents
  bool truncated = false;

  bool is_active(Eigen::Index k) const { return active_mask[static_cast<std::size_t>(k)]; }

  std::vector<char> active_mask;
};

/// Relative threshold below which a column counts as zero.
inline constexpr double kZeroColumnRelTol = 1e-12;

inline std::vector<Eigen::Index> even_degree_indices(const MonomialBasis& basis) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index k = 0; k < basis.size(); ++k)
    if (basis.indexes[static_cast<std::size_t>(k)].all_even()) out.push_back(k);
  return out;
}

inline GroupStructure build_groups(const MonomialBasis& basis, const Eigen::MatrixXd& A) {
  if (A.cols() != basis.size()) throw std::invalid_argument("build_groups: A column count != basis size");
  GroupStructure g;
  g.weights = A.colwise().norm();
  const double wmax = g.weights.maxCoeff();
  if (wmax == 0.0) throw std::invalid_argument("build_groups: all columns of A are zero");
  const double threshold = kZeroColumnRelTol * wmax;

  g.active_mask.assign(static_cast<std::size_t>(basis.size()), 0);
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    if (g.weights[k] > threshold) {
      g.active_mask[static_cast<std::size_t>(k)] = 1;
      g.active_columns.push_back(k);
    }
  }
  g.truncated = static_cast<Eigen::Index>(g.active_columns.size()) != basis.size();

  g.index_sets.resize(static_cast<std::size_t>(basis.n));
  g.active_index_sets.resize(static_cast<std::size_t>(basis.n));
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    const auto& alpha = basis.indexes[static_cast<std::size_t>(k)];
    for (int j = 0; j < basis.n; ++j) {
      if (!alpha.involves(j)) continue;
      g.index_sets[static_cast<std::size_t>(j)].push_back(k);
      if (g.is_active(k)) g.active_index_sets[static_cast<std::size_t>(j)].push_back(k);
    }
  }
  g.even_set = even_degree_indices(basis);
  return g;
}

/// Relative tolerance for treating components / group norms as zero,
/// aligned with the 1e-6 recovery threshold used throughout.
inline constexpr double kSupportRelTol = 1e-6;

inline double support_zero_tol(const Eigen::VectorXd& phi) {
  return kSupportRelTol * (1.0 + phi.norm());
}

/// Weighted group norms ||W_j phi||_2 over active columns.
inline Eigen::VectorXd group_norms(const GroupStructure& groups, const Eigen::VectorXd& phi) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(groups.active_index_sets.size()));
  for (std::size_t j = 0; j < groups.active_index_sets.size(); ++j) {
    double sq = 0.0;
    for (Eigen::Index k : groups.active_index_sets[j]) {
      const double wk = groups.weights[k] * phi[k];
      sq += wk * wk;
    }
    out[static_cast<Eigen::Index>(j)] = std::sqrt(sq);
  }
  return out;
}

/// Variables whose weighted group norm is above the zero tolerance.
inline std::vector<Eigen::Index> group_support(const GroupStructure& groups,
                                               const Eigen::VectorXd& phi) {
  const double tol = support_zero_tol(phi);
  const Eigen::VectorXd norms = group_norms(groups, phi);
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < norms.size(); ++j)
    if (norms[j] > tol) support.push_back(j);
  return support;
}

}  // namespace polysparse
