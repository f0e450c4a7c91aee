#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "polysparse/grouping.hpp"
#include "polysparse/system.hpp"

namespace polysparse {

enum class ExtractMethod { LinearReadout, OddRoot, QuadraticSign };

struct ExtractionReport {
  Eigen::VectorXd x_hat;
  std::vector<Eigen::Index> support;
  ExtractMethod method_used = ExtractMethod::LinearReadout;
  bool sign_consistent = true;
  // False when the sign of some component could only be fixed by an
  // arbitrary anchor beyond the single global one.
  bool sign_graph_connected = true;
  double verify_residual = 0.0;
  bool verified = false;
};

/// Raised when an even-power estimate that should be a square is negative
/// beyond tolerance; the relaxation did not produce a liftable point.
struct extraction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A posteriori check of the polynomial equations at x_hat.
inline std::pair<bool, double> verify(const PolynomialSystem& system, const Eigen::VectorXd& x_hat,
                                      double tol = kSupportRelTol) {
  const double residual = evaluate(system, x_hat).norm();
  return {residual <= tol * (1.0 + system.y.norm()), residual};
}

namespace detail {

inline double signed_root(double value, int order) {
  // Real signed root for odd order.
  if (value < 0) return -std::pow(-value, 1.0 / order);
  return std::pow(value, 1.0 / order);
}

}  // namespace detail

/// Recovers x_hat from a lifted estimate. With all linear columns active
/// the first components of phi_hat are read out directly. Otherwise each
/// supported variable is recovered from its smallest odd power above
/// tolerance, falling back for all-even systems to square roots with signs
/// fixed by propagating the signs of bilinear estimates over a spanning
/// forest (one free global anchor; additional arbitrary anchors clear
/// sign_graph_connected, contradicting edges clear sign_consistent).
inline ExtractionReport extract(const MonomialBasis& basis, const GroupStructure& groups,
                                const Eigen::VectorXd& phi_hat, const PolynomialSystem& system,
                                const std::vector<Eigen::Index>* known_support = nullptr) {
  if (phi_hat.size() != basis.size()) throw std::invalid_argument("extract: phi length mismatch");
  ExtractionReport report;
  report.support = known_support ? *known_support : group_support(groups, phi_hat);

  bool assumption1 = true;
  for (int j = 0; j < basis.n; ++j)
    if (!groups.is_active(j)) assumption1 = false;

  if (assumption1) {
    report.method_used = ExtractMethod::LinearReadout;
    report.x_hat = unlift(basis, phi_hat);
  } else {
    const double tol = support_zero_tol(phi_hat);
    report.x_hat = Eigen::VectorXd::Zero(basis.n);
    std::vector<Eigen::Index> even_path;  // variables lacking any odd-power estimate
    std::vector<char> in_support(static_cast<std::size_t>(basis.n), 0);
    std::vector<char> sign_known(static_cast<std::size_t>(basis.n), 0);

    for (Eigen::Index j : report.support) {
      in_support[static_cast<std::size_t>(j)] = 1;
      bool resolved = false;
      for (int q = 1; q <= basis.d; q += 2) {
        MultiIndex power;
        power.alpha.assign(static_cast<std::size_t>(basis.n), 0);
        power.alpha[static_cast<std::size_t>(j)] = q;
        const Eigen::Index col = basis.find(power);
        if (col < 0) continue;
        if (std::abs(phi_hat[col]) > tol) {
          report.x_hat[j] = detail::signed_root(phi_hat[col], q);
          sign_known[static_cast<std::size_t>(j)] = 1;
          resolved = true;
          break;
        }
      }
      if (!resolved) {
        MultiIndex square;
        square.alpha.assign(static_cast<std::size_t>(basis.n), 0);
        square.alpha[static_cast<std::size_t>(j)] = 2;
        const Eigen::Index col = basis.d >= 2 ? basis.find(square) : -1;
        const double value = col >= 0 ? phi_hat[col] : 0.0;
        if (value < -tol)
          throw extraction_error("extract: negative estimate for an even power of variable " +
                                 std::to_string(j));
        report.x_hat[j] = std::sqrt(std::max(value, 0.0));
        even_path.push_back(j);
      }
    }

    if (even_path.empty()) {
      report.method_used = ExtractMethod::OddRoot;
    } else {
      report.method_used = ExtractMethod::QuadraticSign;

      // Bilinear estimates x_i * x_j above tolerance form the sign graph.
      std::vector<std::vector<std::pair<Eigen::Index, int>>> adj(
          static_cast<std::size_t>(basis.n));
      if (basis.d >= 2) {
        for (std::size_t a = 0; a < report.support.size(); ++a) {
          for (std::size_t b = a + 1; b < report.support.size(); ++b) {
            const Eigen::Index i = report.support[a];
            const Eigen::Index j = report.support[b];
            MultiIndex bilinear;
            bilinear.alpha.assign(static_cast<std::size_t>(basis.n), 0);
            bilinear.alpha[static_cast<std::size_t>(i)] = 1;
            bilinear.alpha[static_cast<std::size_t>(j)] = 1;
            const Eigen::Index col = basis.find(bilinear);
            if (col < 0 || std::abs(phi_hat[col]) <= tol) continue;
            const int sign = phi_hat[col] > 0 ? 1 : -1;
            adj[static_cast<std::size_t>(i)].push_back({j, sign});
            adj[static_cast<std::size_t>(j)].push_back({i, sign});
          }
        }
      }

      std::vector<int> sign(static_cast<std::size_t>(basis.n), 0);
      for (int j = 0; j < basis.n; ++j)
        if (sign_known[static_cast<std::size_t>(j)])
          sign[static_cast<std::size_t>(j)] = report.x_hat[j] >= 0 ? 1 : -1;

      int arbitrary_anchors = 0;
      bool any_known = std::find(sign_known.begin(), sign_known.end(), 1) != sign_known.end();
      std::vector<char> visited(static_cast<std::size_t>(basis.n), 0);
      auto bfs = [&](Eigen::Index start) {
        std::deque<Eigen::Index> queue{start};
        visited[static_cast<std::size_t>(start)] = 1;
        while (!queue.empty()) {
          const Eigen::Index i = queue.front();
          queue.pop_front();
          for (const auto& [j, edge_sign] : adj[static_cast<std::size_t>(i)]) {
            const int implied = sign[static_cast<std::size_t>(i)] * edge_sign;
            if (!visited[static_cast<std::size_t>(j)]) {
              visited[static_cast<std::size_t>(j)] = 1;
              if (sign[static_cast<std::size_t>(j)] == 0) sign[static_cast<std::size_t>(j)] = implied;
              queue.push_back(j);
            }
            // Contradictions never override an assigned sign.
            if (sign[static_cast<std::size_t>(j)] != implied) report.sign_consistent = false;
          }
        }
      };
      // Components containing a variable of known sign propagate from it.
      for (Eigen::Index j : report.support)
        if (sign_known[static_cast<std::size_t>(j)] && !visited[static_cast<std::size_t>(j)])
          bfs(j);
      for (Eigen::Index j : report.support) {
        if (visited[static_cast<std::size_t>(j)]) continue;
        sign[static_cast<std::size_t>(j)] = 1;  // anchor
        ++arbitrary_anchors;
        bfs(j);
      }
      // One arbitrary anchor is the inherent global symmetry; more than
      // one, or any on top of known signs, is genuine ambiguity.
      if (arbitrary_anchors > 1 || (any_known && arbitrary_anchors > 0))
        report.sign_graph_connected = false;

      for (Eigen::Index j : even_path)
        report.x_hat[j] *= sign[static_cast<std::size_t>(j)];
    }
  }

  auto [ok, residual] = verify(system, report.x_hat);
  report.verified = ok;
  report.verify_residual = residual;
  return report;
}

}  // namespace polysparse
