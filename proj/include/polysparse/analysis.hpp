#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "polysparse/bp.hpp"
#include "polysparse/greedy.hpp"
#include "polysparse/grouping.hpp"
#include "polysparse/system.hpp"

namespace polysparse {

struct zero_column_error : std::runtime_error {
  Eigen::Index column;
  explicit zero_column_error(Eigen::Index k)
      : std::runtime_error("matrix has a zero column (" + std::to_string(k) +
                           "); certify on the truncated submatrix of nonzero columns"),
        column(k) {}
};

/// Largest normalized inner product between distinct columns.
inline double mutual_coherence(const Eigen::MatrixXd& A) {
  if (A.cols() < 2) throw std::invalid_argument("mutual_coherence: need at least 2 columns");
  const Eigen::VectorXd norms = A.colwise().norm();
  for (Eigen::Index k = 0; k < A.cols(); ++k)
    if (norms[k] == 0.0) throw zero_column_error(k);
  double mu = 0.0;
  for (Eigen::Index i = 0; i < A.cols(); ++i)
    for (Eigen::Index j = i + 1; j < A.cols(); ++j)
      mu = std::max(mu, std::abs(A.col(i).dot(A.col(j))) / (norms[i] * norms[j]));
  return mu;
}

struct ConditionCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct StabilityBounds {
  double l1_bound = 0.0;     // bound on ||x_hat - x0||^2
  double group_bound = 0.0;  // bound on ||W_x (x_hat - x0)||^2
};

/// Coherence-based recovery conditions evaluated for a sparsity level k and
/// a noise level epsilon. Checks:
///   l1_exact          k < (n/2M)(1 + 1/mu)
///   l1_exact_count    sum_q C(k+q-1, q) <= (1/2)(1 + 1/mu)
///   l1_exact_compact  C(k+d-1, d) <= (1/2d)(1 + 1/mu)
///   group_exact       k < (1/2 sqrt(m)) sqrt(1 + 1/mu^2)
///   sparsest_unique   same inequality; adds uniqueness of the sparsest x
///   l1_stable         k < (n/4M)(1 + 1/mu), with an error bound when it holds
///   group_stable      k < (1/4nM)(1 + 1/mu), with an error bound when it holds
///   high_degree_regime  d >= 3 and n >= d(k+d)
/// When zero columns were truncated the counts M and m are replaced by
/// their truncated values and `truncated` is set.
struct RecoveryCertificate {
  double mu = 0.0;
  std::int64_t m = 0;
  std::int64_t M = 0;
  int n = 0;
  int d = 0;
  std::int64_t k = 0;
  double epsilon = 0.0;
  bool truncated = false;
  std::map<std::string, ConditionCheck> checks;
  std::optional<StabilityBounds> stability;
};

namespace detail {

inline double inv_or_inf(double mu) {
  return mu > 0 ? 1.0 / mu : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline RecoveryCertificate certify(const PolynomialSystem& system, std::int64_t k,
                                   double epsilon = 0.0) {
  if (k < 0) throw std::invalid_argument("certify: negative sparsity level");
  if (epsilon < 0) throw std::invalid_argument("certify: negative noise level");
  const GroupStructure groups = build_groups(system.basis, system.A);

  RecoveryCertificate cert;
  cert.n = system.basis.n;
  cert.d = system.basis.d;
  cert.k = k;
  cert.epsilon = epsilon;
  cert.truncated = groups.truncated;
  cert.M = static_cast<std::int64_t>(groups.active_columns.size());
  cert.m = 0;
  for (const auto& set : groups.active_index_sets)
    cert.m = std::max(cert.m, static_cast<std::int64_t>(set.size()));

  Eigen::MatrixXd A_active(system.equations(), static_cast<Eigen::Index>(groups.active_columns.size()));
  for (std::size_t i = 0; i < groups.active_columns.size(); ++i)
    A_active.col(static_cast<Eigen::Index>(i)) = system.A.col(groups.active_columns[i]);
  cert.mu = mutual_coherence(A_active);

  const double inv_mu = detail::inv_or_inf(cert.mu);
  const double n = static_cast<double>(cert.n);
  const double M = static_cast<double>(cert.M);
  const double m = static_cast<double>(cert.m);
  const double kd = static_cast<double>(k);

  auto strict = [&](double lhs, double rhs) { return ConditionCheck{lhs < rhs, lhs, rhs}; };
  auto weak = [&](double lhs, double rhs) { return ConditionCheck{lhs <= rhs, lhs, rhs}; };

  cert.checks["l1_exact"] = strict(kd, n / (2.0 * M) * (1.0 + inv_mu));

  std::int64_t lifted = 0;
  for (int q = 1; q <= cert.d; ++q)
    lifted = detail::checked_add(lifted, detail::checked_binomial(k + q - 1, q));
  cert.checks["l1_exact_count"] = weak(static_cast<double>(lifted), 0.5 * (1.0 + inv_mu));
  cert.checks["l1_exact_compact"] =
      weak(static_cast<double>(detail::checked_binomial(k + cert.d - 1, cert.d)),
           1.0 / (2.0 * cert.d) * (1.0 + inv_mu));

  const double group_rhs =
      0.5 / std::sqrt(m) * std::sqrt(1.0 + (cert.mu > 0 ? 1.0 / (cert.mu * cert.mu)
                                                        : std::numeric_limits<double>::infinity()));
  cert.checks["group_exact"] = strict(kd, group_rhs);
  cert.checks["sparsest_unique"] = strict(kd, group_rhs);

  cert.checks["high_degree_regime"] =
      ConditionCheck{cert.d >= 3 && cert.n >= cert.d * (k + cert.d), kd,
                     cert.d >= 3 ? (n / cert.d - cert.d) : 0.0};

  const auto l1_stable = strict(kd, n / (4.0 * M) * (1.0 + inv_mu));
  const auto group_stable = strict(kd, 1.0 / (4.0 * n * M) * (1.0 + inv_mu));
  cert.checks["l1_stable"] = l1_stable;
  cert.checks["group_stable"] = group_stable;

  if (l1_stable.holds || group_stable.holds) {
    StabilityBounds bounds;
    bounds.l1_bound = l1_stable.holds
                          ? 4.0 * epsilon * epsilon / (1.0 - cert.mu * (4.0 * M * kd / n - 1.0))
                          : std::numeric_limits<double>::quiet_NaN();
    bounds.group_bound =
        group_stable.holds
            ? 4.0 * n * epsilon * epsilon / (1.0 - cert.mu * (4.0 * n * M * kd - 1.0))
            : std::numeric_limits<double>::quiet_NaN();
    cert.stability = bounds;
  }
  return cert;
}

struct PosterioriCheck {
  ConditionCheck condition;       // group support count against the group_exact bound
  std::int64_t group_support = 0;
  bool phi_unique = false;        // estimate solves both group problems uniquely
  bool verified = false;          // extracted x satisfies the equations
  bool x_unique = false;          // ...which then pins the sparsest solution
  RecoveryCertificate certificate;
};

/// Condition on the computed estimate instead of the unknown solution: if
/// the group support of phi_hat is below the group_exact bound, phi_hat is
/// the unique group-sparsest feasible point, and a verified readout is the
/// unique sparsest solution of the polynomial system.
inline PosterioriCheck certify_posteriori(const PolynomialSystem& system,
                                          const Eigen::VectorXd& phi_hat) {
  if (phi_hat.size() != system.basis.size())
    throw std::invalid_argument("certify_posteriori: phi length mismatch");
  const GroupStructure groups = build_groups(system.basis, system.A);
  PosterioriCheck check;
  check.certificate = certify(system, 0, 0.0);
  check.group_support = static_cast<std::int64_t>(group_support(groups, phi_hat).size());
  const double rhs = check.certificate.checks.at("group_exact").rhs;
  check.condition = ConditionCheck{static_cast<double>(check.group_support) < rhs,
                                   static_cast<double>(check.group_support), rhs};
  check.phi_unique = check.condition.holds;
  auto [ok, residual] = verify(system, unlift(system.basis, phi_hat));
  (void)residual;
  check.verified = ok;
  check.x_unique = check.phi_unique && check.verified;
  return check;
}

struct SparsityRatioBounds {
  double prop1_rhs = 0.0;                 // k/n
  std::int64_t exact_lifted = 0;          // lifted support count
  std::optional<double> prop2_rhs;        // 2k/(dn) in the high-degree regime
};

inline SparsityRatioBounds sparsity_ratio_bounds(int n, int d, std::int64_t k) {
  if (n < 1 || d < 1 || k < 0 || k > n)
    throw std::invalid_argument("sparsity_ratio_bounds: require n,d >= 1 and 0 <= k <= n");
  SparsityRatioBounds out;
  out.prop1_rhs = static_cast<double>(k) / n;
  out.exact_lifted = 0;
  for (int q = 1; q <= d; ++q)
    out.exact_lifted = detail::checked_add(out.exact_lifted, detail::checked_binomial(k + q - 1, q));
  if (d >= 3 && n >= d * (k + d))
    out.prop2_rhs = 2.0 * static_cast<double>(k) / (static_cast<double>(d) * n);
  return out;
}

/// EGA uniqueness hook: a unique enumerate_all solution whose readout
/// verifies the equations is the unique sparsest solution.
struct GreedyUniqueness {
  bool applicable = false;  // enumerate_all ran and found solutions
  bool unique = false;
  bool verified = false;
  bool x_unique = false;
};

inline GreedyUniqueness certify_ega_uniqueness(const PolynomialSystem& system,
                                               const GreedyResult& result) {
  GreedyUniqueness out;
  if (result.infeasible || result.all_solutions.empty()) return out;
  out.applicable = true;
  out.unique = result.all_solutions.size() == 1;
  auto [ok, residual] = verify(system, result.x_hat);
  (void)residual;
  out.verified = ok;
  out.x_unique = out.unique && out.verified;
  return out;
}

inline nlohmann::json certificate_to_json(const RecoveryCertificate& cert) {
  nlohmann::json j;
  j["mu"] = cert.mu;
  j["m"] = cert.m;
  j["M"] = cert.M;
  j["n"] = cert.n;
  j["d"] = cert.d;
  j["k"] = cert.k;
  j["epsilon"] = cert.epsilon;
  j["truncated"] = cert.truncated;
  nlohmann::json checks;
  for (const auto& [name, check] : cert.checks) {
    checks[name] = {{"holds", check.holds}, {"lhs", check.lhs}, {"rhs", check.rhs}};
  }
  j["checks"] = std::move(checks);
  if (cert.stability) {
    j["stability_bounds"] = {{"l1_bound", cert.stability->l1_bound},
                             {"group_bound", cert.stability->group_bound}};
  }
  return j;
}

inline std::string certificate_to_string(const RecoveryCertificate& cert) {
  std::ostringstream out;
  out << "recovery certificate (n=" << cert.n << ", d=" << cert.d << ", k=" << cert.k
      << ", epsilon=" << cert.epsilon << ")\n";
  out << "  mutual coherence mu = " << cert.mu << "\n";
  out << "  columns M = " << cert.M << ", group size m = " << cert.m
      << (cert.truncated ? "  [zero columns truncated]" : "") << "\n";
  for (const auto& [name, check] : cert.checks) {
    out << "  " << (check.holds ? "[holds] " : "[fails] ") << name << ": lhs = " << check.lhs
        << ", rhs = " << check.rhs << "\n";
  }
  if (cert.stability) {
    out << "  stability bounds: l1 " << cert.stability->l1_bound << ", group "
        << cert.stability->group_bound << "\n";
  }
  return out.str();
}

}  // namespace polysparse
