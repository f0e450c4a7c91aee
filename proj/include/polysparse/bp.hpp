#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "polysparse/conic.hpp"
#include "polysparse/extract.hpp"
#include "polysparse/grouping.hpp"
#include "polysparse/system.hpp"

namespace polysparse {

enum class BpMethod { L1, ReweightedL1, GroupL1L2, IRGroupL1L2, SelGroupL1L2 };

struct BpConfig {
  BpMethod method = BpMethod::GroupL1L2;
  bool nonneg = false;
  double noise_epsilon = 0.0;  // 0 keeps the equality constraints
  int reweight_iterations = 10;
  double reweight_eps = 1e-3;
  SolverOptions solver;
};

struct SolveResult {
  Eigen::VectorXd phi_hat;
  Eigen::VectorXd x_hat;  // linear readout; meaningful under assumption1
  std::vector<Eigen::Index> group_support;
  SolverStatus solver_status;
  bool verified = false;
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  bool assumption1 = true;
  bool nonterminating = false;
  int outer_iterations = 1;
};

namespace detail {

/// Shared assembly: the solve runs on the active columns only; inactive
/// columns of phi_hat stay zero.
struct BpWorkspace {
  const PolynomialSystem* system = nullptr;
  GroupStructure groups;
  std::vector<Eigen::Index> active;          // sub-column -> basis column
  Eigen::MatrixXd A_active;                  // N x Ma
  Eigen::VectorXd rhs;                       // y - b
  std::vector<Eigen::Index> group_vars;      // conic group -> variable index
  std::vector<GroupSpec> conic_groups;       // over sub-columns
  std::vector<GroupSpec> singleton_groups;   // over sub-columns
  std::vector<Eigen::Index> nonneg_sub;      // even-degree columns, sub-indexed

  explicit BpWorkspace(const PolynomialSystem& sys) : system(&sys) {
    sys.validate();
    groups = build_groups(sys.basis, sys.A);
    active = groups.active_columns;
    std::vector<Eigen::Index> sub_of(static_cast<std::size_t>(sys.basis.size()), -1);
    for (std::size_t i = 0; i < active.size(); ++i)
      sub_of[static_cast<std::size_t>(active[i])] = static_cast<Eigen::Index>(i);

    const Eigen::Index Ma = static_cast<Eigen::Index>(active.size());
    A_active.resize(sys.equations(), Ma);
    for (Eigen::Index i = 0; i < Ma; ++i) A_active.col(i) = sys.A.col(active[static_cast<std::size_t>(i)]);
    rhs = sys.y - sys.b;

    for (int j = 0; j < sys.basis.n; ++j) {
      const auto& cols = groups.active_index_sets[static_cast<std::size_t>(j)];
      if (cols.empty()) continue;
      GroupSpec g;
      g.weights.resize(static_cast<Eigen::Index>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) {
        g.columns.push_back(sub_of[static_cast<std::size_t>(cols[i])]);
        g.weights[static_cast<Eigen::Index>(i)] = groups.weights[cols[i]];
      }
      conic_groups.push_back(std::move(g));
      group_vars.push_back(j);
    }

    for (Eigen::Index i = 0; i < Ma; ++i) {
      GroupSpec g;
      g.columns.push_back(i);
      g.weights = Eigen::VectorXd::Constant(1, groups.weights[active[static_cast<std::size_t>(i)]]);
      singleton_groups.push_back(std::move(g));
    }

    for (Eigen::Index k : groups.even_set)
      if (sub_of[static_cast<std::size_t>(k)] >= 0) nonneg_sub.push_back(sub_of[static_cast<std::size_t>(k)]);
  }

  Eigen::VectorXd scatter(const Eigen::VectorXd& phi_active) const {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(system->basis.size());
    for (std::size_t i = 0; i < active.size(); ++i) phi[active[i]] = phi_active[static_cast<Eigen::Index>(i)];
    return phi;
  }

  SolveResult finish(const Eigen::VectorXd& phi_active, const SolverStatus& status) const {
    SolveResult result;
    result.phi_hat = scatter(phi_active);
    result.x_hat = unlift(system->basis, result.phi_hat);
    result.group_support = group_support(groups, result.phi_hat);
    result.solver_status = status;
    result.assumption1 = true;
    for (int j = 0; j < system->basis.n; ++j)
      if (!groups.is_active(j)) result.assumption1 = false;
    if (result.assumption1) {
      auto [ok, residual] = verify(*system, result.x_hat);
      result.verified = ok;
      result.residual_norm = residual;
    }
    return result;
  }
};

inline ConstraintKind constraint_of(const BpConfig& config) {
  return config.noise_epsilon > 0 ? ConstraintKind::Ball : ConstraintKind::Equality;
}

}  // namespace detail

/// Weighted l1 relaxation (singleton groups), optionally reweighted.
inline SolveResult solve_l1(const PolynomialSystem& system, const BpConfig& config) {
  detail::BpWorkspace ws(system);
  ConicSolver solver(ws.A_active, ws.singleton_groups,
                     config.nonneg ? ws.nonneg_sub : std::vector<Eigen::Index>{});
  const bool reweighted = config.method == BpMethod::ReweightedL1;
  const int rounds = reweighted ? std::max(1, config.reweight_iterations) : 1;
  Eigen::VectorXd mu = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ws.singleton_groups.size()));
  ConicSolver::State state;
  Eigen::VectorXd phi;
  SolverStatus status;
  for (int round = 0; round < rounds; ++round) {
    std::tie(phi, status) = solver.solve(ws.rhs, detail::constraint_of(config),
                                         config.noise_epsilon, mu, config.solver, &state);
    if (round + 1 < rounds) {
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const double wmag = ws.singleton_groups[static_cast<std::size_t>(i)].weights[0] * std::abs(phi[i]);
        mu[i] = 1.0 / (wmag + config.reweight_eps);
      }
    }
  }
  SolveResult result = ws.finish(phi, status);
  result.outer_iterations = rounds;
  return result;
}

/// Group l1/l2 relaxation with the given per-variable multipliers
/// (all ones for the unweighted problem). Nonnegativity is applied on the
/// all-even-degree columns when configured.
inline SolveResult solve_group(const PolynomialSystem& system, const BpConfig& config,
                               const Eigen::VectorXd& multipliers) {
  detail::BpWorkspace ws(system);
  if (multipliers.size() != system.basis.n)
    throw std::invalid_argument("solve_group: multipliers length != n");
  ConicSolver solver(ws.A_active, ws.conic_groups,
                     config.nonneg ? ws.nonneg_sub : std::vector<Eigen::Index>{});
  Eigen::VectorXd mu(static_cast<Eigen::Index>(ws.group_vars.size()));
  for (std::size_t g = 0; g < ws.group_vars.size(); ++g)
    mu[static_cast<Eigen::Index>(g)] = multipliers[ws.group_vars[g]];
  auto [phi, status] = solver.solve(ws.rhs, detail::constraint_of(config), config.noise_epsilon,
                                    mu, config.solver, nullptr);
  return ws.finish(phi, status);
}

inline SolveResult solve_group(const PolynomialSystem& system, const BpConfig& config) {
  return solve_group(system, config, Eigen::VectorXd::Ones(system.basis.n));
}

/// Iteratively reweighted group relaxation: multipliers start at one and
/// are refreshed to 1 / (||W_j phi||_2 + reweight_eps) after each solve.
inline SolveResult solve_ir_group(const PolynomialSystem& system, const BpConfig& config) {
  if (config.reweight_iterations < 1)
    throw std::invalid_argument("solve_ir_group: reweight_iterations >= 1 required");
  detail::BpWorkspace ws(system);
  ConicSolver solver(ws.A_active, ws.conic_groups,
                     config.nonneg ? ws.nonneg_sub : std::vector<Eigen::Index>{});
  Eigen::VectorXd mu = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ws.group_vars.size()));
  ConicSolver::State state;
  Eigen::VectorXd phi;
  SolverStatus status;
  for (int round = 0; round < config.reweight_iterations; ++round) {
    std::tie(phi, status) = solver.solve(ws.rhs, detail::constraint_of(config),
                                         config.noise_epsilon, mu, config.solver, &state);
    if (round + 1 < config.reweight_iterations) {
      const Eigen::VectorXd norms = group_norms(ws.groups, ws.scatter(phi));
      for (std::size_t g = 0; g < ws.group_vars.size(); ++g)
        mu[static_cast<Eigen::Index>(g)] = 1.0 / (norms[ws.group_vars[g]] + config.reweight_eps);
    }
  }
  SolveResult result = ws.finish(phi, status);
  result.outer_iterations = config.reweight_iterations;
  return result;
}

/// Selective reweighting: repeatedly solve, then free the group with the
/// largest norm among those still penalized, until the weighted objective
/// vanishes. Ties break to the lowest variable index.
inline SolveResult solve_selective(const PolynomialSystem& system, const BpConfig& config) {
  detail::BpWorkspace ws(system);
  ConicSolver solver(ws.A_active, ws.conic_groups,
                     config.nonneg ? ws.nonneg_sub : std::vector<Eigen::Index>{});
  const Eigen::Index G = static_cast<Eigen::Index>(ws.group_vars.size());
  Eigen::VectorXd mu = Eigen::VectorXd::Ones(G);
  const double stop_tol = 1e-8 * (1.0 + system.y.norm());
  ConicSolver::State state;

  Eigen::VectorXd best_phi;
  SolverStatus best_status;
  double best_weighted = std::numeric_limits<double>::infinity();
  int rounds = 0;
  bool stopped = false;

  for (Eigen::Index round = 0; round < G; ++round) {
    auto [phi, status] = solver.solve(ws.rhs, detail::constraint_of(config), config.noise_epsilon,
                                      mu, config.solver, &state);
    ++rounds;
    const Eigen::VectorXd norms = group_norms(ws.groups, ws.scatter(phi));

    Eigen::Index argmax = -1;
    double biggest = -1.0;
    for (Eigen::Index g = 0; g < G; ++g) {
      if (mu[g] == 0.0) continue;
      const double gn = norms[ws.group_vars[static_cast<std::size_t>(g)]];
      if (gn > biggest) {
        biggest = gn;
        argmax = g;
      }
    }
    if (argmax >= 0) mu[argmax] = 0.0;

    double weighted = 0.0;
    for (Eigen::Index g = 0; g < G; ++g)
      weighted += mu[g] * norms[ws.group_vars[static_cast<std::size_t>(g)]];

    if (weighted < best_weighted) {
      best_weighted = weighted;
      best_phi = phi;
      best_status = status;
    }
    if (weighted <= stop_tol) {
      best_phi = phi;
      best_status = status;
      stopped = true;
      break;
    }
  }

  SolveResult result = ws.finish(best_phi, best_status);
  result.outer_iterations = rounds;
  result.nonterminating = !stopped;
  return result;
}

inline SolveResult solve_bp(const PolynomialSystem& system, const BpConfig& config) {
  switch (config.method) {
    case BpMethod::L1:
    case BpMethod::ReweightedL1:
      return solve_l1(system, config);
    case BpMethod::GroupL1L2:
      return solve_group(system, config);
    case BpMethod::IRGroupL1L2:
      return solve_ir_group(system, config);
    case BpMethod::SelGroupL1L2:
      return solve_selective(system, config);
  }
  throw std::logic_error("solve_bp: unknown method");
}

}  // namespace polysparse
