#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace polysparse {

/// One sparsity group: a set of columns, the positive weights applied to
/// them inside the norm, and the multiplier on the group norm.
struct GroupSpec {
  std::vector<Eigen::Index> columns;
  Eigen::VectorXd weights;
  double multiplier = 1.0;
};

enum class ConstraintKind { Equality, Ball };

struct ConicProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd r;
  std::vector<GroupSpec> groups;
  ConstraintKind constraint = ConstraintKind::Equality;
  double ball_radius = 0.0;
  std::vector<Eigen::Index> nonneg_set;
};

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double avg_objective = 0.0;    // objective at the running-average iterate
  double avg_feasibility = 0.0;  // constraint violation at the running-average iterate
};

struct SolverOptions {
  int max_iterations = 50000;
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  double penalty = 1.0;
  bool adaptive_penalty = true;
  double relaxation = 1.7;                   // over-relaxation factor in (0, 2)
  std::string trace_csv;                     // dump per-iteration diagnostics when nonempty
  std::vector<TraceRow>* trace_sink = nullptr;
};

enum class SolverError { None, MaxIterations, InfeasibleEquality, NumericalBreakdown };

struct SolverStatus {
  bool converged = false;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  SolverError error = SolverError::None;
};

/// argmin_u t*||u||_2 + 0.5*||u - v||_2^2.
inline Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& v, double t) {
  const double nv = v.norm();
  if (nv <= t) return Eigen::VectorXd::Zero(v.size());
  return (1.0 - t / nv) * v;
}

/// Shrinks each group's weighted subvector norm by step * multiplier.
/// Groups must be disjoint here; overlapping groups are shrunk on their
/// consensus copies inside the solver instead.
inline Eigen::VectorXd prox_group(const Eigen::VectorXd& v, const std::vector<GroupSpec>& groups,
                                  double step) {
  if (step <= 0) throw std::invalid_argument("prox_group: step must be positive");
  std::vector<char> seen(static_cast<std::size_t>(v.size()), 0);
  Eigen::VectorXd out = v;
  for (const auto& g : groups) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(g.columns.size()));
    for (std::size_t i = 0; i < g.columns.size(); ++i) {
      const Eigen::Index k = g.columns[i];
      if (seen[static_cast<std::size_t>(k)])
        throw std::invalid_argument("prox_group: overlapping groups");
      seen[static_cast<std::size_t>(k)] = 1;
      c[static_cast<Eigen::Index>(i)] = g.weights[static_cast<Eigen::Index>(i)] * v[k];
    }
    const Eigen::VectorXd shrunk = block_soft_threshold(c, step * g.multiplier);
    for (std::size_t i = 0; i < g.columns.size(); ++i)
      out[g.columns[i]] = shrunk[static_cast<Eigen::Index>(i)] / g.weights[static_cast<Eigen::Index>(i)];
  }
  return out;
}

/// Euclidean correction of v toward the constraint set. Equality projects
/// onto {phi : A phi = r} (minimum-norm correction, pseudo-inverse action
/// for rank-deficient A). Ball leaves feasible v unchanged and otherwise
/// projects the residual A v - r onto the eps-ball, correcting v minimally.
inline Eigen::VectorXd project_constraint(const Eigen::VectorXd& v, const Eigen::MatrixXd& A,
                                          const Eigen::VectorXd& r, ConstraintKind kind,
                                          double eps = 0.0) {
  Eigen::VectorXd resid = A * v - r;
  if (kind == ConstraintKind::Ball) {
    const double nr = resid.norm();
    if (nr <= eps) return v;
    const Eigen::VectorXd target = resid * (eps / nr);
    resid -= target;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  return v - cod.solve(resid);
}

namespace detail {

inline void validate_problem(const Eigen::MatrixXd& A, const std::vector<GroupSpec>& groups,
                             const std::vector<Eigen::Index>& nonneg) {
  const Eigen::Index M = A.cols();
  std::vector<char> covered(static_cast<std::size_t>(M), 0);
  for (const auto& g : groups) {
    if (g.multiplier < 0) throw std::invalid_argument("conic: negative group multiplier");
    if (static_cast<Eigen::Index>(g.columns.size()) != g.weights.size())
      throw std::invalid_argument("conic: group weights/columns length mismatch");
    for (std::size_t i = 0; i < g.columns.size(); ++i) {
      const Eigen::Index k = g.columns[i];
      if (k < 0 || k >= M) throw std::invalid_argument("conic: group column out of range");
      if (!(g.weights[static_cast<Eigen::Index>(i)] > 0))
        throw std::invalid_argument("conic: group weights must be positive");
      covered[static_cast<std::size_t>(k)] = 1;
    }
  }
  for (Eigen::Index k = 0; k < M; ++k)
    if (!covered[static_cast<std::size_t>(k)])
      throw std::invalid_argument("conic: column not covered by any group");
  for (Eigen::Index k : nonneg)
    if (k < 0 || k >= M) throw std::invalid_argument("conic: nonneg index out of range");
}

}  // namespace detail

/// Operator-splitting solver for
///   min sum_j mu_j ||diag(w_j) phi[C_j]||_2
///   s.t. A phi = r            (Equality)
///        ||A phi - r||_2 <= eps  (Ball)
///        phi_k >= 0 for k in nonneg_set.
///
/// Each group gets its own weighted copy of its columns; the copies, the
/// constraint residual and the nonnegative block are reconciled with the
/// primal variable through scaled dual updates. The normal matrix of the
/// reconciliation step does not depend on the multipliers or the penalty,
/// so its factorization is shared across reweighted solves.
class ConicSolver {
 public:
  struct State {
    Eigen::VectorXd phi;
    std::vector<Eigen::VectorXd> u, lam_u;
    Eigen::VectorXd e, lam_e, p, lam_p;
    double rho = 1.0;
    bool initialized = false;
  };

  ConicSolver(Eigen::MatrixXd A, std::vector<GroupSpec> groups,
              std::vector<Eigen::Index> nonneg_set = {})
      : A_(std::move(A)), groups_(std::move(groups)), nonneg_(std::move(nonneg_set)) {
    detail::validate_problem(A_, groups_, nonneg_);
    const Eigen::Index M = A_.cols();
    Eigen::VectorXd group_diag = Eigen::VectorXd::Zero(M);
    for (const auto& g : groups_)
      for (std::size_t i = 0; i < g.columns.size(); ++i) {
        const double w = g.weights[static_cast<Eigen::Index>(i)];
        group_diag[g.columns[i]] += w * w;
      }
    // The nonnegative copy follows the combined group scale of its column;
    // otherwise the blocks converge at very different rates.
    nonneg_scale_.resize(static_cast<Eigen::Index>(nonneg_.size()));
    for (std::size_t i = 0; i < nonneg_.size(); ++i)
      nonneg_scale_[static_cast<Eigen::Index>(i)] = std::sqrt(group_diag[nonneg_[i]]);
    Eigen::MatrixXd H = A_.transpose() * A_;
    H.diagonal() += group_diag;
    for (std::size_t i = 0; i < nonneg_.size(); ++i) {
      const double s = nonneg_scale_[static_cast<Eigen::Index>(i)];
      H(nonneg_[i], nonneg_[i]) += s * s;
    }
    H_.compute(H);
    if (H_.info() != Eigen::Success) throw std::runtime_error("conic: factorization failed");
  }

  const Eigen::MatrixXd& matrix() const { return A_; }
  const std::vector<GroupSpec>& groups() const { return groups_; }

  double objective(const Eigen::VectorXd& phi, const Eigen::VectorXd& multipliers) const {
    double obj = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const double mu = multipliers.size() ? multipliers[static_cast<Eigen::Index>(g)]
                                           : groups_[g].multiplier;
      if (mu == 0.0) continue;
      double sq = 0.0;
      for (std::size_t i = 0; i < groups_[g].columns.size(); ++i) {
        const double s = groups_[g].weights[static_cast<Eigen::Index>(i)] * phi[groups_[g].columns[i]];
        sq += s * s;
      }
      obj += mu * std::sqrt(sq);
    }
    return obj;
  }

  /// multipliers overrides the per-group multipliers when nonempty.
  std::pair<Eigen::VectorXd, SolverStatus> solve(const Eigen::VectorXd& r, ConstraintKind kind,
                                                 double eps, const Eigen::VectorXd& multipliers,
                                                 const SolverOptions& opt,
                                                 State* state = nullptr) const {
    const Eigen::Index M = A_.cols();
    const Eigen::Index N = A_.rows();
    const std::size_t G = groups_.size();
    if (r.size() != N) throw std::invalid_argument("conic: rhs length mismatch");
    if (multipliers.size() && static_cast<std::size_t>(multipliers.size()) != G)
      throw std::invalid_argument("conic: multiplier count mismatch");
    if (eps < 0) throw std::invalid_argument("conic: negative ball radius");

    auto mu_of = [&](std::size_t g) {
      return multipliers.size() ? multipliers[static_cast<Eigen::Index>(g)] : groups_[g].multiplier;
    };

    SolverStatus status;

    // phi = 0 is feasible and objective-minimal when r is inside the ball
    // (or zero, for equality).
    const double rnorm = r.norm();
    if ((kind == ConstraintKind::Ball && rnorm <= eps) ||
        (kind == ConstraintKind::Equality && rnorm == 0.0)) {
      status.converged = true;
      return {Eigen::VectorXd::Zero(M), status};
    }

    // All multipliers zero: any feasible point is optimal; return the
    // minimum-norm one.
    bool all_zero_mu = true;
    for (std::size_t g = 0; g < G; ++g) {
      if (mu_of(g) < 0) throw std::invalid_argument("conic: negative group multiplier");
      if (mu_of(g) != 0.0) all_zero_mu = false;
    }
    if (all_zero_mu && kind == ConstraintKind::Equality) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A_);
      Eigen::VectorXd phi = cod.solve(r);
      status.converged = true;
      status.primal_residual = (A_ * phi - r).norm() / (1.0 + rnorm);
      return {phi, status};
    }

    // Split variables and scaled duals.
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(M);
    std::vector<Eigen::VectorXd> u(G), lam_u(G);
    for (std::size_t g = 0; g < G; ++g) {
      u[g] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(groups_[g].columns.size()));
      lam_u[g] = u[g];
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N), lam_e = e;
    const Eigen::Index P = static_cast<Eigen::Index>(nonneg_.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(P), lam_p = p;
    double rho = opt.penalty;
    if (state && state->initialized) {
      phi = state->phi;
      u = state->u;
      lam_u = state->lam_u;
      e = state->e;
      lam_e = state->lam_e;
      p = state->p;
      lam_p = state->lam_p;
      rho = state->rho;
    }

    auto weighted_sub = [&](std::size_t g) {
      Eigen::VectorXd t(static_cast<Eigen::Index>(groups_[g].columns.size()));
      for (std::size_t i = 0; i < groups_[g].columns.size(); ++i)
        t[static_cast<Eigen::Index>(i)] =
            groups_[g].weights[static_cast<Eigen::Index>(i)] * phi[groups_[g].columns[i]];
      return t;
    };

    std::vector<TraceRow> trace;
    const bool tracing = opt.trace_sink != nullptr || !opt.trace_csv.empty();
    Eigen::VectorXd phi_sum = Eigen::VectorXd::Zero(M);

    double best_feas = std::numeric_limits<double>::infinity();
    double window_feas = best_feas;
    constexpr int kStallWindow = 2000;

    const double alpha = opt.relaxation > 0 && opt.relaxation < 2 ? opt.relaxation : 1.0;

    int it = 0;
    for (it = 1; it <= opt.max_iterations; ++it) {
      // Reconciliation step.
      Eigen::VectorXd rhs = A_.transpose() * (r + e - lam_e);
      for (std::size_t g = 0; g < G; ++g) {
        const Eigen::VectorXd d = u[g] - lam_u[g];
        for (std::size_t i = 0; i < groups_[g].columns.size(); ++i)
          rhs[groups_[g].columns[i]] +=
              groups_[g].weights[static_cast<Eigen::Index>(i)] * d[static_cast<Eigen::Index>(i)];
      }
      for (Eigen::Index i = 0; i < P; ++i)
        rhs[nonneg_[static_cast<std::size_t>(i)]] += nonneg_scale_[i] * (p[i] - lam_p[i]);
      phi = H_.solve(rhs);
      if (!phi.allFinite()) {
        status.error = SolverError::NumericalBreakdown;
        break;
      }

      // Proximal updates on copies, constraint residual and nonneg block,
      // over-relaxed by alpha.
      double primal_sq = 0.0, kphi_sq = 0.0, split_sq = 0.0;
      Eigen::VectorXd dual_vec = Eigen::VectorXd::Zero(M);
      Eigen::VectorXd dual_scale_vec = Eigen::VectorXd::Zero(M);

      for (std::size_t g = 0; g < G; ++g) {
        const Eigen::VectorXd t = weighted_sub(g);
        const Eigen::VectorXd t_rel = alpha * t + (1.0 - alpha) * u[g];
        const Eigen::VectorXd u_new = block_soft_threshold(t_rel + lam_u[g], mu_of(g) / rho);
        const Eigen::VectorXd du = u_new - u[g];
        lam_u[g] += t_rel - u_new;
        for (std::size_t i = 0; i < groups_[g].columns.size(); ++i) {
          const double w = groups_[g].weights[static_cast<Eigen::Index>(i)];
          dual_vec[groups_[g].columns[i]] += w * du[static_cast<Eigen::Index>(i)];
          dual_scale_vec[groups_[g].columns[i]] += w * lam_u[g][static_cast<Eigen::Index>(i)];
        }
        u[g] = u_new;
        primal_sq += (t - u_new).squaredNorm();
        kphi_sq += t.squaredNorm();
        split_sq += u_new.squaredNorm();
      }

      const Eigen::VectorXd ve = A_ * phi - r;
      const Eigen::VectorXd ve_rel = alpha * ve + (1.0 - alpha) * e;
      Eigen::VectorXd e_new;
      if (eps == 0.0) {
        e_new = Eigen::VectorXd::Zero(N);
      } else {
        e_new = ve_rel + lam_e;
        const double ne = e_new.norm();
        if (ne > eps) e_new *= eps / ne;
      }
      dual_vec += A_.transpose() * (e_new - e);
      lam_e += ve_rel - e_new;
      dual_scale_vec += A_.transpose() * lam_e;
      const double feas = (ve - e_new).norm();
      e = e_new;
      primal_sq += (ve - e_new).squaredNorm();
      kphi_sq += (ve + r).squaredNorm();
      split_sq += (e + r).squaredNorm();

      for (Eigen::Index i = 0; i < P; ++i) {
        const Eigen::Index k = nonneg_[static_cast<std::size_t>(i)];
        const double s = nonneg_scale_[i];
        const double t = s * phi[k];
        const double t_rel = alpha * t + (1.0 - alpha) * p[i];
        const double p_new = std::max(t_rel + lam_p[i], 0.0);
        dual_vec[k] += s * (p_new - p[i]);
        lam_p[i] += t_rel - p_new;
        dual_scale_vec[k] += s * lam_p[i];
        p[i] = p_new;
        primal_sq += (t - p_new) * (t - p_new);
        kphi_sq += t * t;
        split_sq += p_new * p_new;
      }

      const double primal_norm = std::sqrt(primal_sq);
      const double primal_scale = 1.0 + std::sqrt(std::max(kphi_sq, split_sq));
      const double dual_norm = rho * dual_vec.norm();
      const double dual_scale = 1.0 + rho * dual_scale_vec.norm();
      status.primal_residual = primal_norm / primal_scale;
      status.dual_residual = dual_norm / dual_scale;

      if (tracing) {
        phi_sum += phi;
        TraceRow row;
        row.iteration = it;
        row.objective = objective(phi, multipliers);
        row.primal_res = status.primal_residual;
        row.dual_res = status.dual_residual;
        const Eigen::VectorXd phi_avg = phi_sum / it;
        row.avg_objective = objective(phi_avg, multipliers);
        const double avg_viol = (A_ * phi_avg - r).norm();
        row.avg_feasibility = kind == ConstraintKind::Ball ? std::max(0.0, avg_viol - eps) : avg_viol;
        trace.push_back(row);
      }

      if (status.primal_residual <= opt.primal_tol && status.dual_residual <= opt.dual_tol) {
        status.converged = true;
        break;
      }

      // Equality infeasibility shows up as a stalled constraint residual.
      if (kind == ConstraintKind::Equality) {
        best_feas = std::min(best_feas, feas / (1.0 + rnorm));
        if (it % kStallWindow == 0 && it >= 2 * kStallWindow) {
          if (best_feas > 1e3 * opt.primal_tol && best_feas > 0.99 * window_feas) {
            status.error = SolverError::InfeasibleEquality;
            break;
          }
          window_feas = best_feas;
        }
      }

      if (opt.adaptive_penalty && it % 25 == 0) {
        const double pr = status.primal_residual;
        const double dr = status.dual_residual;
        if (pr > 10.0 * dr && rho < 1e8) {
          rho *= 2.0;
          for (auto& l : lam_u) l /= 2.0;
          lam_e /= 2.0;
          lam_p /= 2.0;
        } else if (dr > 10.0 * pr && rho > 1e-8) {
          rho /= 2.0;
          for (auto& l : lam_u) l *= 2.0;
          lam_e *= 2.0;
          lam_p *= 2.0;
        }
      }
    }

    if (it > opt.max_iterations) {
      it = opt.max_iterations;
      status.error = SolverError::MaxIterations;
    }
    status.iterations = it;

    // The shrinkage copies carry the exact sparsity pattern: a penalized
    // group whose copy vanished pins all of its columns to zero. Transfer
    // that pattern to the returned iterate (its own entries there are
    // residual-sized).
    if (status.converged) {
      for (std::size_t g = 0; g < G; ++g) {
        if (mu_of(g) == 0.0 || !u[g].isZero(0.0)) continue;
        for (Eigen::Index k : groups_[g].columns) phi[k] = 0.0;
      }
    }
    status.objective = objective(phi, multipliers);

    if (state) {
      state->phi = phi;
      state->u = u;
      state->lam_u = lam_u;
      state->e = e;
      state->lam_e = lam_e;
      state->p = p;
      state->lam_p = lam_p;
      state->rho = rho;
      state->initialized = true;
    }

    if (opt.trace_sink) *opt.trace_sink = trace;
    if (!opt.trace_csv.empty()) {
      std::ofstream out(opt.trace_csv);
      out << "iteration,objective,primal_res,dual_res\n";
      char line[160];
      for (const auto& row : trace) {
        std::snprintf(line, sizeof(line), "%d,%.12g,%.12g,%.12g\n", row.iteration, row.objective,
                      row.primal_res, row.dual_res);
        out << line;
      }
    }

    return {phi, status};
  }

 private:
  Eigen::MatrixXd A_;
  std::vector<GroupSpec> groups_;
  std::vector<Eigen::Index> nonneg_;
  Eigen::VectorXd nonneg_scale_;
  Eigen::LDLT<Eigen::MatrixXd> H_;
};

inline std::pair<Eigen::VectorXd, SolverStatus> solve(const ConicProblem& problem,
                                                      const SolverOptions& options) {
  if (!problem.A.allFinite() || !problem.r.allFinite()) {
    SolverStatus status;
    status.error = SolverError::NumericalBreakdown;
    return {Eigen::VectorXd::Zero(problem.A.cols()), status};
  }
  ConicSolver solver(problem.A, problem.groups, problem.nonneg_set);
  return solver.solve(problem.r, problem.constraint, problem.ball_radius, Eigen::VectorXd(),
                      options);
}

}  // namespace polysparse
