#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "polysparse/bp.hpp"
#include "polysparse/extract.hpp"
#include "polysparse/greedy.hpp"
#include "polysparse/rng.hpp"
#include "polysparse/system.hpp"

namespace polysparse {

/// Monte Carlo experiment over random polynomial systems with a planted
/// sparse solution (first k entries one, rest zero).
struct ExperimentSpec {
  int n = 0;
  int d = 0;
  int N = 0;
  int k = 0;
  int trials = 100;
  std::uint64_t seed = 42;
  double noise_epsilon = 0.0;        // exact l2 norm of the injected noise
  bool pure_nonlinear = false;       // zero out all degree-1 columns
  bool phase_retrieval = false;      // rows are squared random linear forms
  std::vector<std::string> methods;  // l1, rl1, l1l2, irl1l2, sl1l2, aga, ega
  double success_tol = 1e-6;
  double solver_epsilon = -1.0;      // constraint radius handed to solvers; <0 uses noise_epsilon
  int threads = 1;
  bool record_timing = true;         // zeroed timing column keeps CSV bytes reproducible
  std::string experiment_id = "experiment";
};

struct TrialRecord {
  int trial_index = 0;
  std::string method;
  bool success = false;
  bool support_success = false;
  double relative_error = 1.0;
  double wall_time_seconds = 0.0;
  long solver_iterations = 0;
  bool failed = false;
  std::string failure;
};

struct Instance {
  PolynomialSystem system;
  Eigen::VectorXd x0;
  Eigen::VectorXd e;
};

inline Instance generate_instance(const ExperimentSpec& spec, int trial_index) {
  if (spec.n < 1 || spec.d < 1 || spec.N < 1) throw std::invalid_argument("bench: bad dimensions");
  if (spec.k < 0 || spec.k > spec.n) throw std::invalid_argument("bench: k outside [0, n]");
  if (spec.phase_retrieval && spec.d != 2)
    throw std::invalid_argument("bench: phase retrieval requires d = 2");

  Instance inst;
  inst.system.basis = enumerate_basis(spec.n, spec.d);
  const Eigen::Index M = inst.system.basis.size();

  inst.x0 = Eigen::VectorXd::Zero(spec.n);
  inst.x0.head(spec.k).setOnes();

  CounterRng rng_A(spec.seed, static_cast<std::uint64_t>(trial_index), 0);
  CounterRng rng_b(spec.seed, static_cast<std::uint64_t>(trial_index), 1);
  CounterRng rng_e(spec.seed, static_cast<std::uint64_t>(trial_index), 2);

  inst.system.A.resize(spec.N, M);
  inst.system.b.resize(spec.N);
  if (spec.phase_retrieval) {
    // Row i encodes (c_i^T x)^2 over the quadratic monomials.
    inst.system.A.setZero();
    Eigen::VectorXd c(spec.n);
    for (int i = 0; i < spec.N; ++i) {
      for (int j = 0; j < spec.n; ++j) c[j] = rng_A.next_gaussian();
      for (Eigen::Index col = 0; col < M; ++col) {
        const auto& alpha = inst.system.basis.indexes[static_cast<std::size_t>(col)].alpha;
        int first = -1, second = -1;
        for (int j = 0; j < spec.n; ++j) {
          if (alpha[static_cast<std::size_t>(j)] == 2) first = second = j;
          if (alpha[static_cast<std::size_t>(j)] == 1) (first < 0 ? first : second) = j;
        }
        if (inst.system.basis.indexes[static_cast<std::size_t>(col)].degree() != 2) continue;
        inst.system.A(i, col) = first == second ? c[first] * c[first] : 2.0 * c[first] * c[second];
      }
    }
    inst.system.b.setZero();
  } else {
    for (int i = 0; i < spec.N; ++i)
      for (Eigen::Index col = 0; col < M; ++col) inst.system.A(i, col) = rng_A.next_gaussian();
    for (int i = 0; i < spec.N; ++i) inst.system.b[i] = rng_b.next_gaussian();
    if (spec.pure_nonlinear) inst.system.A.leftCols(spec.n).setZero();
  }

  inst.e = Eigen::VectorXd::Zero(spec.N);
  if (spec.noise_epsilon > 0) {
    for (int i = 0; i < spec.N; ++i) inst.e[i] = rng_e.next_gaussian();
    inst.e *= spec.noise_epsilon / inst.e.norm();
  }

  inst.system.y = inst.system.A * lift(inst.system.basis, inst.x0) + inst.system.b + inst.e;
  return inst;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  CounterRng rng(seed, a, b ^ 0x70686173ULL);
  return rng.next_u64();
}

struct MethodOutcome {
  Eigen::VectorXd x_hat;
  long iterations = 0;
};

inline MethodOutcome run_method(const ExperimentSpec& spec, const Instance& inst,
                                const GroupStructure& groups, const std::string& method) {
  const double eps_cfg = spec.solver_epsilon >= 0 ? spec.solver_epsilon : spec.noise_epsilon;
  MethodOutcome out;
  if (method == "aga" || method == "ega") {
    GreedyConfig config;
    config.epsilon = eps_cfg * eps_cfg;
    const GreedyResult result = method == "ega" ? ega(inst.system, config) : aga(inst.system, config);
    out.iterations = result.ls_solves;
    bool assumption1 = true;
    for (int j = 0; j < spec.n; ++j)
      if (!groups.is_active(j)) assumption1 = false;
    if (assumption1) {
      out.x_hat = result.x_hat;
    } else {
      out.x_hat =
          extract(inst.system.basis, groups, result.phi_hat, inst.system, &result.support).x_hat;
    }
    return out;
  }

  BpConfig config;
  config.noise_epsilon = eps_cfg;
  // The 1e-6 success metric needs solver accuracy well past it; failed
  // recoveries never converge, so cap their iterations.
  config.solver.primal_tol = 1e-8;
  config.solver.dual_tol = 1e-8;
  config.solver.max_iterations = 20000;
  if (method == "l1") {
    config.method = BpMethod::L1;
  } else if (method == "rl1") {
    config.method = BpMethod::ReweightedL1;
  } else if (method == "l1l2") {
    config.method = BpMethod::GroupL1L2;
    config.nonneg = true;
  } else if (method == "irl1l2") {
    config.method = BpMethod::IRGroupL1L2;
    config.nonneg = true;
  } else if (method == "sl1l2") {
    config.method = BpMethod::SelGroupL1L2;
    config.nonneg = true;
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }
  const SolveResult result = solve_bp(inst.system, config);
  out.iterations = result.solver_status.iterations;
  if (result.assumption1) {
    out.x_hat = result.x_hat;
  } else {
    out.x_hat = extract(inst.system.basis, groups, result.phi_hat, inst.system, nullptr).x_hat;
  }
  return out;
}

}  // namespace detail

inline std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, int trial_index) {
  const Instance inst = generate_instance(spec, trial_index);
  const GroupStructure groups = build_groups(inst.system.basis, inst.system.A);
  const bool sign_symmetric = spec.pure_nonlinear || spec.phase_retrieval;

  std::vector<TrialRecord> records;
  for (const auto& method : spec.methods) {
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.method = method;
    Eigen::VectorXd x_hat = Eigen::VectorXd::Zero(spec.n);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const detail::MethodOutcome out = detail::run_method(spec, inst, groups, method);
      x_hat = out.x_hat;
      rec.solver_iterations = out.iterations;
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.failure = e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (spec.record_timing)
      rec.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();

    double err = (x_hat - inst.x0).norm();
    if (sign_symmetric) err = std::min(err, (x_hat + inst.x0).norm());
    rec.success = err <= spec.success_tol;
    rec.relative_error = inst.x0.norm() > 0 ? err / inst.x0.norm() : err;

    bool support_ok = true;
    for (int j = 0; j < spec.n; ++j) {
      const bool est_nonzero = std::abs(x_hat[j]) >= 1e-6;
      const bool true_nonzero = inst.x0[j] != 0.0;
      if (est_nonzero != true_nonzero) support_ok = false;
    }
    rec.support_success = support_ok;
    records.push_back(std::move(rec));
  }
  return records;
}

struct MethodSummary {
  std::string method;
  double success_rate = 0.0;
  double support_rate = 0.0;
  double mean_rel_error = 0.0;
  double mean_time_s = 0.0;
};

struct ExperimentSummary {
  ExperimentSpec spec;
  std::vector<MethodSummary> rows;
  std::vector<TrialRecord> records;  // trial-major, method order within
};

inline ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("bench: trials >= 1 required");
  if (spec.methods.empty()) throw std::invalid_argument("bench: no methods configured");

  std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(spec.trials));
  const int workers = std::max(1, std::min(spec.threads, spec.trials));
  if (workers == 1) {
    for (int t = 0; t < spec.trials; ++t) per_trial[static_cast<std::size_t>(t)] = run_trial(spec, t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < spec.trials; t = next.fetch_add(1))
          per_trial[static_cast<std::size_t>(t)] = run_trial(spec, t);
      });
    }
    for (auto& th : pool) th.join();
  }

  ExperimentSummary summary;
  summary.spec = spec;
  for (const auto& trial : per_trial)
    summary.records.insert(summary.records.end(), trial.begin(), trial.end());

  for (const auto& method : spec.methods) {
    MethodSummary row;
    row.method = method;
    int count = 0;
    for (const auto& rec : summary.records) {
      if (rec.method != method) continue;
      ++count;
      row.success_rate += rec.success ? 1.0 : 0.0;
      row.support_rate += rec.support_success ? 1.0 : 0.0;
      row.mean_rel_error += rec.relative_error;
      row.mean_time_s += rec.wall_time_seconds;
    }
    row.success_rate /= count;
    row.support_rate /= count;
    row.mean_rel_error /= count;
    row.mean_time_s /= count;
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

inline void write_summary_csv(std::ostream& out, const ExperimentSummary& summary,
                              bool header = true) {
  if (header)
    out << "experiment_id,method,n,d,N,k,trials,noise_epsilon,success_rate,support_rate,"
           "mean_rel_error,mean_time_s\n";
  char line[512];
  for (const auto& row : summary.rows) {
    std::snprintf(line, sizeof(line), "%s,%s,%d,%d,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.6f\n",
                  summary.spec.experiment_id.c_str(), row.method.c_str(), summary.spec.n,
                  summary.spec.d, summary.spec.N, summary.spec.k, summary.spec.trials,
                  summary.spec.noise_epsilon, row.success_rate, row.support_rate,
                  row.mean_rel_error, row.mean_time_s);
    out << line;
  }
}

struct PhaseCell {
  std::string method;
  int n = 0, d = 0;
  double delta = 0.0;
  int k = 0;
  int trials = 0;
  double success_rate = 0.0;
  bool timed_out = false;
};

/// Success probability grid over sparsity level and measurement ratio
/// delta = N/n. Cells that blow a per-method time budget are marked
/// timed out rather than failed.
inline std::vector<PhaseCell> phase_diagram(const ExperimentSpec& base,
                                            const std::vector<int>& k_values,
                                            const std::vector<double>& deltas,
                                            double method_time_budget_s =
                                                std::numeric_limits<double>::infinity()) {
  std::vector<PhaseCell> cells;
  for (double delta : deltas) {
    if (delta < 1.0) throw std::invalid_argument("phase_diagram: delta >= 1 required");
    for (int k : k_values) {
      ExperimentSpec cell = base;
      cell.N = static_cast<int>(std::lround(delta * base.n));
      cell.k = k;
      cell.seed = detail::mix_seed(base.seed, static_cast<std::uint64_t>(cell.N),
                                   static_cast<std::uint64_t>(k));

      std::vector<double> successes(base.methods.size(), 0.0);
      std::vector<double> spent(base.methods.size(), 0.0);
      std::vector<char> timed_out(base.methods.size(), 0);
      for (int t = 0; t < cell.trials; ++t) {
        const Instance inst = generate_instance(cell, t);
        const GroupStructure groups = build_groups(inst.system.basis, inst.system.A);
        const bool sign_symmetric = cell.pure_nonlinear || cell.phase_retrieval;
        for (std::size_t m = 0; m < base.methods.size(); ++m) {
          if (timed_out[m]) continue;
          const auto t0 = std::chrono::steady_clock::now();
          Eigen::VectorXd x_hat = Eigen::VectorXd::Zero(cell.n);
          try {
            x_hat = detail::run_method(cell, inst, groups, base.methods[m]).x_hat;
          } catch (const std::exception&) {
          }
          spent[m] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          double err = (x_hat - inst.x0).norm();
          if (sign_symmetric) err = std::min(err, (x_hat + inst.x0).norm());
          if (err <= cell.success_tol) successes[m] += 1.0;
          if (spent[m] > method_time_budget_s) timed_out[m] = 1;
        }
      }
      for (std::size_t m = 0; m < base.methods.size(); ++m) {
        PhaseCell out;
        out.method = base.methods[m];
        out.n = base.n;
        out.d = base.d;
        out.delta = delta;
        out.k = k;
        out.trials = cell.trials;
        out.success_rate = successes[m] / cell.trials;
        out.timed_out = timed_out[m] != 0;
        cells.push_back(std::move(out));
      }
    }
  }
  return cells;
}

inline void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells,
                            bool header = true) {
  if (header) out << "method,n,d,delta,k,trials,success_rate\n";
  char line[256];
  for (const auto& cell : cells) {
    if (cell.timed_out) {
      std::snprintf(line, sizeof(line), "%s,%d,%d,%.9g,%d,%d,timeout\n", cell.method.c_str(),
                    cell.n, cell.d, cell.delta, cell.k, cell.trials);
    } else {
      std::snprintf(line, sizeof(line), "%s,%d,%d,%.9g,%d,%d,%.9g\n", cell.method.c_str(), cell.n,
                    cell.d, cell.delta, cell.k, cell.trials, cell.success_rate);
    }
    out << line;
  }
}

}  // namespace polysparse
