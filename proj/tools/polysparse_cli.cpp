// Command-line front end: solve a polynomial system from JSON, emit
// recovery certificates, and run the Monte Carlo benchmark / phase-diagram
// sweeps. Machine-readable output goes to stdout, logs to stderr.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "polysparse/polysparse.hpp"

namespace {

int log_level() {
  const char* env = std::getenv("POLYSPARSE_LOG");
  if (!env) return 1;
  const std::string value(env);
  if (value == "quiet" || value == "0") return 0;
  if (value == "debug" || value == "2") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[polysparse] " << msg << "\n";
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

nlohmann::json solver_diagnostics(const polysparse::SolverStatus& status) {
  return {{"converged", status.converged},
          {"iterations", status.iterations},
          {"primal_residual", status.primal_residual},
          {"dual_residual", status.dual_residual},
          {"objective", status.objective}};
}

struct BenchArgs {
  std::string preset;
  polysparse::ExperimentSpec spec;
  bool has_regime = false;
};

polysparse::ExperimentSpec preset_spec(const std::string& name) {
  using polysparse::ExperimentSpec;
  ExperimentSpec spec;
  spec.experiment_id = name;
  const std::vector<std::string> all = {"rl1", "l1l2", "irl1l2", "sl1l2", "aga", "ega"};
  if (name == "table1") {
    spec.n = 20; spec.d = 2; spec.N = 25; spec.k = 3; spec.methods = all;
  } else if (name == "table2") {
    spec.n = 5; spec.d = 4; spec.N = 50; spec.k = 2; spec.methods = all;
  } else if (name == "table3") {
    spec.n = 20; spec.d = 2; spec.N = 25; spec.k = 3; spec.pure_nonlinear = true; spec.methods = all;
  } else if (name == "table4") {
    spec.n = 20; spec.d = 2; spec.N = 50; spec.k = 3; spec.noise_epsilon = 3.0; spec.methods = all;
  } else if (name == "table5") {
    spec.n = 5; spec.d = 4; spec.N = 50; spec.k = 2; spec.noise_epsilon = 3.0; spec.methods = all;
  } else if (name == "table6") {
    spec.n = 20; spec.d = 2; spec.N = 25; spec.k = 3; spec.phase_retrieval = true;
    spec.methods = {"irl1l2", "sl1l2", "aga", "ega"};
  } else if (name == "pure4") {
    spec.n = 5; spec.d = 4; spec.N = 50; spec.k = 2; spec.pure_nonlinear = true; spec.methods = all;
  } else if (name == "fig5" || name == "fig6") {
    spec.n = 20; spec.d = 2; spec.N = 50; spec.k = 3; spec.noise_epsilon = 3.0;
    spec.trials = 50;
    spec.methods = {"rl1", "irl1l2", "sl1l2", "aga", "ega"};
  } else {
    throw CLI::ValidationError("unknown preset: " + name);
  }
  return spec;
}

int run_bench(BenchArgs& args, const std::string& output, int threads, int trials,
              std::uint64_t seed, bool timing) {
  auto& spec = args.spec;
  if (!args.preset.empty()) {
    const auto base = preset_spec(args.preset);
    const auto keep = spec;
    spec = base;
    if (keep.trials > 0) spec.trials = keep.trials;
    if (!keep.methods.empty()) spec.methods = keep.methods;
  }
  if (spec.methods.empty())
    spec.methods = {"rl1", "l1l2", "irl1l2", "sl1l2", "aga", "ega"};
  if (trials > 0) spec.trials = trials;
  if (spec.trials <= 0) spec.trials = 100;
  spec.seed = seed;
  spec.threads = threads;
  spec.record_timing = timing;
  if (spec.experiment_id.empty()) spec.experiment_id = "bench";

  std::ofstream file;
  std::ostream& out = open_output(file, output);

  if (args.preset == "fig5") {
    // Noise-level sweep: the solvers are handed the true noise norm.
    bool header = true;
    for (int eps = 1; eps <= 10; ++eps) {
      auto sweep = spec;
      sweep.noise_epsilon = eps;
      sweep.solver_epsilon = eps;
      sweep.experiment_id = "fig5_eps" + std::to_string(eps);
      log_info("fig5: noise level " + std::to_string(eps));
      polysparse::write_summary_csv(out, polysparse::run_experiment(sweep), header);
      header = false;
    }
    return 0;
  }
  if (args.preset == "fig6") {
    // Tuning sweep: fixed true noise 3, configured radius varies.
    bool header = true;
    for (double eps : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
      auto sweep = spec;
      sweep.noise_epsilon = 3.0;
      sweep.solver_epsilon = eps;
      std::ostringstream id;
      id << "fig6_eps" << eps;
      sweep.experiment_id = id.str();
      log_info("fig6: configured epsilon " + id.str());
      polysparse::write_summary_csv(out, polysparse::run_experiment(sweep), header);
      header = false;
    }
    return 0;
  }

  log_info("bench: " + spec.experiment_id + " (" + std::to_string(spec.trials) + " trials)");
  polysparse::write_summary_csv(out, polysparse::run_experiment(spec));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse solutions of polynomial equation systems"};
  app.require_subcommand(1);

  std::string input, output, method = "irl1l2", preset;
  double epsilon = 0.0, noise_epsilon = 0.0, tol = polysparse::kSupportRelTol;
  double time_budget = 0.0;
  bool nonneg = true, allow_truncation = false, pretty = false, timing = true;
  std::uint64_t seed = 42;
  int trials = 0, threads = 1, kmax = -1, k_level = 0;
  std::vector<double> deltas = {1.0, 2.0, 3.0, 5.0};
  std::string x_values;
  int arg_n = 0, arg_d = 0, arg_N = 0, arg_k = 0;

  auto* solve_cmd = app.add_subcommand("solve", "solve a system file and report x_hat");
  solve_cmd->add_option("input", input, "system JSON file")->required();
  solve_cmd->add_option("--method", method,
                        "one of l1, rl1, l1l2, irl1l2, sl1l2, aga, ega");
  solve_cmd->add_option("--epsilon", epsilon,
                        "greedy residual threshold, compared against the squared l2 residual");
  solve_cmd->add_option("--noise-epsilon", noise_epsilon, "constraint ball radius for BP methods");
  solve_cmd->add_flag("--nonneg,!--no-nonneg", nonneg,
                      "nonnegativity on all-even monomials (group methods)");
  solve_cmd->add_option("--tol", tol, "verification tolerance");
  solve_cmd->add_option("--output", output, "write result JSON here instead of stdout");

  auto* certify_cmd = app.add_subcommand("certify", "evaluate recovery conditions for a system");
  certify_cmd->add_option("input", input, "system JSON file")->required();
  certify_cmd->add_option("--k", k_level, "sparsity level to certify")->required();
  certify_cmd->add_option("--epsilon", epsilon, "noise level for the stability conditions");
  certify_cmd->add_flag("--allow-truncation", allow_truncation,
                        "certify on the nonzero columns when zero columns exist");
  certify_cmd->add_flag("--pretty", pretty, "human-readable report instead of JSON");
  certify_cmd->add_option("--output", output, "output path");

  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo benchmark, summary CSV on stdout");
  bench_cmd->add_option("--preset", preset,
                        "table1..table6, pure4, fig5, fig6 (regimes of the benchmark suite)");
  bench_cmd->add_option("--n", arg_n, "variable count");
  bench_cmd->add_option("--d", arg_d, "degree");
  bench_cmd->add_option("--N", arg_N, "equation count");
  bench_cmd->add_option("--k", arg_k, "planted sparsity");
  bench_cmd->add_option("--noise-epsilon", noise_epsilon, "noise norm");
  bench_cmd->add_option("--methods", method, "comma-separated method list");
  bench_cmd->add_option("--trials", trials, "trials per experiment");
  bench_cmd->add_option("--seed", seed, "RNG seed");
  bench_cmd->add_option("--threads", threads, "worker threads");
  bench_cmd->add_flag("--timing,!--no-timing", timing,
                      "record wall times (disable for byte-reproducible CSV)");
  bench_cmd->add_option("--output", output, "CSV path");

  auto* phase_cmd = app.add_subcommand("phase", "success-probability grid over (k, delta)");
  phase_cmd->add_option("--preset", preset, "fig1 (n=10) or fig2 (n=20)");
  phase_cmd->add_option("--n", arg_n, "variable count");
  phase_cmd->add_option("--d", arg_d, "degree");
  phase_cmd->add_option("--deltas", deltas, "grid of N/n ratios (>= 1)")->delimiter(',');
  phase_cmd->add_option("--kmax", kmax, "sparsity grid 0..kmax");
  phase_cmd->add_option("--methods", method, "comma-separated method list");
  phase_cmd->add_option("--trials", trials, "trials per cell");
  phase_cmd->add_option("--seed", seed, "RNG seed");
  phase_cmd->add_option("--threads", threads, "worker threads");
  phase_cmd->add_option("--time-budget", time_budget, "per-method seconds per cell before timeout");
  phase_cmd->add_option("--output", output, "CSV path");

  auto* lift_cmd = app.add_subcommand("lift", "enumerate the monomial basis / lift a point");
  lift_cmd->add_option("--n", arg_n, "variable count")->required();
  lift_cmd->add_option("--d", arg_d, "degree")->required();
  lift_cmd->add_option("--x", x_values, "comma-separated point to lift");
  lift_cmd->add_option("--output", output, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      const polysparse::PolynomialSystem system = polysparse::load_system(input);
      const polysparse::GroupStructure groups =
          polysparse::build_groups(system.basis, system.A);
      nlohmann::json result;
      result["method"] = method;
      Eigen::VectorXd x_hat;
      bool verified = false;
      double residual_norm = 0.0;

      if (method == "aga" || method == "ega") {
        polysparse::GreedyConfig config;
        config.epsilon = epsilon;
        const polysparse::GreedyResult greedy =
            method == "ega" ? polysparse::ega(system, config) : polysparse::aga(system, config);
        result["ls_solves"] = greedy.ls_solves;
        result["residual_sq"] = greedy.residual_sq;
        if (greedy.infeasible || greedy.nonterminating) {
          result["infeasible"] = greedy.infeasible;
          result["nonterminating"] = greedy.nonterminating;
          log_info("greedy search found no support meeting the threshold");
        }
        const auto report =
            polysparse::extract(system.basis, groups, greedy.phi_hat, system, &greedy.support);
        x_hat = report.x_hat;
        verified = report.verified && !greedy.infeasible;
        residual_norm = report.verify_residual;
        result["support"] = greedy.support;
      } else {
        polysparse::BpConfig config;
        config.nonneg = nonneg;
        config.noise_epsilon = noise_epsilon;
        if (method == "l1") config.method = polysparse::BpMethod::L1;
        else if (method == "rl1") config.method = polysparse::BpMethod::ReweightedL1;
        else if (method == "l1l2") config.method = polysparse::BpMethod::GroupL1L2;
        else if (method == "irl1l2") config.method = polysparse::BpMethod::IRGroupL1L2;
        else if (method == "sl1l2") config.method = polysparse::BpMethod::SelGroupL1L2;
        else throw std::runtime_error("unknown method: " + method);
        const polysparse::SolveResult bp = polysparse::solve_bp(system, config);
        result["diagnostics"] = solver_diagnostics(bp.solver_status);
        result["assumption1"] = bp.assumption1;
        if (bp.assumption1) {
          x_hat = bp.x_hat;
          verified = bp.verified;
          residual_norm = bp.residual_norm;
          result["support"] = bp.group_support;
        } else {
          const auto report =
              polysparse::extract(system.basis, groups, bp.phi_hat, system, nullptr);
          x_hat = report.x_hat;
          verified = report.verified;
          residual_norm = report.verify_residual;
          result["support"] = report.support;
          result["sign_consistent"] = report.sign_consistent;
        }
      }

      if (tol != polysparse::kSupportRelTol) {
        auto [ok, res] = polysparse::verify(system, x_hat, tol);
        verified = ok;
        residual_norm = res;
      }
      result["x_hat"] = std::vector<double>(x_hat.data(), x_hat.data() + x_hat.size());
      result["verified"] = verified;
      result["residual_norm"] = residual_norm;

      std::ofstream file;
      open_output(file, output) << result.dump(2) << "\n";
      return verified ? 0 : 2;
    }

    if (certify_cmd->parsed()) {
      const polysparse::PolynomialSystem system = polysparse::load_system(input);
      const polysparse::GroupStructure groups =
          polysparse::build_groups(system.basis, system.A);
      if (groups.truncated && !allow_truncation) {
        bool linear_zero = false;
        for (int j = 0; j < system.basis.n; ++j)
          if (!groups.is_active(j)) linear_zero = true;
        std::cerr << "error: the coefficient matrix has zero columns, so the mutual coherence "
                     "is undefined on the full basis.\n"
                     "Rerun with --allow-truncation to certify on the nonzero columns.\n";
        if (linear_zero)
          std::cerr << "Note: some *linear* columns are zero; solution values must then be "
                       "recovered from higher-degree monomials (see the solve command).\n";
        return 1;
      }
      const polysparse::RecoveryCertificate cert =
          polysparse::certify(system, k_level, epsilon);
      std::ofstream file;
      std::ostream& out = open_output(file, output);
      if (pretty) out << polysparse::certificate_to_string(cert);
      else out << polysparse::certificate_to_json(cert).dump(2) << "\n";
      return 0;
    }

    if (bench_cmd->parsed()) {
      BenchArgs args;
      args.preset = preset;
      args.spec.n = arg_n;
      args.spec.d = arg_d;
      args.spec.N = arg_N;
      args.spec.k = arg_k;
      args.spec.noise_epsilon = noise_epsilon;
      args.spec.trials = trials;
      if (bench_cmd->count("--methods")) {
        args.spec.methods.clear();
        std::stringstream ss(method);
        std::string tok;
        while (std::getline(ss, tok, ',')) args.spec.methods.push_back(tok);
      } else if (preset.empty()) {
        args.spec.methods.clear();
      }
      if (preset.empty()) args.spec.experiment_id = "bench";
      return run_bench(args, output, threads, trials, seed, timing);
    }

    if (phase_cmd->parsed()) {
      polysparse::ExperimentSpec spec;
      spec.d = 2;
      spec.trials = 50;
      spec.methods = {"rl1", "irl1l2", "sl1l2", "aga"};
      if (preset == "fig1") spec.n = 10;
      else if (preset == "fig2") spec.n = 20;
      else if (!preset.empty()) throw std::runtime_error("unknown phase preset: " + preset);
      if (arg_n > 0) spec.n = arg_n;
      if (arg_d > 0) spec.d = arg_d;
      if (trials > 0) spec.trials = trials;
      if (spec.n <= 0) throw std::runtime_error("phase: --n or --preset required");
      spec.seed = seed;
      spec.threads = threads;
      if (phase_cmd->count("--methods")) {
        spec.methods.clear();
        std::stringstream ss(method);
        std::string tok;
        while (std::getline(ss, tok, ',')) spec.methods.push_back(tok);
      }
      const int upto = kmax >= 0 ? kmax : (preset == "fig2" ? 10 : 8);
      std::vector<int> ks;
      for (int k = 0; k <= upto; ++k) ks.push_back(k);
      const double budget = phase_cmd->count("--time-budget")
                                ? time_budget
                                : std::numeric_limits<double>::infinity();
      log_info("phase grid: n=" + std::to_string(spec.n) + ", d=" + std::to_string(spec.d));
      const auto cells = polysparse::phase_diagram(spec, ks, deltas, budget);
      std::ofstream file;
      polysparse::write_phase_csv(open_output(file, output), cells);
      return 0;
    }

    if (lift_cmd->parsed()) {
      const polysparse::MonomialBasis basis = polysparse::enumerate_basis(arg_n, arg_d);
      nlohmann::json j;
      j["n"] = basis.n;
      j["d"] = basis.d;
      j["M"] = basis.size();
      nlohmann::json idx = nlohmann::json::array();
      for (const auto& alpha : basis.indexes) idx.push_back(alpha.alpha);
      j["indexes"] = std::move(idx);
      if (!x_values.empty()) {
        std::vector<double> xs;
        std::stringstream ss(x_values);
        std::string tok;
        while (std::getline(ss, tok, ',')) xs.push_back(std::stod(tok));
        Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        const Eigen::VectorXd phi = polysparse::lift(basis, x);
        j["phi"] = std::vector<double>(phi.data(), phi.data() + phi.size());
      }
      std::ofstream file;
      open_output(file, output) << j.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
