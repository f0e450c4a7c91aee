#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "polysparse/basis.hpp"

namespace polysparse {

/// A system of N polynomial equations y_i = b_i + a_i^T phi(x), stored
/// against the canonical monomial basis: column k of A is the coefficient
/// of the k-th basis monomial.
struct PolynomialSystem {
  MonomialBasis basis;
  Eigen::MatrixXd A;  // N x M
  Eigen::VectorXd b;  // N
  Eigen::VectorXd y;  // N

  Eigen::Index equations() const { return A.rows(); }

  void validate() const {
    if (A.cols() != basis.size()) throw std::invalid_argument("system: A column count != basis size");
    if (b.size() != A.rows() || y.size() != A.rows())
      throw std::invalid_argument("system: b/y length != equation count");
    if (!A.allFinite() || !b.allFinite() || !y.allFinite())
      throw std::invalid_argument("system: non-finite entries");
  }
};

/// Equation residuals r_i = y_i - b_i - a_i^T phi(x).
inline Eigen::VectorXd evaluate(const PolynomialSystem& system, const Eigen::VectorXd& x) {
  return system.y - system.b - system.A * lift(system.basis, x);
}

inline PolynomialSystem system_from_json(const nlohmann::json& j) {
  PolynomialSystem sys;
  try {
    const int n = j.at("n").get<int>();
    const int d = j.at("d").get<int>();
    sys.basis = enumerate_basis(n, d);
    const auto& eqs = j.at("equations");
    if (!eqs.is_array()) throw std::runtime_error("\"equations\" must be an array");
    const Eigen::Index N = static_cast<Eigen::Index>(eqs.size());
    sys.A.setZero(N, sys.basis.size());
    sys.b.setZero(N);
    sys.y.setZero(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const auto& eq = eqs[static_cast<std::size_t>(i)];
      sys.b[i] = eq.at("b").get<double>();
      sys.y[i] = eq.at("y").get<double>();
      if (!eq.contains("terms")) continue;
      for (const auto& term : eq.at("terms")) {
        MultiIndex alpha;
        alpha.alpha = term.at("alpha").get<std::vector<int>>();
        if (static_cast<int>(alpha.alpha.size()) != n) {
          std::ostringstream msg;
          msg << "equation " << i << ": alpha length " << alpha.alpha.size()
              << " does not match n = " << n;
          throw std::runtime_error(msg.str());
        }
        for (int a : alpha.alpha)
          if (a < 0) throw std::runtime_error("negative exponent in alpha");
        const int deg = alpha.degree();
        if (deg < 1 || deg > d) {
          std::ostringstream msg;
          msg << "equation " << i << ": |alpha| = " << deg << " outside [1, " << d << "]";
          throw std::runtime_error(msg.str());
        }
        const Eigen::Index col = sys.basis.find(alpha);
        sys.A(i, col) += term.at("coeff").get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("system JSON: ") + e.what());
  }
  sys.validate();
  return sys;
}

inline PolynomialSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  return system_from_json(j);
}

/// Serialization keeps only nonzero coefficients.
inline nlohmann::json system_to_json(const PolynomialSystem& sys) {
  nlohmann::json j;
  j["n"] = sys.basis.n;
  j["d"] = sys.basis.d;
  nlohmann::json eqs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < sys.equations(); ++i) {
    nlohmann::json eq;
    eq["b"] = sys.b[i];
    eq["y"] = sys.y[i];
    nlohmann::json terms = nlohmann::json::array();
    for (Eigen::Index k = 0; k < sys.basis.size(); ++k) {
      if (sys.A(i, k) == 0.0) continue;
      nlohmann::json term;
      term["alpha"] = sys.basis.indexes[static_cast<std::size_t>(k)].alpha;
      term["coeff"] = sys.A(i, k);
      terms.push_back(term);
    }
    eq["terms"] = std::move(terms);
    eqs.push_back(std::move(eq));
  }
  j["equations"] = std::move(eqs);
  return j;
}

inline void save_system(const PolynomialSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write system file: " + path);
  out << system_to_json(sys).dump(2) << "\n";
}

}  // namespace polysparse
