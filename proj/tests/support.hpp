#pragma once

// Test-only helpers: random instances and brute-force oracles that do not
// share code with the library paths they check.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qasched/qasched.hpp"

namespace qasched::testing {

inline QuboInstance random_instance(std::size_t n, std::uint64_t seed, double density = 0.6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> linear(n);
  for (auto& a : linear) a = coef(rng);
  std::vector<Coupling> quadratic;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unit(rng) < density) quadratic.push_back({i, j, coef(rng)});
  return QuboInstance(n, std::move(linear), std::move(quadratic), "random");
}

/// First generated instance with exactly `n` variables, scanning seeds from `seed`.
inline GeneratedInstance generated_instance(std::size_t n, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.max_vars = 23;
  for (std::uint64_t s = seed; s < seed + 100000; ++s) {
    cfg.seed = s;
    auto gen = generate_triplet_instance(cfg);
    if (!gen.discarded() && gen.instance->qubo.size() == n) return *gen.instance;
  }
  throw Error(ErrorKind::validation, "no generated instance of the requested size");
}

/// All 2^n energies through evaluate().
inline std::vector<double> enumerate_energies(const QuboInstance& q) {
  std::vector<double> e(std::size_t{1} << q.size());
  for (std::uint64_t x = 0; x < e.size(); ++x) e[x] = evaluate(q, Assignment::from_index(x, q.size()));
  return e;
}

/// Dense -sum_i X_i.
inline Eigen::MatrixXd dense_mixer(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x)
    for (std::size_t i = 0; i < n; ++i) m(x ^ (Eigen::Index{1} << i), x) -= 1.0;
  return m;
}

/// exp(-i t H) for real symmetric H via its eigendecomposition.
inline Eigen::MatrixXcd dense_propagator(const Eigen::MatrixXd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<std::complex<double>>() * std::complex<double>(0.0, -t)).array().exp();
  const Eigen::MatrixXcd v = es.eigenvectors().cast<std::complex<double>>();
  return v * phases.asDiagonal() * v.adjoint();
}

}  // namespace qasched::testing
