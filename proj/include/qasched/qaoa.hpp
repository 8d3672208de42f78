#pragma once

// Statevector simulation of the layered QAOA state
//
//   |gamma, beta> = U_M(beta_p) U_C(gamma_p) ... U_M(beta_1) U_C(gamma_1) |+...+>
//
// with U_C(g) = exp(-i g H_C) and U_M(b) = exp(-i b H_M), H_M = -sum_i X_i.
// Per qubit the mixer is exp(+i b X) = cos b I + i sin b X.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "qasched/error.hpp"
#include "qasched/hamiltonian.hpp"

namespace qasched {

using Amplitude = std::complex<double>;

struct QaoaParams {
  std::vector<double> gamma;  // cost angles, one per layer
  std::vector<double> beta;   // mixer angles, one per layer

  std::size_t layers() const noexcept { return gamma.size(); }

  void validate() const {
    if (gamma.empty()) throw Error(ErrorKind::validation, "QAOA needs at least one layer");
    if (gamma.size() != beta.size())
      throw Error(ErrorKind::dimension, "gamma and beta must have the same length");
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (!std::isfinite(gamma[i]) || !std::isfinite(beta[i]))
        throw Error(ErrorKind::validation, "non-finite QAOA angle");
  }

  friend bool operator==(const QaoaParams&, const QaoaParams&) = default;
};

class StateVector {
 public:
  StateVector() = default;
  StateVector(std::size_t qubits, std::vector<Amplitude> amplitudes)
      : n_(qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != (std::size_t{1} << n_))
      throw Error(ErrorKind::dimension, "state must hold 2^n amplitudes");
  }

  std::size_t qubits() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
  std::span<Amplitude> amplitudes() noexcept { return amps_; }
  const Amplitude& operator[](std::size_t x) const noexcept { return amps_[x]; }

  double norm_squared() const noexcept {
    double sum = 0.0;
    for (const auto& a : amps_) sum += std::norm(a);
    return sum;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Amplitude> amps_;
};

/// Uniform superposition, every amplitude 2^(-n/2).
inline StateVector initial_state(std::size_t qubits,
                                 std::size_t max_qubits = kDefaultSimulationBound) {
  if (qubits < 1) throw Error(ErrorKind::validation, "need at least one qubit");
  if (qubits > max_qubits) throw Error(ErrorKind::capacity, "qubit count exceeds the simulation bound");
  const std::size_t dim = std::size_t{1} << qubits;
  const double amp = std::pow(2.0, -0.5 * static_cast<double>(qubits));
  return StateVector(qubits, std::vector<Amplitude>(dim, Amplitude(amp, 0.0)));
}

inline void apply_cost_phase(StateVector& psi, const CostDiagonal& diag, double gamma) {
  if (psi.dimension() != diag.dimension())
    throw Error(ErrorKind::dimension, "state and cost diagonal dimensions differ");
  auto amps = psi.amplitudes();
  const auto values = diag.values();
  for (std::size_t x = 0; x < amps.size(); ++x) {
    const double phase = -gamma * values[x];
    amps[x] *= Amplitude(std::cos(phase), std::sin(phase));
  }
}

inline void apply_mixer(StateVector& psi, double beta) {
  auto amps = psi.amplitudes();
  const std::size_t dim = amps.size();
  const double c = std::cos(beta);
  const double s = std::sin(beta);
  for (std::size_t i = 0; i < psi.qubits(); ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t base = 0; base < dim; base += 2 * bit)
      for (std::size_t x = base; x < base + bit; ++x) {
        const Amplitude a = amps[x];
        const Amplitude b = amps[x | bit];
        // (a, b) -> (c a + i s b, i s a + c b)
        amps[x] = Amplitude(c * a.real() - s * b.imag(), c * a.imag() + s * b.real());
        amps[x | bit] = Amplitude(c * b.real() - s * a.imag(), c * b.imag() + s * a.real());
      }
  }
}

/// Overwrites `psi` with the QAOA state; reuses its buffer when the size fits.
inline void qaoa_state_into(StateVector& psi, const CostDiagonal& diag, const QaoaParams& params) {
  params.validate();
  const std::size_t dim = diag.dimension();
  if (psi.dimension() != dim) psi = initial_state(diag.qubits(), diag.qubits());
  const double amp = std::pow(2.0, -0.5 * static_cast<double>(diag.qubits()));
  for (auto& a : psi.amplitudes()) a = Amplitude(amp, 0.0);
  for (std::size_t layer = 0; layer < params.layers(); ++layer) {
    apply_cost_phase(psi, diag, params.gamma[layer]);
    apply_mixer(psi, params.beta[layer]);
  }
}

inline StateVector qaoa_state(const CostDiagonal& diag, const QaoaParams& params) {
  StateVector psi;
  qaoa_state_into(psi, diag, params);
  return psi;
}

/// <psi| H_C |psi>, including the diagonal's constant offset.
inline double expectation(const StateVector& psi, const CostDiagonal& diag) {
  if (psi.dimension() != diag.dimension())
    throw Error(ErrorKind::dimension, "state and cost diagonal dimensions differ");
  const auto amps = psi.amplitudes();
  const auto values = diag.values();
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t x = 0; x < amps.size(); ++x) {
    const double p = std::norm(amps[x]);
    sum += p * values[x];
    weight += p;
  }
  return sum + weight * diag.offset();
}

struct ApproximationRatio {
  /// mean / e_min. NaN when e_min == 0.
  double plain = 0.0;
  /// (e_max - mean) / (e_max - e_min), in [0, 1].
  double normalised = 0.0;
};

inline ApproximationRatio approximation_ratio(double mean_energy, double e_min, double e_max) {
  if (!(e_min < e_max))
    throw Error(ErrorKind::degenerate, "constant energy landscape has no approximation ratio");
  const double slack = 1e-9 * (1.0 + std::abs(e_min) + std::abs(e_max));
  if (mean_energy < e_min - slack || mean_energy > e_max + slack)
    throw Error(ErrorKind::range, "mean energy lies outside [e_min, e_max]");
  ApproximationRatio r;
  r.plain = e_min != 0.0 ? mean_energy / e_min : std::numeric_limits<double>::quiet_NaN();
  r.normalised = std::clamp((e_max - mean_energy) / (e_max - e_min), 0.0, 1.0);
  return r;
}

}  // namespace qasched
