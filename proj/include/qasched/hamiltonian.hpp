#pragma once

// Cost operator as a basis diagonal, transverse-field mixer -sum_i X_i kept
// implicit, and the interpolated Hamiltonian
//
//   H(s) = s * diag(Q) + (1 - s) * (-sum_i X_i),   s in [0, 1]
//
// whose s = 0 ground state is |+...+> and whose s = 1 ground state is the
// QUBO minimiser. Basis index bit i (LSB = 0) is variable i throughout.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qasched/error.hpp"
#include "qasched/qubo.hpp"

namespace qasched {

inline constexpr std::size_t kDefaultSimulationBound = 20;

/// Interpolation parameter s = t/T in [0, 1].
class InterpolationPoint {
 public:
  explicit InterpolationPoint(double s) : s_(s) {
    if (!(s >= 0.0 && s <= 1.0))
      throw Error(ErrorKind::range, "interpolation point must lie in [0, 1]");
  }
  double value() const noexcept { return s_; }

 private:
  double s_;
};

/// values[x] = Q(bits(x)) for every basis index x, plus a constant offset
/// that is kept out of the phases and only re-added to energies.
class CostDiagonal {
 public:
  CostDiagonal() = default;
  CostDiagonal(std::size_t n, std::vector<double> values, double offset = 0.0)
      : n_(n), values_(std::move(values)), offset_(offset) {
    if (n_ == 0 || n_ >= 63 || values_.size() != (std::size_t{1} << n_))
      throw Error(ErrorKind::dimension, "cost diagonal must hold 2^n values");
    for (double v : values_)
      if (!std::isfinite(v)) throw Error(ErrorKind::validation, "non-finite diagonal value");
  }

  std::size_t qubits() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t x) const noexcept { return values_[x]; }
  double offset() const noexcept { return offset_; }

  double min() const { return *std::min_element(values_.begin(), values_.end()) + offset_; }
  double max() const { return *std::max_element(values_.begin(), values_.end()) + offset_; }

  /// Same landscape shifted by c, carried in the offset.
  CostDiagonal shifted(double c) const { return CostDiagonal(n_, values_, offset_ + c); }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  double offset_ = 0.0;
};

/// Builds the diagonal by doubling: the entries with bit k set are the
/// entries below 2^k plus a_k and the couplings from k to lower set bits.
/// Each value is a sum of at most n partial sums, so it stays within 1e-12
/// of evaluate().
inline CostDiagonal cost_diagonal(const QuboInstance& q,
                                  std::size_t max_qubits = kDefaultSimulationBound) {
  const std::size_t n = q.size();
  if (n > max_qubits)
    throw Error(ErrorKind::capacity, std::to_string(n) + " qubits exceed the simulation bound of " +
                                         std::to_string(max_qubits));
  std::vector<std::vector<std::pair<std::size_t, double>>> lower(n);
  for (const auto& c : q.quadratic()) lower[c.j].emplace_back(c.i, c.weight);

  std::vector<double> values(std::size_t{1} << n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t half = std::size_t{1} << k;
    const double a = q.linear()[k];
    for (std::size_t x = 0; x < half; ++x) {
      double delta = a;
      for (const auto& [i, w] : lower[k])
        if ((x >> i) & 1U) delta += w;
      values[x | half] = values[x] + delta;
    }
  }
  return CostDiagonal(n, std::move(values));
}

/// out = H(s) psi without forming the 2^n x 2^n matrix. X_i swaps the
/// amplitudes across bit i. The diagonal offset is included.
template <typename Scalar>
void apply_hamiltonian(const CostDiagonal& diag, InterpolationPoint point,
                       std::span<const Scalar> psi, std::span<Scalar> out) {
  const std::size_t dim = diag.dimension();
  if (psi.size() != dim || out.size() != dim)
    throw Error(ErrorKind::dimension, "state length differs from 2^n");
  const double s = point.value();
  const double mix = 1.0 - s;
  const auto values = diag.values();
  const double offset = diag.offset();
  for (std::size_t x = 0; x < dim; ++x) out[x] = (s * (values[x] + offset)) * psi[x];
  if (mix == 0.0) return;
  for (std::size_t i = 0; i < diag.qubits(); ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t base = 0; base < dim; base += 2 * bit)
      for (std::size_t x = base; x < base + bit; ++x) {
        out[x] -= mix * psi[x | bit];
        out[x | bit] -= mix * psi[x];
      }
  }
}

template <typename Scalar>
std::vector<Scalar> apply_hamiltonian(const CostDiagonal& diag, InterpolationPoint point,
                                      std::span<const Scalar> psi) {
  std::vector<Scalar> out(psi.size());
  apply_hamiltonian<Scalar>(diag, point, psi, std::span<Scalar>(out));
  return out;
}

}  // namespace qasched
