#pragma once

// Lowest two eigenvalues of H(s), gap scans over an s-grid and their
// aggregation into per-size statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>
#include <lapacke.h>

#include "qasched/error.hpp"
#include "qasched/format.hpp"
#include "qasched/hamiltonian.hpp"

namespace qasched {

enum class SolverPath { dense, iterative };

inline const char* to_string(SolverPath path) noexcept {
  return path == SolverPath::dense ? "dense" : "iterative";
}

struct SolverOptions {
  double tolerance = 1e-8;
  /// Dense diagonalisation up to this many qubits, Lanczos above.
  std::size_t dense_threshold = 12;
  /// Matrix-vector products allowed per eigenpair; default 10*2^(n/2)+500.
  std::optional<std::size_t> max_iterations;
  std::uint64_t seed = 0x5eedULL;
  std::size_t krylov_dimension = 40;
  std::size_t kept_ritz_vectors = 12;
  std::optional<SolverPath> force_path;
};

struct LowestTwo {
  double e0 = 0.0;
  double e1 = 0.0;
  SolverPath path = SolverPath::dense;
  std::size_t matvecs = 0;
};

inline std::size_t default_max_iterations(std::size_t qubits) {
  return 10 * static_cast<std::size_t>(std::pow(2.0, static_cast<double>(qubits) / 2.0)) + 500;
}

/// Full H(s) as a column-major dense matrix. Test oracles and the dense
/// solver use it; keep to small n.
inline std::vector<double> dense_hamiltonian(const CostDiagonal& diag, double s) {
  const std::size_t dim = diag.dimension();
  std::vector<double> h(dim * dim, 0.0);
  for (std::size_t x = 0; x < dim; ++x) {
    h[x * dim + x] = s * (diag[x] + diag.offset());
    for (std::size_t i = 0; i < diag.qubits(); ++i) {
      const std::size_t y = x ^ (std::size_t{1} << i);
      h[y * dim + x] = -(1.0 - s);
    }
  }
  return h;
}

inline LowestTwo lowest_two_dense(const CostDiagonal& diag, double s) {
  const auto dim = static_cast<lapack_int>(diag.dimension());
  std::vector<double> h = dense_hamiltonian(diag, s);
  std::vector<double> w(static_cast<std::size_t>(dim));
  std::vector<lapack_int> support(4);
  double z = 0.0;
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'U', dim, h.data(), dim, 0.0,
                                         0.0, 1, 2, 0.0, &found, w.data(), &z, 1, support.data());
  if (info != 0 || found != 2)
    throw ConvergenceError("dense eigensolver failed (info " + std::to_string(info) + ")",
                           std::numeric_limits<double>::infinity());
  return {w[0], w[1], SolverPath::dense, 0};
}

namespace detail {

struct RitzPair {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  std::size_t matvecs = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void project_out(std::span<double> w, const std::vector<std::vector<double>>& basis) {
  for (const auto& u : basis) axpy(-dot(u, w), u, w);
}

/// Thick-restart Lanczos with full reorthogonalisation for the lowest
/// eigenpair of H restricted to the orthogonal complement of `locked`.
/// Kept Ritz vectors carry a diagonal block; every new column of the
/// projected matrix is filled from explicit inner products.
template <typename Apply>
RitzPair lowest_eigenpair(Apply&& apply, std::size_t dim,
                          const std::vector<std::vector<double>>& locked, std::uint64_t seed,
                          double residual_target, std::size_t max_matvecs, std::size_t m,
                          std::size_t keep) {
  m = std::max<std::size_t>(2, std::min(m, dim - locked.size()));
  keep = std::min(keep, m - 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto random_unit = [&](const std::vector<std::vector<double>>& against) {
    std::vector<double> v(dim);
    for (auto& c : v) c = normal(rng);
    for (int pass = 0; pass < 2; ++pass) {
      project_out(v, locked);
      project_out(v, against);
    }
    const double nv = norm(v);
    for (auto& c : v) c /= nv;
    return v;
  };

  std::vector<std::vector<double>> basis;
  basis.reserve(m);
  basis.push_back(random_unit({}));
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> w(dim);
  std::size_t matvecs = 0;
  double best_residual = std::numeric_limits<double>::infinity();

  while (true) {
    bool invariant = false;
    std::vector<double> tail;  // residual direction beyond the basis
    double tail_norm = 0.0;
    for (std::size_t j = basis.size() - 1; j < m; ++j) {
      apply(std::span<const double>(basis[j]), std::span<double>(w));
      ++matvecs;
      for (int pass = 0; pass < 2; ++pass) {
        project_out(w, locked);
        for (std::size_t i = 0; i <= j; ++i) {
          const double c = dot(basis[i], w);
          axpy(-c, basis[i], w);
          t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
        }
      }
      for (std::size_t i = 0; i < j; ++i)
        t(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double beta = norm(w);
      if (beta <= 1e-14 * (1.0 + std::abs(t(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))))) {
        invariant = true;
        break;
      }
      if (j + 1 == m) {
        tail = w;
        tail_norm = beta;
        for (auto& c : tail) c /= beta;
        break;
      }
      std::vector<double> next(w);
      for (auto& c : next) c /= beta;
      basis.push_back(std::move(next));
    }

    const auto size = static_cast<Eigen::Index>(basis.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t.topLeftCorner(size, size));
    const Eigen::VectorXd theta = ritz.eigenvalues();
    const Eigen::MatrixXd s = ritz.eigenvectors();

    auto ritz_vector = [&](Eigen::Index k) {
      std::vector<double> y(dim, 0.0);
      for (Eigen::Index i = 0; i < size; ++i) axpy(s(i, k), basis[static_cast<std::size_t>(i)], y);
      return y;
    };

    const double estimate = invariant ? 0.0 : tail_norm * std::abs(s(size - 1, 0));
    if (estimate <= residual_target) {
      // Confirm with an explicit residual.
      std::vector<double> y = ritz_vector(0);
      const double ny = norm(y);
      for (auto& c : y) c /= ny;
      apply(std::span<const double>(y), std::span<double>(w));
      ++matvecs;
      axpy(-theta(0), y, w);
      project_out(w, locked);
      const double residual = norm(w);
      best_residual = std::min(best_residual, residual);
      if (residual <= residual_target) return {theta(0), std::move(y), residual, matvecs};
    }
    best_residual = std::min(best_residual, estimate);
    if (matvecs >= max_matvecs)
      throw ConvergenceError("Lanczos did not converge within " + std::to_string(max_matvecs) +
                                 " matrix-vector products",
                             best_residual);

    // Restart with the lowest Ritz vectors plus the residual direction.
    const auto kept = static_cast<Eigen::Index>(std::min<std::size_t>(keep, basis.size()));
    std::vector<std::vector<double>> restarted;
    restarted.reserve(m);
    for (Eigen::Index k = 0; k < kept; ++k) restarted.push_back(ritz_vector(k));
    t.setZero();
    for (Eigen::Index k = 0; k < kept; ++k) t(k, k) = theta(k);
    if (invariant) {
      // Krylov space exhausted without convergence; continue from a fresh direction.
      restarted.push_back(random_unit(restarted));
    } else {
      restarted.push_back(std::move(tail));
    }
    basis = std::move(restarted);
  }
}

}  // namespace detail

inline LowestTwo lowest_two_iterative(const CostDiagonal& diag, double s,
                                      const SolverOptions& options = {}) {
  const std::size_t dim = diag.dimension();
  const InterpolationPoint point(s);
  auto apply = [&](std::span<const double> in, std::span<double> out) {
    apply_hamiltonian<double>(diag, point, in, out);
  };
  const std::size_t budget = options.max_iterations.value_or(default_max_iterations(diag.qubits()));
  // Eigenvalue error is bounded by the residual norm.
  const double target = 0.1 * options.tolerance;
  auto ground = detail::lowest_eigenpair(apply, dim, {}, options.seed, target, budget,
                                         options.krylov_dimension, options.kept_ritz_vectors);
  std::vector<std::vector<double>> locked{ground.vector};
  auto excited = detail::lowest_eigenpair(apply, dim, locked, options.seed + 1, target, budget,
                                          options.krylov_dimension, options.kept_ritz_vectors);
  LowestTwo result{ground.value, excited.value, SolverPath::iterative,
                   ground.matvecs + excited.matvecs};
  if (result.e1 < result.e0) std::swap(result.e0, result.e1);
  return result;
}

/// Two smallest eigenvalues of H(s), counted with multiplicity.
inline LowestTwo lowest_two(const CostDiagonal& diag, double s, const SolverOptions& options = {}) {
  if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorKind::range, "s must lie in [0, 1]");
  if (!(options.tolerance > 0.0)) throw Error(ErrorKind::validation, "tolerance must be positive");
  const SolverPath path = options.force_path.value_or(
      diag.qubits() <= options.dense_threshold ? SolverPath::dense : SolverPath::iterative);
  return path == SolverPath::dense ? lowest_two_dense(diag, s) : lowest_two_iterative(diag, s, options);
}

// ---------------------------------------------------------------------------

struct GapScan {
  std::vector<double> s_grid;
  std::vector<double> e0;
  std::vector<double> e1;
  std::vector<double> gap;
  double s_min = 0.0;
  double gap_min = 0.0;
  double runtime_estimate = 0.0;  // 1 / gap_min^2, no O(1) constant

  // metadata
  std::string label;
  std::size_t qubits = 0;
  SolverPath path = SolverPath::dense;
  double tolerance = 0.0;
};

/// `points` values of s spaced linearly over [0, 1], endpoints exact.
inline std::vector<double> linear_grid(std::size_t points) {
  if (points < 2) throw Error(ErrorKind::validation, "a scan needs at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = static_cast<double>(k) / static_cast<double>(points - 1);
  return grid;
}

inline void finalise_gap_fields(GapScan& scan) {
  scan.gap.resize(scan.e0.size());
  for (std::size_t k = 0; k < scan.e0.size(); ++k) scan.gap[k] = std::max(0.0, scan.e1[k] - scan.e0[k]);
  const auto it = std::min_element(scan.gap.begin(), scan.gap.end());
  const auto k = static_cast<std::size_t>(it - scan.gap.begin());
  scan.gap_min = *it;
  scan.s_min = scan.s_grid[k];
  scan.runtime_estimate = scan.gap_min > 0.0 ? 1.0 / (scan.gap_min * scan.gap_min)
                                             : std::numeric_limits<double>::infinity();
}

/// Gap scan over a linear grid. Grid points are independent and may be
/// spread over `jobs` threads; the result does not depend on `jobs`.
inline GapScan gap_scan(const CostDiagonal& diag, std::size_t points = 50,
                        const SolverOptions& options = {}, std::size_t jobs = 1,
                        std::string label = {}) {
  GapScan scan;
  scan.s_grid = linear_grid(points);
  scan.e0.assign(points, 0.0);
  scan.e1.assign(points, 0.0);
  scan.label = std::move(label);
  scan.qubits = diag.qubits();
  scan.tolerance = options.tolerance;
  scan.path = options.force_path.value_or(diag.qubits() <= options.dense_threshold ? SolverPath::dense
                                                                                    : SolverPath::iterative);

  std::vector<std::exception_ptr> failures(points);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < points; k += stride) {
      try {
        const auto r = lowest_two(diag, scan.s_grid[k], options);
        scan.e0[k] = r.e0;
        scan.e1[k] = r.e1;
      } catch (const ConvergenceError& e) {
        failures[k] = std::make_exception_ptr(ConvergenceError(
            "at s=" + format_real(scan.s_grid[k]) + ": " + e.what(), e.best_residual()));
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, points));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  finalise_gap_fields(scan);
  return scan;
}

inline std::string gap_scan_csv(const GapScan& scan) {
  std::string out = "s,e0,e1,gap\n";
  for (std::size_t k = 0; k < scan.s_grid.size(); ++k)
    out += format_real(scan.s_grid[k]) + ',' + format_real(scan.e0[k]) + ',' +
           format_real(scan.e1[k]) + ',' + format_real(scan.gap[k]) + '\n';
  return out;
}

inline nlohmann::json to_json(const GapScan& scan) {
  return {{"label", scan.label},
          {"n", scan.qubits},
          {"solver", to_string(scan.path)},
          {"tolerance", scan.tolerance},
          {"s", scan.s_grid},
          {"e0", scan.e0},
          {"e1", scan.e1},
          {"gap", scan.gap},
          {"s_min", scan.s_min},
          {"gap_min", scan.gap_min},
          {"runtime_estimate", std::isfinite(scan.runtime_estimate) ? nlohmann::json(scan.runtime_estimate)
                                                                    : nlohmann::json(nullptr)}};
}

inline GapScan gap_scan_from_json(const nlohmann::json& j) {
  try {
    GapScan scan;
    scan.label = j.value("label", std::string{});
    scan.qubits = j.at("n").get<std::size_t>();
    scan.path = j.value("solver", std::string("dense")) == "iterative" ? SolverPath::iterative
                                                                      : SolverPath::dense;
    scan.tolerance = j.value("tolerance", 0.0);
    scan.s_grid = j.at("s").get<std::vector<double>>();
    scan.e0 = j.at("e0").get<std::vector<double>>();
    scan.e1 = j.at("e1").get<std::vector<double>>();
    if (scan.s_grid.size() < 2 || scan.e0.size() != scan.s_grid.size() ||
        scan.e1.size() != scan.s_grid.size())
      throw Error(ErrorKind::validation, "gap scan arrays have inconsistent lengths");
    finalise_gap_fields(scan);
    return scan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed gap scan JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

/// Statistics of the scans whose qubit count falls in [lo, hi).
struct BucketStatistics {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t count = 0;
  std::vector<double> gap_mean;  // per grid point
  std::vector<double> gap_std;
  double s_min_mean = std::numeric_limits<double>::quiet_NaN();
  double s_min_std = std::numeric_limits<double>::quiet_NaN();
  double gap_min_mean = std::numeric_limits<double>::quiet_NaN();
  double gap_min_std = std::numeric_limits<double>::quiet_NaN();
};

struct GapStatistics {
  std::vector<double> s_grid;
  std::vector<BucketStatistics> buckets;
};

/// Mean and population standard deviation per qubit-count bucket. `edges`
/// must be strictly increasing; bucket b covers [edges[b], edges[b+1]).
/// Every bucket appears in the table, empty ones with count 0 and NaN stats.
inline GapStatistics aggregate_scans(std::span<const GapScan> scans, std::span<const std::size_t> edges) {
  if (edges.size() < 2) throw Error(ErrorKind::validation, "need at least two bucket edges");
  for (std::size_t b = 1; b < edges.size(); ++b)
    if (edges[b] <= edges[b - 1]) throw Error(ErrorKind::validation, "bucket edges must increase");
  GapStatistics table;
  if (!scans.empty()) table.s_grid = scans.front().s_grid;
  for (const auto& scan : scans)
    if (scan.s_grid != table.s_grid) throw Error(ErrorKind::validation, "scans use different grids");

  const std::size_t points = table.s_grid.size();
  auto mean_std = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / n)};
  };

  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    BucketStatistics row;
    row.lo = edges[b];
    row.hi = edges[b + 1];
    std::vector<const GapScan*> members;
    for (const auto& scan : scans)
      if (scan.qubits >= row.lo && scan.qubits < row.hi) members.push_back(&scan);
    row.count = members.size();
    row.gap_mean.assign(points, std::numeric_limits<double>::quiet_NaN());
    row.gap_std.assign(points, std::numeric_limits<double>::quiet_NaN());
    if (!members.empty()) {
      std::vector<double> column(members.size());
      for (std::size_t k = 0; k < points; ++k) {
        for (std::size_t m = 0; m < members.size(); ++m) column[m] = members[m]->gap[k];
        std::tie(row.gap_mean[k], row.gap_std[k]) = mean_std(column);
      }
      for (std::size_t m = 0; m < members.size(); ++m) column[m] = members[m]->s_min;
      std::tie(row.s_min_mean, row.s_min_std) = mean_std(column);
      for (std::size_t m = 0; m < members.size(); ++m) column[m] = members[m]->gap_min;
      std::tie(row.gap_min_mean, row.gap_min_std) = mean_std(column);
    }
    table.buckets.push_back(std::move(row));
  }
  return table;
}

/// One row per bucket.
inline std::string aggregate_csv(const GapStatistics& table) {
  std::string out = "bucket_lo,bucket_hi,count,s_min_mean,s_min_std,gap_min_mean,gap_min_std\n";
  for (const auto& b : table.buckets)
    out += std::to_string(b.lo) + ',' + std::to_string(b.hi) + ',' + std::to_string(b.count) + ',' +
           format_real(b.s_min_mean) + ',' + format_real(b.s_min_std) + ',' +
           format_real(b.gap_min_mean) + ',' + format_real(b.gap_min_std) + '\n';
  return out;
}

/// Long form: one row per (bucket, grid point).
inline std::string aggregate_curves_csv(const GapStatistics& table) {
  std::string out = "bucket_lo,bucket_hi,s,gap_mean,gap_std\n";
  for (const auto& b : table.buckets)
    for (std::size_t k = 0; k < table.s_grid.size(); ++k)
      out += std::to_string(b.lo) + ',' + std::to_string(b.hi) + ',' + format_real(table.s_grid[k]) +
             ',' + format_real(b.gap_mean[k]) + ',' + format_real(b.gap_std[k]) + '\n';
  return out;
}

inline nlohmann::json to_json(const GapStatistics& table) {
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& b : table.buckets) {
    nlohmann::json mean = nlohmann::json::array(), sd = nlohmann::json::array();
    for (double v : b.gap_mean) mean.push_back(number(v));
    for (double v : b.gap_std) sd.push_back(number(v));
    rows.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"gap_mean", mean},
                    {"gap_std", sd},
                    {"s_min_mean", number(b.s_min_mean)},
                    {"s_min_std", number(b.s_min_std)},
                    {"gap_min_mean", number(b.gap_min_mean)},
                    {"gap_min_std", number(b.gap_min_std)}});
  }
  return {{"s", table.s_grid}, {"buckets", rows}};
}

}  // namespace qasched
