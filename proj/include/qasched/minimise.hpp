#pragma once

// Deterministic derivative-free local minimisers.
//
// linear_trust_region follows the unconstrained core of Powell's COBYLA: a
// simplex of d+1 points defines a linear model, steps of length rho go
// downhill on that model, the simplex geometry is repaired when it becomes
// too flat or too long, and rho halves down to the final tolerance when a
// step fails to achieve a tenth of the predicted reduction.
//
// nelder_mead is the classic reflection/expansion/contraction/shrink simplex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qasched/error.hpp"

namespace qasched {

enum class MinimiserMethod { linear_trust_region, nelder_mead };

inline const char* to_string(MinimiserMethod m) noexcept {
  return m == MinimiserMethod::linear_trust_region ? "linear_trust_region" : "nelder_mead";
}

struct MinimiserOptions {
  std::size_t max_evaluations = 1000;
  double initial_step = 0.5;
  double final_tolerance = 1e-4;
  MinimiserMethod method = MinimiserMethod::linear_trust_region;
};

struct MinimiserResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  /// True when the step-size tolerance was reached before the budget.
  bool converged = false;
};

namespace detail {

/// Counts evaluations, rejects non-finite values and remembers the best point
/// (earliest on ties).
class CountingObjective {
 public:
  CountingObjective(std::function<double(std::span<const double>)> f, std::size_t budget)
      : f_(std::move(f)), budget_(budget) {}

  bool exhausted() const noexcept { return count_ >= budget_; }
  std::size_t count() const noexcept { return count_; }

  double operator()(const Eigen::VectorXd& x) {
    std::vector<double> point(x.data(), x.data() + x.size());
    const double value = f_(point);
    ++count_;
    if (!std::isfinite(value)) throw ObjectiveError("objective returned a non-finite value", point);
    if (value < best_value_) {
      best_value_ = value;
      best_ = std::move(point);
    }
    return value;
  }

  MinimiserResult result(bool converged) const { return {best_, best_value_, count_, converged}; }

 private:
  std::function<double(std::span<const double>)> f_;
  std::size_t budget_;
  std::size_t count_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_;
};

inline MinimiserResult linear_trust_region(CountingObjective& f, const Eigen::VectorXd& x0,
                                           const MinimiserOptions& opt) {
  const auto d = x0.size();
  const double rho_end = std::min(opt.final_tolerance, opt.initial_step);
  double rho = opt.initial_step;

  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;
  auto build_simplex = [&](const Eigen::VectorXd& centre, double centre_value) {
    points.assign(1, centre);
    values.assign(1, centre_value);
    for (Eigen::Index j = 0; j < d && !f.exhausted(); ++j) {
      Eigen::VectorXd x = centre;
      x(j) += rho;
      values.push_back(f(x));
      points.push_back(std::move(x));
    }
    return static_cast<Eigen::Index>(points.size()) == d + 1;
  };
  if (!build_simplex(x0, f(x0))) return f.result(false);

  Eigen::MatrixXd disp(d, d);
  Eigen::VectorXd df(d);
  std::vector<std::size_t> others(static_cast<std::size_t>(d));
  // Geometry is repaired only after a failed trial step; a successful step
  // (or a fresh simplex) goes straight on to the next trial step.
  bool trial_mode = true;

  while (!f.exhausted()) {
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    std::size_t r = 0;
    for (std::size_t k = 0; k < points.size(); ++k)
      if (k != best) others[r++] = k;
    for (Eigen::Index row = 0; row < d; ++row) {
      const auto k = others[static_cast<std::size_t>(row)];
      disp.row(row) = (points[k] - points[best]).transpose();
      df(row) = values[k] - values[best];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(disp);
    if (!(lu.rcond() > 1e-13)) {
      const Eigen::VectorXd centre = points[best];
      const double centre_value = values[best];
      if (!build_simplex(centre, centre_value)) break;
      continue;
    }
    const Eigen::MatrixXd inv = lu.inverse();  // column k is dual to vertex others[k]
    const Eigen::VectorXd g = inv * df;        // gradient of the linear model

    Eigen::VectorXd vsig(d), veta(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      vsig(k) = 1.0 / inv.col(k).norm();
      veta(k) = disp.row(k).norm();
    }
    const double parsig = 0.25 * rho;
    const double pareta = 2.1 * rho;

    Eigen::Index repair = -1;
    Eigen::Index k_eta = 0, k_sig = 0;
    if (veta.maxCoeff(&k_eta) > pareta)
      repair = k_eta;
    else if (vsig.minCoeff(&k_sig) < parsig)
      repair = k_sig;
    if (repair >= 0 && !trial_mode) {
      Eigen::VectorXd dir = inv.col(repair) * (vsig(repair) * 0.5 * rho);
      if (g.dot(dir) > 0.0) dir = -dir;
      Eigen::VectorXd x = points[best] + dir;
      const double fx = f(x);
      const auto k = others[static_cast<std::size_t>(repair)];
      points[k] = std::move(x);
      values[k] = fx;
      continue;
    }

    trial_mode = true;
    const double gnorm = g.norm();
    bool success = false;
    if (gnorm > 0.0) {
      const Eigen::VectorXd step = -rho / gnorm * g;
      const double predicted = rho * gnorm;
      Eigen::VectorXd x = points[best] + step;
      const double fx = f(x);
      const double actual = values[best] - fx;

      // A point that does not improve enters only if it keeps the simplex
      // well shaped: dual coordinate above 1, or the edge-length rule.
      Eigen::Index drop = -1;
      double ratio = actual > 0.0 ? 0.0 : 1.0;
      const Eigen::VectorXd sigma = (inv.transpose() * step).cwiseAbs();
      for (Eigen::Index k = 0; k < d; ++k)
        if (sigma(k) > ratio) {
          drop = k;
          ratio = sigma(k);
        }
      double edge = 1.1 * rho;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double sigbar = sigma(k) * vsig(k);
        if (sigbar >= parsig || sigbar >= vsig(k)) {
          const double len =
              actual > 0.0 ? (x - points[others[static_cast<std::size_t>(k)]]).norm() : veta(k);
          if (len > edge) {
            drop = k;
            edge = len;
          }
        }
      }
      if (drop >= 0) {
        const auto k = others[static_cast<std::size_t>(drop)];
        points[k] = std::move(x);
        values[k] = fx;
      }
      success = actual > 0.0 && actual >= 0.1 * predicted;
    }
    if (success) continue;
    if (repair >= 0) {
      trial_mode = false;
      continue;
    }
    if (rho <= rho_end) return f.result(true);
    rho *= 0.5;
    if (rho <= 1.5 * rho_end) rho = rho_end;
  }
  return f.result(false);
}

inline MinimiserResult nelder_mead(CountingObjective& f, const Eigen::VectorXd& x0,
                                   const MinimiserOptions& opt) {
  const auto d = x0.size();
  const double tol = opt.final_tolerance;
  std::vector<Eigen::VectorXd> pts{x0};
  std::vector<double> vals{f(x0)};
  for (Eigen::Index j = 0; j < d && !f.exhausted(); ++j) {
    Eigen::VectorXd x = x0;
    x(j) += opt.initial_step;
    vals.push_back(f(x));
    pts.push_back(std::move(x));
  }
  if (static_cast<Eigen::Index>(pts.size()) != d + 1) return f.result(false);

  std::vector<std::size_t> order(pts.size());
  while (!f.exhausted()) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const auto lo = order.front();
    const auto hi = order.back();
    const auto second = order[order.size() - 2];

    double diameter = 0.0;
    double spread = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      diameter = std::max(diameter, (pts[k] - pts[lo]).cwiseAbs().maxCoeff());
      spread = std::max(spread, std::abs(vals[k] - vals[lo]));
    }
    if (diameter <= tol && spread <= tol) return f.result(true);

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (k != hi) centroid += pts[k];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd xr = centroid + (centroid - pts[hi]);
    const double fr = f(xr);
    if (fr < vals[lo]) {
      if (f.exhausted()) break;
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[hi]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[hi] = xe;
        vals[hi] = fe;
      } else {
        pts[hi] = xr;
        vals[hi] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[hi] = xr;
      vals[hi] = fr;
      continue;
    }
    if (f.exhausted()) break;
    const bool outside = fr < vals[hi];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[hi])) {
      pts[hi] = xc;
      vals[hi] = fc;
      continue;
    }
    for (std::size_t k = 0; k < pts.size() && !f.exhausted(); ++k) {
      if (k == lo) continue;
      pts[k] = pts[lo] + 0.5 * (pts[k] - pts[lo]);
      vals[k] = f(pts[k]);
    }
  }
  return f.result(false);
}

}  // namespace detail

/// Minimises `objective` from `x0`. The returned value never exceeds
/// objective(x0), and identical inputs give identical results.
template <typename Objective>
MinimiserResult minimise(Objective&& objective, std::span<const double> x0,
                         const MinimiserOptions& options = {}) {
  if (x0.empty()) throw Error(ErrorKind::validation, "cannot minimise over zero parameters");
  for (double v : x0)
    if (!std::isfinite(v)) throw Error(ErrorKind::validation, "non-finite starting point");
  if (options.max_evaluations < x0.size() + 2)
    throw Error(ErrorKind::validation, "evaluation budget must be at least d + 2");
  if (!(options.initial_step > 0.0) || !(options.final_tolerance > 0.0))
    throw Error(ErrorKind::validation, "step and tolerance must be positive");

  detail::CountingObjective f(
      [&](std::span<const double> x) { return static_cast<double>(objective(x)); },
      options.max_evaluations);
  const Eigen::VectorXd start = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  return options.method == MinimiserMethod::linear_trust_region
             ? detail::linear_trust_region(f, start, options)
             : detail::nelder_mead(f, start, options);
}

}  // namespace qasched
