#pragma once

// Layer-wise QAOA parameter optimisation. Both strategies climb p = 1..p_max
// and warm-start each level from the previous optimum padded with zeros.
//
// Fourier: angles come from 2q amplitudes (u, v),
//   gamma_i = sum_k u_k sin((k - 1/2)(i - 1/2) pi / p)
//   beta_i  = sum_k v_k cos((k - 1/2)(i - 1/2) pi / p),   i, k 1-based,
// with q = min(p, q_max).
// Random initialisation: level 1 starts from uniform random angles and the
// optimisation runs directly over (gamma, beta).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qasched/error.hpp"
#include "qasched/format.hpp"
#include "qasched/hamiltonian.hpp"
#include "qasched/minimise.hpp"
#include "qasched/qaoa.hpp"

namespace qasched {

struct FourierParams {
  std::vector<double> u;  // cost-frequency amplitudes
  std::vector<double> v;  // mixer-frequency amplitudes

  std::size_t frequencies() const noexcept { return u.size(); }

  void validate() const {
    if (u.empty()) throw Error(ErrorKind::validation, "need at least one frequency");
    if (u.size() != v.size()) throw Error(ErrorKind::dimension, "u and v must have the same length");
    for (std::size_t k = 0; k < u.size(); ++k)
      if (!std::isfinite(u[k]) || !std::isfinite(v[k]))
        throw Error(ErrorKind::validation, "non-finite Fourier amplitude");
  }
};

inline QaoaParams fourier_to_angles(const FourierParams& fp, std::size_t p) {
  fp.validate();
  if (p < 1) throw Error(ErrorKind::validation, "depth must be at least 1");
  QaoaParams angles;
  angles.gamma.assign(p, 0.0);
  angles.beta.assign(p, 0.0);
  const double pd = static_cast<double>(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < fp.frequencies(); ++k) {
      const double arg = (static_cast<double>(k) + 0.5) * (static_cast<double>(i) + 0.5) *
                         std::numbers::pi / pd;
      angles.gamma[i] += fp.u[k] * std::sin(arg);
      angles.beta[i] += fp.v[k] * std::cos(arg);
    }
  return angles;
}

enum class StrategyKind { fourier, random_init };

inline const char* to_string(StrategyKind k) noexcept {
  return k == StrategyKind::fourier ? "fourier" : "ri";
}

struct StrategyConfig {
  std::size_t p_max = 50;
  std::size_t q_max = 5;
  MinimiserOptions optimiser{};
  std::uint64_t seed = 0;

  void validate() const {
    if (p_max < 1) throw Error(ErrorKind::config, "p_max must be at least 1");
    if (q_max < 1 || q_max > p_max) throw Error(ErrorKind::config, "q_max must lie in [1, p_max]");
  }
};

struct LevelRecord {
  std::size_t p = 0;
  std::size_t q = 0;  // 0 for random initialisation
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> u;
  std::vector<double> v;
  double initial_energy = 0.0;  // objective at the warm start
  double energy = 0.0;
  double ratio_plain = 0.0;
  double ratio_normalised = 0.0;
  std::size_t evaluations = 0;

  QaoaParams params() const { return {gamma, beta}; }
};

struct OptimisationTrace {
  StrategyKind strategy = StrategyKind::fourier;
  std::size_t q_max = 0;
  std::uint64_t seed = 0;
  double e_min = 0.0;
  double e_max = 0.0;
  std::string label;
  std::vector<LevelRecord> levels;

  const LevelRecord& level(std::size_t p) const {
    if (p < 1 || p > levels.size())
      throw Error(ErrorKind::range, "trace has no level " + std::to_string(p) + " (depth " +
                                        std::to_string(levels.size()) + ")");
    return levels[p - 1];
  }
};

namespace detail {

/// Expectation of the QAOA state with a reusable state buffer.
class EnergyEvaluator {
 public:
  explicit EnergyEvaluator(const CostDiagonal& diag) : diag_(&diag) {}

  double operator()(const QaoaParams& params) {
    qaoa_state_into(psi_, *diag_, params);
    return expectation(psi_, *diag_);
  }

 private:
  const CostDiagonal* diag_;
  StateVector psi_;
};

inline LevelRecord finish_level(std::size_t p, std::size_t q, QaoaParams angles,
                                std::vector<double> u, std::vector<double> v, double initial,
                                const MinimiserResult& best, double e_min, double e_max) {
  LevelRecord rec;
  rec.p = p;
  rec.q = q;
  rec.gamma = std::move(angles.gamma);
  rec.beta = std::move(angles.beta);
  rec.u = std::move(u);
  rec.v = std::move(v);
  rec.initial_energy = initial;
  rec.energy = best.value;
  const auto ratio = approximation_ratio(best.value, e_min, e_max);
  rec.ratio_plain = ratio.plain;
  rec.ratio_normalised = ratio.normalised;
  rec.evaluations = best.evaluations;
  return rec;
}

inline std::string level_context(std::size_t p) { return "level p=" + std::to_string(p) + ": "; }

}  // namespace detail

/// Fourier ladder. When `reference` is given (a Fourier trace with smaller or
/// equal q_max over the same instance), each level also considers the
/// reference optimum of that level, zero-padded to q amplitudes, as a start
/// and keeps whichever start has the lower energy.
inline OptimisationTrace fourier_strategy(const CostDiagonal& diag, const StrategyConfig& cfg,
                                          const OptimisationTrace* reference = nullptr) {
  cfg.validate();
  if (reference && reference->strategy != StrategyKind::fourier)
    throw Error(ErrorKind::validation, "dominance reference must be a Fourier trace");
  OptimisationTrace trace;
  trace.strategy = StrategyKind::fourier;
  trace.q_max = cfg.q_max;
  trace.seed = cfg.seed;
  trace.e_min = diag.min();
  trace.e_max = diag.max();

  detail::EnergyEvaluator energy(diag);
  std::vector<double> u, v;
  for (std::size_t p = 1; p <= cfg.p_max; ++p) {
    const std::size_t q = std::min(p, cfg.q_max);
    u.resize(q, 0.0);
    v.resize(q, 0.0);
    auto objective = [&](std::span<const double> x) {
      FourierParams fp{{x.begin(), x.begin() + static_cast<std::ptrdiff_t>(q)},
                       {x.begin() + static_cast<std::ptrdiff_t>(q), x.end()}};
      return energy(fourier_to_angles(fp, p));
    };
    std::vector<double> x0(u);
    x0.insert(x0.end(), v.begin(), v.end());
    double initial = objective(x0);
    if (reference && p <= reference->levels.size()) {
      const auto& ref = reference->levels[p - 1];
      if (ref.u.size() <= q) {
        std::vector<double> alt(2 * q, 0.0);
        std::copy(ref.u.begin(), ref.u.end(), alt.begin());
        std::copy(ref.v.begin(), ref.v.end(), alt.begin() + static_cast<std::ptrdiff_t>(q));
        const double alt_energy = objective(alt);
        if (alt_energy < initial) {
          x0 = std::move(alt);
          initial = alt_energy;
        }
      }
    }
    MinimiserResult best;
    try {
      best = minimise(objective, x0, cfg.optimiser);
    } catch (const ObjectiveError& e) {
      throw ObjectiveError(detail::level_context(p) + e.what(), e.point());
    }
    u.assign(best.x.begin(), best.x.begin() + static_cast<std::ptrdiff_t>(q));
    v.assign(best.x.begin() + static_cast<std::ptrdiff_t>(q), best.x.end());
    trace.levels.push_back(detail::finish_level(p, q, fourier_to_angles({u, v}, p), u, v, initial,
                                                best, trace.e_min, trace.e_max));
  }
  return trace;
}

/// Random-initialisation ladder: gamma_1 ~ U(-pi/2, pi/2), beta_1 ~ U(-pi/4, pi/4)
/// from `cfg.seed`; level p+1 appends (0, 0) to the level-p optimum.
inline OptimisationTrace random_init_strategy(const CostDiagonal& diag, const StrategyConfig& cfg) {
  cfg.validate();
  OptimisationTrace trace;
  trace.strategy = StrategyKind::random_init;
  trace.q_max = 0;
  trace.seed = cfg.seed;
  trace.e_min = diag.min();
  trace.e_max = diag.max();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> gamma_dist(-std::numbers::pi / 2, std::numbers::pi / 2);
  std::uniform_real_distribution<double> beta_dist(-std::numbers::pi / 4, std::numbers::pi / 4);
  QaoaParams angles{{gamma_dist(rng)}, {beta_dist(rng)}};

  detail::EnergyEvaluator energy(diag);
  for (std::size_t p = 1; p <= cfg.p_max; ++p) {
    if (p > 1) {
      angles.gamma.push_back(0.0);
      angles.beta.push_back(0.0);
    }
    auto objective = [&](std::span<const double> x) {
      QaoaParams a{{x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p)},
                   {x.begin() + static_cast<std::ptrdiff_t>(p), x.end()}};
      return energy(a);
    };
    std::vector<double> x0(angles.gamma);
    x0.insert(x0.end(), angles.beta.begin(), angles.beta.end());
    const double initial = objective(x0);
    MinimiserResult best;
    try {
      best = minimise(objective, x0, cfg.optimiser);
    } catch (const ObjectiveError& e) {
      throw ObjectiveError(detail::level_context(p) + e.what(), e.point());
    }
    angles.gamma.assign(best.x.begin(), best.x.begin() + static_cast<std::ptrdiff_t>(p));
    angles.beta.assign(best.x.begin() + static_cast<std::ptrdiff_t>(p), best.x.end());
    trace.levels.push_back(
        detail::finish_level(p, 0, angles, {}, {}, initial, best, trace.e_min, trace.e_max));
  }
  return trace;
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const OptimisationTrace& trace) {
  auto number = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : trace.levels)
    levels.push_back({{"p", l.p},
                      {"q", l.q},
                      {"gamma", l.gamma},
                      {"beta", l.beta},
                      {"u", l.u},
                      {"v", l.v},
                      {"initial_energy", l.initial_energy},
                      {"energy", l.energy},
                      {"ratio_plain", number(l.ratio_plain)},
                      {"ratio_normalised", l.ratio_normalised},
                      {"evals", l.evaluations}});
  return {{"strategy", to_string(trace.strategy)},
          {"q_max", trace.q_max},
          {"seed", trace.seed},
          {"e_min", trace.e_min},
          {"e_max", trace.e_max},
          {"label", trace.label},
          {"levels", levels}};
}

inline OptimisationTrace trace_from_json(const nlohmann::json& j) {
  try {
    OptimisationTrace t;
    const auto strategy = j.at("strategy").get<std::string>();
    if (strategy != "fourier" && strategy != "ri")
      throw Error(ErrorKind::validation, "unknown strategy '" + strategy + "'");
    t.strategy = strategy == "fourier" ? StrategyKind::fourier : StrategyKind::random_init;
    t.q_max = j.value("q_max", std::size_t{0});
    t.seed = j.value("seed", std::uint64_t{0});
    t.e_min = j.at("e_min").get<double>();
    t.e_max = j.at("e_max").get<double>();
    t.label = j.value("label", std::string{});
    for (const auto& l : j.at("levels")) {
      LevelRecord r;
      r.p = l.at("p").get<std::size_t>();
      r.q = l.value("q", std::size_t{0});
      r.gamma = l.at("gamma").get<std::vector<double>>();
      r.beta = l.at("beta").get<std::vector<double>>();
      r.u = l.value("u", std::vector<double>{});
      r.v = l.value("v", std::vector<double>{});
      r.initial_energy = l.value("initial_energy", 0.0);
      r.energy = l.at("energy").get<double>();
      r.ratio_plain = l.at("ratio_plain").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                    : l.at("ratio_plain").get<double>();
      r.ratio_normalised = l.at("ratio_normalised").get<double>();
      r.evaluations = l.at("evals").get<std::size_t>();
      if (r.gamma.size() != r.p || r.beta.size() != r.p)
        throw Error(ErrorKind::validation, "level angle count differs from p");
      t.levels.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < t.levels.size(); ++k)
      if (t.levels[k].p != k + 1) throw Error(ErrorKind::validation, "trace levels must be contiguous from 1");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed trace JSON: ") + e.what());
  }
}

inline std::string trace_csv(const OptimisationTrace& trace) {
  std::string out = "p,q,energy,ratio_plain,ratio_normalised,evals\n";
  for (const auto& l : trace.levels)
    out += std::to_string(l.p) + ',' + std::to_string(l.q) + ',' + format_real(l.energy) + ',' +
           format_real(l.ratio_plain) + ',' + format_real(l.ratio_normalised) + ',' +
           std::to_string(l.evaluations) + '\n';
  return out;
}

}  // namespace qasched
