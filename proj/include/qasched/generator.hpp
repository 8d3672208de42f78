#pragma once

// Synthetic track-reconstruction instances. Hits sit on concentric detector
// layers at unit radial spacing; a triplet is three hits on consecutive
// layers, and each candidate triplet becomes one binary variable.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qasched/error.hpp"
#include "qasched/format.hpp"
#include "qasched/qubo.hpp"

namespace qasched {

struct GeneratorConfig {
  std::size_t layers = 5;
  std::size_t tracks = 2;
  std::size_t noise_hits = 1;          // per layer
  double angular_window = 0.1;         // max |dphi| between hits of a doublet (rad)
  double curvature_window = 0.02;      // second difference at which a triplet stops looking track-like
  double segment_width = 1.0;          // azimuthal extent of the segment (rad)
  double max_curvature = 0.01;         // |dphi/dr| of a true track
  double hit_jitter = 0.002;           // gaussian sigma of hit positions (rad)
  double reward = -1.0;                // coupling of chainable triplets
  double conflict_penalty = 2.0;       // coupling of triplets claiming a hit inconsistently
  double implausible_bias = 0.5;       // cap of the linear bias for curved triplets
  std::size_t max_vars = 23;
  std::uint64_t seed = 0;

  void validate() const {
    if (layers < 3) throw Error(ErrorKind::config, "need at least 3 layers");
    if (!(reward < 0.0)) throw Error(ErrorKind::config, "reward must be negative");
    if (!(conflict_penalty > 0.0)) throw Error(ErrorKind::config, "conflict penalty must be positive");
    if (max_vars < 1) throw Error(ErrorKind::config, "max_vars must be at least 1");
    if (!(angular_window > 0.0) || !(curvature_window > 0.0))
      throw Error(ErrorKind::config, "windows must be positive");
    if (!(segment_width > 0.0)) throw Error(ErrorKind::config, "segment width must be positive");
    if (max_curvature < 0.0 || hit_jitter < 0.0 || implausible_bias < 0.0)
      throw Error(ErrorKind::config, "curvature, jitter and bias cap must be non-negative");
  }
};

struct Hit {
  std::size_t layer = 0;
  double phi = 0.0;
  /// Index of the generating track; empty for noise.
  std::optional<std::size_t> track;
};

struct Triplet {
  std::array<std::size_t, 3> hits{};  // indices into GeneratedInstance::hits, layer order
  double curvature = 0.0;             // |second difference of phi|
  bool is_true = false;               // all three hits from the same track
};

struct GeneratedInstance {
  QuboInstance qubo;
  std::vector<Hit> hits;
  std::vector<Triplet> triplets;  // variable i <-> triplets[i]

  /// Assignment selecting exactly the true-track triplets.
  Assignment truth() const {
    Assignment a;
    a.bits.reserve(triplets.size());
    for (const auto& t : triplets) a.bits.push_back(t.is_true ? 1 : 0);
    return a;
  }
};

enum class GenerationStatus { ok, oversized, empty };

/// Result of one generator run. Oversized or empty instances are discarded,
/// which is a normal outcome rather than an error.
struct Generation {
  GenerationStatus status = GenerationStatus::empty;
  std::size_t candidate_count = 0;
  std::optional<GeneratedInstance> instance;

  bool discarded() const noexcept { return status != GenerationStatus::ok; }
};

namespace detail {

inline bool hits_consistent(const Triplet& a, const Triplet& b, const std::vector<Hit>& hits) {
  for (auto ha : a.hits)
    for (auto hb : b.hits)
      if (hits[ha].layer == hits[hb].layer && ha != hb) return false;
  return true;
}

inline std::size_t shared_hits(const Triplet& a, const Triplet& b) {
  std::size_t count = 0;
  for (auto ha : a.hits)
    for (auto hb : b.hits)
      if (ha == hb) ++count;
  return count;
}

}  // namespace detail

inline Generation generate_triplet_instance(const GeneratorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<Hit> hits;
  for (std::size_t t = 0; t < cfg.tracks; ++t) {
    const double phi0 = cfg.segment_width * unit(rng);
    const double kappa = cfg.max_curvature * (2.0 * unit(rng) - 1.0);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      const double r = static_cast<double>(l + 1);
      hits.push_back({l, phi0 + kappa * r + cfg.hit_jitter * jitter(rng), t});
    }
  }
  const double margin = cfg.angular_window;
  for (std::size_t l = 0; l < cfg.layers; ++l)
    for (std::size_t k = 0; k < cfg.noise_hits; ++k)
      hits.push_back({l, -margin + (cfg.segment_width + 2.0 * margin) * unit(rng), std::nullopt});
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.layer != b.layer ? a.layer < b.layer : a.phi < b.phi;
  });

  std::vector<std::vector<std::size_t>> by_layer(cfg.layers);
  for (std::size_t h = 0; h < hits.size(); ++h) by_layer[hits[h].layer].push_back(h);

  std::vector<Triplet> triplets;
  for (std::size_t l = 0; l + 2 < cfg.layers; ++l)
    for (auto h1 : by_layer[l])
      for (auto h2 : by_layer[l + 1]) {
        const double d12 = hits[h2].phi - hits[h1].phi;
        if (std::abs(d12) > cfg.angular_window) continue;
        for (auto h3 : by_layer[l + 2]) {
          const double d23 = hits[h3].phi - hits[h2].phi;
          if (std::abs(d23) > cfg.angular_window) continue;
          Triplet t;
          t.hits = {h1, h2, h3};
          t.curvature = std::abs(d23 - d12);
          t.is_true = hits[h1].track && hits[h1].track == hits[h2].track &&
                      hits[h2].track == hits[h3].track;
          triplets.push_back(t);
        }
      }

  Generation gen;
  gen.candidate_count = triplets.size();
  if (triplets.empty()) {
    gen.status = GenerationStatus::empty;
    return gen;
  }
  if (triplets.size() > cfg.max_vars) {
    gen.status = GenerationStatus::oversized;
    return gen;
  }

  const std::size_t n = triplets.size();
  std::vector<double> linear(n);
  for (std::size_t i = 0; i < n; ++i)
    linear[i] = std::clamp(triplets[i].curvature / cfg.curvature_window - 1.0, -1.0,
                           cfg.implausible_bias);

  auto slope = [&](const Triplet& t) { return hits[t.hits[2]].phi - hits[t.hits[1]].phi; };

  std::vector<Coupling> quadratic;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = triplets[i];
      const auto& b = triplets[j];
      const std::size_t shared = detail::shared_hits(a, b);
      if (shared == 0) continue;
      if (!detail::hits_consistent(a, b, hits)) {
        quadratic.push_back({i, j, cfg.conflict_penalty});
        continue;
      }
      // Consistent and sharing a doublet: one continues the other.
      if (shared == 2) {
        const Triplet& first = hits[a.hits[0]].layer < hits[b.hits[0]].layer ? a : b;
        const Triplet& second = &first == &a ? b : a;
        if (std::abs(slope(second) - slope(first)) <= cfg.curvature_window)
          quadratic.push_back({i, j, cfg.reward});
      }
    }

  std::ostringstream label;
  label << "triplet seed=" << cfg.seed << " layers=" << cfg.layers << " tracks=" << cfg.tracks
        << " noise=" << cfg.noise_hits;
  gen.status = GenerationStatus::ok;
  gen.instance = GeneratedInstance{QuboInstance(n, std::move(linear), std::move(quadratic), label.str()),
                                   std::move(hits), std::move(triplets)};
  return gen;
}

}  // namespace qasched
