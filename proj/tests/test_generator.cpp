#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

namespace qs = qasched;

namespace {

qs::Generation generate(std::uint64_t seed, std::size_t layers = 5, std::size_t tracks = 2,
                        std::size_t noise = 1) {
  qs::GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.layers = layers;
  cfg.tracks = tracks;
  cfg.noise_hits = noise;
  return qs::generate_triplet_instance(cfg);
}

}  // namespace

TEST(Generator, DeterministicForFixedSeed) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto a = generate(seed);
    auto b = generate(seed);
    ASSERT_EQ(a.status, b.status);
    if (a.discarded()) continue;
    EXPECT_EQ(a.instance->qubo, b.instance->qubo);
    EXPECT_EQ(qs::to_text(a.instance->qubo), qs::to_text(b.instance->qubo));
  }
}

TEST(Generator, SingleCleanTrackRecoversTruth) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto g = generate(seed, 3, 1, 0);
    ASSERT_FALSE(g.discarded());
    const auto& inst = *g.instance;
    EXPECT_GE(inst.qubo.size(), 1u);
    auto best = qs::brute_force_minimum(inst.qubo);
    EXPECT_EQ(best.assignment, inst.truth());
    std::size_t selected = 0;
    for (auto b : best.assignment.bits) selected += b;
    EXPECT_EQ(selected, 1u);
  }
}

TEST(Generator, SeparatedCleanTracksRecoverTruth) {
  // Tracks far apart in phi never share candidate triplets.
  qs::GeneratorConfig cfg;
  cfg.tracks = 2;
  cfg.noise_hits = 0;
  cfg.layers = 5;
  cfg.segment_width = 4.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200 && checked < 20; ++seed) {
    cfg.seed = seed;
    auto g = qs::generate_triplet_instance(cfg);
    if (g.discarded()) continue;
    const auto& inst = *g.instance;
    bool overlapping = false;
    for (const auto& t : inst.triplets) overlapping |= !t.is_true;
    if (overlapping) continue;
    ++checked;
    EXPECT_EQ(qs::brute_force_minimum(inst.qubo).assignment, inst.truth());
  }
  EXPECT_EQ(checked, 20u);
}

TEST(Generator, CapForcesDiscardSignal) {
  qs::GeneratorConfig cfg;
  cfg.max_vars = 1;
  cfg.tracks = 2;
  cfg.seed = 3;
  auto g = qs::generate_triplet_instance(cfg);
  EXPECT_TRUE(g.discarded());
  EXPECT_EQ(g.status, qs::GenerationStatus::oversized);
  EXPECT_GT(g.candidate_count, 1u);
  EXPECT_FALSE(g.instance.has_value());
}

TEST(Generator, InvalidConfigIsConfigError) {
  auto expect_config_error = [](qs::GeneratorConfig cfg) {
    try {
      qs::generate_triplet_instance(cfg);
      FAIL();
    } catch (const qs::Error& e) {
      EXPECT_EQ(e.kind(), qs::ErrorKind::config);
    }
  };
  qs::GeneratorConfig cfg;
  cfg.layers = 2;
  expect_config_error(cfg);
  cfg = {};
  cfg.reward = 0.5;
  expect_config_error(cfg);
  cfg = {};
  cfg.conflict_penalty = 0.0;
  expect_config_error(cfg);
  cfg = {};
  cfg.max_vars = 0;
  expect_config_error(cfg);
}

TEST(Generator, CoefficientSigns) {
  std::size_t seen = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto g = generate(seed);
    if (g.discarded()) continue;
    ++seen;
    const auto& inst = *g.instance;
    qs::GeneratorConfig cfg;
    for (std::size_t i = 0; i < inst.qubo.size(); ++i) {
      const double a = inst.qubo.linear()[i];
      EXPECT_GE(a, -1.0);
      EXPECT_LE(a, cfg.implausible_bias);
      // Track-like triplets are rewarded, curved ones are not.
      if (inst.triplets[i].curvature < cfg.curvature_window) EXPECT_LT(a, 0.0);
      else EXPECT_GE(a, 0.0);
    }
    for (const auto& c : inst.qubo.quadratic())
      EXPECT_TRUE(c.weight == cfg.reward || c.weight == cfg.conflict_penalty) << c.weight;
  }
  EXPECT_GT(seen, 20u);
}

TEST(Generator, DefaultsCoverSimulationSizes) {
  std::set<std::size_t> sizes;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto g = generate(seed);
    if (!g.discarded()) {
      EXPECT_LE(g.instance->qubo.size(), 23u);
      sizes.insert(g.instance->qubo.size());
    }
  }
  for (std::size_t n = 6; n <= 12; ++n) EXPECT_TRUE(sizes.count(n)) << n;
}

TEST(Generator, LabelRecordsSeed) {
  auto g = generate(4);
  ASSERT_FALSE(g.discarded());
  EXPECT_NE(g.instance->qubo.label().find("seed=4"), std::string::npos);
}
