#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "support.hpp"

namespace qs = qasched;
using qs::testing::random_instance;

namespace {

qs::QuboInstance two_var() { return qs::QuboInstance(2, {1.0, -2.0}, {{0, 1, 3.0}}); }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qasched_test_" + name);
}

}  // namespace

TEST(Evaluate, DirectArithmetic) {
  EXPECT_DOUBLE_EQ(qs::evaluate(two_var(), {{1, 1}}), 2.0);
  EXPECT_DOUBLE_EQ(qs::evaluate(two_var(), {{0, 1}}), -2.0);
}

TEST(Evaluate, AllZerosIsZero) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto q = random_instance(7, seed);
    EXPECT_EQ(qs::evaluate(q, qs::Assignment::from_index(0, 7)), 0.0);
  }
}

TEST(Evaluate, LengthMismatchIsDimensionError) {
  try {
    qs::evaluate(two_var(), {{1}});
    FAIL();
  } catch (const qs::Error& e) {
    EXPECT_EQ(e.kind(), qs::ErrorKind::dimension);
  }
}

TEST(Evaluate, InvariantUnderCouplingStorageOrder) {
  std::mt19937_64 rng(11);
  auto q = random_instance(9, 3);
  auto shuffled = q.quadratic();
  for (int round = 0; round < 5; ++round) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto& c : shuffled)
      if (rng() & 1U) std::swap(c.i, c.j);
    qs::QuboInstance r(9, q.linear(), shuffled, q.label());
    EXPECT_EQ(r, q);
    for (std::uint64_t x = 0; x < 512; x += 37) {
      auto a = qs::Assignment::from_index(x, 9);
      EXPECT_EQ(qs::evaluate(r, a), qs::evaluate(q, a));
    }
  }
}

TEST(Instance, CanonicalisesCouplings) {
  qs::QuboInstance q(3, {}, {{2, 0, 1.0}, {0, 2, 0.5}, {1, 1, -1.5}, {0, 1, 2.0}});
  ASSERT_EQ(q.quadratic().size(), 2u);
  EXPECT_EQ(q.quadratic()[0], (qs::Coupling{0, 1, 2.0}));
  EXPECT_EQ(q.quadratic()[1], (qs::Coupling{0, 2, 1.5}));
  EXPECT_DOUBLE_EQ(q.linear()[1], -1.5);
}

TEST(Instance, RejectsBadInput) {
  EXPECT_THROW(qs::QuboInstance(2, {1.0, NAN}, {}), qs::Error);
  EXPECT_THROW(qs::QuboInstance(2, {}, {{0, 2, 1.0}}), qs::Error);
  EXPECT_THROW(qs::QuboInstance(0, {}, {}), qs::Error);
}

TEST(BruteForce, SingleVariable) {
  auto r = qs::brute_force_minimum(qs::QuboInstance(1, {-1.0}, {}));
  EXPECT_EQ(r.assignment.bits, (std::vector<std::uint8_t>{1}));
  EXPECT_EQ(r.energy, -1.0);
  ASSERT_TRUE(r.second_energy);
  EXPECT_EQ(*r.second_energy, 0.0);
  EXPECT_EQ(r.ground_degeneracy, 1u);
}

TEST(BruteForce, TwoVariables) {
  auto r = qs::brute_force_minimum(two_var());
  EXPECT_EQ(r.assignment.bits, (std::vector<std::uint8_t>{0, 1}));
  EXPECT_EQ(r.energy, -2.0);
  EXPECT_EQ(*r.second_energy, 0.0);
}

TEST(BruteForce, MatchesExhaustiveEvaluation) {
  for (std::size_t n : {3u, 6u, 10u, 13u}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto q = random_instance(n, 100 * n + seed);
      auto energies = qs::testing::enumerate_energies(q);
      auto r = qs::brute_force_minimum(q);
      const double lo = *std::min_element(energies.begin(), energies.end());
      EXPECT_NEAR(r.energy, lo, 1e-12);
      EXPECT_EQ(r.energy, qs::evaluate(q, r.assignment));
      // Smallest index attaining the minimum.
      const double tol = qs::tie_tolerance(q);
      std::uint64_t first = 0;
      while (energies[first] > lo + tol) ++first;
      EXPECT_EQ(r.assignment.to_index(), first);
      double second = INFINITY;
      for (double e : energies)
        if (e > lo + tol) second = std::min(second, e);
      ASSERT_TRUE(r.second_energy);
      EXPECT_NEAR(*r.second_energy, second, 1e-12);
    }
  }
}

TEST(BruteForce, TiesResolveToSmallestIndex) {
  // x0 and x1 each lower the energy by 1 but may not both be set.
  qs::QuboInstance q(2, {-1.0, -1.0}, {{0, 1, 1.0}});
  auto r = qs::brute_force_minimum(q);
  EXPECT_EQ(r.assignment.to_index(), 1u);
  EXPECT_EQ(r.ground_degeneracy, 3u);
  EXPECT_FALSE(r.second_energy.has_value() && *r.second_energy < 0.0);
}

TEST(BruteForce, ConstantLandscapeHasNoSecondEnergy) {
  auto r = qs::brute_force_minimum(qs::QuboInstance(3, {0.0, 0.0, 0.0}, {}));
  EXPECT_FALSE(r.second_energy.has_value());
  EXPECT_EQ(r.ground_degeneracy, 8u);
}

TEST(BruteForce, CapacityBound) {
  qs::QuboInstance q(27, {}, {});
  try {
    qs::brute_force_minimum(q);
    FAIL();
  } catch (const qs::Error& e) {
    EXPECT_EQ(e.kind(), qs::ErrorKind::capacity);
  }
}

TEST(BruteForce, EvaluateAtArgminOnGeneratedInstance) {
  auto inst = qs::testing::generated_instance(8, 1);
  auto r = qs::brute_force_minimum(inst.qubo);
  EXPECT_EQ(qs::evaluate(inst.qubo, r.assignment), r.energy);
  auto energies = qs::testing::enumerate_energies(inst.qubo);
  EXPECT_EQ(r.energy, *std::min_element(energies.begin(), energies.end()));
}

TEST(TextFormat, ParsesExample) {
  auto q = qs::parse_text("0 0 1.0\n1 1 -2.0\n0 1 3.0");
  EXPECT_EQ(q, two_var());
}

TEST(TextFormat, NormalisesReversedPairs) {
  EXPECT_EQ(qs::parse_text("0 0 1\n1 1 -2\n1 0 3.0\n"), qs::parse_text("0 0 1\n1 1 -2\n0 1 3.0\n"));
}

TEST(TextFormat, SumsDuplicatesAndIgnoresCommentsAndHeader) {
  auto q = qs::parse_text("p qubo 0 99 1 2\n# a comment\n\n0 1 1.0  # trailing\n0 1 2.0\n1 1 0.5\n");
  EXPECT_EQ(q.size(), 2u);
  ASSERT_EQ(q.quadratic().size(), 1u);
  EXPECT_EQ(q.quadratic()[0].weight, 3.0);
  EXPECT_EQ(q.linear()[1], 0.5);
}

TEST(TextFormat, MalformedLineReportsLineNumber) {
  try {
    qs::parse_text("0 0 1\n\n0 1 x\n");
    FAIL();
  } catch (const qs::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(qs::parse_text("0 0\n"), qs::ParseError);
  EXPECT_THROW(qs::parse_text("-1 0 1.0\n"), qs::ParseError);
}

TEST(TextFormat, NonFiniteIsValidationError) {
  for (const char* text : {"0 0 nan\n", "0 1 inf\n", "0 0 1e400\n"}) {
    try {
      qs::parse_text(text);
      FAIL() << text;
    } catch (const qs::Error& e) {
      EXPECT_EQ(e.kind(), qs::ErrorKind::validation) << text;
    }
  }
}

TEST(TextFormat, RoundTripsGeneratedInstancesBothFormats) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    qs::GeneratorConfig cfg;
    cfg.seed = seed;
    auto gen = qs::generate_triplet_instance(cfg);
    if (gen.discarded()) continue;
    const auto& q = gen.instance->qubo;
    for (const char* ext : {".qubo", ".json"}) {
      auto path = temp_path("roundtrip" + std::to_string(seed) + ext);
      qs::save_qubo(q, path);
      EXPECT_EQ(qs::load_qubo(path), q);
      std::filesystem::remove(path);
    }
  }
  // Random coefficients exercise the 17-digit formatting.
  auto q = random_instance(12, 5);
  EXPECT_EQ(qs::parse_text(qs::to_text(q)), q);
  EXPECT_EQ(qs::qubo_from_json(qs::to_json(q)), q);
}

TEST(JsonFormat, MirrorsFields) {
  auto j = qs::to_json(two_var());
  EXPECT_EQ(j["n"], 2);
  EXPECT_EQ(j["linear"]["1"], -2.0);
  EXPECT_EQ(j["quadratic"][0], nlohmann::json({0, 1, 3.0}));
  EXPECT_THROW(qs::qubo_from_json(nlohmann::json{{"n", 2}}), qs::Error);
}
