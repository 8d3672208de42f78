#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qasched/schedule.hpp"

namespace qs = qasched;

namespace {

qs::Schedule p1() { return qs::derive_schedule({{0.2}, {0.6}}); }

qs::QaoaParams random_params(std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-2.0, 2.0);
  qs::QaoaParams params;
  for (std::size_t i = 0; i < p; ++i) {
    params.gamma.push_back(angle(rng));
    params.beta.push_back(angle(rng));
  }
  return params;
}

}  // namespace

TEST(Derive, SingleLayer) {
  auto s = p1();
  EXPECT_NEAR(s.total_time(), 0.8, 1e-15);
  ASSERT_EQ(s.points().size(), 3u);
  EXPECT_EQ(s.points()[0], (qs::SchedulePoint{0.0, 0.0}));
  EXPECT_NEAR(s.points()[1].t, 0.4, 1e-15);
  EXPECT_NEAR(s.points()[1].f, 0.25, 1e-15);
  EXPECT_NEAR(s.points()[2].t, 0.8, 1e-15);
  EXPECT_EQ(s.points()[2].f, 1.0);
}

TEST(Derive, SymmetricTwoLayers) {
  auto s = qs::derive_schedule({{0.5, 0.5}, {0.5, 0.5}});
  const std::vector<qs::SchedulePoint> expected{{0.0, 0.0}, {0.5, 0.5}, {1.5, 0.5}, {2.0, 1.0}};
  EXPECT_EQ(s.points(), expected);
}

TEST(Derive, TotalTimeIsL1Norm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto params = random_params(1 + seed * 5, seed);
    double l1 = 0.0;
    for (std::size_t i = 0; i < params.layers(); ++i) l1 += std::abs(params.gamma[i]) + std::abs(params.beta[i]);
    auto s = qs::derive_schedule(params);
    EXPECT_NEAR(s.total_time(), l1, 1e-12 * l1);
    for (const auto& pt : s.points()) {
      EXPECT_GE(pt.f, 0.0);
      EXPECT_LE(pt.f, 1.0);
    }
  }
}

TEST(Derive, NegativeAnglesUseMagnitudes) {
  auto s = qs::derive_schedule({{-0.2}, {0.6}});
  EXPECT_NEAR(s.points()[1].f, 0.25, 1e-15);
  EXPECT_EQ(s.source().gamma[0], -0.2);
  auto j = qs::to_json(s);
  EXPECT_EQ(j["gamma_sign"][0], -1);
  EXPECT_EQ(j["beta_sign"][0], 1);
}

TEST(Derive, ZeroWidthLayersSkipped) {
  auto s = qs::derive_schedule({{0.2, 0.0, 0.4}, {0.2, 0.0, 0.0}});
  ASSERT_EQ(s.points().size(), 4u);
  EXPECT_NEAR(s.points()[1].t, 0.2, 1e-15);
  EXPECT_NEAR(s.points()[2].t, 0.6, 1e-15);
  EXPECT_EQ(s.points()[2].f, 1.0);
}

TEST(Derive, AllZeroIsDegenerate) {
  try {
    qs::derive_schedule({{0.0, 0.0}, {0.0, 0.0}});
    FAIL();
  } catch (const qs::Error& e) {
    EXPECT_EQ(e.kind(), qs::ErrorKind::degenerate);
  }
  EXPECT_THROW(qs::derive_schedule({{}, {}}), qs::Error);
}

TEST(Derive, ScaleInvariance) {
  auto params = random_params(12, 3);
  auto base = qs::derive_schedule(params);
  for (double c : {0.1, 2.5, 1e3}) {
    auto scaled = params;
    for (auto& g : scaled.gamma) g *= c;
    for (auto& b : scaled.beta) b *= c;
    auto s = qs::derive_schedule(scaled);
    EXPECT_NEAR(s.total_time(), c * base.total_time(), 1e-12 * c * base.total_time());
    ASSERT_EQ(s.points().size(), base.points().size());
    for (std::size_t k = 0; k < s.points().size(); ++k) {
      EXPECT_NEAR(s.points()[k].f, base.points()[k].f, 1e-14);
      EXPECT_NEAR(s.points()[k].t, c * base.points()[k].t, 1e-12 * c * base.total_time());
    }
  }
}

TEST(ScheduleInvariants, ConstructorRejectsBadPoints) {
  EXPECT_THROW(qs::Schedule({{0.0, 0.0}}), qs::Error);
  EXPECT_THROW(qs::Schedule({{0.1, 0.0}, {1.0, 1.0}}), qs::Error);
  EXPECT_THROW(qs::Schedule({{0.0, 0.0}, {1.0, 0.5}}), qs::Error);
  EXPECT_THROW(qs::Schedule({{0.0, 0.0}, {0.5, 1.2}, {1.0, 1.0}}), qs::Error);
  EXPECT_THROW(qs::Schedule({{0.0, 0.0}, {0.5, 0.5}, {0.5, 0.6}, {1.0, 1.0}}), qs::Error);
}

TEST(Sample, Examples) {
  auto s = p1();
  EXPECT_NEAR(qs::sample(s, 0.2), 0.125, 1e-15);
  EXPECT_EQ(qs::sample(s, s.total_time()), 1.0);
  EXPECT_EQ(qs::sample(s, 0.0), 0.0);
  for (const auto& pt : s.points()) EXPECT_EQ(qs::sample(s, pt.t), pt.f);
}

TEST(Sample, PiecewiseLinearAndContinuous) {
  auto s = qs::derive_schedule(random_params(7, 9));
  const auto& pts = s.points();
  for (std::size_t k = 1; k < pts.size(); ++k) {
    for (double w : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      const double t = pts[k - 1].t + w * (pts[k].t - pts[k - 1].t);
      const double f = qs::sample(s, t);
      EXPECT_NEAR(f, pts[k - 1].f + w * (pts[k].f - pts[k - 1].f), 1e-12);
      EXPECT_GE(f, std::min(pts[k - 1].f, pts[k].f) - 1e-15);
      EXPECT_LE(f, std::max(pts[k - 1].f, pts[k].f) + 1e-15);
    }
  }
}

TEST(Sample, OutOfRange) {
  auto s = p1();
  for (double t : {-1e-9, 0.8 + 1e-9}) {
    try {
      qs::sample(s, t);
      FAIL();
    } catch (const qs::Error& e) {
      EXPECT_EQ(e.kind(), qs::ErrorKind::range);
    }
  }
}

TEST(Dwell, LinearRamp) {
  qs::Schedule linear({{0.0, 0.0}, {3.0, 1.0}});
  auto d = qs::linear_dwell_comparison(linear, 0.85);
  EXPECT_NEAR(d.dwell_fraction, 0.15, 1e-15);
  EXPECT_NEAR(d.linear_fraction, 0.15, 1e-15);
  EXPECT_NEAR(qs::max_linear_deviation(linear), 0.0, 1e-15);
}

TEST(Dwell, ConstantAtOne) {
  // Jumps to 1 immediately after t = 0.
  qs::Schedule top({{0.0, 0.0}, {1e-12, 1.0}, {2.0, 1.0}});
  EXPECT_NEAR(qs::linear_dwell_comparison(top, 0.5).dwell_fraction, 1.0, 1e-9);
}

TEST(Dwell, MatchesDenseSampling) {
  auto s = qs::derive_schedule(random_params(9, 4));
  for (double threshold : {0.2, 0.5, 0.8}) {
    const int samples = 200000;
    int above = 0;
    for (int k = 0; k < samples; ++k)
      if (qs::sample(s, s.total_time() * (k + 0.5) / samples) >= threshold) ++above;
    EXPECT_NEAR(qs::linear_dwell_comparison(s, threshold).dwell_fraction, static_cast<double>(above) / samples, 1e-4);
  }
  EXPECT_THROW(qs::linear_dwell_comparison(s, 0.0), qs::Error);
  EXPECT_THROW(qs::linear_dwell_comparison(s, 1.0), qs::Error);
}

TEST(Deviation, MatchesDenseSampling) {
  auto s = qs::derive_schedule(random_params(6, 5));
  double worst = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double t = s.total_time() * k / 100000.0;
    worst = std::max(worst, std::abs(qs::sample(s, t) - t / s.total_time()));
  }
  EXPECT_NEAR(qs::max_linear_deviation(s), worst, 1e-4);
  EXPECT_GE(qs::max_linear_deviation(s), worst - 1e-12);
}

TEST(Export, CsvAndJson) {
  auto s = p1();
  EXPECT_EQ(qs::schedule_csv(s), "t,f\n0,0\n0.40000000000000002,0.25\n0.80000000000000004,1\n");
  auto j = qs::to_json(s);
  EXPECT_EQ(j["t"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["total_time"].get<double>(), 0.8);
}
