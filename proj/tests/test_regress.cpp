#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "antcal/regress.hpp"

using namespace antcal;

namespace {

Transform eq7() {
  return Transform::from_rows(0.997936, -0.005520, 0.007442, 0.002914, 0.995512, -0.005053);
}

Transform eq6() {
  return Transform::from_rows(0.994773, -0.017231, 0.022903, 0.007398, 0.992050, -0.016989);
}

std::vector<TrainingPair> generated(const Transform& t, int n, std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> az(100.0, 260.0), el(0.0, 60.0);
  std::normal_distribution<double> e(0.0, noise > 0 ? noise : 1.0);
  std::vector<TrainingPair> out;
  for (int i = 0; i < n; ++i) {
    const Pointing x(az(rng), el(rng));
    auto y = apply(t, x);
    if (noise > 0) y = Pointing(y.azimuth_deg() + e(rng), y.elevation_deg() + e(rng));
    out.push_back({x, y, std::nullopt});
  }
  return out;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;
}

}  // namespace

TEST(TrainingSet, Preconditions) {
  auto p = generated(eq7(), 2, 1);
  EXPECT_EQ(code_of([&] { TrainingSet{p}; }), Errc::too_few_pairs);
  std::vector<TrainingPair> line;
  for (int i = 0; i < 10; ++i) {
    const Pointing x(100 + i, 5 + 2 * i);
    line.push_back({x, x, std::nullopt});
  }
  EXPECT_EQ(code_of([&] { TrainingSet{line}; }), Errc::rank_deficient);
  std::vector<TrainingPair> same(5, TrainingPair{Pointing(1, 1), Pointing(1, 1), {}});
  EXPECT_EQ(code_of([&] { TrainingSet{same}; }), Errc::rank_deficient);
}

TEST(Fit, RecoversGeneratorExactly) {
  const auto r = fit(TrainingSet(generated(eq7(), 60, 2)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.transform(i, j), eq7()(i, j), 1e-9);
  EXPECT_LT(r.azimuth.mae, 1e-9);
  EXPECT_LT(r.elevation.mae, 1e-9);
  EXPECT_FALSE(r.used_qr);
  EXPECT_GT(r.condition_number, 1.0);
}

TEST(Fit, IdentityPairs) {
  std::vector<TrainingPair> p;
  for (const auto& q : generated(Transform{}, 20, 3)) p.push_back({q.intended, q.intended, {}});
  const auto r = fit(TrainingSet(p));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.transform(i, j), i == j ? 1.0 : 0.0, 1e-9);
  EXPECT_NEAR(r.azimuth.mae, 0.0, 1e-9);
  EXPECT_NEAR(r.elevation.mse, 0.0, 1e-12);
  EXPECT_EQ(r.residuals.size(), 20u);
}

TEST(Fit, ThreePairsInterpolate) {
  std::vector<TrainingPair> p{{Pointing(120, 5), Pointing(120.3, 5.1), {}},
                              {Pointing(180, 40), Pointing(179.8, 40.2), {}},
                              {Pointing(240, 10), Pointing(240.1, 9.7), {}}};
  const auto r = fit(TrainingSet(p));
  for (const auto& res : r.residuals) EXPECT_LT(res.norm(), 1e-9);
}

TEST(Fit, NormalEquationOptimality) {
  const TrainingSet ts(generated(eq7(), 42, 4, 0.02));
  const auto r = fit(ts);
  const double base = rss(r.transform, ts);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (double d : {-1e-6, 1e-6}) {
        Eigen::Matrix3d m = r.transform.matrix();
        m(i, j) += d;
        EXPECT_GE(rss(Transform(m), ts), base);
      }
    }
  }
  EXPECT_LE(r.azimuth.mae * r.azimuth.mae, r.azimuth.mse + 1e-15);
  EXPECT_LE(r.elevation.mae * r.elevation.mae, r.elevation.mse + 1e-15);
}

TEST(Fit, AzimuthOffsetEquivariance) {
  const auto base = generated(eq7(), 30, 5, 0.01);
  const auto r0 = fit(TrainingSet(base));
  const double c = 7.5;
  std::vector<TrainingPair> shifted;
  for (const auto& p : base) {
    shifted.push_back({Pointing(p.intended.azimuth_deg() + c, p.intended.elevation_deg()), p.actual, {}});
  }
  const auto r1 = fit(TrainingSet(shifted));
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(r1.transform(i, 0), r0.transform(i, 0), 1e-9);
    EXPECT_NEAR(r1.transform(i, 1), r0.transform(i, 1), 1e-9);
    EXPECT_NEAR(r1.transform(i, 2), r0.transform(i, 2) - r0.transform(i, 0) * c, 1e-7);
  }
}

TEST(Fit, DoesNotChaseOneOutlier) {
  auto p = generated(eq7(), 42, 6, 0.02);
  const double kick = 1.0;
  p[17].actual = Pointing(p[17].actual.azimuth_deg() + kick, p[17].actual.elevation_deg());
  const TrainingSet ts(p);
  const auto r = fit(ts);
  const auto pred = r.transform.map(ts.input(17)(0), ts.input(17)(1));
  EXPECT_GE(std::fabs(ts.target(17)(0) - pred(0)), 0.5 * kick);
  EXPECT_NE(std::find(r.flagged.begin(), r.flagged.end(), 17u), r.flagged.end());
}

TEST(Fit, UnwrapsAcrossNorth) {
  const auto t = Transform::rotation(0.0, 0.2, -0.1);
  std::vector<TrainingPair> p;
  for (int i = 0; i < 20; ++i) {
    const Pointing x(350.0 + i, 10.0 + (i % 5) * 3.0);
    p.push_back({x, apply(t, x), {}});
  }
  const auto r = fit(TrainingSet(p));
  EXPECT_NEAR(r.transform(0, 2), 0.2 + 0.0, 1e-6);
  EXPECT_NEAR(r.transform(0, 0), 1.0, 1e-9);
  EXPECT_LT(r.azimuth.mae, 1e-9);
}

TEST(Fit, IllConditionedUsesQr) {
  // inputs spread over a tiny patch far from the origin
  std::vector<TrainingPair> p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  const auto t = Transform::rotation(0.2, 0.01, 0.02);
  for (int i = 0; i < 30; ++i) {
    const Pointing x(200.0 + u(rng), 45.0 + u(rng));
    p.push_back({x, apply(t, x), {}});
  }
  const auto r = fit(TrainingSet(p));
  EXPECT_GT(r.condition_number, kMaxGramCondition);
  EXPECT_TRUE(r.used_qr);
  EXPECT_LT(r.azimuth.mae, 1e-9);
}

TEST(Fit, NoisyRotationRecovery) {
  const double truth = decompose(eq7()).rotation_deg;
  int bad = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = fit(TrainingSet(generated(eq7(), 60, seed, 0.02)));
    if (std::fabs(decompose(r.transform).rotation_deg - truth) >= 0.02) ++bad;
  }
  EXPECT_EQ(bad, 0);
}

TEST(Evaluate, ReproducesFit) {
  const TrainingSet ts(generated(eq7(), 25, 8, 0.02));
  const auto r = fit(ts);
  const auto e = evaluate(r.transform, ts);
  EXPECT_EQ(e.azimuth.mae, r.azimuth.mae);
  EXPECT_EQ(e.elevation.mse, r.elevation.mse);
}

TEST(Evaluate, ConstantOffsetIdentity) {
  std::vector<TrainingPair> p;
  for (const auto& q : generated(Transform{}, 12, 9)) {
    p.push_back({q.intended, Pointing(q.intended.azimuth_deg() + 0.3, q.intended.elevation_deg() - 0.4), {}});
  }
  const auto e = evaluate(Transform{}, TrainingSet(p));
  EXPECT_NEAR(e.azimuth.mae, 0.3, 1e-9);
  EXPECT_NEAR(e.elevation.mae, 0.4, 1e-9);
  double mean_norm = 0;
  for (const auto& r : e.residuals) mean_norm += r.norm();
  EXPECT_NEAR(mean_norm / 12.0, 0.5, 1e-9);
}

TEST(Evaluate, DriftBetweenMatrices) {
  const auto e = evaluate(eq6(), TrainingSet(generated(eq7(), 40, 10)));
  EXPECT_GT(e.azimuth.mae, 1e-3);
  EXPECT_GT(e.elevation.mae, 1e-3);
}

TEST(TransformFile, RoundTrip) {
  const auto text = write_transform(eq7());
  EXPECT_EQ(parse_transform(text), eq7());
  EXPECT_NE(text.find("# rotation_deg 0.167"), std::string::npos);
  EXPECT_EQ(text.substr(0, text.find('\n')), "0.997936 -0.00552 0.007442");
  EXPECT_EQ(code_of([] { parse_transform("1 0 0\n0 1 0\n"); }), Errc::malformed_line);
  EXPECT_EQ(code_of([] { parse_transform("1 0 0\n0 1 0\n0 0 2\n"); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { parse_transform("1 0\n0 1 0\n0 0 1\n"); }), Errc::malformed_line);
  EXPECT_NE(write_transform(Transform::from_rows(1, 2, 0, 2, 4, 0)).find("no rotation"),
            std::string::npos);
}

TEST(Report, TableLayout) {
  const auto r = fit(TrainingSet(generated(eq7(), 10, 11, 0.02)));
  const auto t = format_training_error(r);
  EXPECT_EQ(t.substr(0, t.find('\n')), "axis              MAE         MSE");
  EXPECT_NE(t.find("azimuth      0.0"), std::string::npos);
}
