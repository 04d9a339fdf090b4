#include "hfocal/ransac.h"

#include "hfocal/bench.h"
#include "test_util.h"

#include <Eigen/Dense>
#include <gtest/gtest.h>

namespace hfocal {
namespace {

SynthScene Scene(FocalCase c, std::uint64_t index, double sigma = 0.0, double inliers = 0.75,
                 double planar = 1.0) {
  SynthConfig cfg;
  cfg.focal_case = c;
  cfg.noise_sigma = sigma;
  cfg.inlier_ratio = inliers;
  cfg.planar_fraction = planar;
  cfg.rng_seed = 7;
  return GenerateScene(cfg, index);
}

RansacConfig Config(std::uint64_t seed = 1) {
  RansacConfig r;
  r.max_iterations = 200;
  r.min_iterations = 50;
  r.rng_seed = seed;
  const ImageSize sz{1920, 1080};
  r.image_sizes = {sz, sz, sz};
  return r;
}

std::optional<double> F1(FocalCase c, const SynthScene& s) {
  if (CaseHasKnownF1(c)) return s.truth.f1;
  return std::nullopt;
}

double ModelError(FocalCase c, const ThreeViewModel& m, const SynthScene& s) {
  return CaseError(c, m.f1, m.f2, m.f3, s.truth);
}

TEST(Ransac, NoiselessRecoversFocal) {
  for (FocalCase c : {FocalCase::kI, FocalCase::kII, FocalCase::kIII, FocalCase::kIV}) {
    // A single plane leaves the multiple solutions of Cases III/IV
    // indistinguishable by epipolar scoring.
    const double planar = c == FocalCase::kIII || c == FocalCase::kIV ? 0.5 : 1.0;
    int good = 0;
    for (int i = 0; i < 10; ++i) {
      const auto s = Scene(c, i, 0.0, 0.75, planar);
      try {
        const auto r = Estimate(s.triplets, c, F1(c, s), Config(i));
        good += ModelError(c, r.model, s) < 1e-6;
      } catch (const Error&) {
      }
    }
    EXPECT_GE(good, 9) << FocalCaseName(c);
  }
}

TEST(Ransac, DeterministicAcrossThreadCounts) {
  const auto s = Scene(FocalCase::kI, 3, 1.0);
  RansacConfig cfg = Config(42);
  const auto a = Estimate(s.triplets, FocalCase::kI, std::nullopt, cfg);
  for (int threads : {2, 4}) {
    cfg.num_threads = threads;
    const auto b = Estimate(s.triplets, FocalCase::kI, std::nullopt, cfg);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.model.f1, b.model.f1);
    EXPECT_EQ(a.model.score, b.model.score);
    EXPECT_EQ(a.model.inlier_mask, b.model.inlier_mask);
  }
  cfg.batch_size = 5;
  const auto d = Estimate(s.triplets, FocalCase::kI, std::nullopt, cfg);
  EXPECT_EQ(a.model.f1, d.model.f1);
}

TEST(Ransac, MoreIterationsNeverWorse) {
  const auto s = Scene(FocalCase::kII, 4, 1.0, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (int k : {1, 5, 16, 17, 40, 100}) {
    RansacConfig cfg = Config(5);
    cfg.max_iterations = cfg.min_iterations = k;
    try {
      const auto r = Estimate(s.triplets, FocalCase::kII, s.truth.f1, cfg);
      EXPECT_EQ(r.iterations, k);
      EXPECT_LE(r.model.score, prev);
      prev = r.model.score;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNoModelFound);
      EXPECT_TRUE(std::isinf(prev));
    }
  }
}

TEST(Ransac, IterationBounds) {
  const auto s = Scene(FocalCase::kI, 5, 0.5, 0.9);
  RansacConfig cfg = Config(6);
  cfg.min_iterations = 30;
  cfg.max_iterations = 500;
  const auto r = Estimate(s.triplets, FocalCase::kI, std::nullopt, cfg);
  EXPECT_GE(r.iterations, 30);
  EXPECT_LE(r.iterations, 500);
  // With 90% inliers the adaptive bound stops well before the maximum.
  EXPECT_LT(r.iterations, 500);
}

TEST(Ransac, InlierMaskMatchesScore) {
  const auto s = Scene(FocalCase::kIV, 6, 1.0);
  const RansacConfig cfg = Config(7);
  const auto r = Estimate(s.triplets, FocalCase::kIV, s.truth.f1, cfg);
  ThreeViewModel m = r.model;
  const double score = ScoreModel(m, s.triplets, cfg.sampson_threshold_px);
  EXPECT_NEAR(score, r.model.score, 1e-9 * std::max(1.0, score));
  EXPECT_EQ(m.inlier_mask, r.model.inlier_mask);
  int count = 0;
  for (bool v : m.inlier_mask) count += v;
  EXPECT_EQ(count, r.inlier_count);
  const auto F = PairwiseFundamentals(m);
  const double th2 = cfg.sampson_threshold_px * cfg.sampson_threshold_px;
  for (size_t i = 0; i < s.triplets.size(); ++i) {
    const auto e = TripletSampson(F, s.triplets[i]);
    EXPECT_EQ(bool(m.inlier_mask[i]), e[0] < th2 && e[1] < th2 && e[2] < th2);
  }
}

TEST(Ransac, FovFilterExamples) {
  const std::array<double, 3> ext = {1920, 1920, 1920};
  const double f45 = FocalFromFov(1920, 45), f80 = FocalFromFov(1920, 80);
  const std::vector<FocalSolution> sols = {{FocalCase::kI, f45, f45, f45},
                                           {FocalCase::kI, f80, f80, f80}};
  const auto kept = FovFilter(sols, ext, std::make_pair(35.5, 61.5));
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].f1, f45);
  EXPECT_EQ(FovFilter(sols, ext, std::nullopt).size(), 2u);
  // Every focal of a solution must pass.
  const std::vector<FocalSolution> mixed = {{FocalCase::kIV, f45, f45, f80}};
  EXPECT_TRUE(FovFilter(mixed, ext, std::make_pair(35.5, 61.5)).empty());
}

TEST(Ransac, FovFilterShrinksCaseThreeCandidates) {
  const auto s = Scene(FocalCase::kIII, 8, 1.0, 0.75, 0.5);
  RansacConfig wide = Config(9), narrow = Config(9);
  wide.max_iterations = wide.min_iterations = narrow.max_iterations = narrow.min_iterations = 100;
  // A window around the true fields of view.
  const double lo = std::min(FovFromFocal(1920, s.truth.f1), FovFromFocal(1920, s.truth.f2));
  const double hi = std::max(FovFromFocal(1920, s.truth.f1), FovFromFocal(1920, s.truth.f2));
  narrow.fov_filter = std::make_pair(lo - 5.0, hi + 5.0);
  const auto a = Estimate(s.triplets, FocalCase::kIII, std::nullopt, wide);
  try {
    const auto b = Estimate(s.triplets, FocalCase::kIII, std::nullopt, narrow);
    EXPECT_LT(b.hypotheses, a.hypotheses);
    for (double f : {b.model.f1, b.model.f2, b.model.f3}) {
      const double fov = FovFromFocal(1920, f);
      // Local optimization may move the focal slightly outside the range.
      EXPECT_GT(fov, lo - 10.0);
      EXPECT_LT(fov, hi + 10.0);
    }
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoModelFound);
  }
}

TEST(Ransac, Errors) {
  const auto s = Scene(FocalCase::kII, 9);
  const std::vector<PointTriplet> three(s.triplets.begin(), s.triplets.begin() + 3);
  try {
    Estimate(three, FocalCase::kI, std::nullopt, Config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
  try {
    Estimate(s.triplets, FocalCase::kII, std::nullopt, Config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  // Identical views: every sample is pure rotation.
  std::vector<PointTriplet> still;
  for (const auto& t : s.triplets) still.push_back({t.x1, t.x1, t.x1});
  RansacConfig cfg = Config();
  cfg.max_iterations = cfg.min_iterations = 20;
  try {
    Estimate(still, FocalCase::kI, std::nullopt, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoModelFound);
  }
}

TEST(Ransac, ConfigValidation) {
  RansacConfig c;
  EXPECT_NO_THROW(c.Validate());
  auto bad = [](auto mutate) {
    RansacConfig r;
    mutate(r);
    EXPECT_THROW(r.Validate(), Error);
  };
  bad([](RansacConfig& r) { r.max_iterations = 0; });
  bad([](RansacConfig& r) { r.min_iterations = 2000; });
  bad([](RansacConfig& r) { r.confidence = 1.0; });
  bad([](RansacConfig& r) { r.sampson_threshold_px = 0; });
  bad([](RansacConfig& r) { r.fov_filter = std::make_pair(60.0, 50.0); });
  bad([](RansacConfig& r) { r.num_threads = 0; });
  bad([](RansacConfig& r) { r.batch_size = 0; });
}

ThreeViewModel TrueModel(FocalCase c, const SynthScene& s) {
  ThreeViewModel m;
  m.focal_case = c;
  m.f1 = s.truth.f1;
  m.f2 = s.truth.f2;
  m.f3 = s.truth.f3;
  const double k = s.truth.pose2.t.norm();
  m.pose2 = {s.truth.pose2.R, s.truth.pose2.t / k};
  m.pose3 = {s.truth.pose3.R, s.truth.pose3.t / k};
  return m;
}

// Analytic Jacobian against central differences through LmApply.
TEST(LocalOptimization, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(100);
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const FocalCase c = static_cast<FocalCase>(trial % 4);
    const auto s = Scene(c, 100 + trial, 1.0, 1.0, 0.5);
    ThreeViewModel m = TrueModel(c, s);
    m.f1 *= 1.01;
    m.f2 *= 0.98;
    m.f3 *= 1.02;
    m.pose2.R = testing::SmallRotation(rng, 0.01) * m.pose2.R;
    const std::vector<PointTriplet> pts(s.triplets.begin(), s.triplets.begin() + 30);
    const Eigen::MatrixXd J = LmJacobian(m, pts);
    const int p = NumLmParameters(c);
    ASSERT_EQ(J.cols(), p);
    ASSERT_EQ(J.rows(), 3 * 30);
    Eigen::MatrixXd Jn(J.rows(), p);
    for (int k = 0; k < p; ++k) {
      const double h = 1e-6;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
      d(k) = h;
      const Eigen::VectorXd rp = LmResiduals(LmApply(m, d), pts);
      d(k) = -h;
      const Eigen::VectorXd rm = LmResiduals(LmApply(m, d), pts);
      Jn.col(k) = (rp - rm) / (2 * h);
    }
    worst = std::max(worst, (J - Jn).norm() / Jn.norm());
  }
  EXPECT_LT(worst, 1e-5);
  EXPECT_EQ(NumLmParameters(FocalCase::kI), 12);
  EXPECT_EQ(NumLmParameters(FocalCase::kII), 12);
  EXPECT_EQ(NumLmParameters(FocalCase::kIII), 13);
  EXPECT_EQ(NumLmParameters(FocalCase::kIV), 13);
}

// Starting 1 degree and 2% away from the truth on noiseless data, the
// refinement returns to it.
TEST(LocalOptimization, ConvergesFromNearbyStart) {
  std::mt19937_64 rng(101);
  for (FocalCase c : {FocalCase::kI, FocalCase::kII, FocalCase::kIII, FocalCase::kIV}) {
    int good = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = Scene(c, 200 + trial, 0.0, 1.0, 0.5);
      ThreeViewModel m = TrueModel(c, s);
      if (!CaseHasKnownF1(c)) m.f1 *= 1.02;
      m.f2 *= 1.02;
      m.f3 *= c == FocalCase::kIV ? 0.98 : 1.02;
      if (c == FocalCase::kI) m.f2 = m.f3 = m.f1;
      if (c == FocalCase::kIII) m.f3 = m.f2;
      const double deg = M_PI / 180;
      m.pose2.R = AngleAxisToRotation(testing::RandomUnit(rng) * deg) * m.pose2.R;
      m.pose3.R = AngleAxisToRotation(testing::RandomUnit(rng) * deg) * m.pose3.R;
      RansacConfig cfg = Config();
      cfg.lo_max_lm_iters = 50;
      cfg.sampson_threshold_px = 50.0;
      ScoreModel(m, s.triplets, cfg.sampson_threshold_px);
      const ThreeViewModel r = LocalOptimize(m, s.triplets, cfg);
      good += CaseError(c, r.f1, r.f2, r.f3, s.truth) < 1e-6;
    }
    EXPECT_GE(good, 9) << FocalCaseName(c);
  }
}

TEST(LocalOptimization, OptimalModelUnchanged) {
  const auto s = Scene(FocalCase::kIV, 300, 0.0, 1.0, 0.5);
  ThreeViewModel m = TrueModel(FocalCase::kIV, s);
  const RansacConfig cfg = Config();
  ScoreModel(m, s.triplets, cfg.sampson_threshold_px);
  const ThreeViewModel r = LocalOptimize(m, s.triplets, cfg);
  EXPECT_EQ(r.f2, m.f2);
  EXPECT_EQ(r.f3, m.f3);
  EXPECT_EQ(r.pose3.t, m.pose3.t);
  EXPECT_EQ(r.score, m.score);
}

}  // namespace
}  // namespace hfocal
