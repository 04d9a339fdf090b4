#include "hfocal/pose_pipeline.h"

#include "hfocal/geometry.h"
#include "test_util.h"

#include <Eigen/Dense>
#include <gtest/gtest.h>

namespace hfocal {
namespace {

// Point on the plane seen at pixel x in view 1.
Vec3 BackProject(const testing::Instance& in, const Vec2& x) {
  const Vec3 r = CameraIntrinsics(in.f1).Kinv() * x.homogeneous();
  return r * in.plane.distance / in.plane.normal.dot(r);
}

PointTriplet Observe(const testing::Instance& in, const Vec3& X) {
  return {Project(CameraIntrinsics(in.f1), Pose(), X),
          Project(CameraIntrinsics(in.f2), in.pose2, X),
          Project(CameraIntrinsics(in.f3), in.pose3, X)};
}

// Instance whose plane is visible in front of all three cameras near the
// image center.
testing::Instance VisibleInstance(FocalCase c, std::mt19937_64& rng,
                                  std::vector<PointTriplet>* pts, int n) {
  for (;;) {
    auto in = testing::RandomInstance(c, rng);
    pts->clear();
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const Vec2 x(testing::Uniform(rng, -400, 400), testing::Uniform(rng, -300, 300));
      const Vec3 X = BackProject(in, x);
      if (X.z() <= 0 || in.pose2.Apply(X).z() <= 0.1 || in.pose3.Apply(X).z() <= 0.1) {
        ok = false;
        break;
      }
      pts->push_back(Observe(in, X));
    }
    if (ok) return in;
  }
}

TEST(Decomposition, AllCandidatesContainTruth) {
  std::mt19937_64 rng(90);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = testing::RandomInstance(FocalCase::kI, rng);
    const Mat3 H = EuclideanHomography(in.pose2, in.plane);
    const auto dec = DecomposeHomographyAll(3.5 * H);
    ASSERT_EQ(dec.candidates.size(), 4u);
    EXPECT_FALSE(dec.normal_unreliable);
    double best = 1e300;
    for (const auto& c : dec.candidates) {
      EXPECT_LT((c.R * c.R.transpose() - Mat3::Identity()).norm(), 1e-9);
      EXPECT_NEAR(c.R.determinant(), 1.0, 1e-9);
      EXPECT_LT((c.R + c.t_over_d * c.n.transpose() - H).norm(), 1e-9);
      best = std::min(best, (c.R - in.pose2.R).norm() +
                                (c.t_over_d - in.pose2.t / in.plane.distance).norm() +
                                (c.n - in.plane.normal).norm());
    }
    EXPECT_LT(best, 1e-8);
  }
}

TEST(Decomposition, CheiralitySelectsTruth) {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PointTriplet> pts;
    const auto in = VisibleInstance(FocalCase::kIV, rng, &pts, 6);
    std::vector<Vec2> x1, x2;
    for (const auto& p : pts) {
      x1.push_back(p.x1);
      x2.push_back(p.x2);
    }
    const CameraIntrinsics K1(in.f1), K2(in.f2);
    const Mat3 H = K2.Kinv() * in.G2.matrix() * K1.K();
    const auto dec = DecomposeHomography(H, x1, x2, K1, K2);
    ASSERT_GE(dec.candidates.size(), 1u);
    ASSERT_LE(dec.candidates.size(), 2u);
    double best = 1e300;
    for (const auto& c : dec.candidates)
      best = std::min(best, (c.R - in.pose2.R).norm() + (c.n - in.plane.normal).norm());
    EXPECT_LT(best, 1e-7);
  }
}

TEST(Decomposition, PureRotation) {
  const Mat3 R = AngleAxisToRotation(Vec3(0.1, -0.3, 0.2));
  const auto dec = DecomposeHomographyAll(2.0 * R);
  EXPECT_TRUE(dec.normal_unreliable);
  ASSERT_EQ(dec.candidates.size(), 1u);
  EXPECT_LT((dec.candidates[0].R - R).norm(), 1e-12);
  EXPECT_EQ(dec.candidates[0].t_over_d.norm(), 0.0);
}

TEST(Triangulation, ExactAndParallel) {
  std::mt19937_64 rng(92);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PointTriplet> pts;
    const auto in = VisibleInstance(FocalCase::kIII, rng, &pts, 1);
    const Vec3 X = BackProject(in, pts[0].x1);
    const Vec3 Y =
        Triangulate(CameraIntrinsics(in.f1), CameraIntrinsics(in.f2), in.pose2, pts[0].x1, pts[0].x2);
    EXPECT_LT((X - Y).norm(), 1e-8 * X.norm());
  }
  Pose shift;
  shift.t = Vec3(1, 0, 0);
  EXPECT_THROW(Triangulate(CameraIntrinsics(1000), CameraIntrinsics(1000), shift, Vec2(0, 0),
                           Vec2(0, 0)),
               Error);
}

TEST(P3PTest, RecoversPose) {
  std::mt19937_64 rng(93);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PointTriplet> pts;
    const auto in = VisibleInstance(FocalCase::kIV, rng, &pts, 3);
    std::array<Vec3, 3> X;
    std::array<Vec2, 3> x;
    for (int k = 0; k < 3; ++k) {
      X[k] = BackProject(in, pts[k].x1);
      x[k] = pts[k].x3;
    }
    std::vector<Pose> poses;
    try {
      poses = P3P(CameraIntrinsics(in.f3), X, x);
    } catch (const Error& e) {
      ADD_FAILURE() << e.what();
      continue;
    }
    ASSERT_LE(poses.size(), 4u);
    double best = 1e300;
    for (const auto& p : poses)
      best = std::min(best, (p.R - in.pose3.R).norm() + (p.t - in.pose3.t).norm());
    EXPECT_LT(best, 1e-6);
  }
}

TEST(P3PTest, CollinearThrows) {
  const std::array<Vec3, 3> X = {Vec3(0, 0, 5), Vec3(1, 0, 5), Vec3(2, 0, 5)};
  const std::array<Vec2, 3> x = {Vec2(0, 0), Vec2(200, 0), Vec2(400, 0)};
  try {
    P3P(CameraIntrinsics(1000), X, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCollinearPoints);
  }
}

TEST(Fundamental, EpipolarAndSampson) {
  std::mt19937_64 rng(94);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PointTriplet> pts;
    const auto in = VisibleInstance(FocalCase::kIV, rng, &pts, 10);
    const Mat3 F = FundamentalFromPosedPair(CameraIntrinsics(in.f1), CameraIntrinsics(in.f2),
                                            in.pose2);
    EXPECT_NEAR(F.norm(), 1.0, 1e-12);
    EXPECT_LT(std::abs(F.determinant()), 1e-12);
    for (const auto& p : pts) {
      EXPECT_LT(SampsonError(F, p.x1, p.x2), 1e-12);
      // A one-pixel shift along the epipolar normal: the algebraic error is
      // |l| and the gradient splits between both images.
      const Vec3 l = F * p.x1.homogeneous();
      const Vec2 nrm = l.head<2>().normalized();
      const Vec2 moved = p.x2 + nrm;
      const Vec3 l2 = F.transpose() * moved.homogeneous();
      const double a = l.head<2>().squaredNorm(), b = l2.head<2>().squaredNorm();
      const double e = SampsonError(F, p.x1, moved);
      EXPECT_NEAR(e, a / (a + b), 1e-9);
      EXPECT_LE(e, 1.0 + 1e-12);
      EXPECT_NEAR(SampsonError(F, p.x1, p.x2 + 2 * nrm), 4 * e, 0.05 * e);
    }
  }
  EXPECT_THROW(FundamentalFromPosedPair(CameraIntrinsics(1), CameraIntrinsics(1), Pose()), Error);
}

TEST(BuildModelTest, ExactDataYieldsTruth) {
  std::mt19937_64 rng(95);
  for (FocalCase c : {FocalCase::kI, FocalCase::kII, FocalCase::kIII, FocalCase::kIV}) {
    int good = 0;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<PointTriplet> pts;
      const auto in = VisibleInstance(c, rng, &pts, 4);
      const std::array<PointTriplet, 4> sample = {pts[0], pts[1], pts[2], pts[3]};
      const FocalSolution sol{c, in.f1, in.f2, in.f3};
      std::vector<ThreeViewModel> models;
      try {
        models = BuildModel(in.G2, in.G3, sol, sample);
      } catch (const Error&) {
        continue;
      }
      const double s = in.pose2.t.norm();
      for (auto m : models) {
        if ((m.pose2.R - in.pose2.R).norm() < 1e-6 &&
            (m.pose2.t - in.pose2.t / s).norm() < 1e-6 &&
            (m.pose3.R - in.pose3.R).norm() < 1e-6 &&
            (m.pose3.t - in.pose3.t / s).norm() < 1e-6) {
          ++good;
          EXPECT_NEAR(m.pose2.t.norm(), 1.0, 1e-12);
          const auto F = PairwiseFundamentals(m);
          for (const auto& p : pts) {
            for (double e : TripletSampson(F, p)) EXPECT_LT(e, 1e-10);
          }
          break;
        }
      }
    }
    EXPECT_GE(good, 48) << FocalCaseName(c);
  }
}

}  // namespace
}  // namespace hfocal
