#pragma once

#include "hfocal/solvers.h"
#include "hfocal/types.h"

#include <array>
#include <vector>

namespace hfocal {

struct HomographyPose {
  Mat3 R;
  Vec3 t_over_d;
  Vec3 n;
};

struct DecomposedHomography {
  std::vector<HomographyPose> candidates;
  // Set for (near) pure rotation: t_over_d is zero and n is arbitrary.
  bool normal_unreliable = false;
};

// H is the calibrated homography K2^-1 G K1 (any scale). The support pairs
// are centered pixel coordinates in views 1 and 2. Candidates whose plane is
// not in front of both cameras for the support are removed.
DecomposedHomography DecomposeHomography(const Mat3& H, const std::vector<Vec2>& x1,
                                         const std::vector<Vec2>& x2,
                                         const CameraIntrinsics& K1,
                                         const CameraIntrinsics& K2);

// All four analytic solutions of H = R + (t/d) n^T with sigma_2(H) = 1.
DecomposedHomography DecomposeHomographyAll(const Mat3& H);

// Midpoint of the common perpendicular of the two viewing rays, in the view-1
// frame. Throws kParallelRays.
Vec3 Triangulate(const CameraIntrinsics& K1, const CameraIntrinsics& K2,
                 const Pose& pose2, const Vec2& x1, const Vec2& x2);

// Poses X_cam = R X + t consistent with three world points and their
// observations. Throws kCollinearPoints and kNoSolution.
std::vector<Pose> P3P(const CameraIntrinsics& K, const std::array<Vec3, 3>& X,
                      const std::array<Vec2, 3>& x);

// F = Kj^-T [t]x R Ki^-1 for the relative pose i -> j, unit Frobenius norm.
// Throws kZeroBaseline.
Mat3 FundamentalFromPosedPair(const CameraIntrinsics& Ki, const CameraIntrinsics& Kj,
                              const Pose& relative);

// Squared Sampson distance in px^2.
double SampsonError(const Mat3& F, const Vec2& xi, const Vec2& xj);

struct ThreeViewModel {
  FocalCase focal_case = FocalCase::kI;
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  // Relative to view 1; ||pose2.t|| = 1.
  Pose pose2, pose3;
  double score = 0.0;
  std::vector<bool> inlier_mask;
};

// F12, F13, F23 of a model.
std::array<Mat3, 3> PairwiseFundamentals(const ThreeViewModel& model);

// Per-triplet Sampson errors for the pairs (1,2), (1,3), (2,3).
std::array<double, 3> TripletSampson(const std::array<Mat3, 3>& F, const PointTriplet& t);

// Candidate models from one focal solution and a 4-triplet sample. Throws
// kRejectSample when nothing usable results.
std::vector<ThreeViewModel> BuildModel(const Homography2D& G2, const Homography2D& G3,
                                       const FocalSolution& sol,
                                       const std::array<PointTriplet, 4>& sample);

}  // namespace hfocal
