#pragma once

#include "hfocal/types.h"

#include <utility>
#include <vector>

namespace hfocal {

// Cross-product matrix: Skew(v) * w == v.cross(w).
Mat3 Skew(const Vec3& v);

// H = R + (t / d) n^T; maps on-plane points from the reference frame into
// the target camera frame.
Mat3 EuclideanHomography(const Pose& pose, const Plane& plane);

// G ~ Kj H K1^{-1}, normalized.
Homography2D ImageHomography(const CameraIntrinsics& K1,
                             const CameraIntrinsics& Kj, const Mat3& H);

// Pinhole projection in centered pixel coordinates.
// Throws kNonPositiveDepth when the point is not in front of the camera.
Vec2 Project(const CameraIntrinsics& K, const Pose& pose, const Vec3& X);

// Normalized DLT with isotropic conditioning on both sides. Requires at least
// four correspondences; throws kDegenerateConfiguration on a rank-deficient
// design matrix.
Homography2D DltHomography(const std::vector<Vec2>& src,
                           const std::vector<Vec2>& dst);

// Random rotation uniformly distributed on SO(3) given three U(0,1) draws.
Mat3 RotationFromUniform(double u1, double u2, double u3);

// Rodrigues map.
Mat3 AngleAxisToRotation(const Vec3& w);
Vec3 RotationToAngleAxis(const Mat3& R);

// Angle between two rotations in radians.
double RotationAngle(const Mat3& Ra, const Mat3& Rb);

}  // namespace hfocal
