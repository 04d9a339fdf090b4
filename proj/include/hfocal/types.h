#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfocal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
  kInvalidArgument,
  kNonPositiveDepth,
  kDegenerateConfiguration,
  kDegenerateMotion,
  kNoRealRoot,
  kIllConditioned,
  kSingularC0,
  kUnexpectedRank,
  kRankDeficiencyMismatch,
  kDecompositionFailed,
  kParallelRays,
  kCollinearPoints,
  kNoSolution,
  kZeroBaseline,
  kRejectSample,
  kInsufficientData,
  kNoModelFound,
  kGenerationFailed,
  kParseError,
  kSkippedRecord,
  kIoError,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Single focal length in pixels; K = diag(f, f, 1) with the principal point
// already subtracted from all image coordinates.
struct CameraIntrinsics {
  double focal = 1.0;

  CameraIntrinsics() = default;
  explicit CameraIntrinsics(double f);

  Mat3 K() const;
  Mat3 Kinv() const;
};

struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 Apply(const Vec3& X) const { return R * X + t; }
  Vec3 Center() const { return -R.transpose() * t; }
};

// n^T X = d with unit n and d > 0.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double distance = 1.0;
};

struct PointTriplet {
  Vec2 x1, x2, x3;
};

// 3x3 image homography stored with unit Frobenius norm and its
// largest-magnitude entry positive.
class Homography2D {
 public:
  Homography2D() : m_(Mat3::Identity() / std::sqrt(3.0)) {}
  explicit Homography2D(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Vec2 Map(const Vec2& x) const;

 private:
  Mat3 m_;
};

// The four camera configurations handled by the solvers.
enum class FocalCase {
  kI,    // f f f
  kII,   // known f1, f f
  kIII,  // f rho rho
  kIV,   // known f1, f rho
};

const char* FocalCaseName(FocalCase c);
FocalCase ParseFocalCase(const std::string& s);
bool CaseHasKnownF1(FocalCase c);

}  // namespace hfocal
