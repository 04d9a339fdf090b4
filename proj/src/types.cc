#include "hfocal/types.h"

#include <Eigen/Geometry>

#include <cmath>

namespace hfocal {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kDegenerateMotion: return "DegenerateMotion";
    case ErrorCode::kNoRealRoot: return "NoRealRoot";
    case ErrorCode::kIllConditioned: return "IllConditioned";
    case ErrorCode::kSingularC0: return "SingularC0";
    case ErrorCode::kUnexpectedRank: return "UnexpectedRank";
    case ErrorCode::kRankDeficiencyMismatch: return "RankDeficiencyMismatch";
    case ErrorCode::kDecompositionFailed: return "DecompositionFailed";
    case ErrorCode::kParallelRays: return "ParallelRays";
    case ErrorCode::kCollinearPoints: return "CollinearPoints";
    case ErrorCode::kNoSolution: return "NoSolution";
    case ErrorCode::kZeroBaseline: return "ZeroBaseline";
    case ErrorCode::kRejectSample: return "RejectSample";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNoModelFound: return "NoModelFound";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSkippedRecord: return "SkippedRecord";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

CameraIntrinsics::CameraIntrinsics(double f) : focal(f) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorCode::kInvalidArgument, "focal length must be positive");
  }
}

Mat3 CameraIntrinsics::K() const {
  return Vec3(focal, focal, 1.0).asDiagonal();
}

Mat3 CameraIntrinsics::Kinv() const {
  return Vec3(1.0 / focal, 1.0 / focal, 1.0).asDiagonal();
}

Homography2D::Homography2D(const Mat3& m) {
  const double norm = m.norm();
  if (!(norm > 0.0) || !m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "homography must be finite and nonzero");
  }
  m_ = m / norm;
  Eigen::Index r, c;
  m_.cwiseAbs().maxCoeff(&r, &c);
  if (m_(r, c) < 0.0) m_ = -m_;
}

Vec2 Homography2D::Map(const Vec2& x) const {
  const Vec3 y = m_ * x.homogeneous();
  return y.hnormalized();
}

const char* FocalCaseName(FocalCase c) {
  switch (c) {
    case FocalCase::kI: return "fff";
    case FocalCase::kII: return "ff";
    case FocalCase::kIII: return "frr";
    case FocalCase::kIV: return "fr";
  }
  return "?";
}

FocalCase ParseFocalCase(const std::string& s) {
  if (s == "fff" || s == "I" || s == "1") return FocalCase::kI;
  if (s == "ff" || s == "II" || s == "2") return FocalCase::kII;
  if (s == "frr" || s == "III" || s == "3") return FocalCase::kIII;
  if (s == "fr" || s == "IV" || s == "4") return FocalCase::kIV;
  throw Error(ErrorCode::kInvalidArgument, "unknown case '" + s + "'");
}

bool CaseHasKnownF1(FocalCase c) {
  return c == FocalCase::kII || c == FocalCase::kIV;
}

}  // namespace hfocal
