#include "hfocal/geometry.h"

#include <Eigen/Dense>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace hfocal {

Mat3 Skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Mat3 EuclideanHomography(const Pose& pose, const Plane& plane) {
  return pose.R + (pose.t / plane.distance) * plane.normal.transpose();
}

Homography2D ImageHomography(const CameraIntrinsics& K1,
                             const CameraIntrinsics& Kj, const Mat3& H) {
  return Homography2D(Kj.K() * H * K1.Kinv());
}

Vec2 Project(const CameraIntrinsics& K, const Pose& pose, const Vec3& X) {
  const Vec3 Xc = pose.Apply(X);
  if (!(Xc.z() > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDepth, "point behind camera");
  }
  return K.focal * Xc.hnormalized();
}

namespace {

// Similarity T with T * [x;1] having zero centroid and mean norm sqrt(2).
Mat3 IsotropicConditioner(const std::vector<Vec2>& pts) {
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const Vec2& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 T;
  T << s, 0.0, -s * centroid.x(),
       0.0, s, -s * centroid.y(),
       0.0, 0.0, 1.0;
  return T;
}

}  // namespace

Homography2D DltHomography(const std::vector<Vec2>& src,
                           const std::vector<Vec2>& dst) {
  if (src.size() != dst.size() || src.size() < 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "DLT needs at least 4 correspondences");
  }
  const Mat3 T1 = IsotropicConditioner(src);
  const Mat3 T2 = IsotropicConditioner(dst);
  const int n = static_cast<int>(src.size());
  Eigen::Matrix<double, Eigen::Dynamic, 9> A(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Vec3 x = T1 * src[i].homogeneous();
    const Vec3 y = T2 * dst[i].homogeneous();
    // [y]_x G x = 0, first two rows.
    A.row(2 * i) << 0.0, 0.0, 0.0, -y.z() * x.transpose(), y.y() * x.transpose();
    A.row(2 * i + 1) << y.z() * x.transpose(), 0.0, 0.0, 0.0, -y.x() * x.transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(
      A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-10 * sv(0))) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "DLT design matrix is rank deficient");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3 Gn;
  Gn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography2D(T2.inverse() * Gn * T1);
}

Mat3 RotationFromUniform(double u1, double u2, double u3) {
  // Shoemake's uniform quaternion.
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double t1 = 2.0 * M_PI * u2, t2 = 2.0 * M_PI * u3;
  const Eigen::Quaterniond q(b * std::cos(t2), a * std::sin(t1),
                             a * std::cos(t1), b * std::sin(t2));
  return q.normalized().toRotationMatrix();
}

Mat3 AngleAxisToRotation(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) return Mat3::Identity() + Skew(w);
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

Vec3 RotationToAngleAxis(const Mat3& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

double RotationAngle(const Mat3& Ra, const Mat3& Rb) {
  return Eigen::AngleAxisd(Ra.transpose() * Rb).angle();
}

}  // namespace hfocal
