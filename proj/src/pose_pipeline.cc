#include "hfocal/pose_pipeline.h"

#include "hfocal/geometry.h"
#include "hfocal/poly_roots.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace hfocal {

namespace {

Vec3 Ray(const CameraIntrinsics& K, const Vec2& x) {
  return Vec3(x(0) / K.focal, x(1) / K.focal, 1.0);
}

Mat3 NearestRotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

}  // namespace

DecomposedHomography DecomposeHomographyAll(const Mat3& H_in) {
  if (!H_in.allFinite()) throw Error(ErrorCode::kDecompositionFailed, "non-finite H");
  const Vec3 sv = Eigen::JacobiSVD<Mat3>(H_in).singularValues();
  if (!(sv(1) > 0)) throw Error(ErrorCode::kDecompositionFailed, "rank-deficient H");
  const Mat3 H = H_in / sv(1);
  DecomposedHomography out;

  Eigen::SelfAdjointEigenSolver<Mat3> es(H.transpose() * H);
  const double s1 = es.eigenvalues()(2), s3 = es.eigenvalues()(0);
  if (s1 - s3 < 1e-9) {
    out.normal_unreliable = true;
    out.candidates.push_back({NearestRotation(H), Vec3::Zero(), Vec3::UnitZ()});
    return out;
  }
  Mat3 V;
  V.col(0) = es.eigenvectors().col(2);
  V.col(1) = es.eigenvectors().col(1);
  V.col(2) = es.eigenvectors().col(0);
  if (V.determinant() < 0) V = -V;
  const Vec3 v1 = V.col(0), v2 = V.col(1), v3 = V.col(2);
  const double a = std::sqrt(std::max(1.0 - s3, 0.0));
  const double b = std::sqrt(std::max(s1 - 1.0, 0.0));
  const double c = std::sqrt(s1 - s3);
  const Vec3 u1 = (a * v1 + b * v3) / c;
  const Vec3 u2 = (a * v1 - b * v3) / c;
  for (const Vec3& u : {u1, u2}) {
    Mat3 U, W;
    U << v2, u, v2.cross(u);
    const Vec3 Hv2 = H * v2, Hu = H * u;
    W << Hv2, Hu, Hv2.cross(Hu);
    const Mat3 R = W * U.transpose();
    const Vec3 n = v2.cross(u);
    const Vec3 t = (H - R) * n;
    out.candidates.push_back({R, t, n});
    out.candidates.push_back({R, -t, -n});
  }
  return out;
}

DecomposedHomography DecomposeHomography(const Mat3& H_in, const std::vector<Vec2>& x1,
                                         const std::vector<Vec2>& x2,
                                         const CameraIntrinsics& K1,
                                         const CameraIntrinsics& K2) {
  if (x1.empty() || x1.size() != x2.size()) {
    throw Error(ErrorCode::kInvalidArgument, "support correspondences required");
  }
  // Fix the sign so that transferred rays have positive depth.
  int positive = 0;
  for (size_t i = 0; i < x1.size(); ++i) {
    if (Ray(K2, x2[i]).dot(H_in * Ray(K1, x1[i])) > 0) ++positive;
  }
  const Mat3 H = 2 * positive >= static_cast<int>(x1.size()) ? H_in : Mat3(-H_in);
  DecomposedHomography all = DecomposeHomographyAll(H);
  if (all.normal_unreliable) return all;
  DecomposedHomography out;
  for (const auto& c : all.candidates) {
    int front = 0;
    for (const auto& p : x1) {
      if (c.n.dot(Ray(K1, p)) > 0) ++front;
    }
    if (2 * front > static_cast<int>(x1.size())) out.candidates.push_back(c);
  }
  return out;
}

Vec3 Triangulate(const CameraIntrinsics& K1, const CameraIntrinsics& K2,
                 const Pose& pose2, const Vec2& x1, const Vec2& x2) {
  const Vec3 d1 = Ray(K1, x1);
  const Vec3 d2 = pose2.R.transpose() * Ray(K2, x2);
  const Vec3 c2 = pose2.Center();
  if (d1.cross(d2).norm() <= 1e-6 * d1.norm() * d2.norm()) {
    throw Error(ErrorCode::kParallelRays, "viewing rays are parallel");
  }
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2);
  const double p = d1.dot(c2), q = d2.dot(c2);
  const double det = b * b - a * c;
  const double s = (b * q - c * p) / det;
  const double u = (a * q - b * p) / det;
  return 0.5 * (s * d1 + c2 + u * d2);
}

namespace {

// Rigid transform with X_cam = R X + t from three point pairs.
Pose Align(const std::array<Vec3, 3>& world, const std::array<Vec3, 3>& cam) {
  Vec3 pw = Vec3::Zero(), pc = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    pw += world[i] / 3.0;
    pc += cam[i] / 3.0;
  }
  Mat3 S = Mat3::Zero();
  for (int i = 0; i < 3; ++i) S += (world[i] - pw) * (cam[i] - pc).transpose();
  Eigen::JacobiSVD<Mat3> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  Pose pose;
  pose.R = svd.matrixV() * D * svd.matrixU().transpose();
  pose.t = pc - pose.R * pw;
  return pose;
}

}  // namespace

std::vector<Pose> P3P(const CameraIntrinsics& K, const std::array<Vec3, 3>& X,
                      const std::array<Vec2, 3>& x) {
  const Vec3 e12 = X[1] - X[0], e13 = X[2] - X[0];
  if (e12.cross(e13).norm() <= 1e-10 * e12.norm() * e13.norm()) {
    throw Error(ErrorCode::kCollinearPoints, "world points are collinear");
  }
  std::array<Vec3, 3> j;
  for (int i = 0; i < 3; ++i) j[i] = Ray(K, x[i]).normalized();
  const double a2 = (X[1] - X[2]).squaredNorm();
  const double b2 = (X[0] - X[2]).squaredNorm();
  const double c2 = (X[0] - X[1]).squaredNorm();
  const double ca = j[1].dot(j[2]), cb = j[0].dot(j[2]), cg = j[0].dot(j[1]);

  // Grunert's quartic in v = s3 / s1.
  const double amc = (a2 - c2) / b2, apc = (a2 + c2) / b2;
  const double A4 = (amc - 1) * (amc - 1) - 4 * c2 / b2 * ca * ca;
  const double A3 = 4 * (amc * (1 - amc) * cb - (1 - apc) * ca * cg + 2 * c2 / b2 * ca * ca * cb);
  const double A2 = 2 * (amc * amc - 1 + 2 * amc * amc * cb * cb + 2 * (b2 - c2) / b2 * ca * ca -
                         4 * apc * ca * cb * cg + 2 * (b2 - a2) / b2 * cg * cg);
  const double A1 = 4 * (-amc * (1 + amc) * cb + 2 * a2 / b2 * cg * cg * cb - (1 - apc) * ca * cg);
  const double A0 = (1 + amc) * (1 + amc) - 4 * a2 / b2 * cg * cg;
  const UniPoly quartic({A0, A1, A2, A3, A4});

  std::vector<Pose> out;
  for (const auto& root : CompanionRoots(quartic)) {
    if (std::abs(root.imag()) > 1e-6 * (1.0 + std::abs(root.real()))) continue;
    double v = root.real();
    for (int it = 0; it < 3; ++it) {
      const auto [f, df] = quartic.EvalWithDerivative(v);
      if (df == 0.0) break;
      v -= f / df;
    }
    const double den = 2 * (cg - v * ca);
    if (std::abs(den) < 1e-12) continue;
    const double u = ((-1 + amc) * v * v - 2 * amc * cb * v + 1 + amc) / den;
    const double q = 1 + u * u - 2 * u * cg;
    if (!(q > 0)) continue;
    Eigen::Vector3d s(std::sqrt(c2 / q), 0, 0);
    s(1) = u * s(0);
    s(2) = v * s(0);
    if (!(s.minCoeff() > 0)) continue;
    // Newton on the three law-of-cosines equations.
    const double d01 = c2, d02 = b2, d12 = a2;
    for (int it = 0; it < 5; ++it) {
      Eigen::Vector3d r;
      r << s(0) * s(0) + s(1) * s(1) - 2 * s(0) * s(1) * cg - d01,
          s(0) * s(0) + s(2) * s(2) - 2 * s(0) * s(2) * cb - d02,
          s(1) * s(1) + s(2) * s(2) - 2 * s(1) * s(2) * ca - d12;
      Mat3 J;
      J << 2 * s(0) - 2 * s(1) * cg, 2 * s(1) - 2 * s(0) * cg, 0,
          2 * s(0) - 2 * s(2) * cb, 0, 2 * s(2) - 2 * s(0) * cb,
          0, 2 * s(1) - 2 * s(2) * ca, 2 * s(2) - 2 * s(1) * ca;
      const Eigen::Vector3d step = J.fullPivLu().solve(r);
      if (!step.allFinite()) break;
      s -= step;
      if (step.norm() <= 1e-16 * s.norm()) break;
    }
    if (!(s.minCoeff() > 0)) continue;
    std::array<Vec3, 3> cam;
    for (int i = 0; i < 3; ++i) cam[i] = s(i) * j[i];
    Pose pose = Align(X, cam);
    bool dup = false;
    for (const auto& p : out) {
      if ((p.R - pose.R).norm() < 1e-9 && (p.t - pose.t).norm() < 1e-9 * (1 + p.t.norm())) {
        dup = true;
      }
    }
    if (!dup) out.push_back(pose);
  }
  if (out.empty()) throw Error(ErrorCode::kNoSolution, "no real P3P solution");
  return out;
}

Mat3 FundamentalFromPosedPair(const CameraIntrinsics& Ki, const CameraIntrinsics& Kj,
                              const Pose& relative) {
  if (!(relative.t.norm() > 1e-12)) throw Error(ErrorCode::kZeroBaseline, "zero baseline");
  const Mat3 F = Kj.Kinv().transpose() * Skew(relative.t) * relative.R * Ki.Kinv();
  return F / F.norm();
}

double SampsonError(const Mat3& F, const Vec2& xi, const Vec2& xj) {
  const Vec3 a = F * xi.homogeneous();
  const Vec3 b = F.transpose() * xj.homogeneous();
  const double e = xj.homogeneous().dot(a);
  const double den = a(0) * a(0) + a(1) * a(1) + b(0) * b(0) + b(1) * b(1);
  return e * e / std::max(den, 1e-18);
}

std::array<Mat3, 3> PairwiseFundamentals(const ThreeViewModel& m) {
  const CameraIntrinsics K1(m.f1), K2(m.f2), K3(m.f3);
  Pose p23;
  p23.R = m.pose3.R * m.pose2.R.transpose();
  p23.t = m.pose3.t - p23.R * m.pose2.t;
  return {FundamentalFromPosedPair(K1, K2, m.pose2), FundamentalFromPosedPair(K1, K3, m.pose3),
          FundamentalFromPosedPair(K2, K3, p23)};
}

std::array<double, 3> TripletSampson(const std::array<Mat3, 3>& F, const PointTriplet& t) {
  return {SampsonError(F[0], t.x1, t.x2), SampsonError(F[1], t.x1, t.x3),
          SampsonError(F[2], t.x2, t.x3)};
}

std::vector<ThreeViewModel> BuildModel(const Homography2D& G2, const Homography2D& G3,
                                       const FocalSolution& sol,
                                       const std::array<PointTriplet, 4>& sample) {
  (void)G3;
  std::vector<ThreeViewModel> models;
  try {
    const CameraIntrinsics K1(sol.f1), K2(sol.f2), K3(sol.f3);
    std::vector<Vec2> x1, x2;
    for (const auto& t : sample) {
      x1.push_back(t.x1);
      x2.push_back(t.x2);
    }
    const Mat3 H2 = K2.Kinv() * G2.matrix() * K1.K();
    const DecomposedHomography dec = DecomposeHomography(H2, x1, x2, K1, K2);
    if (dec.normal_unreliable) throw Error(ErrorCode::kRejectSample, "pure rotation");

    // Triangulate the triple spanning the largest area in view 1.
    int skip = 0;
    double best_area = -1.0;
    for (int s = 0; s < 4; ++s) {
      std::array<Vec2, 3> p;
      for (int i = 0, k = 0; i < 4; ++i) {
        if (i != s) p[k++] = sample[i].x1;
      }
      const Vec2 d1 = p[1] - p[0], d2 = p[2] - p[0];
      const double area = std::abs(d1(0) * d2(1) - d1(1) * d2(0));
      if (area > best_area) {
        best_area = area;
        skip = s;
      }
    }
    std::array<int, 3> idx;
    for (int i = 0, k = 0; i < 4; ++i) {
      if (i != skip) idx[k++] = i;
    }

    for (const auto& cand : dec.candidates) {
      const double tn = cand.t_over_d.norm();
      if (!(tn > 1e-12)) continue;
      Pose pose2{cand.R, cand.t_over_d / tn};
      std::array<Vec3, 3> X;
      std::array<Vec2, 3> obs;
      bool ok = true;
      for (int k = 0; k < 3; ++k) {
        const auto& t = sample[idx[k]];
        try {
          X[k] = Triangulate(K1, K2, pose2, t.x1, t.x2);
        } catch (const Error&) {
          ok = false;
          break;
        }
        if (X[k](2) <= 0 || pose2.Apply(X[k])(2) <= 0) {
          ok = false;
          break;
        }
        obs[k] = t.x3;
      }
      if (!ok) continue;
      std::vector<Pose> poses3;
      try {
        poses3 = P3P(K3, X, obs);
      } catch (const Error&) {
        continue;
      }
      for (const auto& pose3 : poses3) {
        ThreeViewModel m;
        m.focal_case = sol.focal_case;
        m.f1 = sol.f1;
        m.f2 = sol.f2;
        m.f3 = sol.f3;
        m.pose2 = pose2;
        m.pose3 = pose3;
        if (!(pose3.t.norm() > 1e-12)) continue;
        models.push_back(m);
      }
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kRejectSample, e.what());
  }
  if (models.empty()) throw Error(ErrorCode::kRejectSample, "no valid model");
  return models;
}

}  // namespace hfocal
