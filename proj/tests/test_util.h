#pragma once

#include "hfocal/geometry.h"
#include "hfocal/poly_roots.h"
#include "hfocal/types.h"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

namespace hfocal::testing {

struct Instance {
  double f1 = 0, f2 = 0, f3 = 0;
  Pose pose2, pose3;
  Plane plane;
  Homography2D G2, G3;
};

inline double Uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Vec3 RandomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  return Vec3(N(rng), N(rng), N(rng)).normalized();
}

inline Mat3 SmallRotation(std::mt19937_64& rng, double max_rad) {
  return AngleAxisToRotation(RandomUnit(rng) * Uniform(rng, 0.0, max_rad));
}

inline std::array<double, 3> CaseFocals(FocalCase c, std::mt19937_64& rng) {
  const double a = Uniform(rng, 300, 3000), b = Uniform(rng, 300, 3000),
               d = Uniform(rng, 300, 3000);
  switch (c) {
    case FocalCase::kI: return {a, a, a};
    case FocalCase::kII:
    case FocalCase::kIII: return {a, b, b};
    case FocalCase::kIV: return {a, b, d};
  }
  return {a, a, a};
}

// Plane in front of view 1, moderate rotations and baselines.
inline Instance RandomInstance(FocalCase c, std::mt19937_64& rng) {
  Instance in;
  const auto f = CaseFocals(c, rng);
  in.f1 = f[0];
  in.f2 = f[1];
  in.f3 = f[2];
  Vec3 n = RandomUnit(rng);
  if (n.z() < 0.3) n = (n + Vec3(0, 0, 1.5)).normalized();
  in.plane.normal = n;
  in.plane.distance = Uniform(rng, 2.0, 6.0);
  in.pose2.R = SmallRotation(rng, 0.5);
  in.pose3.R = SmallRotation(rng, 0.5);
  in.pose2.t = RandomUnit(rng) * Uniform(rng, 0.3, 1.5);
  in.pose3.t = RandomUnit(rng) * Uniform(rng, 0.3, 1.5);
  const CameraIntrinsics K1(in.f1), K2(in.f2), K3(in.f3);
  in.G2 = ImageHomography(K1, K2, EuclideanHomography(in.pose2, in.plane));
  in.G3 = ImageHomography(K1, K3, EuclideanHomography(in.pose3, in.plane));
  return in;
}

// Real roots in (lo, hi] from companion eigenvalues, each polished by
// Newton steps in extended precision.
inline std::vector<double> CompanionRealRoots(const UniPoly& p, double lo, double hi) {
  std::vector<double> out;
  for (const auto& z : CompanionRoots(p)) {
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) continue;
    long double x = z.real();
    for (int it = 0; it < 20; ++it) {
      long double v = 0, d = 0;
      for (int i = p.degree(); i >= 0; --i) {
        d = d * x + v;
        v = v * x + p[i];
      }
      if (d == 0) break;
      const long double step = v / d;
      x -= step;
      if (std::abs(step) <= 1e-18L * std::max(1.0L, std::abs(x))) break;
    }
    if (x > lo && x <= hi) out.push_back(static_cast<double>(x));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ConditionedEigenvalue {
  std::complex<double> value;
  // Relative condition number ||D|| ||x|| ||y|| / (|lambda| |y^H x|).
  double condition;
};

inline std::vector<ConditionedEigenvalue> EigenvalueConditions(const Eigen::MatrixXd& D) {
  using C = std::complex<double>;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(D.cast<C>());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> left(D.transpose().cast<C>());
  const double nd = D.norm();
  std::vector<ConditionedEigenvalue> out;
  for (int i = 0; i < D.rows(); ++i) {
    const C g = right.eigenvalues()(i);
    int j = 0;
    double best = 1e300;
    for (int k = 0; k < D.rows(); ++k) {
      const double d = std::abs(left.eigenvalues()(k) - g);
      if (d < best) {
        best = d;
        j = k;
      }
    }
    const Eigen::VectorXcd x = right.eigenvectors().col(i);
    const Eigen::VectorXcd y = left.eigenvectors().col(j);
    const double kappa = x.norm() * y.norm() / std::abs(y.dot(x.conjugate()));
    out.push_back({g, kappa * nd / std::max(std::abs(g), 1e-300)});
  }
  return out;
}

// Pencil in y with x = shift + y.
inline CubicMatrixPencil ShiftPencil(const CubicMatrixPencil& P, double shift) {
  static constexpr double kBinom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  CubicMatrixPencil out;
  for (int j = 0; j < 4; ++j) {
    out.C[j] = Eigen::MatrixXd::Zero(P.C[0].rows(), P.C[0].cols());
    for (int k = j; k < 4; ++k) out.C[j] += kBinom[k][j] * std::pow(shift, k - j) * P.C[k];
  }
  return out;
}

inline double Focal(const Instance& in, int v) { return v == 0 ? in.f1 : v == 1 ? in.f2 : in.f3; }

}  // namespace hfocal::testing
