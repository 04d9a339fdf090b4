#pragma once

#include "hfocal/generator_table.h"
#include "hfocal/types.h"

#include <optional>
#include <vector>

namespace hfocal {

struct FocalSolution {
  FocalCase focal_case = FocalCase::kI;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

struct SolverOptions {
  // Image diagonal in pixels. When positive, homographies are rescaled so
  // focal lengths are O(1) and roots are gated to the FOV envelope below.
  double image_diagonal = 0.0;
  double fov_min_deg = 10.0;
  double fov_max_deg = 150.0;
  bool fov_gate = true;

  // Cases III/IV: null-vector ratio deviation, and the full-system residual
  // left after a linear correction, relative to |J| max(alpha, beta).
  double ratio_deviation = 0.1;
  double residual_gate = 1e-7;

  // Cases I/II: a root is kept when its largest normalized generator
  // residual is within consistency_ratio of the smallest one among all
  // roots, or below consistency_floor.
  double consistency_ratio = 1e3;
  double consistency_floor = 1e-12;

  // Reject roots whose common plane normal is complex.
  bool real_normal_filter = true;

  // Below this ||system|| / ||magnitudes|| the motion is treated as
  // degenerate.
  double degenerate_threshold = 1e-10;

  const GeneratorTable* table = nullptr;
};

struct SolverStats {
  // Real positive roots before any filtering.
  int raw = 0;
  // Rejected by the null-vector structure check.
  int structure_rejected = 0;
  // Rejected by generator residual or consistency.
  int residual_rejected = 0;
  int normal_rejected = 0;
  int fov_rejected = 0;
  int returned = 0;
  bool used_fallback = false;
};

// Throws kDegenerateMotion when the constraint system vanishes identically
// and kNoRealRoot when nothing survives.
std::vector<FocalSolution> SolveFFF(const Homography2D& G2, const Homography2D& G3,
                                    const SolverOptions& options = {},
                                    SolverStats* stats = nullptr);
std::vector<FocalSolution> SolveFF(const Homography2D& G2, const Homography2D& G3,
                                   double f1, const SolverOptions& options = {},
                                   SolverStats* stats = nullptr);
// Additionally throws kRejectSample on singular or rank-unexpected pencils.
std::vector<FocalSolution> SolveFRR(const Homography2D& G2, const Homography2D& G3,
                                    const SolverOptions& options = {},
                                    SolverStats* stats = nullptr);
std::vector<FocalSolution> SolveFR(const Homography2D& G2, const Homography2D& G3,
                                   double f1, const SolverOptions& options = {},
                                   SolverStats* stats = nullptr);

std::vector<FocalSolution> Solve(FocalCase focal_case, const Homography2D& G2,
                                 const Homography2D& G3, std::optional<double> f1,
                                 const SolverOptions& options = {},
                                 SolverStats* stats = nullptr);

// Smallest angle (radians) between the view-1 plane normals obtained from
// decomposing H2 = K2^-1 G2 K1 and H3 = K3^-1 G3 K1. Throws
// kDecompositionFailed when either H is close to a scaled rotation.
double OracleCost(const Homography2D& G2, const Homography2D& G3, double f1, double f2,
                  double f3);

// The two candidate plane normals of Q = H^T H.
std::vector<Vec3> NormalsFromQ(const Mat3& Q);

// True when the common normal of (Q2, Q3) is real.
bool HasRealCommonNormal(const Mat3& Q2, const Mat3& Q3);

// Focal length giving the FOV (degrees) across the given image extent.
double FocalFromFov(double extent_px, double fov_deg);
double FovFromFocal(double extent_px, double focal);

}  // namespace hfocal
