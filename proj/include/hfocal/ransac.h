#pragma once

#include "hfocal/pose_pipeline.h"
#include "hfocal/solvers.h"
#include "hfocal/types.h"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace hfocal {

struct ImageSize {
  double width = 0.0;
  double height = 0.0;

  double diagonal() const { return std::hypot(width, height); }
  double extent() const { return std::max(width, height); }
  bool known() const { return width > 0 && height > 0; }
};

struct RansacConfig {
  int max_iterations = 1000;
  int min_iterations = 100;
  double confidence = 0.9999;
  double sampson_threshold_px = 3.0;
  // Horizontal FOV range in degrees; disabled when unset.
  std::optional<std::pair<double, double>> fov_filter;
  std::uint64_t rng_seed = 0;
  int lo_max_lm_iters = 25;
  bool local_optimization = true;
  // Image sizes of the three views; enable solver rescaling and the FOV
  // filter when known.
  std::array<ImageSize, 3> image_sizes{};
  // Ratio-deviation and residual gates of the Case III/IV solvers.
  double ratio_deviation = 0.1;
  double residual_gate = 1e-7;
  int num_threads = 1;
  // Iterations evaluated per batch; fixed so results do not depend on the
  // thread count.
  int batch_size = 16;

  void Validate() const;
};

struct StageTimings {
  double sampling_ms = 0.0;
  double homography_ms = 0.0;
  double solver_ms = 0.0;
  double model_ms = 0.0;
  double scoring_ms = 0.0;
  double local_opt_ms = 0.0;
  double total_ms = 0.0;
};

struct EstimationResult {
  ThreeViewModel model;
  int iterations = 0;
  int inlier_count = 0;
  int hypotheses = 0;
  int local_optimizations = 0;
  StageTimings timings;
};

// Truncated score and AND-rule inlier mask of a model over all triplets.
double ScoreModel(ThreeViewModel& model, const std::vector<PointTriplet>& triplets,
                  double threshold_px);

// Keeps solutions whose estimated focal lengths all give a horizontal FOV
// (across the given per-view image extent) inside [min, max] degrees.
std::vector<FocalSolution> FovFilter(const std::vector<FocalSolution>& solutions,
                                     const std::array<double, 3>& image_extent_px,
                                     std::optional<std::pair<double, double>> range_deg);

EstimationResult Estimate(const std::vector<PointTriplet>& triplets, FocalCase focal_case,
                          std::optional<double> known_f1, const RansacConfig& config);

// Levenberg-Marquardt on the pairwise Sampson residuals of the model's
// inliers. Returns the refined model only if its truncated score improves.
ThreeViewModel LocalOptimize(const ThreeViewModel& model,
                             const std::vector<PointTriplet>& triplets,
                             const RansacConfig& config);

// Parameter vector of the local optimization for a model: case-dependent
// focal parameters, then rotation increments of views 2 and 3 (3 each), the
// tangent increment of t2 (2) and t3 (3).
int NumLmParameters(FocalCase focal_case);

// Residuals r_k = x_j^T F x_i / sqrt(|F x_i|_12^2 + |F^T x_j|_12^2) for
// the pairs (1,2), (1,3), (2,3) of every triplet.
Eigen::VectorXd LmResiduals(const ThreeViewModel& model,
                            const std::vector<PointTriplet>& triplets);
// Analytic Jacobian at the zero increment.
Eigen::MatrixXd LmJacobian(const ThreeViewModel& model,
                           const std::vector<PointTriplet>& triplets);
// Model after applying an increment.
ThreeViewModel LmApply(const ThreeViewModel& model, const Eigen::VectorXd& delta);

}  // namespace hfocal
