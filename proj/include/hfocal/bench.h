#pragma once

#include "hfocal/generator_table.h"
#include "hfocal/ransac.h"
#include "hfocal/solvers.h"
#include "hfocal/types.h"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hfocal {

struct SynthConfig {
  int n_points = 200;
  double planar_fraction = 1.0;
  double noise_sigma = 0.0;
  double inlier_ratio = 0.75;
  double f_min = 300.0;
  double f_max = 3000.0;
  double image_width = 1920.0;
  double image_height = 1080.0;
  double baseline_fraction = 0.10;
  FocalCase focal_case = FocalCase::kI;
  int n_scenes = 100;
  std::uint64_t rng_seed = 0;
  // Views 2 and 3 share the orientation of view 1.
  bool pure_translation = false;

  void Validate() const;
  ImageSize image_size() const { return {image_width, image_height}; }
};

struct SceneTruth {
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  // Relative to view 1 (camera-1 frame is the reference frame).
  Pose pose2, pose3;
  Plane plane;
  Homography2D G2, G3;
};

struct SynthScene {
  SceneTruth truth;
  std::vector<PointTriplet> triplets;  // centered pixels
  std::vector<Vec3> points;            // view-1 frame
  std::vector<bool> on_plane;
  std::vector<bool> inlier;
};

// Cameras and plane only. Deterministic in (cfg.rng_seed, scene_index).
SceneTruth GenerateCameras(const SynthConfig& cfg, std::uint64_t scene_index);
// Full scene with points, noise and outliers. Throws kGenerationFailed.
SynthScene GenerateScene(const SynthConfig& cfg, std::uint64_t scene_index = 0);

double XiF(double f_est, double f_gt);
double XiPair(double f1_est, double f2_est, double f1_gt, double f2_gt);
// Case-specific error: xi_f of the shared focal for Cases I/II, the
// geometric mean over (f1, f2) for Case III and over (f2, f3) for Case IV.
double CaseError(FocalCase c, double f1, double f2, double f3, const SceneTruth& gt);
double CaseError(FocalCase c, double f1, double f2, double f3, double g1, double g2, double g3);

// Normalized area under the empirical CDF of errors on [0, t] (trapezoid
// rule over 100 equally spaced thresholds).
double MeanAverageAccuracy(const std::vector<double>& errors, double t);

struct StabilityResult {
  FocalCase focal_case = FocalCase::kI;
  // log10 of the error of the solution closest to ground truth; failures
  // record log10(1) = 0.
  std::vector<double> log10_errors;
  int failures = 0;
  double median = 0.0;
  double p99 = 0.0;
  double seconds = 0.0;
};

StabilityResult StabilityExperiment(FocalCase c, int n_scenes, std::uint64_t seed,
                                    bool pure_translation = false);
// Columns: case, bin_lo, bin_hi, count.
void WriteStabilityHistogram(std::ostream& os, const std::vector<StabilityResult>& results,
                             double lo = -18.0, double hi = 2.0, double width = 0.25);

struct SweepConfig {
  SynthConfig scene;
  RansacConfig ransac;
  std::vector<double> planar_fractions = {1.0};
  std::vector<double> noise_sigmas = {0.0};
  // Relative perturbation of the known f1 (Cases II/IV).
  std::vector<double> focal_perturbations = {0.0};
  int scenes_per_cell = 100;
};

struct SweepRow {
  FocalCase focal_case = FocalCase::kI;
  double planar_fraction = 0.0;
  double noise_sigma = 0.0;
  double focal_perturbation = 0.0;
  int n_scenes = 0;
  int failures = 0;
  double median_xi_f = 0.0;
  double mean_xi_f = 0.0;
  double maa_01 = 0.0;
  double maa_02 = 0.0;
  double mean_runtime_ms = 0.0;
  std::vector<double> errors;
};

// Failed estimations count with error 1.
std::vector<SweepRow> AccuracySweep(const SweepConfig& cfg);
void WriteSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows);

struct TripletRecord {
  std::array<std::string, 3> camera_ids;
  std::array<ImageSize, 3> image_sizes;
  std::array<std::optional<double>, 3> f_gt;
  // Raw pixel coordinates x1, y1, x2, y2, x3, y3.
  std::vector<std::array<double, 6>> points;
};

struct TripletDataset {
  std::vector<TripletRecord> records;
};

TripletDataset ParseDataset(const std::string& text);
TripletDataset LoadDataset(const std::string& path);
std::string SerializeDataset(const TripletDataset& ds);
void WriteDataset(const TripletDataset& ds, const std::string& path);
// Throws kSkippedRecord when the record has fewer than 10 matches.
void ValidateRecord(const TripletRecord& rec);
// Coordinates with each view's image center subtracted.
std::vector<PointTriplet> CenteredTriplets(const TripletRecord& rec);
// Synthetic scenes as a dataset with raw pixel coordinates.
TripletDataset SyntheticDataset(const SynthConfig& cfg);

struct BenchmarkRow {
  FocalCase focal_case = FocalCase::kI;
  std::string method;
  int n_triplets = 0;
  int skipped = 0;
  int failures = 0;
  double median_xi_f = 0.0;
  double mean_xi_f = 0.0;
  // Percent, as in the usual results tables.
  double maa_01 = 0.0;
  double maa_02 = 0.0;
  double mean_runtime_ms = 0.0;
};

BenchmarkRow RunBenchmark(const TripletDataset& ds, FocalCase c, const RansacConfig& config);
// Columns: case, method, n_triplets, median_xi_f, mean_xi_f, maa_0.1, maa_0.2,
// mean_runtime_ms.
void WriteBenchmarkCsv(std::ostream& os, const std::vector<BenchmarkRow>& rows);
std::string MethodName(FocalCase c);

struct GeneratorReport {
  int trials = 0;
  double max_residual = 0.0;
  // Median residual after perturbing Q2 by 1e-3 relative noise.
  double median_perturbed_residual = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

GeneratorReport VerifyGenerators(const GeneratorTable& table, int trials,
                                 std::uint64_t seed = 0, double threshold = 1e-9);

}  // namespace hfocal
