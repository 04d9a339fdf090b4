#include "hfocal/bench.h"

#include "hfocal/focal_constraints.h"
#include "hfocal/geometry.h"

#include "json.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace hfocal {

namespace {

using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

double Ms(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

std::mt19937_64 MakeRng(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    tag};
  return std::mt19937_64(seq);
}

double Median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + m));
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double Quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t k = static_cast<size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  return v[k];
}

// Camera looking from c towards target with the given roll about its axis.
Mat3 LookAt(const Vec3& c, const Vec3& target, double roll) {
  const Vec3 z = (target - c).normalized();
  Vec3 ref = std::abs(z.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  Vec3 x = ref.cross(z).normalized();
  Vec3 y = z.cross(x);
  const Vec3 xr = std::cos(roll) * x + std::sin(roll) * y;
  const Vec3 yr = z.cross(xr);
  Mat3 R;
  R.row(0) = xr.transpose();
  R.row(1) = yr.transpose();
  R.row(2) = z.transpose();
  return R;
}

struct Rig {
  std::array<double, 3> f{};
  std::array<Vec3, 3> center;
  std::array<Mat3, 3> R;  // world to camera
};

std::array<double, 3> SampleFocals(FocalCase c, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(lo, hi);
  const double a = U(rng), b = U(rng), d = U(rng);
  switch (c) {
    case FocalCase::kI: return {a, a, a};
    case FocalCase::kII: return {a, b, b};
    case FocalCase::kIII: return {a, b, b};
    case FocalCase::kIV: return {a, b, d};
  }
  return {a, a, a};
}

// World plane z = 0; camera 1 at unit distance from its look-at target.
Rig SampleRig(const SynthConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  constexpr double kPi = 3.14159265358979323846;
  Rig rig;
  rig.f = SampleFocals(cfg.focal_case, cfg.f_min, cfg.f_max, rng);
  const double D = 1.0;
  const double b = cfg.baseline_fraction * D;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Vec3 target1(0.4 * U(rng) - 0.2, 0.4 * U(rng) - 0.2, 0.0);
    const double az = 2.0 * kPi * U(rng);
    const double el = (30.0 + 60.0 * U(rng)) * kPi / 180.0;
    const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    rig.center[0] = target1 + D * dir;
    bool ok = true;
    for (int j = 1; j < 3; ++j) {
      Vec3 u(N(rng), N(rng), N(rng));
      rig.center[j] = rig.center[j - 1] + b * u.normalized();
      ok = ok && rig.center[j].z() > 0.2 * D;
    }
    if (!ok) continue;
    const double roll = 2.0 * kPi * U(rng);
    rig.R[0] = LookAt(rig.center[0], target1, roll);
    for (int j = 1; j < 3; ++j) {
      if (cfg.pure_translation) {
        rig.R[j] = rig.R[0];
        continue;
      }
      const Vec3 target(target1.x() + 0.05 * D * N(rng), target1.y() + 0.05 * D * N(rng), 0.0);
      rig.R[j] = LookAt(rig.center[j], target, roll + 5.0 * kPi / 180.0 * N(rng));
    }
    return rig;
  }
  throw Error(ErrorCode::kGenerationFailed, "could not place cameras");
}

SceneTruth TruthFromRig(const Rig& rig) {
  SceneTruth gt;
  gt.f1 = rig.f[0];
  gt.f2 = rig.f[1];
  gt.f3 = rig.f[2];
  const Mat3& R1 = rig.R[0];
  Pose* poses[2] = {&gt.pose2, &gt.pose3};
  for (int j = 1; j < 3; ++j) {
    poses[j - 1]->R = rig.R[j] * R1.transpose();
    poses[j - 1]->t = rig.R[j] * (rig.center[0] - rig.center[j]);
  }
  gt.plane.normal = -(R1 * Vec3::UnitZ());
  gt.plane.distance = rig.center[0].z();
  const CameraIntrinsics K1(gt.f1), K2(gt.f2), K3(gt.f3);
  gt.G2 = ImageHomography(K1, K2, EuclideanHomography(gt.pose2, gt.plane));
  gt.G3 = ImageHomography(K1, K3, EuclideanHomography(gt.pose3, gt.plane));
  return gt;
}

std::optional<Vec2> ProjectWorld(const Rig& rig, int j, const Vec3& X, double hw, double hh) {
  const Vec3 p = rig.R[j] * (X - rig.center[j]);
  if (p.z() <= 1e-9) return std::nullopt;
  const Vec2 x = rig.f[j] * p.head<2>() / p.z();
  if (std::abs(x.x()) > hw || std::abs(x.y()) > hh) return std::nullopt;
  return x;
}

// Intersection of the pixel ray of view j with the plane z = h.
std::optional<Vec3> BackProject(const Rig& rig, int j, const Vec2& x, double h) {
  const Vec3 dir = rig.R[j].transpose() * Vec3(x.x(), x.y(), rig.f[j]);
  if (std::abs(dir.z()) < 1e-12) return std::nullopt;
  const double s = (h - rig.center[j].z()) / dir.z();
  if (s <= 0) return std::nullopt;
  return Vec3(rig.center[j] + s * dir);
}

bool TrySampleScene(const SynthConfig& cfg, const Rig& rig, std::mt19937_64& rng,
                    SynthScene& scene) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double hw = 0.5 * cfg.image_width, hh = 0.5 * cfg.image_height;
  // The view with the narrowest field of view bounds the common patch.
  const int m = static_cast<int>(std::max_element(rig.f.begin(), rig.f.end()) - rig.f.begin());
  std::vector<Vec3> corners;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0})
      if (auto X = BackProject(rig, m, Vec2(sx * hw, sy * hh), 0.0)) corners.push_back(*X);
  double extent = 0.0;
  for (size_t a = 0; a < corners.size(); ++a)
    for (size_t b = a + 1; b < corners.size(); ++b)
      extent = std::max(extent, (corners[a] - corners[b]).norm());
  if (corners.size() < 4) extent = 1.0;

  const int n = cfg.n_points;
  const int n_plane = static_cast<int>(std::lround(cfg.planar_fraction * n));
  scene.points.clear();
  scene.on_plane.clear();
  scene.triplets.clear();
  std::vector<Vec3> world;
  for (int i = 0; i < n; ++i) {
    const bool planar = i < n_plane;
    bool placed = false;
    for (int tries = 0; tries < 1000 && !placed; ++tries) {
      const Vec2 px((2.0 * U(rng) - 1.0) * hw, (2.0 * U(rng) - 1.0) * hh);
      const double h = planar ? 0.0 : (U(rng) - 0.5) * 0.5 * extent;
      auto X = BackProject(rig, m, px, h);
      if (!X) continue;
      PointTriplet t;
      auto a = ProjectWorld(rig, 0, *X, hw, hh);
      auto b = ProjectWorld(rig, 1, *X, hw, hh);
      auto c = ProjectWorld(rig, 2, *X, hw, hh);
      if (!a || !b || !c) continue;
      t.x1 = *a;
      t.x2 = *b;
      t.x3 = *c;
      world.push_back(*X);
      scene.triplets.push_back(t);
      scene.on_plane.push_back(planar);
      placed = true;
    }
    if (!placed) return false;
  }
  const Mat3& R1 = rig.R[0];
  for (const Vec3& X : world) scene.points.push_back(R1 * (X - rig.center[0]));
  return true;
}

void AddNoiseAndOutliers(const SynthConfig& cfg, std::mt19937_64& rng, SynthScene& scene) {
  const int n = static_cast<int>(scene.triplets.size());
  if (cfg.noise_sigma > 0) {
    std::normal_distribution<double> N(0.0, cfg.noise_sigma);
    for (auto& t : scene.triplets) {
      for (Vec2* x : {&t.x1, &t.x2, &t.x3}) {
        x->x() += N(rng);
        x->y() += N(rng);
      }
    }
  }
  scene.inlier.assign(n, true);
  const int n_out = static_cast<int>(std::lround((1.0 - cfg.inlier_ratio) * n));
  if (n_out == 0) return;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<int> out(idx.begin(), idx.begin() + n_out);
  for (int i : out) scene.inlier[i] = false;
  if (n_out == 1) {
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    PointTriplet& t = scene.triplets[out[0]];
    t.x2 = Vec2(U(rng) * cfg.image_width, U(rng) * cfg.image_height);
    t.x3 = Vec2(U(rng) * cfg.image_width, U(rng) * cfg.image_height);
    return;
  }
  // Cyclic shift along independent permutations: no corrupted triplet keeps
  // its own match in view 2 or view 3.
  for (int view = 2; view <= 3; ++view) {
    std::vector<int> perm = out;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec2> old(n_out);
    for (int k = 0; k < n_out; ++k) {
      const PointTriplet& t = scene.triplets[perm[k]];
      old[k] = view == 2 ? t.x2 : t.x3;
    }
    for (int k = 0; k < n_out; ++k) {
      PointTriplet& t = scene.triplets[perm[k]];
      (view == 2 ? t.x2 : t.x3) = old[(k + 1) % n_out];
    }
  }
}

}  // namespace

void SynthConfig::Validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (n_points < 4) bad("n_points must be at least 4");
  if (!(planar_fraction >= 0 && planar_fraction <= 1)) bad("planar_fraction outside [0,1]");
  if (!(inlier_ratio >= 0 && inlier_ratio <= 1)) bad("inlier_ratio outside [0,1]");
  if (!(noise_sigma >= 0)) bad("noise_sigma must be non-negative");
  if (!(f_min > 0 && f_max >= f_min)) bad("invalid focal range");
  if (!(image_width > 0 && image_height > 0)) bad("image size must be positive");
  if (!(baseline_fraction > 0)) bad("baseline_fraction must be positive");
  if (n_scenes < 0) bad("n_scenes must be non-negative");
}

SceneTruth GenerateCameras(const SynthConfig& cfg, std::uint64_t scene_index) {
  cfg.Validate();
  auto rng = MakeRng(cfg.rng_seed, scene_index, 1);
  return TruthFromRig(SampleRig(cfg, rng));
}

SynthScene GenerateScene(const SynthConfig& cfg, std::uint64_t scene_index) {
  cfg.Validate();
  auto rng = MakeRng(cfg.rng_seed, scene_index, 1);
  auto point_rng = MakeRng(cfg.rng_seed, scene_index, 2);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Rig rig = SampleRig(cfg, rng);
    SynthScene scene;
    if (!TrySampleScene(cfg, rig, point_rng, scene)) continue;
    scene.truth = TruthFromRig(rig);
    AddNoiseAndOutliers(cfg, point_rng, scene);
    return scene;
  }
  throw Error(ErrorCode::kGenerationFailed, "visibility constraints not met");
}

double XiF(double f_est, double f_gt) {
  if (!(f_gt > 0)) throw Error(ErrorCode::kInvalidArgument, "ground-truth focal must be positive");
  return std::abs(f_est - f_gt) / f_gt;
}

double XiPair(double f1_est, double f2_est, double f1_gt, double f2_gt) {
  return std::sqrt(XiF(f1_est, f1_gt) * XiF(f2_est, f2_gt));
}

double CaseError(FocalCase c, double f1, double f2, double f3, double g1, double g2,
                 double g3) {
  switch (c) {
    case FocalCase::kI: return XiF(f1, g1);
    case FocalCase::kII: return XiF(f2, g2);
    case FocalCase::kIII: return XiPair(f1, f2, g1, g2);
    case FocalCase::kIV: return XiPair(f2, f3, g2, g3);
  }
  return 1.0;
}

double CaseError(FocalCase c, double f1, double f2, double f3, const SceneTruth& gt) {
  return CaseError(c, f1, f2, f3, gt.f1, gt.f2, gt.f3);
}

double MeanAverageAccuracy(const std::vector<double>& errors, double t) {
  if (!(t > 0)) throw Error(ErrorCode::kInvalidArgument, "threshold must be positive");
  if (errors.empty()) return 0.0;
  std::vector<double> e(errors);
  for (double& x : e)
    if (std::isnan(x)) x = std::numeric_limits<double>::infinity();
  std::sort(e.begin(), e.end());
  constexpr int kGrid = 100;
  const double n = static_cast<double>(e.size());
  auto cdf = [&](double th) {
    return static_cast<double>(std::upper_bound(e.begin(), e.end(), th) - e.begin()) / n;
  };
  double area = 0.0;
  double prev = cdf(0.0);
  for (int k = 1; k < kGrid; ++k) {
    const double cur = cdf(t * k / (kGrid - 1));
    area += 0.5 * (prev + cur);
    prev = cur;
  }
  return area / (kGrid - 1);
}

StabilityResult StabilityExperiment(FocalCase c, int n_scenes, std::uint64_t seed,
                                    bool pure_translation) {
  const auto t0 = Clock::now();
  SynthConfig cfg;
  cfg.focal_case = c;
  cfg.rng_seed = seed;
  cfg.pure_translation = pure_translation;
  SolverOptions opt;
  opt.image_diagonal = cfg.image_size().diagonal();
  StabilityResult res;
  res.focal_case = c;
  res.log10_errors.reserve(n_scenes);
  for (int i = 0; i < n_scenes; ++i) {
    const SceneTruth gt = GenerateCameras(cfg, i);
    double best = 1.0;
    try {
      const std::optional<double> f1 =
          CaseHasKnownF1(c) ? std::optional<double>(gt.f1) : std::nullopt;
      for (const auto& s : Solve(c, gt.G2, gt.G3, f1, opt))
        best = std::min(best, CaseError(c, s.f1, s.f2, s.f3, gt));
    } catch (const Error&) {
    }
    if (best > 1e-2) ++res.failures;
    res.log10_errors.push_back(std::log10(std::max(best, 1e-300)));
  }
  res.median = Median(res.log10_errors);
  res.p99 = Quantile(res.log10_errors, 0.99);
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

void WriteStabilityHistogram(std::ostream& os, const std::vector<StabilityResult>& results,
                             double lo, double hi, double width) {
  const int bins = static_cast<int>(std::ceil((hi - lo) / width));
  os << "case,bin_lo,bin_hi,count\n";
  for (const auto& r : results) {
    std::vector<int> counts(bins, 0);
    for (double v : r.log10_errors) {
      int b = static_cast<int>(std::floor((v - lo) / width));
      counts[std::clamp(b, 0, bins - 1)]++;
    }
    for (int b = 0; b < bins; ++b)
      os << FocalCaseName(r.focal_case) << ',' << lo + b * width << ','
         << lo + (b + 1) * width << ',' << counts[b] << '\n';
  }
}

std::vector<SweepRow> AccuracySweep(const SweepConfig& cfg) {
  cfg.scene.Validate();
  const FocalCase c = cfg.scene.focal_case;
  const std::vector<double> no_perturbation{0.0};
  const auto& perturbations = CaseHasKnownF1(c) ? cfg.focal_perturbations : no_perturbation;
  std::vector<SweepRow> rows;
  const int threads = std::max(1, cfg.ransac.num_threads);
  for (double pf : cfg.planar_fractions) {
    for (double sigma : cfg.noise_sigmas) {
      for (double pert : perturbations) {
        SweepRow row;
        row.focal_case = c;
        row.planar_fraction = pf;
        row.noise_sigma = sigma;
        row.focal_perturbation = pert;
        row.n_scenes = cfg.scenes_per_cell;
        SynthConfig sc = cfg.scene;
        sc.planar_fraction = pf;
        sc.noise_sigma = sigma;
        std::vector<double> errors(cfg.scenes_per_cell, 1.0), runtimes(cfg.scenes_per_cell, 0.0);
        std::vector<char> failed(cfg.scenes_per_cell, 0);
        auto run = [&](int s) {
          RansacConfig rc = cfg.ransac;
          rc.num_threads = 1;
          rc.rng_seed = cfg.ransac.rng_seed + static_cast<std::uint64_t>(s);
          rc.image_sizes = {sc.image_size(), sc.image_size(), sc.image_size()};
          const SynthScene scene = GenerateScene(sc, s);
          std::optional<double> f1;
          if (CaseHasKnownF1(c)) f1 = scene.truth.f1 * (1.0 + pert);
          const auto t0 = Clock::now();
          try {
            const auto r = Estimate(scene.triplets, c, f1, rc);
            errors[s] = CaseError(c, r.model.f1, r.model.f2, r.model.f3, scene.truth);
          } catch (const Error&) {
            failed[s] = 1;
          }
          runtimes[s] = Ms(Clock::now() - t0);
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
          pool.emplace_back([&, w] {
            for (int s = w; s < cfg.scenes_per_cell; s += threads) run(s);
          });
        for (auto& th : pool) th.join();
        row.failures = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
        row.median_xi_f = Median(errors);
        row.mean_xi_f = Mean(errors);
        row.maa_01 = MeanAverageAccuracy(errors, 0.1);
        row.maa_02 = MeanAverageAccuracy(errors, 0.2);
        row.mean_runtime_ms = Mean(runtimes);
        row.errors = std::move(errors);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void WriteSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "case,planar_fraction,noise_sigma,focal_perturbation,n_scenes,failures,"
        "median_xi_f,mean_xi_f,maa_0.1,maa_0.2,mean_runtime_ms\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << FocalCaseName(r.focal_case) << ',' << r.planar_fraction << ',' << r.noise_sigma << ','
       << r.focal_perturbation << ',' << r.n_scenes << ',' << r.failures << ','
       << r.median_xi_f << ',' << r.mean_xi_f << ',' << r.maa_01 << ',' << r.maa_02 << ','
       << r.mean_runtime_ms << '\n';
}

namespace {

[[noreturn]] void RecordError(size_t i, const std::string& what) {
  throw Error(ErrorCode::kParseError, "record " + std::to_string(i) + ": " + what);
}

double PositiveNumber(const nlohmann::json& v, size_t i, const char* what) {
  if (!v.is_number()) RecordError(i, std::string(what) + " is not a number");
  const double x = v.get<double>();
  if (!(x > 0) || !std::isfinite(x)) RecordError(i, std::string(what) + " must be positive");
  return x;
}

}  // namespace

TripletDataset ParseDataset(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const size_t pos = std::min<size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array())
    throw Error(ErrorCode::kParseError, "missing \"records\" array");
  TripletDataset ds;
  const auto& recs = doc["records"];
  for (size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (!r.is_object()) RecordError(i, "not an object");
    TripletRecord rec;
    for (const char* key : {"camera_ids", "image_sizes", "f_gt", "points"})
      if (!r.contains(key) || !r[key].is_array()) RecordError(i, std::string("missing ") + key);
    if (r["camera_ids"].size() != 3 || r["image_sizes"].size() != 3 || r["f_gt"].size() != 3)
      RecordError(i, "expected three views");
    for (int j = 0; j < 3; ++j) {
      const auto& id = r["camera_ids"][j];
      if (!id.is_string()) RecordError(i, "camera id is not a string");
      rec.camera_ids[j] = id.get<std::string>();
      const auto& sz = r["image_sizes"][j];
      if (!sz.is_array() || sz.size() != 2) RecordError(i, "image size must be [w, h]");
      rec.image_sizes[j] = {PositiveNumber(sz[0], i, "width"), PositiveNumber(sz[1], i, "height")};
      const auto& f = r["f_gt"][j];
      if (!f.is_null()) rec.f_gt[j] = PositiveNumber(f, i, "f_gt");
    }
    for (const auto& p : r["points"]) {
      if (!p.is_array() || p.size() != 6) RecordError(i, "point must have 6 coordinates");
      std::array<double, 6> a{};
      for (int k = 0; k < 6; ++k) {
        if (!p[k].is_number()) RecordError(i, "coordinate is not a number");
        a[k] = p[k].get<double>();
      }
      rec.points.push_back(a);
    }
    if (rec.points.size() < 4) RecordError(i, "fewer than 4 correspondences");
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

TripletDataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseDataset(ss.str());
}

std::string SerializeDataset(const TripletDataset& ds) {
  std::string out = "{\"records\":[\n";
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const auto& rec = ds.records[i];
    ordered_json r;
    r["camera_ids"] = rec.camera_ids;
    ordered_json sizes = ordered_json::array(), f = ordered_json::array();
    for (int j = 0; j < 3; ++j) {
      sizes.push_back({rec.image_sizes[j].width, rec.image_sizes[j].height});
      f.push_back(rec.f_gt[j] ? ordered_json(*rec.f_gt[j]) : ordered_json(nullptr));
    }
    r["image_sizes"] = sizes;
    r["f_gt"] = f;
    r["points"] = rec.points;
    out += r.dump();
    out += i + 1 < ds.records.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

void WriteDataset(const TripletDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << SerializeDataset(ds);
}

void ValidateRecord(const TripletRecord& rec) {
  if (rec.points.size() < 10)
    throw Error(ErrorCode::kSkippedRecord,
                "only " + std::to_string(rec.points.size()) + " triplet matches");
}

std::vector<PointTriplet> CenteredTriplets(const TripletRecord& rec) {
  std::vector<PointTriplet> out;
  out.reserve(rec.points.size());
  auto c = [&](int j) {
    return Vec2(0.5 * rec.image_sizes[j].width, 0.5 * rec.image_sizes[j].height);
  };
  const Vec2 c1 = c(0), c2 = c(1), c3 = c(2);
  for (const auto& p : rec.points) {
    PointTriplet t;
    t.x1 = Vec2(p[0], p[1]) - c1;
    t.x2 = Vec2(p[2], p[3]) - c2;
    t.x3 = Vec2(p[4], p[5]) - c3;
    out.push_back(t);
  }
  return out;
}

TripletDataset SyntheticDataset(const SynthConfig& cfg) {
  TripletDataset ds;
  const Vec2 c(0.5 * cfg.image_width, 0.5 * cfg.image_height);
  for (int s = 0; s < cfg.n_scenes; ++s) {
    const SynthScene scene = GenerateScene(cfg, s);
    TripletRecord rec;
    for (int j = 0; j < 3; ++j) {
      rec.camera_ids[j] = "scene" + std::to_string(s) + "_view" + std::to_string(j + 1);
      rec.image_sizes[j] = cfg.image_size();
    }
    rec.f_gt = {scene.truth.f1, scene.truth.f2, scene.truth.f3};
    for (const auto& t : scene.triplets) {
      const Vec2 a = t.x1 + c, b = t.x2 + c, d = t.x3 + c;
      rec.points.push_back({a.x(), a.y(), b.x(), b.y(), d.x(), d.y()});
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

std::string MethodName(FocalCase c) { return std::string("H_") + FocalCaseName(c); }

BenchmarkRow RunBenchmark(const TripletDataset& ds, FocalCase c, const RansacConfig& config) {
  BenchmarkRow row;
  row.focal_case = c;
  row.method = MethodName(c);
  std::vector<double> errors, runtimes;
  for (const auto& rec : ds.records) {
    try {
      ValidateRecord(rec);
    } catch (const Error&) {
      ++row.skipped;
      continue;
    }
    const auto& g = rec.f_gt;
    bool have_gt = false;
    switch (c) {
      case FocalCase::kI: have_gt = g[0].has_value(); break;
      case FocalCase::kII: have_gt = g[0] && g[1]; break;
      case FocalCase::kIII: have_gt = g[0] && g[1]; break;
      case FocalCase::kIV: have_gt = g[0] && g[1] && g[2]; break;
    }
    if (!have_gt) {
      ++row.skipped;
      continue;
    }
    RansacConfig rc = config;
    rc.image_sizes = rec.image_sizes;
    const auto triplets = CenteredTriplets(rec);
    std::optional<double> f1;
    if (CaseHasKnownF1(c)) f1 = *g[0];
    double err = 1.0;
    const auto t0 = Clock::now();
    try {
      const auto r = Estimate(triplets, c, f1, rc);
      err = CaseError(c, r.model.f1, r.model.f2, r.model.f3, *g[0], g[1].value_or(*g[0]),
                      g[2].value_or(*g[0]));
    } catch (const Error&) {
      ++row.failures;
    }
    runtimes.push_back(Ms(Clock::now() - t0));
    errors.push_back(err);
  }
  row.n_triplets = static_cast<int>(errors.size());
  if (!errors.empty()) {
    row.median_xi_f = Median(errors);
    row.mean_xi_f = Mean(errors);
    row.maa_01 = 100.0 * MeanAverageAccuracy(errors, 0.1);
    row.maa_02 = 100.0 * MeanAverageAccuracy(errors, 0.2);
    row.mean_runtime_ms = Mean(runtimes);
  }
  return row;
}

void WriteBenchmarkCsv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << "case,method,n_triplets,median_xi_f,mean_xi_f,maa_0.1,maa_0.2,mean_runtime_ms\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << FocalCaseName(r.focal_case) << ',' << r.method << ',' << r.n_triplets << ','
       << r.median_xi_f << ',' << r.mean_xi_f << ',' << r.maa_01 << ',' << r.maa_02 << ','
       << r.mean_runtime_ms << '\n';
}

GeneratorReport VerifyGenerators(const GeneratorTable& table, int trials, std::uint64_t seed,
                                 double threshold) {
  const auto t0 = Clock::now();
  auto rng = MakeRng(seed, 0, 3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  GeneratorReport rep;
  rep.trials = trials;
  std::vector<double> perturbed;
  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  for (int k = 0; k < trials; ++k) {
    Plane plane;
    plane.normal = Vec3(N(rng), N(rng), N(rng)).normalized();
    if (plane.normal.z() < 0) plane.normal = -plane.normal;
    plane.distance = 1.0 + 4.0 * U(rng);
    const CameraIntrinsics K1(300 + 2700 * U(rng)), K2(300 + 2700 * U(rng)),
        K3(300 + 2700 * U(rng));
    Pose p2, p3;
    p2.R = RotationFromUniform(U(rng), U(rng), U(rng));
    p3.R = RotationFromUniform(U(rng), U(rng), U(rng));
    p2.t = Vec3(N(rng), N(rng), N(rng));
    p3.t = Vec3(N(rng), N(rng), N(rng));
    const Homography2D G2 = ImageHomography(K1, K2, EuclideanHomography(p2, plane));
    const Homography2D G3 = ImageHomography(K1, K3, EuclideanHomography(p3, plane));
    SymQ Q2 = ComputeQ(G2, K1, K2), Q3 = ComputeQ(G3, K1, K3);
    const double s2 = 0.1 + 10 * U(rng), s3 = 0.1 + 10 * U(rng);
    for (auto& q : Q2.q) q *= s2;
    for (auto& q : Q3.q) q *= s3;
    rep.max_residual = std::max(rep.max_residual, max_abs(EvaluateGenerators(table, Q2, Q3)));
    for (auto& q : Q2.q) q *= 1.0 + 1e-3 * N(rng);
    perturbed.push_back(max_abs(EvaluateGenerators(table, Q2, Q3)));
  }
  rep.median_perturbed_residual = perturbed.empty() ? 0.0 : Median(perturbed);
  rep.pass = trials > 0 && rep.max_residual < threshold;
  rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

}  // namespace hfocal
