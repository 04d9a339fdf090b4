#include "hfocal/ransac.h"

#include "hfocal/geometry.h"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace hfocal {

namespace {

using Clock = std::chrono::steady_clock;

double Ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// Which of (f1, f2, f3) each focal parameter drives.
std::vector<std::array<bool, 3>> FocalParams(FocalCase c) {
  switch (c) {
    case FocalCase::kI: return {{true, true, true}};
    case FocalCase::kII: return {{false, true, true}};
    case FocalCase::kIII: return {{true, false, false}, {false, true, true}};
    case FocalCase::kIV: return {{false, true, false}, {false, false, true}};
  }
  return {};
}

std::array<Vec3, 2> TangentBasis(const Vec3& t) {
  const Vec3 u = t.normalized();
  int k = 0;
  u.cwiseAbs().minCoeff(&k);
  const Vec3 axis = Vec3::Unit(k);
  const Vec3 b1 = u.cross(axis).normalized();
  return {b1, u.cross(b1)};
}

struct PairGeometry {
  int i, j;  // view indices 0..2
  Mat3 F;
  std::vector<Mat3> dF;  // per parameter
};

std::array<PairGeometry, 3> BuildPairs(const ThreeViewModel& m, bool with_derivatives) {
  const std::array<double, 3> f = {m.f1, m.f2, m.f3};
  auto kinv = [&](int v) { return Mat3(Eigen::Vector3d(1 / f[v], 1 / f[v], 1).asDiagonal()); };
  auto dkinv = [&](int v) {
    return Mat3(Eigen::Vector3d(-1 / (f[v] * f[v]), -1 / (f[v] * f[v]), 0).asDiagonal());
  };
  const Mat3& R2 = m.pose2.R;
  const Mat3& R3 = m.pose3.R;
  const Vec3& t2 = m.pose2.t;
  const Vec3& t3 = m.pose3.t;
  const Mat3 R23 = R3 * R2.transpose();
  const Vec3 t23 = t3 - R23 * t2;
  const std::array<Mat3, 3> E = {Skew(t2) * R2, Skew(t3) * R3, Skew(t23) * R23};
  const std::array<std::pair<int, int>, 3> idx = {{{0, 1}, {0, 2}, {1, 2}}};

  std::array<PairGeometry, 3> out;
  for (int p = 0; p < 3; ++p) {
    out[p].i = idx[p].first;
    out[p].j = idx[p].second;
    out[p].F = kinv(out[p].j).transpose() * E[p] * kinv(out[p].i);
  }
  if (!with_derivatives) return out;

  const auto fparams = FocalParams(m.focal_case);
  const int nf = static_cast<int>(fparams.size());
  const int np = nf + 11;
  const auto basis = TangentBasis(t2);
  for (int p = 0; p < 3; ++p) {
    auto& pg = out[p];
    pg.dF.assign(np, Mat3::Zero());
    const Mat3 Ki = kinv(pg.i), Kj = kinv(pg.j);
    // Derivative of E for each pose parameter, then wrapped by the K's.
    std::vector<Mat3> dE(np, Mat3::Zero());
    for (int k = 0; k < 3; ++k) {
      const Mat3 G = Skew(Vec3::Unit(k));
      // Rotation of view 2.
      if (p == 0) dE[nf + k] = Skew(t2) * R2 * G;
      if (p == 2) {
        const Mat3 dR23 = -R3 * G * R2.transpose();
        const Vec3 dt23 = -dR23 * t2;
        dE[nf + k] = Skew(dt23) * R23 + Skew(t23) * dR23;
      }
      // Rotation of view 3.
      if (p == 1) dE[nf + 3 + k] = Skew(t3) * R3 * G;
      if (p == 2) {
        const Mat3 dR23 = R3 * G * R2.transpose();
        const Vec3 dt23 = -dR23 * t2;
        dE[nf + 3 + k] = Skew(dt23) * R23 + Skew(t23) * dR23;
      }
      // Translation of view 3.
      if (p == 1) dE[nf + 8 + k] = Skew(Vec3::Unit(k)) * R3;
      if (p == 2) dE[nf + 8 + k] = Skew(Vec3::Unit(k)) * R23;
    }
    for (int k = 0; k < 2; ++k) {
      if (p == 0) dE[nf + 6 + k] = Skew(basis[k]) * R2;
      if (p == 2) dE[nf + 6 + k] = Skew(-R23 * basis[k]) * R23;
    }
    for (int q = nf; q < np; ++q) pg.dF[q] = Kj.transpose() * dE[q] * Ki;
    for (int q = 0; q < nf; ++q) {
      if (fparams[q][pg.i]) pg.dF[q] += Kj.transpose() * E[p] * dkinv(pg.i);
      if (fparams[q][pg.j]) pg.dF[q] += dkinv(pg.j) * E[p] * Ki;
    }
  }
  return out;
}

const Vec2& View(const PointTriplet& t, int v) {
  return v == 0 ? t.x1 : (v == 1 ? t.x2 : t.x3);
}

double Residual(const Mat3& F, const Vec2& xi, const Vec2& xj, Mat3* grad) {
  const Vec3 hi = xi.homogeneous(), hj = xj.homogeneous();
  const Vec3 a = F * hi;
  const Vec3 b = F.transpose() * hj;
  const double e = hj.dot(a);
  const double D = std::max(a(0) * a(0) + a(1) * a(1) + b(0) * b(0) + b(1) * b(1), 1e-300);
  const double sD = std::sqrt(D);
  if (grad) {
    Mat3 dD = Mat3::Zero();
    dD.row(0) += 2 * a(0) * hi.transpose();
    dD.row(1) += 2 * a(1) * hi.transpose();
    dD.col(0) += 2 * b(0) * hj;
    dD.col(1) += 2 * b(1) * hj;
    *grad = hj * hi.transpose() / sD - e / (2 * D * sD) * dD;
  }
  return e / sD;
}

}  // namespace

void RansacConfig::Validate() const {
  if (max_iterations < 1 || min_iterations < 0 || min_iterations > max_iterations) {
    throw Error(ErrorCode::kInvalidArgument, "invalid iteration bounds");
  }
  if (!(confidence > 0 && confidence < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence must be in (0, 1)");
  }
  if (!(sampson_threshold_px > 0) || !(ratio_deviation > 0) || !(residual_gate > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "thresholds must be positive");
  }
  if (fov_filter && !(fov_filter->first > 0 && fov_filter->first < fov_filter->second &&
                      fov_filter->second < 180)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid FOV range");
  }
  if (batch_size < 1 || num_threads < 1 || lo_max_lm_iters < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid batch or thread settings");
  }
}

double ScoreModel(ThreeViewModel& model, const std::vector<PointTriplet>& triplets,
                  double threshold_px) {
  const double t2 = threshold_px * threshold_px;
  const auto F = PairwiseFundamentals(model);
  model.inlier_mask.assign(triplets.size(), false);
  double score = 0.0;
  for (size_t k = 0; k < triplets.size(); ++k) {
    const auto s = TripletSampson(F, triplets[k]);
    bool inlier = true;
    for (double v : s) {
      score += std::min(v, t2);
      inlier = inlier && v < t2;
    }
    model.inlier_mask[k] = inlier;
  }
  model.score = score;
  return score;
}

std::vector<FocalSolution> FovFilter(const std::vector<FocalSolution>& solutions,
                                     const std::array<double, 3>& extent,
                                     std::optional<std::pair<double, double>> range) {
  if (!range) return solutions;
  std::vector<FocalSolution> out;
  for (const auto& s : solutions) {
    const std::array<double, 3> f = {s.f1, s.f2, s.f3};
    bool ok = true;
    for (int v = 0; v < 3; ++v) {
      if (v == 0 && CaseHasKnownF1(s.focal_case)) continue;
      if (!(extent[v] > 0)) continue;
      const double fov = FovFromFocal(extent[v], f[v]);
      ok = ok && fov >= range->first && fov <= range->second;
    }
    if (ok) out.push_back(s);
  }
  return out;
}

int NumLmParameters(FocalCase c) { return static_cast<int>(FocalParams(c).size()) + 11; }

Eigen::VectorXd LmResiduals(const ThreeViewModel& m, const std::vector<PointTriplet>& ts) {
  const auto pairs = BuildPairs(m, false);
  Eigen::VectorXd r(3 * ts.size());
  for (size_t k = 0; k < ts.size(); ++k) {
    for (int p = 0; p < 3; ++p) {
      r(3 * k + p) = Residual(pairs[p].F, View(ts[k], pairs[p].i), View(ts[k], pairs[p].j), nullptr);
    }
  }
  return r;
}

Eigen::MatrixXd LmJacobian(const ThreeViewModel& m, const std::vector<PointTriplet>& ts) {
  const auto pairs = BuildPairs(m, true);
  const int np = NumLmParameters(m.focal_case);
  Eigen::MatrixXd J(3 * ts.size(), np);
  Mat3 g;
  for (size_t k = 0; k < ts.size(); ++k) {
    for (int p = 0; p < 3; ++p) {
      Residual(pairs[p].F, View(ts[k], pairs[p].i), View(ts[k], pairs[p].j), &g);
      for (int q = 0; q < np; ++q) J(3 * k + p, q) = g.cwiseProduct(pairs[p].dF[q]).sum();
    }
  }
  return J;
}

ThreeViewModel LmApply(const ThreeViewModel& m, const Eigen::VectorXd& d) {
  ThreeViewModel out = m;
  const auto fparams = FocalParams(m.focal_case);
  const int nf = static_cast<int>(fparams.size());
  std::array<double, 3> f = {m.f1, m.f2, m.f3};
  for (int q = 0; q < nf; ++q) {
    for (int v = 0; v < 3; ++v) {
      if (fparams[q][v]) f[v] += d(q);
    }
  }
  out.f1 = f[0];
  out.f2 = f[1];
  out.f3 = f[2];
  out.pose2.R = m.pose2.R * AngleAxisToRotation(d.segment<3>(nf));
  out.pose3.R = m.pose3.R * AngleAxisToRotation(d.segment<3>(nf + 3));
  const auto basis = TangentBasis(m.pose2.t);
  out.pose2.t = (m.pose2.t.normalized() + d(nf + 6) * basis[0] + d(nf + 7) * basis[1]).normalized();
  out.pose3.t = m.pose3.t + d.segment<3>(nf + 8);
  return out;
}

ThreeViewModel LocalOptimize(const ThreeViewModel& model,
                             const std::vector<PointTriplet>& triplets,
                             const RansacConfig& config) {
  ThreeViewModel start = model;
  const double start_score = ScoreModel(start, triplets, config.sampson_threshold_px);
  std::vector<PointTriplet> inliers;
  for (size_t k = 0; k < triplets.size(); ++k) {
    if (start.inlier_mask[k]) inliers.push_back(triplets[k]);
  }
  const int np = NumLmParameters(model.focal_case);
  if (static_cast<int>(3 * inliers.size()) < np) return start;

  ThreeViewModel cur = start;
  Eigen::VectorXd r = LmResiduals(cur, inliers);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < config.lo_max_lm_iters; ++it) {
    const Eigen::MatrixXd J = LmJacobian(cur, inliers);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool improved = false;
    double new_cost = cost;
    while (lambda < 1e12) {
      Eigen::MatrixXd Ad = A;
      for (int q = 0; q < np; ++q) Ad(q, q) += lambda * std::max(A(q, q), 1e-12);
      const Eigen::VectorXd delta = Ad.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 10;
        continue;
      }
      ThreeViewModel cand = LmApply(cur, delta);
      if (!(cand.f1 > 0 && cand.f2 > 0 && cand.f3 > 0)) {
        lambda *= 10;
        continue;
      }
      const Eigen::VectorXd rc = LmResiduals(cand, inliers);
      new_cost = rc.squaredNorm();
      if (std::isfinite(new_cost) && new_cost < cost) {
        cur = cand;
        r = rc;
        lambda *= 0.1;
        improved = true;
        break;
      }
      lambda *= 10;
    }
    if (!improved) break;
    const double rel = (cost - new_cost) / std::max(cost, 1e-300);
    cost = new_cost;
    if (rel < 1e-10) break;
  }
  const double score = ScoreModel(cur, triplets, config.sampson_threshold_px);
  // Roundoff-level gains on an exact model are not improvements.
  return score < start_score - 1e-12 * std::max(1.0, start_score) ? cur : start;
}

namespace {

struct Hypothesis {
  bool valid = false;
  ThreeViewModel model;
};

struct IterationTimings {
  double sampling = 0, homography = 0, solver = 0, model = 0, scoring = 0;
};

Hypothesis RunIteration(const std::vector<PointTriplet>& triplets, FocalCase fc,
                        std::optional<double> f1, const RansacConfig& cfg,
                        const SolverOptions& sopts, int iteration, IterationTimings& tm,
                        int& hypotheses) {
  Hypothesis best;
  auto t0 = Clock::now();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed),
                    static_cast<std::uint32_t>(cfg.rng_seed >> 32),
                    static_cast<std::uint32_t>(iteration)};
  std::mt19937_64 rng(seq);
  const int n = static_cast<int>(triplets.size());
  std::array<int, 4> idx;
  for (int k = 0; k < 4; ++k) {
    bool fresh = false;
    while (!fresh) {
      idx[k] = std::uniform_int_distribution<int>(0, n - 1)(rng);
      fresh = true;
      for (int q = 0; q < k; ++q) fresh = fresh && idx[q] != idx[k];
    }
  }
  std::array<PointTriplet, 4> sample;
  std::vector<Vec2> x1, x2, x3;
  for (int k = 0; k < 4; ++k) {
    sample[k] = triplets[idx[k]];
    x1.push_back(sample[k].x1);
    x2.push_back(sample[k].x2);
    x3.push_back(sample[k].x3);
  }
  auto t1 = Clock::now();
  tm.sampling += Ms(t0, t1);
  Homography2D G2, G3;
  try {
    G2 = DltHomography(x1, x2);
    G3 = DltHomography(x1, x3);
  } catch (const Error&) {
    tm.homography += Ms(t1, Clock::now());
    return best;
  }
  auto t2 = Clock::now();
  tm.homography += Ms(t1, t2);
  std::vector<FocalSolution> sols;
  try {
    sols = Solve(fc, G2, G3, f1, sopts);
  } catch (const Error&) {
    tm.solver += Ms(t2, Clock::now());
    return best;
  }
  std::array<double, 3> extent;
  for (int v = 0; v < 3; ++v) extent[v] = cfg.image_sizes[v].extent();
  sols = FovFilter(sols, extent, cfg.fov_filter);
  auto t3 = Clock::now();
  tm.solver += Ms(t2, t3);
  for (const auto& s : sols) {
    auto tb = Clock::now();
    std::vector<ThreeViewModel> models;
    try {
      models = BuildModel(G2, G3, s, sample);
    } catch (const Error&) {
      tm.model += Ms(tb, Clock::now());
      continue;
    }
    auto ts = Clock::now();
    tm.model += Ms(tb, ts);
    for (auto& m : models) {
      ++hypotheses;
      ScoreModel(m, triplets, cfg.sampson_threshold_px);
      if (!best.valid || m.score < best.model.score) {
        best.valid = true;
        best.model = std::move(m);
      }
    }
    tm.scoring += Ms(ts, Clock::now());
  }
  return best;
}

int RequiredIterations(int inliers, int n, double confidence) {
  const double w = static_cast<double>(inliers) / n;
  const double p = std::pow(w, 4);
  if (p >= 1.0) return 0;
  if (p <= 0.0) return std::numeric_limits<int>::max();
  const double k = std::log(1.0 - confidence) / std::log(1.0 - p);
  return k >= static_cast<double>(std::numeric_limits<int>::max())
             ? std::numeric_limits<int>::max()
             : static_cast<int>(std::ceil(k));
}

}  // namespace

EstimationResult Estimate(const std::vector<PointTriplet>& triplets, FocalCase fc,
                          std::optional<double> known_f1, const RansacConfig& cfg) {
  cfg.Validate();
  if (triplets.size() < 4) throw Error(ErrorCode::kInsufficientData, "need at least 4 triplets");
  if (CaseHasKnownF1(fc) && !known_f1) {
    throw Error(ErrorCode::kInvalidArgument, "case requires a known f1");
  }
  const auto start = Clock::now();
  SolverOptions sopts;
  sopts.image_diagonal = cfg.image_sizes[0].known() ? cfg.image_sizes[0].diagonal() : 0.0;
  sopts.ratio_deviation = cfg.ratio_deviation;
  sopts.residual_gate = cfg.residual_gate;
  if (!CaseHasKnownF1(fc)) known_f1.reset();

  EstimationResult result;
  bool have_best = false;
  int required = std::numeric_limits<int>::max();
  const int n = static_cast<int>(triplets.size());
  int it = 0;
  bool stop = false;
  while (!stop && it < cfg.max_iterations) {
    const int count = std::min(cfg.batch_size, cfg.max_iterations - it);
    std::vector<Hypothesis> batch(count);
    std::vector<IterationTimings> tms(count);
    std::vector<int> hyps(count, 0);
    auto work = [&](int lo, int hi) {
      for (int b = lo; b < hi; ++b) {
        batch[b] = RunIteration(triplets, fc, known_f1, cfg, sopts, it + b, tms[b], hyps[b]);
      }
    };
    const int threads = std::min(cfg.num_threads, count);
    if (threads <= 1) {
      work(0, count);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back(work, count * t / threads, count * (t + 1) / threads);
      }
      for (auto& th : pool) th.join();
    }
    // In-order reduction.
    for (int b = 0; b < count; ++b) {
      const int iteration = it + b + 1;
      result.timings.sampling_ms += tms[b].sampling;
      result.timings.homography_ms += tms[b].homography;
      result.timings.solver_ms += tms[b].solver;
      result.timings.model_ms += tms[b].model;
      result.timings.scoring_ms += tms[b].scoring;
      result.hypotheses += hyps[b];
      if (batch[b].valid && (!have_best || batch[b].model.score < result.model.score)) {
        ThreeViewModel m = std::move(batch[b].model);
        if (cfg.local_optimization) {
          const auto tl = Clock::now();
          m = LocalOptimize(m, triplets, cfg);
          result.timings.local_opt_ms += Ms(tl, Clock::now());
          ++result.local_optimizations;
        }
        result.model = std::move(m);
        have_best = true;
        int inl = 0;
        for (bool v : result.model.inlier_mask) inl += v;
        result.inlier_count = inl;
        required = RequiredIterations(inl, n, cfg.confidence);
      }
      result.iterations = iteration;
      if (iteration >= cfg.min_iterations && iteration >= required) {
        stop = true;
        break;
      }
    }
    it += count;
  }
  result.timings.total_ms = Ms(start, Clock::now());
  if (!have_best) throw Error(ErrorCode::kNoModelFound, "every hypothesis was rejected");
  return result;
}

}  // namespace hfocal
