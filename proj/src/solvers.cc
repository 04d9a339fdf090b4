#include "hfocal/solvers.h"

#include "hfocal/focal_constraints.h"
#include "hfocal/poly_roots.h"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hfocal {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

struct Scaled {
  Homography2D G2, G3;
  double s = 1.0;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;  // 0: unbounded
};

// Without an image size, a known f1 sets the working scale.
Scaled Rescale(const Homography2D& G2, const Homography2D& G3, const SolverOptions& o,
               double f1_known = 0.0) {
  Scaled out;
  if (o.image_diagonal > 0 || f1_known > 0) {
    out.s = o.image_diagonal > 0 ? o.image_diagonal / 2.0 : f1_known;
    const Mat3 S = Eigen::Vector3d(out.s, out.s, 1.0).asDiagonal();
    const Mat3 Si = Eigen::Vector3d(1.0 / out.s, 1.0 / out.s, 1.0).asDiagonal();
    out.G2 = Homography2D(Si * G2.matrix() * S);
    out.G3 = Homography2D(Si * G3.matrix() * S);
    if (o.fov_gate && o.image_diagonal > 0) {
      const double fmin = FocalFromFov(2.0, o.fov_max_deg);
      const double fmax = FocalFromFov(2.0, o.fov_min_deg);
      out.alpha_lo = fmin * fmin;
      out.alpha_hi = fmax * fmax;
    }
  } else {
    out.G2 = G2;
    out.G3 = G3;
  }
  return out;
}

const GeneratorTable& Table(const SolverOptions& o) {
  return o.table ? *o.table : GeneratorTable::Builtin();
}

bool InFov(const Scaled& sc, double alpha) {
  if (sc.alpha_hi <= 0) return alpha > 0;
  return alpha >= sc.alpha_lo && alpha <= sc.alpha_hi;
}

double MaxResidual(const GeneratorTable& table, const Homography2D& G2,
                   const Homography2D& G3, double f1, double f2, double f3) {
  const CameraIntrinsics K1(f1);
  const auto g = EvaluateGenerators(table, ComputeQ(G2, K1, CameraIntrinsics(f2)),
                                    ComputeQ(G3, K1, CameraIntrinsics(f3)));
  double r = 0.0;
  for (double v : g) r = std::max(r, std::abs(v));
  return r;
}

bool RealNormal(const Homography2D& G2, const Homography2D& G3, double f1, double f2,
                double f3) {
  const CameraIntrinsics K1(f1);
  return HasRealCommonNormal(ComputeQ(G2, K1, CameraIntrinsics(f2)).Matrix(),
                             ComputeQ(G3, K1, CameraIntrinsics(f3)).Matrix());
}

void CheckDegenerate(const ExpandedSystem& sys, const SolverOptions& o) {
  if (!(sys.RelativeSize() > o.degenerate_threshold)) {
    throw Error(ErrorCode::kDegenerateMotion, "constraint system vanishes identically");
  }
}

// Gauss-Newton refinement of a root on all univariate constraints.
double PolishUnivariate(const std::vector<UniPoly>& polys, double alpha) {
  auto eval = [&](double a, double& cost, double& grad, double& hess) {
    cost = grad = hess = 0.0;
    for (const auto& p : polys) {
      const auto [v, d] = p.EvalWithDerivative(a);
      cost += v * v;
      grad += d * v;
      hess += d * d;
    }
  };
  double cost, grad, hess;
  eval(alpha, cost, grad, hess);
  for (int it = 0; it < 8 && hess > 0; ++it) {
    const double step = -grad / hess;
    if (!std::isfinite(step) || std::abs(step) > 0.1 * alpha) break;
    double c2, g2, h2;
    eval(alpha + step, c2, g2, h2);
    if (!(c2 < cost)) break;
    alpha += step;
    cost = c2;
    grad = g2;
    hess = h2;
    if (std::abs(step) <= 1e-15 * alpha) break;
  }
  return alpha;
}

// Gauss-Newton on generators evaluated directly from Q, which avoids the
// cancellation of the expanded coefficients for large focals.
double PolishDirect(const GeneratorTable& table, const Homography2D& G2,
                    const Homography2D& G3, double f1_known, double f) {
  auto eval = [&](double x) {
    const CameraIntrinsics K1(f1_known > 0 ? f1_known : x), Kx(x);
    const auto g = EvaluateGeneratorsRaw(table, ComputeQ(G2, K1, Kx), ComputeQ(G3, K1, Kx));
    return Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size())).eval();
  };
  Eigen::VectorXd r = eval(f);
  double cost = r.squaredNorm();
  for (int it = 0; it < 6; ++it) {
    const double h = 1e-6 * f;
    const Eigen::VectorXd d = (eval(f + h) - eval(f - h)) / (2.0 * h);
    const double dd = d.squaredNorm();
    if (!(dd > 0)) break;
    const double step = -d.dot(r) / dd;
    if (!std::isfinite(step) || std::abs(step) > 0.01 * f) break;
    const Eigen::VectorXd rn = eval(f + step);
    if (!(rn.squaredNorm() < cost)) break;
    f += step;
    r = rn;
    cost = r.squaredNorm();
    if (std::abs(step) <= 1e-15 * f) break;
  }
  return f;
}

// Cases I and II.
std::vector<FocalSolution> SolveUnivariate(FocalCase fc, const Homography2D& G2,
                                           const Homography2D& G3, double f1_known,
                                           const SolverOptions& o, SolverStats* stats) {
  SolverStats local;
  SolverStats& st = stats ? *stats : local;
  st = SolverStats();
  const GeneratorTable& table = Table(o);
  const bool known = fc == FocalCase::kII;
  const Scaled sc = Rescale(G2, G3, o, known ? f1_known : 0.0);
  const double f1s = known ? f1_known / sc.s : 0.0;
  const ExpandedSystem sys =
      known ? ExpandCase2(sc.G2, sc.G3, f1s, table) : ExpandCase1(sc.G2, sc.G3, table);
  CheckDegenerate(sys, o);
  const auto coeffs = UnivariateCoefficients(sys);
  const int degree = known ? 6 : 9;
  const UniPoly p = UniPoly::Trimmed(coeffs[SelectGenerator(coeffs, degree)]);
  if (p.degree() < 1) {
    throw Error(ErrorCode::kDegenerateMotion, "selected constraint is constant");
  }
  double lo = 0.0, hi = CauchyRootBound(p);
  if (sc.alpha_hi > 0) {
    lo = sc.alpha_lo * (1 - 1e-9);
    hi = std::min(hi, sc.alpha_hi * (1 + 1e-9));
  }
  if (!(hi > lo)) throw Error(ErrorCode::kNoRealRoot, "empty search interval");
  const RealRoots rr = SturmRealRoots(p, lo, hi, 1e-14);
  std::vector<UniPoly> all;
  for (const auto& c : coeffs) {
    UniPoly q = UniPoly::Trimmed(c);
    if (q.degree() >= 1) all.push_back(q.Scaled(1.0 / q.MaxAbsCoeff()));
  }

  struct Cand {
    double alpha;
    double residual;
  };
  std::vector<Cand> cands;
  for (double a0 : rr.roots) {
    if (a0 <= 0) continue;
    ++st.raw;
    const double f = PolishDirect(table, sc.G2, sc.G3, f1s, std::sqrt(PolishUnivariate(all, a0)));
    const double a = f * f;
    const double f1 = known ? f1s : f;
    cands.push_back({a, MaxResidual(table, sc.G2, sc.G3, f1, f, f)});
  }
  // Clustered roots polish to the same point; keep the better one.
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.alpha < b.alpha; });
  std::vector<Cand> merged;
  for (const auto& c : cands) {
    if (!merged.empty() && c.alpha - merged.back().alpha <= 1e-5 * c.alpha) {
      if (c.residual < merged.back().residual) merged.back() = c;
    } else {
      merged.push_back(c);
    }
  }
  cands.swap(merged);
  double rmin = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) rmin = std::min(rmin, c.residual);

  std::vector<FocalSolution> out;
  for (const auto& c : cands) {
    if (c.residual > std::max(o.consistency_floor, o.consistency_ratio * rmin)) {
      ++st.residual_rejected;
      continue;
    }
    const double f = std::sqrt(c.alpha);
    const double f1 = known ? f1s : f;
    if (o.real_normal_filter && !RealNormal(sc.G2, sc.G3, f1, f, f)) {
      ++st.normal_rejected;
      continue;
    }
    if (!InFov(sc, c.alpha)) {
      ++st.fov_rejected;
      continue;
    }
    out.push_back({fc, known ? f1_known : f * sc.s, f * sc.s, f * sc.s});
  }
  st.returned = static_cast<int>(out.size());
  if (out.empty()) throw Error(ErrorCode::kNoRealRoot, "no admissible root");
  return out;
}

// Gauss-Newton refinement of (alpha, beta) on all rows of the system.
// Returns the remaining residual after a linear correction, relative to
// |J| * max(alpha, beta).
double Polish(const ExpandedSystem& sys, double& alpha, double& beta) {
  const int n = static_cast<int>(sys.polys.size());
  std::vector<double> scale(n);
  for (int i = 0; i < n; ++i) {
    const double m = sys.polys[i].c.cwiseAbs().maxCoeff();
    scale[i] = m > 0 ? 1.0 / m : 0.0;
  }
  auto eval = [&](double a, double b, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(n);
    if (J) J->resize(n, 2);
    for (int i = 0; i < n; ++i) {
      const auto& c = sys.polys[i].c;
      double v = 0, da = 0, db = 0;
      for (int p = 0; p < c.rows(); ++p) {
        const double ap = std::pow(a, p);
        const double dap = p > 0 ? p * std::pow(a, p - 1) : 0.0;
        for (int q = 0; q < c.cols(); ++q) {
          const double bq = std::pow(b, q);
          const double dbq = q > 0 ? q * std::pow(b, q - 1) : 0.0;
          v += c(p, q) * ap * bq;
          da += c(p, q) * dap * bq;
          db += c(p, q) * ap * dbq;
        }
      }
      r(i) = v * scale[i];
      if (J) {
        (*J)(i, 0) = da * scale[i];
        (*J)(i, 1) = db * scale[i];
      }
    }
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  eval(alpha, beta, r, &J);
  double cost = r.squaredNorm();
  for (int it = 0; it < 8; ++it) {
    const Eigen::Vector2d step = J.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;
    const double a = alpha + step(0), b = beta + step(1);
    if (a <= 0 || b <= 0 || std::abs(step(0)) > 0.1 * alpha ||
        std::abs(step(1)) > 0.1 * beta) {
      break;
    }
    Eigen::VectorXd rn;
    eval(a, b, rn, nullptr);
    const double cn = rn.squaredNorm();
    if (!(cn < cost)) break;
    alpha = a;
    beta = b;
    cost = cn;
    eval(alpha, beta, r, &J);
    if (step.norm() <= 1e-15 * std::max(alpha, beta)) break;
  }
  const double jn = J.norm() * std::max(alpha, beta);
  if (!(jn > 0)) return std::numeric_limits<double>::infinity();
  const Eigen::Vector2d step = J.colPivHouseholderQr().solve(-r);
  return (r + J * step).norm() / jn;
}

struct BetaEstimate {
  double beta = 0.0;
  double deviation = std::numeric_limits<double>::infinity();
};

BetaEstimate BetaFromNullVector(const Eigen::VectorXd& v) {
  BetaEstimate est;
  if (std::abs(v(0)) <= 1e-8 || std::abs(v(0) - 1.0) > 1e-12) return est;
  std::vector<double> ratios;
  for (int i = 0; i + 1 < v.size(); ++i) {
    if (v(i) == 0.0) return est;
    ratios.push_back(v(i + 1) / v(i));
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const size_t m = sorted.size();
  est.beta = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  if (est.beta <= 0) return est;
  est.deviation = 0.0;
  for (double r : ratios) est.deviation = std::max(est.deviation, std::abs(r / est.beta - 1.0));
  return est;
}

std::vector<FocalSolution> FinishBivariate(FocalCase fc, const Scaled& sc,
                                           const ExpandedSystem& sys,
                                           const std::vector<std::pair<double, Eigen::VectorXd>>& roots,
                                           double f1_known, const SolverOptions& o,
                                           const GeneratorTable& table, SolverStats& st) {
  const bool known = fc == FocalCase::kIV;
  std::vector<FocalSolution> out;
  for (const auto& [alpha0, v] : roots) {
    const BetaEstimate be = BetaFromNullVector(v);
    if (be.beta <= 0 || be.deviation > o.ratio_deviation) {
      ++st.structure_rejected;
      continue;
    }
    double alpha = alpha0, beta = be.beta;
    const double inconsistency = Polish(sys, alpha, beta);
    const double f1s = known ? f1_known / sc.s : std::sqrt(alpha);
    const double f2s = known ? std::sqrt(alpha) : std::sqrt(beta);
    const double f3s = std::sqrt(beta);
    if (inconsistency > o.residual_gate) {
      ++st.residual_rejected;
      continue;
    }
    // Without rotation, scaling all focals together maps solutions to
    // solutions.
    if (!known) {
      const double along = MaxResidual(table, sc.G2, sc.G3, 1.1 * f1s, 1.1 * f2s, 1.1 * f3s);
      const double off = MaxResidual(table, sc.G2, sc.G3, 1.1 * f1s, f2s / 1.1, f3s / 1.1);
      if (along < 1e-7 * off) {
        throw Error(ErrorCode::kDegenerateMotion, "solutions form a one-parameter family");
      }
    }
    if (o.real_normal_filter && !RealNormal(sc.G2, sc.G3, f1s, f2s, f3s)) {
      ++st.normal_rejected;
      continue;
    }
    if ((!known && !InFov(sc, alpha)) || !InFov(sc, f2s * f2s) || !InFov(sc, beta)) {
      ++st.fov_rejected;
      continue;
    }
    out.push_back({fc, known ? f1_known : f1s * sc.s, f2s * sc.s, f3s * sc.s});
  }
  std::sort(out.begin(), out.end(), [](const FocalSolution& a, const FocalSolution& b) {
    return a.f1 != b.f1 ? a.f1 < b.f1 : a.f2 < b.f2;
  });
  // Repeated eigenvalues polish to the same point.
  auto same = [](const FocalSolution& a, const FocalSolution& b) {
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::abs(y); };
    return close(a.f1, b.f1) && close(a.f2, b.f2) && close(a.f3, b.f3);
  };
  out.erase(std::unique(out.begin(), out.end(), same), out.end());
  st.returned = static_cast<int>(out.size());
  if (out.empty()) throw Error(ErrorCode::kNoRealRoot, "no admissible root");
  return out;
}

// Pencil in y with x = shift + y; the leading block is unchanged.
CubicMatrixPencil ShiftPencil(const std::array<Eigen::MatrixXd, 4>& C, double shift) {
  static constexpr double kBinom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  CubicMatrixPencil out;
  for (int j = 0; j < 4; ++j) {
    out.C[j] = Eigen::MatrixXd::Zero(C[0].rows(), C[0].cols());
    for (int k = j; k < 4; ++k) out.C[j] += kBinom[k][j] * std::pow(shift, k - j) * C[k];
  }
  return out;
}

double Rcond(const Eigen::MatrixXd& A) {
  return Eigen::PartialPivLU<Eigen::MatrixXd>(A).rcond();
}

// Candidate evaluation points (scaled focal units) used when the constant
// block of a pencil is close to singular.
constexpr double kShiftAlphas[] = {0.25, 1.0, 4.0, 16.0};
constexpr double kMinRcond = 1e-6;

PolyEigResult RunPolyEig(const CubicMatrixPencil& pencil, const PolyEigOptions& opts,
                         SolverStats& st) {
  try {
    return PolyEigCubic(pencil, opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUnexpectedRank) {
      throw Error(ErrorCode::kRejectSample, e.what());
    }
    if (e.code() != ErrorCode::kSingularC0 && e.code() != ErrorCode::kIllConditioned) throw;
  }
  st.used_fallback = true;
  try {
    return PolyEigCubicGeneralized(pencil, opts);
  } catch (const Error& e) {
    throw Error(ErrorCode::kRejectSample, e.what());
  }
}

}  // namespace

double FocalFromFov(double extent_px, double fov_deg) {
  return 0.5 * extent_px / std::tan(0.5 * fov_deg * kDegToRad);
}

double FovFromFocal(double extent_px, double focal) {
  return 2.0 * std::atan(0.5 * extent_px / focal) / kDegToRad;
}

std::vector<FocalSolution> SolveFFF(const Homography2D& G2, const Homography2D& G3,
                                    const SolverOptions& options, SolverStats* stats) {
  return SolveUnivariate(FocalCase::kI, G2, G3, 0.0, options, stats);
}

std::vector<FocalSolution> SolveFF(const Homography2D& G2, const Homography2D& G3,
                                   double f1, const SolverOptions& options,
                                   SolverStats* stats) {
  if (!(f1 > 0) || !std::isfinite(f1)) {
    throw Error(ErrorCode::kInvalidArgument, "known focal must be positive");
  }
  return SolveUnivariate(FocalCase::kII, G2, G3, f1, options, stats);
}

std::vector<FocalSolution> SolveFRR(const Homography2D& G2, const Homography2D& G3,
                                    const SolverOptions& o, SolverStats* stats) {
  SolverStats local;
  SolverStats& st = stats ? *stats : local;
  st = SolverStats();
  const GeneratorTable& table = Table(o);
  const Scaled sc = Rescale(G2, G3, o);
  const ExpandedSystem sys = ExpandCase3(sc.G2, sc.G3, table);
  CheckDegenerate(sys, o);
  const Eigen::MatrixXd M = CoefficientMatrix(sys);
  const int k = static_cast<int>(M.rows());
  const int nb = static_cast<int>(M.cols()) / 4;
  if (nb != k) throw Error(ErrorCode::kRejectSample, "unexpected system shape");

  // The alpha^0 block is the rank-deficient one; solve in mu = 1 / alpha,
  // shifted to mu = tau + y if the inverted block is close to singular.
  CubicMatrixPencil C;
  std::array<Eigen::MatrixXd, 4> rev;
  for (int i = 0; i < 4; ++i) {
    C.C[i] = M.block(0, i * nb, k, nb);
    rev[i] = M.block(0, (3 - i) * nb, k, nb);
  }
  double tau = 0.0;
  if (Rcond(rev[0]) < kMinRcond) {
    double best = Rcond(rev[0]);
    for (double a : kShiftAlphas) {
      const double rc = Rcond(ShiftPencil(rev, 1.0 / a).C[0]);
      if (rc > best) {
        best = rc;
        tau = 1.0 / a;
      }
    }
  }
  PolyEigOptions opts;
  opts.deflate = true;
  opts.expected_rank = 4;
  opts.null_vectors = false;
  opts.imag_tol = 1e-8;
  const PolyEigResult pe = RunPolyEig(ShiftPencil(rev, tau), opts, st);

  std::vector<std::pair<double, Eigen::VectorXd>> roots;
  for (const auto& x : pe.eigenvalues) {
    if (std::abs(x.imag()) > opts.imag_tol * std::abs(x)) continue;
    const double mu = tau + x.real();
    if (!(mu > 0)) continue;
    const double alpha = 1.0 / mu;
    roots.emplace_back(alpha, SmallestRightSingularVector(C.Evaluate(alpha)));
  }
  st.raw = static_cast<int>(roots.size());
  return FinishBivariate(FocalCase::kIII, sc, sys, roots, 0.0, o, table, st);
}

std::vector<FocalSolution> SolveFR(const Homography2D& G2, const Homography2D& G3,
                                   double f1, const SolverOptions& o, SolverStats* stats) {
  if (!(f1 > 0) || !std::isfinite(f1)) {
    throw Error(ErrorCode::kInvalidArgument, "known focal must be positive");
  }
  SolverStats local;
  SolverStats& st = stats ? *stats : local;
  st = SolverStats();
  const GeneratorTable& table = Table(o);
  const Scaled sc = Rescale(G2, G3, o, f1);
  const ExpandedSystem sys = ExpandCase4(sc.G2, sc.G3, f1 / sc.s, table);
  CheckDegenerate(sys, o);
  const Eigen::MatrixXd M = CoefficientMatrix(sys);
  const int rows = static_cast<int>(M.rows());
  const int nb = static_cast<int>(M.cols()) / 4;
  std::array<Eigen::MatrixXd, 4> A;
  for (int i = 0; i < 4; ++i) A[i] = M.block(0, i * nb, rows, nb);

  // Four rows maximizing the smallest singular value of the inverted block,
  // which is A(shift); the shift stays 0 unless that block is near singular.
  auto choose_rows = [&](const Eigen::MatrixXd& B0, std::vector<int>& rows_out) {
    double best_sigma = -1.0;
    std::vector<int> sel(nb);
    auto rec = [&](auto&& self, int start, int depth) -> void {
      if (depth == nb) {
        Eigen::MatrixXd B(nb, nb);
        for (int i = 0; i < nb; ++i) B.row(i) = B0.row(sel[i]);
        const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues();
        const double s = sv(0) > 0 ? sv(nb - 1) / sv(0) : 0.0;
        if (s > best_sigma) {
          best_sigma = s;
          rows_out = sel;
        }
        return;
      }
      for (int i = start; i < rows; ++i) {
        sel[depth] = i;
        self(self, i + 1, depth + 1);
      }
    };
    rec(rec, 0, 0);
    return best_sigma;
  };
  std::vector<int> best_rows;
  double shift = 0.0;
  double quality = choose_rows(A[0], best_rows);
  if (quality < kMinRcond) {
    for (double a : kShiftAlphas) {
      std::vector<int> r;
      const double q = choose_rows(ShiftPencil(A, a).C[0], r);
      if (q > quality) {
        quality = q;
        shift = a;
        best_rows = r;
      }
    }
  }

  std::array<Eigen::MatrixXd, 4> sub;
  for (int i = 0; i < 4; ++i) {
    sub[i].resize(nb, nb);
    for (int r = 0; r < nb; ++r) sub[i].row(r) = A[i].row(best_rows[r]);
  }
  PolyEigOptions opts;
  opts.null_vectors = false;
  const PolyEigResult pe = RunPolyEig(ShiftPencil(sub, shift), opts, st);

  std::vector<std::pair<double, Eigen::VectorXd>> roots;
  for (const auto& x : pe.eigenvalues) {
    if (std::abs(x.imag()) > opts.imag_tol * std::abs(x)) continue;
    const double alpha = shift + x.real();
    if (!(alpha > 0)) continue;
    const Eigen::MatrixXd full =
        A[0] + alpha * (A[1] + alpha * (A[2] + alpha * A[3]));
    roots.emplace_back(alpha, SmallestRightSingularVector(full));
  }
  st.raw = static_cast<int>(roots.size());
  return FinishBivariate(FocalCase::kIV, sc, sys, roots, f1, o, table, st);
}

std::vector<FocalSolution> Solve(FocalCase fc, const Homography2D& G2,
                                 const Homography2D& G3, std::optional<double> f1,
                                 const SolverOptions& options, SolverStats* stats) {
  if (CaseHasKnownF1(fc) && !f1) {
    throw Error(ErrorCode::kInvalidArgument, "case requires a known f1");
  }
  switch (fc) {
    case FocalCase::kI: return SolveFFF(G2, G3, options, stats);
    case FocalCase::kII: return SolveFF(G2, G3, *f1, options, stats);
    case FocalCase::kIII: return SolveFRR(G2, G3, options, stats);
    case FocalCase::kIV: return SolveFR(G2, G3, *f1, options, stats);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown case");
}

std::vector<Vec3> NormalsFromQ(const Mat3& Q) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(Q);
  const Vec3 lam = es.eigenvalues();  // ascending
  const Mat3 V = es.eigenvectors();
  const double a = std::sqrt(std::max(lam(2) - lam(1), 0.0));
  const double b = std::sqrt(std::max(lam(1) - lam(0), 0.0));
  std::vector<Vec3> out;
  for (double sgn : {1.0, -1.0}) {
    Vec3 n = a * V.col(2) + sgn * b * V.col(0);
    if (n.norm() > 0) out.push_back(n.normalized());
  }
  return out;
}

bool HasRealCommonNormal(const Mat3& Q2, const Mat3& Q3) {
  Eigen::SelfAdjointEigenSolver<Mat3> e2(Q2), e3(Q3);
  const double n2 = Q2.norm(), n3 = Q3.norm();
  double r[3][3];
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Vec3 k2 = e2.eigenvectors().col(i);
    for (int j = 0; j < 3; ++j) {
      const Vec3 k3 = e3.eigenvectors().col(j);
      r[i][j] = std::abs(k2.dot(Q3 * k2) - e3.eigenvalues()(j)) / n3 +
                std::abs(k3.dot(Q2 * k3) - e2.eigenvalues()(i)) / n2;
      best = std::min(best, r[i][j]);
    }
  }
  return r[1][1] <= 10.0 * best + 1e-12;
}

double OracleCost(const Homography2D& G2, const Homography2D& G3, double f1, double f2,
                  double f3) {
  const CameraIntrinsics K1(f1);
  std::array<std::vector<Vec3>, 2> normals;
  const std::array<std::pair<const Homography2D*, double>, 2> views = {
      std::make_pair(&G2, f2), std::make_pair(&G3, f3)};
  for (int v = 0; v < 2; ++v) {
    Mat3 H = CameraIntrinsics(views[v].second).Kinv() * views[v].first->matrix() * K1.K();
    const Vec3 sv = Eigen::JacobiSVD<Mat3>(H).singularValues();
    if (sv(0) - sv(2) <= 1e-9 * sv(0)) {
      throw Error(ErrorCode::kDecompositionFailed, "homography is a scaled rotation");
    }
    H /= sv(1);
    normals[v] = NormalsFromQ(H.transpose() * H);
  }
  double best = M_PI;
  for (const auto& a : normals[0]) {
    for (const auto& b : normals[1]) {
      best = std::min(best, std::atan2(a.cross(b).norm(), std::abs(a.dot(b))));
    }
  }
  return best;
}

}  // namespace hfocal
