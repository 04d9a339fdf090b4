#include "hfocal/poly_roots.h"

#include "hfocal/types.h"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hfocal {

UniPoly::UniPoly(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

UniPoly UniPoly::Trimmed(std::vector<double> coeffs, double rel) {
  double mx = 0.0;
  for (double c : coeffs) mx = std::max(mx, std::abs(c));
  while (!coeffs.empty() && std::abs(coeffs.back()) <= rel * mx) coeffs.pop_back();
  return UniPoly(std::move(coeffs));
}

double UniPoly::operator()(double x) const {
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
  return v;
}

std::pair<double, double> UniPoly::EvalWithDerivative(double x) const {
  double v = 0.0, d = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    d = d * x + v;
    v = v * x + *it;
  }
  return {v, d};
}

UniPoly UniPoly::Derivative() const {
  if (c_.size() <= 1) return UniPoly();
  std::vector<double> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
  return UniPoly(std::move(d));
}

double UniPoly::MaxAbsCoeff() const {
  double mx = 0.0;
  for (double c : c_) mx = std::max(mx, std::abs(c));
  return mx;
}

UniPoly UniPoly::Scaled(double s) const {
  std::vector<double> c = c_;
  for (double& v : c) v *= s;
  return UniPoly(std::move(c));
}

std::pair<UniPoly, UniPoly> UniPoly::Divide(const UniPoly& a, const UniPoly& b) {
  if (b.is_zero()) throw Error(ErrorCode::kInvalidArgument, "division by zero polynomial");
  if (a.degree() < b.degree()) return {UniPoly(), a};
  std::vector<double> r = a.c_;
  const int db = b.degree();
  std::vector<double> q(a.degree() - db + 1, 0.0);
  for (int k = a.degree() - db; k >= 0; --k) {
    const double coef = r[k + db] / b.lead();
    q[k] = coef;
    for (int i = 0; i <= db; ++i) r[k + i] -= coef * b.c_[i];
    r[k + db] = 0.0;
  }
  r.resize(db);
  return {UniPoly(std::move(q)), UniPoly(std::move(r))};
}

std::vector<UniPoly> SturmChain(const UniPoly& p, double rel_zero) {
  std::vector<UniPoly> chain;
  if (p.is_zero()) return chain;
  chain.push_back(p.Scaled(1.0 / p.MaxAbsCoeff()));
  UniPoly d = p.Derivative();
  if (d.is_zero()) return chain;
  chain.push_back(d.Scaled(1.0 / d.MaxAbsCoeff()));
  while (chain.back().degree() > 0) {
    const UniPoly& a = chain[chain.size() - 2];
    const UniPoly& b = chain.back();
    std::vector<double> rc = UniPoly::Divide(a, b).second.coeffs();
    while (!rc.empty() && std::abs(rc.back()) <= 1e-14 * a.MaxAbsCoeff()) rc.pop_back();
    UniPoly r(std::move(rc));
    // Negligible remainder relative to the dividend.
    if (r.is_zero() || r.MaxAbsCoeff() <= rel_zero * a.MaxAbsCoeff()) break;
    chain.push_back(r.Scaled(-1.0 / r.MaxAbsCoeff()));
  }
  return chain;
}

int SignVariations(const std::vector<UniPoly>& chain, double x) {
  int count = 0;
  int prev = 0;
  for (const auto& q : chain) {
    const double v = q(x);
    const int s = (v > 0) - (v < 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

double CauchyRootBound(const UniPoly& p) {
  if (p.degree() < 1) return 0.0;
  double mx = 0.0;
  for (int i = 0; i < p.degree(); ++i) mx = std::max(mx, std::abs(p[i] / p.lead()));
  return 1.0 + mx;
}

namespace {

bool Converged(double a, double b, double tol) {
  const double mid = 0.5 * (a + b);
  return (b - a) <= tol * std::max(1.0, std::abs(mid)) || mid <= a || mid >= b;
}

// Root of p in (a, b] known to be unique.
double RefineRoot(const UniPoly& p, const std::vector<UniPoly>& chain, double a,
                  double b, double tol) {
  double fa = p(a);
  const double fb = p(b);
  if (fb == 0.0) return b;
  if (fa == 0.0 || (fa > 0) == (fb > 0)) {
    // No usable sign change; bisect on Sturm counts.
    int va = SignVariations(chain, a);
    while (!Converged(a, b, tol)) {
      const double m = 0.5 * (a + b);
      const int vm = SignVariations(chain, m);
      if (va - vm >= 1) {
        b = m;
      } else {
        a = m;
        va = vm;
      }
    }
    return 0.5 * (a + b);
  }
  double x = 0.5 * (a + b);
  double prev_step = b - a;
  for (int it = 0; it < 400; ++it) {
    const auto [fx, dfx] = p.EvalWithDerivative(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (fa > 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
    }
    double next = (dfx != 0.0) ? x - fx / dfx : a - 1.0;
    // Newton only while it lands inside and at least halves the step.
    if (!(next > a && next < b) || std::abs(next - x) > 0.5 * prev_step) {
      next = 0.5 * (a + b);
    }
    const double step = std::abs(next - x);
    prev_step = step;
    x = next;
    if (step <= tol * std::max(1.0, std::abs(x)) || Converged(a, b, tol)) break;
  }
  return x;
}

void Isolate(const UniPoly& p, const std::vector<UniPoly>& chain, double a,
             double b, int va, int vb, double tol, int depth,
             std::vector<double>& out) {
  const int n = va - vb;
  if (n <= 0) return;
  if (n == 1) {
    out.push_back(RefineRoot(p, chain, a, b, tol));
    return;
  }
  if (depth > 200 || Converged(a, b, tol)) {
    out.push_back(0.5 * (a + b));
    return;
  }
  const double m = 0.5 * (a + b);
  const int vm = SignVariations(chain, m);
  Isolate(p, chain, a, m, va, vm, tol, depth + 1, out);
  Isolate(p, chain, m, b, vm, vb, tol, depth + 1, out);
}

std::vector<double> BisectionOnly(const UniPoly& p, double lo, double hi, double tol) {
  std::vector<double> grid;
  constexpr int kN = 4096;
  for (int i = 0; i <= kN; ++i) grid.push_back(lo + (hi - lo) * i / kN);
  if (lo > 0) {
    const double r = std::log(hi / lo);
    for (int i = 1; i < kN; ++i) grid.push_back(lo * std::exp(r * i / kN));
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> roots;
  double prev = p(grid[0]);
  for (size_t i = 1; i < grid.size(); ++i) {
    const double cur = p(grid[i]);
    if (cur == 0.0) {
      roots.push_back(grid[i]);
    } else if (prev != 0.0 && (prev > 0) != (cur > 0)) {
      double a = grid[i - 1], b = grid[i];
      double fa = prev;
      while (!Converged(a, b, tol)) {
        const double m = 0.5 * (a + b);
        const double fm = p(m);
        if ((fm > 0) == (fa > 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  return roots;
}

bool HasNearMultipleRoot(const UniPoly& p) {
  const auto r = CompanionRoots(p);
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = i + 1; j < r.size(); ++j)
      if (std::abs(r[i] - r[j]) <= 1e-6 * std::max(1.0, std::abs(r[i]))) return true;
  return false;
}

}  // namespace

RealRoots SturmRealRoots(const UniPoly& p_in, double lo, double hi, double tol) {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "empty root interval");
  RealRoots result;
  UniPoly p = UniPoly::Trimmed(p_in.coeffs());
  if (p.is_zero()) throw Error(ErrorCode::kInvalidArgument, "zero polynomial");
  if (p.degree() == 0) return result;
  p = p.Scaled(1.0 / p.MaxAbsCoeff());

  auto chain = SturmChain(p);
  // A small trailing remainder without a clustered root pair is genuine.
  if (chain.back().degree() > 0 && !HasNearMultipleRoot(p)) chain = SturmChain(p, 0.0);
  if (chain.back().degree() > 0) {
    // Nontrivial gcd(p, p'): continue with the square-free part.
    result.square_free_reduced = true;
    p = UniPoly::Trimmed(UniPoly::Divide(p, chain.back()).first.coeffs());
    p = p.Scaled(1.0 / p.MaxAbsCoeff());
    chain = SturmChain(p);
    if (chain.back().degree() > 0) {
      result.low_confidence = true;
      result.roots = BisectionOnly(p, lo, hi, tol);
      return result;
    }
  }
  if (p.degree() == 0) return result;
  Isolate(p, chain, lo, hi, SignVariations(chain, lo), SignVariations(chain, hi),
          tol, 0, result.roots);
  std::sort(result.roots.begin(), result.roots.end());
  return result;
}

std::vector<std::complex<double>> CompanionRoots(const UniPoly& p_in) {
  const UniPoly p = UniPoly::Trimmed(p_in.coeffs());
  const int n = p.degree();
  if (n < 1) return {};
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p.lead();
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

Eigen::MatrixXd CubicMatrixPencil::Evaluate(double x) const {
  return C[0] + x * (C[1] + x * (C[2] + x * C[3]));
}

namespace {

Companion AssembleCompanion(const std::array<Eigen::MatrixXd, 4>& C) {
  const int k = static_cast<int>(C[0].rows());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(C[0].transpose());
  if (!(lu.rcond() > 1e-12)) {
    throw Error(ErrorCode::kSingularC0, "C0 is not invertible");
  }
  Companion comp;
  comp.D = Eigen::MatrixXd::Zero(3 * k, 3 * k);
  comp.D.block(0, k, k, k).setIdentity();
  comp.D.block(k, 2 * k, k, k).setIdentity();
  comp.D.block(2 * k, 0, k, k) = -lu.solve(C[3].transpose());
  comp.D.block(2 * k, k, k, k) = -lu.solve(C[2].transpose());
  comp.D.block(2 * k, 2 * k, k, k) = -lu.solve(C[1].transpose());
  return comp;
}

}  // namespace

Companion BuildCompanion(const CubicMatrixPencil& pencil) {
  return AssembleCompanion(pencil.C);
}

Companion DeflateZeroColumns(const CubicMatrixPencil& pencil, int expected_rank) {
  const int k = pencil.size();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pencil.C[3], Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  }
  if (expected_rank >= 0 && rank != expected_rank) {
    throw Error(ErrorCode::kUnexpectedRank,
                "leading block has rank " + std::to_string(rank));
  }
  const Eigen::MatrixXd T = svd.matrixU().transpose();
  std::array<Eigen::MatrixXd, 4> C;
  for (int i = 0; i < 4; ++i) C[i] = T * pencil.C[i];
  C[3].bottomRows(k - rank).setZero();

  Companion full = AssembleCompanion(C);
  std::vector<int> keep;
  for (int i = 0; i < 3 * k; ++i) {
    if (i < rank || i >= k) keep.push_back(i);
  }
  Companion out;
  out.removed = k - rank;
  out.D.resize(keep.size(), keep.size());
  for (size_t r = 0; r < keep.size(); ++r) {
    for (size_t c = 0; c < keep.size(); ++c) out.D(r, c) = full.D(keep[r], keep[c]);
  }
  return out;
}

PolyEigResult PolyEigCubic(const CubicMatrixPencil& pencil, const PolyEigOptions& options) {
  const Companion comp = options.deflate
                             ? DeflateZeroColumns(pencil, options.expected_rank)
                             : BuildCompanion(pencil);
  PolyEigResult result;
  result.companion_size = static_cast<int>(comp.D.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp.D, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kIllConditioned, "eigenvalue iteration did not converge");
  }
  const auto& gam = es.eigenvalues();
  double gmax = 0.0;
  for (int i = 0; i < gam.size(); ++i) gmax = std::max(gmax, std::abs(gam(i)));
  for (int i = 0; i < gam.size(); ++i) {
    const std::complex<double> g = gam(i);
    if (std::abs(g) <= 1e-10 * gmax) continue;
    const std::complex<double> x = 1.0 / g;
    result.eigenvalues.push_back(x);
    if (std::abs(x.imag()) > options.imag_tol * std::abs(x) || x.real() <= 0) continue;
    if (!options.null_vectors) {
      result.real_positive.push_back({x.real(), Eigen::VectorXd()});
      continue;
    }
    try {
      auto v = NullVector(pencil.Evaluate(x.real()), options.null_threshold);
      if (v) result.real_positive.push_back({x.real(), *v});
    } catch (const Error&) {
      // Ambiguous null space; not a usable root.
    }
  }
  std::sort(result.real_positive.begin(), result.real_positive.end(),
            [](const PolyEigRoot& a, const PolyEigRoot& b) { return a.value < b.value; });
  return result;
}

PolyEigResult PolyEigCubicGeneralized(const CubicMatrixPencil& pencil,
                                      const PolyEigOptions& options) {
  const int k = pencil.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * k, 3 * k);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(3 * k, 3 * k);
  A.block(0, k, k, k).setIdentity();
  A.block(k, 2 * k, k, k).setIdentity();
  for (int i = 0; i < 3; ++i) A.block(2 * k, i * k, k, k) = -pencil.C[i];
  B.block(2 * k, 2 * k, k, k) = pencil.C[3];
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(A, B, false);
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorCode::kIllConditioned, "generalized eigenvalue iteration failed");
  }
  PolyEigResult result;
  result.companion_size = 3 * k;
  const double scale = std::max(A.norm(), B.norm());
  for (int i = 0; i < 3 * k; ++i) {
    const std::complex<double> a = ges.alphas()(i);
    const double b = ges.betas()(i);
    if (std::abs(b) <= 1e-12 * scale || std::abs(a) == 0.0) continue;
    const std::complex<double> x = a / b;
    result.eigenvalues.push_back(x);
    if (std::abs(x.imag()) > options.imag_tol * std::abs(x) || x.real() <= 0) continue;
    if (!options.null_vectors) {
      result.real_positive.push_back({x.real(), Eigen::VectorXd()});
      continue;
    }
    try {
      auto v = NullVector(pencil.Evaluate(x.real()), options.null_threshold);
      if (v) result.real_positive.push_back({x.real(), *v});
    } catch (const Error&) {
    }
  }
  std::sort(result.real_positive.begin(), result.real_positive.end(),
            [](const PolyEigRoot& a, const PolyEigRoot& b) { return a.value < b.value; });
  return result;
}

Eigen::VectorXd SmallestRightSingularVector(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  Eigen::VectorXd v = svd.matrixV().col(M.cols() - 1);
  if (std::abs(v(0)) > 1e-8) {
    v /= v(0);
  } else {
    v.normalize();
  }
  return v;
}

std::optional<Eigen::VectorXd> NullVector(const Eigen::MatrixXd& M, double rel_threshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const int n = static_cast<int>(M.cols());
  if (n == 0) return std::nullopt;
  // Non-square inputs with more columns than rows have implicit zero
  // singular values.
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  auto sigma = [&](int i) { return i < sv.size() ? sv(i) : 0.0; };
  if (smax == 0.0) {
    throw Error(ErrorCode::kRankDeficiencyMismatch, "zero matrix");
  }
  if (sigma(n - 1) >= rel_threshold * smax) return std::nullopt;
  if (n >= 2 && sigma(n - 2) < rel_threshold * smax) {
    throw Error(ErrorCode::kRankDeficiencyMismatch, "null space dimension exceeds one");
  }
  Eigen::VectorXd v = svd.matrixV().col(n - 1);
  if (std::abs(v(0)) > 1e-8) {
    v /= v(0);
  } else {
    v.normalize();
  }
  return v;
}

}  // namespace hfocal
