#include "hfocal/focal_constraints.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hfocal {

namespace {

constexpr int kRow[6] = {0, 0, 0, 1, 1, 2};
constexpr int kCol[6] = {0, 1, 2, 1, 2, 2};

using Poly = std::vector<double>;

// Monomials of degree d built from degree d-1: m = parent * q[var].
struct MonomialRecursion {
  std::vector<int> parent;
  std::vector<int> var;
};

const MonomialRecursion& Recursion(int degree) {
  static std::mutex mu;
  static std::map<int, MonomialRecursion> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  MonomialRecursion rec;
  const auto& monos = GeneratorTable::Monomials(degree);
  if (degree > 0) {
    const auto& lower = GeneratorTable::Monomials(degree - 1);
    for (const auto& e : monos) {
      int k = 0;
      while (e[k] == 0) ++k;
      auto p = e;
      --p[k];
      const auto pos = std::lower_bound(lower.begin(), lower.end(), p,
                                        std::greater<std::array<int, 6>>());
      rec.parent.push_back(static_cast<int>(pos - lower.begin()));
      rec.var.push_back(k);
    }
  }
  return cache.emplace(degree, std::move(rec)).first->second;
}

// Values of all monomials of the given degree in q.
std::vector<double> MonomialValues(const std::array<double, 6>& q, int degree) {
  std::vector<double> cur{1.0};
  for (int d = 1; d <= degree; ++d) {
    const auto& rec = Recursion(d);
    std::vector<double> next(rec.parent.size());
    for (size_t m = 0; m < next.size(); ++m) next[m] = cur[rec.parent[m]] * q[rec.var[m]];
    cur.swap(next);
  }
  return cur;
}

// Entries of K1 G^T diag(1, 1, x) G K1 as (constant, slope in x).
std::array<std::array<double, 2>, 6> LinearEntries(const Mat3& G, double f1, bool absolute) {
  Mat3 Gm = absolute ? Mat3(G.cwiseAbs()) : G;
  const Eigen::Vector3d k(f1, f1, 1.0);
  std::array<std::array<double, 2>, 6> out;
  for (int e = 0; e < 6; ++e) {
    const int a = kRow[e], b = kCol[e];
    out[e][0] = (Gm(0, a) * Gm(0, b) + Gm(1, a) * Gm(1, b)) * k(a) * k(b);
    out[e][1] = Gm(2, a) * Gm(2, b) * k(a) * k(b);
  }
  return out;
}

// Polynomials in x of all degree-d monomials, flattened with stride d + 1.
std::vector<double> MonomialPolys(const std::array<std::array<double, 2>, 6>& entries,
                                  int degree) {
  std::vector<double> cur{1.0};
  for (int d = 1; d <= degree; ++d) {
    const auto& rec = Recursion(d);
    const int so = d, sn = d + 1;
    std::vector<double> next(rec.parent.size() * sn, 0.0);
    for (size_t m = 0; m < rec.parent.size(); ++m) {
      const double* p = &cur[rec.parent[m] * so];
      const auto& e = entries[rec.var[m]];
      double* o = &next[m * sn];
      for (int i = 0; i < so; ++i) {
        o[i] += p[i] * e[0];
        o[i + 1] += p[i] * e[1];
      }
    }
    cur.swap(next);
  }
  return cur;
}

enum class Layout {
  kWeightedShared,  // alpha from weights and from both x: Case I
  kShared,          // x2 = x3 = alpha: Case II
  kWeightedBeta,    // alpha from weights, x2 = x3 = beta: Case III
  kSeparate,        // x2 = alpha, x3 = beta: Case IV
};

BiPoly ExpandOne(const GeneratorTable::Factorized& fz, int min_weight,
                 const std::vector<double>& P2, const std::vector<double>& P3,
                 Layout layout, bool absolute) {
  const int d2 = fz.degree_q2, d3 = fz.degree_q3;
  const int s2 = d2 + 1, s3 = d3 + 1;
  int wspan = 0;
  for (const auto& t : fz.terms) wspan = std::max(wspan, (t.weight - min_weight) / 2);
  int na = 0, nb = 0;
  switch (layout) {
    case Layout::kWeightedShared: na = wspan + d2 + d3 + 1; nb = 1; break;
    case Layout::kShared: na = d2 + d3 + 1; nb = 1; break;
    case Layout::kWeightedBeta: na = wspan + 1; nb = d2 + d3 + 1; break;
    case Layout::kSeparate: na = s2; nb = s3; break;
  }
  // Row-major scratch grid, copied into the column-major result.
  std::vector<double> g(na * nb, 0.0);
  for (const auto& t : fz.terms) {
    const double coef = absolute ? std::abs(t.coef) : t.coef;
    const double* a = &P2[t.i2 * s2];
    const double* b = &P3[t.i3 * s3];
    const int shift = (t.weight - min_weight) / 2;
    switch (layout) {
      case Layout::kWeightedShared:
      case Layout::kShared: {
        double* o = &g[layout == Layout::kShared ? 0 : shift];
        for (int i = 0; i < s2; ++i) {
          const double ai = coef * a[i];
          for (int j = 0; j < s3; ++j) o[i + j] += ai * b[j];
        }
        break;
      }
      case Layout::kWeightedBeta: {
        double* o = &g[shift * nb];
        for (int i = 0; i < s2; ++i) {
          const double ai = coef * a[i];
          for (int j = 0; j < s3; ++j) o[i + j] += ai * b[j];
        }
        break;
      }
      case Layout::kSeparate:
        for (int i = 0; i < s2; ++i) {
          const double ai = coef * a[i];
          for (int j = 0; j < s3; ++j) g[i * nb + j] += ai * b[j];
        }
        break;
    }
  }
  BiPoly out{Eigen::MatrixXd(na, nb)};
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) out.c(i, j) = g[i * nb + j];
  }
  return out;
}

ExpandedSystem Expand(const Homography2D& G2, const Homography2D& G3, double f1,
                      const GeneratorTable& table, Layout layout) {
  ExpandedSystem sys;
  sys.polys.reserve(table.size());
  sys.magnitudes.reserve(table.size());
  for (int pass = 0; pass < 2; ++pass) {
    const bool absolute = pass == 1;
    const auto e2 = LinearEntries(G2.matrix(), f1, absolute);
    const auto e3 = LinearEntries(G3.matrix(), f1, absolute);
    std::map<int, std::vector<double>> cache2, cache3;
    auto& out = absolute ? sys.magnitudes : sys.polys;
    for (size_t g = 0; g < table.size(); ++g) {
      const auto& fz = table.factorized()[g];
      auto& P2 = cache2[fz.degree_q2];
      auto& P3 = cache3[fz.degree_q3];
      if (P2.empty()) P2 = MonomialPolys(e2, fz.degree_q2);
      if (P3.empty()) P3 = MonomialPolys(e3, fz.degree_q3);
      out.push_back(ExpandOne(fz, table[g].min_weight, P2, P3, layout, absolute));
    }
  }
  return sys;
}

Poly FirstColumn(const BiPoly& p) {
  Poly c(p.c.rows());
  for (int i = 0; i < p.c.rows(); ++i) c[i] = p.c(i, 0);
  return c;
}

}  // namespace

SymQ SymQ::FromMatrix(const Mat3& m) {
  SymQ s;
  for (int e = 0; e < 6; ++e) s.q[e] = m(kRow[e], kCol[e]);
  return s;
}

Mat3 SymQ::Matrix() const {
  Mat3 m;
  for (int e = 0; e < 6; ++e) {
    m(kRow[e], kCol[e]) = q[e];
    m(kCol[e], kRow[e]) = q[e];
  }
  return m;
}

SymQ ComputeQ(const Homography2D& G, const CameraIntrinsics& K1,
              const CameraIntrinsics& Kj) {
  const Mat3 A = Kj.Kinv() * G.matrix() * K1.K();
  return SymQ::FromMatrix(A.transpose() * A);
}

namespace {

std::vector<double> Evaluate(const GeneratorTable& table, const SymQ& Q2, const SymQ& Q3,
                             bool normalize) {
  std::vector<double> out;
  out.reserve(table.size());
  std::map<int, std::vector<double>> m2, m3;
  for (const auto& fz : table.factorized()) {
    auto& a = m2[fz.degree_q2];
    auto& b = m3[fz.degree_q3];
    if (a.empty()) a = MonomialValues(Q2.q, fz.degree_q2);
    if (b.empty()) b = MonomialValues(Q3.q, fz.degree_q3);
    double sum = 0.0, mag = 0.0;
    for (const auto& t : fz.terms) {
      const double v = t.coef * a[t.i2] * b[t.i3];
      sum += v;
      mag += std::abs(v);
    }
    out.push_back(normalize ? (mag > 0 ? sum / mag : 0.0) : sum);
  }
  return out;
}

}  // namespace

std::vector<double> EvaluateGenerators(const GeneratorTable& table, const SymQ& Q2,
                                       const SymQ& Q3) {
  return Evaluate(table, Q2, Q3, true);
}

std::vector<double> EvaluateGeneratorsRaw(const GeneratorTable& table, const SymQ& Q2,
                                          const SymQ& Q3) {
  return Evaluate(table, Q2, Q3, false);
}

double BiPoly::operator()(double alpha, double beta) const {
  double v = 0.0;
  for (int i = static_cast<int>(c.rows()) - 1; i >= 0; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(c.cols()) - 1; j >= 0; --j) row = row * beta + c(i, j);
    v = v * alpha + row;
  }
  return v;
}

double ExpandedSystem::RelativeSize() const {
  double r = 0.0;
  for (size_t i = 0; i < polys.size(); ++i) {
    const double m = magnitudes[i].c.norm();
    if (m > 0) r = std::max(r, polys[i].c.norm() / m);
  }
  return r;
}

ExpandedSystem ExpandCase1(const Homography2D& G2, const Homography2D& G3,
                           const GeneratorTable& table) {
  return Expand(G2, G3, 1.0, table, Layout::kWeightedShared);
}

ExpandedSystem ExpandCase2(const Homography2D& G2, const Homography2D& G3, double f1,
                           const GeneratorTable& table) {
  return Expand(G2, G3, f1, table, Layout::kShared);
}

ExpandedSystem ExpandCase3(const Homography2D& G2, const Homography2D& G3,
                           const GeneratorTable& table) {
  return Expand(G2, G3, 1.0, table, Layout::kWeightedBeta);
}

ExpandedSystem ExpandCase4(const Homography2D& G2, const Homography2D& G3, double f1,
                           const GeneratorTable& table) {
  return Expand(G2, G3, f1, table, Layout::kSeparate);
}

std::vector<std::vector<double>> UnivariateCoefficients(const ExpandedSystem& sys) {
  std::vector<std::vector<double>> out;
  for (const auto& p : sys.polys) {
    Poly c = FirstColumn(p);
    double mx = 0.0;
    for (double v : c) mx = std::max(mx, std::abs(v));
    if (mx > 0) {
      for (double& v : c) v /= mx;
    }
    out.push_back(std::move(c));
  }
  return out;
}

int SelectGenerator(const std::vector<std::vector<double>>& coeffs, int degree) {
  int best = 0;
  double best_score = -1.0;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    const auto& c = coeffs[i];
    double norm = 0.0;
    for (double v : c) norm += v * v;
    norm = std::sqrt(norm);
    const double lead = degree < static_cast<int>(c.size()) ? std::abs(c[degree]) : 0.0;
    const double score = norm > 0 ? lead / norm : 0.0;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

UniPoly AssembleCase1(const Homography2D& G2, const Homography2D& G3,
                      const GeneratorTable& table) {
  const auto coeffs = UnivariateCoefficients(ExpandCase1(G2, G3, table));
  return UniPoly::Trimmed(coeffs[SelectGenerator(coeffs, 9)]);
}

UniPoly AssembleCase2(const Homography2D& G2, const Homography2D& G3, double f1,
                      const GeneratorTable& table) {
  const auto coeffs = UnivariateCoefficients(ExpandCase2(G2, G3, f1, table));
  return UniPoly::Trimmed(coeffs[SelectGenerator(coeffs, 6)]);
}

Eigen::MatrixXd CoefficientMatrix(const ExpandedSystem& sys) {
  int na = 0, nb = 0;
  for (const auto& p : sys.polys) {
    na = std::max<int>(na, p.c.rows());
    nb = std::max<int>(nb, p.c.cols());
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(sys.polys.size(), na * nb);
  for (size_t r = 0; r < sys.polys.size(); ++r) {
    const auto& c = sys.polys[r].c;
    for (int a = 0; a < c.rows(); ++a) {
      for (int b = 0; b < c.cols(); ++b) M(r, a * nb + b) = c(a, b);
    }
    const double mx = M.row(r).cwiseAbs().maxCoeff();
    if (mx > 0) M.row(r) /= mx;
  }
  return M;
}

Eigen::MatrixXd AssembleCase3(const Homography2D& G2, const Homography2D& G3,
                              const GeneratorTable& table) {
  return CoefficientMatrix(ExpandCase3(G2, G3, table));
}

Eigen::MatrixXd AssembleCase4(const Homography2D& G2, const Homography2D& G3, double f1,
                              const GeneratorTable& table) {
  return CoefficientMatrix(ExpandCase4(G2, G3, f1, table));
}

}  // namespace hfocal
