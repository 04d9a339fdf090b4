#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace hfocal {

// Real univariate polynomial, coefficients ascending in degree.
class UniPoly {
 public:
  UniPoly() = default;
  explicit UniPoly(std::vector<double> coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<double>& coeffs() const { return c_; }
  double operator[](int i) const { return c_[i]; }
  double lead() const { return c_.back(); }

  double operator()(double x) const;
  // Value and first derivative in one Horner pass.
  std::pair<double, double> EvalWithDerivative(double x) const;
  UniPoly Derivative() const;
  double MaxAbsCoeff() const;
  UniPoly Scaled(double s) const;

  // Drops leading coefficients below rel * max|coef|.
  static UniPoly Trimmed(std::vector<double> coeffs, double rel = 1e-12);

  // Euclidean division a = q*b + r.
  static std::pair<UniPoly, UniPoly> Divide(const UniPoly& a, const UniPoly& b);

 private:
  std::vector<double> c_;
};

struct RealRoots {
  std::vector<double> roots;
  // Set when the Sturm chain degenerated even after square-free reduction and
  // roots were found by sign-change bisection only.
  bool low_confidence = false;
  bool square_free_reduced = false;
};

// Sturm chain p, p', -rem(...), ... with each element scaled to unit max
// coefficient. Elements with remainder below rel_zero times their
// predecessor terminate the chain.
std::vector<UniPoly> SturmChain(const UniPoly& p, double rel_zero = 1e-12);
int SignVariations(const std::vector<UniPoly>& chain, double x);

// Distinct real roots in (lo, hi], sorted ascending, each to |dx| < tol.
RealRoots SturmRealRoots(const UniPoly& p, double lo, double hi, double tol = 1e-14);

// Upper bound on the magnitude of all roots.
double CauchyRootBound(const UniPoly& p);

// All roots via eigenvalues of the companion matrix.
std::vector<std::complex<double>> CompanionRoots(const UniPoly& p);

// C(x) = C0 + x C1 + x^2 C2 + x^3 C3 with square blocks.
struct CubicMatrixPencil {
  std::array<Eigen::MatrixXd, 4> C;

  int size() const { return static_cast<int>(C[0].rows()); }
  Eigen::MatrixXd Evaluate(double x) const;
};

struct Companion {
  Eigen::MatrixXd D;
  // Eigenvalues of D are gamma = 1/x for the pencil's eigenvalues x.
  int removed = 0;
};

// Transposed companion in gamma = 1/x:
// [[0 I 0] [0 0 I] [-C0^-T C3^T, -C0^-T C2^T, -C0^-T C1^T]] of size 3k.
// Throws kSingularC0 if C0 has reciprocal condition below 1e-12.
Companion BuildCompanion(const CubicMatrixPencil& pencil);

// Same companion after an orthogonal row transform makes only rank(C3) rows
// of C3 nonzero; the resulting zero columns of the leading block and their
// rows are removed. Throws kUnexpectedRank if expected_rank >= 0 and the
// numerical rank of C3 (threshold 1e-8 relative) differs.
Companion DeflateZeroColumns(const CubicMatrixPencil& pencil, int expected_rank = -1);

struct PolyEigOptions {
  bool deflate = false;
  int expected_rank = -1;
  // Eigenvalue accepted as real if |Im| <= imag_tol * |value|.
  double imag_tol = 1e-8;
  double null_threshold = 1e-6;
  // When false, real positive roots carry an empty null vector.
  bool null_vectors = true;
};

struct PolyEigRoot {
  double value;
  Eigen::VectorXd null_vector;
};

struct PolyEigResult {
  // Finite nonzero eigenvalues x of the pencil.
  std::vector<std::complex<double>> eigenvalues;
  std::vector<PolyEigRoot> real_positive;
  int companion_size = 0;
};

PolyEigResult PolyEigCubic(const CubicMatrixPencil& pencil,
                           const PolyEigOptions& options = {});

// Fallback without inverting C0: generalized eigenproblem A - x B on the
// first companion form of size 3k.
PolyEigResult PolyEigCubicGeneralized(const CubicMatrixPencil& pencil,
                                      const PolyEigOptions& options = {});

// Right singular vector of the smallest singular value, first component 1
// when |v0| > 1e-8 and unit norm otherwise. No rank precondition.
Eigen::VectorXd SmallestRightSingularVector(const Eigen::MatrixXd& M);

// Right singular vector of the smallest singular value, scaled so the first
// component is 1 when |v0| > 1e-8 and to unit norm otherwise. Returns nullopt
// if the smallest singular value is not below rel_threshold * largest; throws
// kRankDeficiencyMismatch when the second smallest is also below it.
std::optional<Eigen::VectorXd> NullVector(const Eigen::MatrixXd& M,
                                          double rel_threshold = 1e-6);

}  // namespace hfocal
