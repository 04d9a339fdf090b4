#pragma once

#include "hfocal/generator_table.h"
#include "hfocal/poly_roots.h"
#include "hfocal/types.h"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace hfocal {

// Upper triangle of a symmetric 3x3 matrix: Q11, Q12, Q13, Q22, Q23, Q33.
struct SymQ {
  std::array<double, 6> q{};

  static SymQ FromMatrix(const Mat3& m);
  Mat3 Matrix() const;
};

// Q_j = (Kj^-1 G K1)^T (Kj^-1 G K1).
SymQ ComputeQ(const Homography2D& G, const CameraIntrinsics& K1,
              const CameraIntrinsics& Kj);

// Generator values divided by the sum of absolute term magnitudes.
std::vector<double> EvaluateGenerators(const GeneratorTable& table, const SymQ& Q2,
                                       const SymQ& Q3);
// Plain generator values.
std::vector<double> EvaluateGeneratorsRaw(const GeneratorTable& table, const SymQ& Q2,
                                          const SymQ& Q3);

// Dense coefficients c(i, j) of alpha^i beta^j.
struct BiPoly {
  Eigen::MatrixXd c;

  int alpha_degree() const { return static_cast<int>(c.rows()) - 1; }
  int beta_degree() const { return static_cast<int>(c.cols()) - 1; }
  double operator()(double alpha, double beta) const;
};

// All generators of one case expanded in the focal unknowns.
struct ExpandedSystem {
  // Raw expansions (not normalized).
  std::vector<BiPoly> polys;
  // Expansions with every coefficient and entry replaced by its absolute
  // value; bounds the cancellation in polys.
  std::vector<BiPoly> magnitudes;

  // ||poly|| / ||magnitude||, the largest over generators.
  double RelativeSize() const;
};

// Case I: alpha = f^2 for all three views; univariate (beta degree 0),
// alpha degree 9.
ExpandedSystem ExpandCase1(const Homography2D& G2, const Homography2D& G3,
                           const GeneratorTable& table);
// Case II: known f1, alpha = f2^2 = f3^2; alpha degree 6.
ExpandedSystem ExpandCase2(const Homography2D& G2, const Homography2D& G3, double f1,
                           const GeneratorTable& table);
// Case III: alpha = f1^2, beta = f2^2 = f3^2; degrees (3, 6).
ExpandedSystem ExpandCase3(const Homography2D& G2, const Homography2D& G3,
                           const GeneratorTable& table);
// Case IV: known f1, alpha = f2^2, beta = f3^2; degrees (3, 3).
ExpandedSystem ExpandCase4(const Homography2D& G2, const Homography2D& G3, double f1,
                           const GeneratorTable& table);

// Coefficient vectors in alpha, each scaled to unit max-abs.
std::vector<std::vector<double>> UnivariateCoefficients(const ExpandedSystem& sys);

// Index of the generator with the largest |leading coefficient| / ||coeffs||.
int SelectGenerator(const std::vector<std::vector<double>>& coeffs, int degree);

UniPoly AssembleCase1(const Homography2D& G2, const Homography2D& G3,
                      const GeneratorTable& table);
UniPoly AssembleCase2(const Homography2D& G2, const Homography2D& G3, double f1,
                      const GeneratorTable& table);

// Row i holds generator i with column a * (beta_degree + 1) + b for
// alpha^a beta^b; rows scaled to unit max-abs.
Eigen::MatrixXd CoefficientMatrix(const ExpandedSystem& sys);

// 7x28 over 1, b, ..., b^6, a, ab, ..., a^3 b^6.
Eigen::MatrixXd AssembleCase3(const Homography2D& G2, const Homography2D& G3,
                              const GeneratorTable& table);
// 7x16 over 1, b, b^2, b^3, a, ..., a^3 b^3.
Eigen::MatrixXd AssembleCase4(const Homography2D& G2, const Homography2D& G3, double f1,
                              const GeneratorTable& table);

}  // namespace hfocal
