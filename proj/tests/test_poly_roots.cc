#include "hfocal/poly_roots.h"

#include "hfocal/focal_constraints.h"
#include "test_util.h"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>

namespace hfocal {
namespace {

UniPoly FromRoots(const std::vector<double>& roots, double lead = 1.0) {
  std::vector<double> c{lead};
  for (double r : roots) {
    std::vector<double> n(c.size() + 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) {
      n[i] -= r * c[i];
      n[i + 1] += c[i];
    }
    c = n;
  }
  return UniPoly(c);
}

TEST(UniPoly, Basics) {
  const UniPoly p({1, -3, 2});  // 2x^2 - 3x + 1
  EXPECT_EQ(p.degree(), 2);
  EXPECT_DOUBLE_EQ(p(2.0), 3.0);
  const auto [v, d] = p.EvalWithDerivative(2.0);
  EXPECT_DOUBLE_EQ(v, 3.0);
  EXPECT_DOUBLE_EQ(d, 5.0);
  EXPECT_EQ(p.Derivative().coeffs(), (std::vector<double>{-3, 4}));
  EXPECT_DOUBLE_EQ(p.MaxAbsCoeff(), 3.0);
  EXPECT_EQ(UniPoly::Trimmed({1, 2, 1e-20}).degree(), 1);
  EXPECT_TRUE(UniPoly::Trimmed({0, 0}).is_zero());

  const auto [q, r] = UniPoly::Divide(FromRoots({1, 2, 3}), FromRoots({1, 2}));
  ASSERT_EQ(q.degree(), 1);
  EXPECT_NEAR(q[0], -3.0, 1e-14);
  EXPECT_NEAR(q[1], 1.0, 1e-14);
  EXPECT_LT(r.MaxAbsCoeff(), 1e-13);
}

TEST(UniPoly, CauchyBound) {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> c(8);
    for (double& v : c) v = testing::Uniform(rng, -1, 1);
    const UniPoly p(c);
    const double bound = CauchyRootBound(p);
    for (const auto& z : CompanionRoots(p)) EXPECT_LE(std::abs(z), bound * (1 + 1e-12));
  }
}

TEST(Sturm, KnownRoots) {
  const UniPoly p = FromRoots({0.5, 1.5, 4.0, -2.0}, 3.0);
  const RealRoots r = SturmRealRoots(p, 0.0, 10.0);
  ASSERT_EQ(r.roots.size(), 3u);
  EXPECT_NEAR(r.roots[0], 0.5, 1e-13);
  EXPECT_NEAR(r.roots[1], 1.5, 1e-13);
  EXPECT_NEAR(r.roots[2], 4.0, 1e-13);
  EXPECT_FALSE(r.low_confidence);

  const auto chain = SturmChain(p);
  EXPECT_EQ(SignVariations(chain, -10.0) - SignVariations(chain, 10.0), 4);
}

TEST(Sturm, RestrictedInterval) {
  const UniPoly p = FromRoots({1.0, 2.0, 7.0});
  const RealRoots a = SturmRealRoots(p, 1.5, 3.0);
  ASSERT_EQ(a.roots.size(), 1u);
  EXPECT_NEAR(a.roots[0], 2.0, 1e-13);
  const RealRoots b = SturmRealRoots(p, 0.0, 1.5);
  ASSERT_EQ(b.roots.size(), 1u);
  EXPECT_NEAR(b.roots[0], 1.0, 1e-13);
  EXPECT_THROW(SturmRealRoots(p, 3.0, 1.0), Error);
}

// A wide bracket (lead coefficient near zero) still converges to the root.
TEST(Sturm, WideBracket) {
  const UniPoly p({-0.14767925974940371, -1, -0.43057239576999068, 0.36237351139467339,
                   -0.09744303211088548, 0.0094497965125381091, 6.0378791757210017e-05,
                   3.781031284577811e-06, 1.0839569831478327e-08, 4.7827783327605251e-12});
  const double hi = CauchyRootBound(p);
  EXPECT_GT(hi, 1e11);
  const auto r = SturmRealRoots(p, 0.0, hi).roots;
  const auto ref = testing::CompanionRealRoots(p, 0.0, hi);
  ASSERT_EQ(r.size(), 1u);
  ASSERT_EQ(ref.size(), 1u);
  EXPECT_NEAR(r[0], ref[0], 1e-12 * ref[0]);
}

TEST(Sturm, DoubleRoot) {
  const UniPoly p = FromRoots({1.0, 1.0, 2.0});
  const RealRoots r = SturmRealRoots(p, 0.0, 5.0);
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_NEAR(r.roots[0], 1.0, 1e-7);
  EXPECT_NEAR(r.roots[1], 2.0, 1e-12);
  EXPECT_TRUE(r.square_free_reduced);
}

TEST(Sturm, NoRoots) {
  const UniPoly p({1.0, 0.0, 1.0});
  EXPECT_TRUE(SturmRealRoots(p, -10.0, 10.0).roots.empty());
}

// A small genuine remainder must not be taken for a common factor.
TEST(Sturm, SmallRemainderIsNotAFactor) {
  const UniPoly p({0.007470420994, -0.01590130806, -0.02973703896, 0.1000939196,
                   -0.5938733569, 1, 0.03131621741});
  const RealRoots r = SturmRealRoots(p, 0.0718, 130.0);
  const auto ref = testing::CompanionRealRoots(p, 0.0718, 130.0);
  ASSERT_EQ(r.roots.size(), ref.size());
  for (size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(r.roots[i], ref[i], 1e-9);
  EXPECT_GE(r.roots.size(), 2u);
}

// Sturm bisection and companion eigenvalues agree on solver polynomials.
TEST(Sturm, MatchesCompanionOnCaseOnePolynomials) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    auto in = testing::RandomInstance(FocalCase::kI, rng);
    const Mat3 S = Vec3(1000, 1000, 1).asDiagonal(), Si = S.inverse();
    const Homography2D G2(Si * in.G2.matrix() * S), G3(Si * in.G3.matrix() * S);
    const UniPoly p = AssembleCase1(G2, G3, GeneratorTable::Builtin());
    const double hi = CauchyRootBound(p);
    const auto sturm = SturmRealRoots(p, 0.0, hi).roots;
    const auto ref = testing::CompanionRealRoots(p, 0.0, hi);
    ASSERT_EQ(sturm.size(), ref.size()) << "trial " << trial;
    for (size_t i = 0; i < ref.size(); ++i)
      EXPECT_NEAR(sturm[i], ref[i], 1e-8 * std::max(1.0, ref[i])) << "trial " << trial;
  }
}

TEST(Companion, Roots) {
  const auto z = CompanionRoots(FromRoots({-1.0, 2.0, 3.0}));
  ASSERT_EQ(z.size(), 3u);
  std::vector<double> re;
  for (const auto& v : z) re.push_back(v.real());
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -1.0, 1e-12);
  EXPECT_NEAR(re[1], 2.0, 1e-12);
  EXPECT_NEAR(re[2], 3.0, 1e-12);
}

CubicMatrixPencil RandomPencil(int k, std::mt19937_64& rng) {
  CubicMatrixPencil P;
  for (auto& C : P.C) {
    C.resize(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) C(i, j) = testing::Uniform(rng, -1, 1);
  }
  return P;
}

TEST(PolyEig, RandomPencilEigenvaluesAreSingular) {
  std::mt19937_64 rng(32);
  const CubicMatrixPencil P = RandomPencil(4, rng);
  const PolyEigResult r = PolyEigCubic(P);
  EXPECT_EQ(r.companion_size, 12);
  EXPECT_EQ(r.eigenvalues.size(), 12u);
  for (const auto& x : r.eigenvalues) {
    Eigen::MatrixXcd M = P.C[0].cast<std::complex<double>>();
    std::complex<double> p = 1.0;
    for (int i = 1; i < 4; ++i) {
      p *= x;
      M += p * P.C[i].cast<std::complex<double>>();
    }
    const auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues();
    EXPECT_LT(sv(sv.size() - 1) / sv(0), 1e-9);
  }
  for (const auto& root : r.real_positive) {
    EXPECT_GT(root.value, 0);
    ASSERT_EQ(root.null_vector.size(), 4);
    EXPECT_LT((P.Evaluate(root.value) * root.null_vector).norm() /
                  (P.Evaluate(root.value).norm() * root.null_vector.norm()),
              1e-8);
  }
}

TEST(PolyEig, GeneralizedMatchesCompanion) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const CubicMatrixPencil P = RandomPencil(5, rng);
    auto a = PolyEigCubic(P).eigenvalues;
    auto b = PolyEigCubicGeneralized(P).eigenvalues;
    ASSERT_EQ(a.size(), b.size());
    for (const auto& x : a) {
      double best = 1e300;
      for (const auto& y : b) best = std::min(best, std::abs(x - y));
      EXPECT_LT(best, 1e-7 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST(PolyEig, SingularC0Throws) {
  std::mt19937_64 rng(34);
  CubicMatrixPencil P = RandomPencil(4, rng);
  P.C[0].row(0).setZero();
  try {
    PolyEigCubic(P);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularC0);
  }
}

struct CaseThreePencil {
  std::array<Eigen::MatrixXd, 4> C;
  CubicMatrixPencil reversed;
};

CaseThreePencil MakeCaseThree(std::mt19937_64& rng) {
  auto in = testing::RandomInstance(FocalCase::kIII, rng);
  const Mat3 S = Vec3(1000, 1000, 1).asDiagonal(), Si = S.inverse();
  const Homography2D G2(Si * in.G2.matrix() * S), G3(Si * in.G3.matrix() * S);
  const Eigen::MatrixXd M = AssembleCase3(G2, G3, GeneratorTable::Builtin());
  CaseThreePencil out;
  for (int a = 0; a < 4; ++a) {
    out.C[a] = M.block(0, a * 7, 7, 7);
    out.reversed.C[a] = M.block(0, (3 - a) * 7, 7, 7);
  }
  return out;
}

TEST(PolyEig, CaseThreeConstantBlockHasRankFour) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = MakeCaseThree(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P.C[0]);
    svd.setThreshold(1e-8);
    EXPECT_EQ(svd.rank(), 4);
  }
}

// Deflation removes only the structural zeros of the companion in 1/x.
// Eigenvalues whose relative condition number is at most 1e7 are compared;
// beyond that no double-precision linearization resolves them to 1e-8.
TEST(PolyEig, DeflationPreservesEigenvalues) {
  std::mt19937_64 rng(36);
  int compared = 0, instances = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto P = MakeCaseThree(rng);
    double shift = 0.0;
    const auto rcond = [](const Eigen::MatrixXd& A) { return Eigen::PartialPivLU<Eigen::MatrixXd>(A).rcond(); };
    double best = rcond(P.reversed.C[0]);
    for (double a : {0.25, 1.0, 4.0, 16.0}) {
      const double r = rcond(testing::ShiftPencil(P.reversed, 1 / a).C[0]);
      if (best < 1e-6 && r > best) {
        best = r;
        shift = 1 / a;
      }
    }
    const CubicMatrixPencil pencil = testing::ShiftPencil(P.reversed, shift);
    PolyEigOptions full_opts;
    full_opts.null_vectors = false;
    PolyEigResult full;
    Companion defl;
    try {
      full = PolyEigCubic(pencil, full_opts);
      defl = DeflateZeroColumns(pencil, 4);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kSingularC0);
      continue;
    }
    ++instances;
    EXPECT_EQ(full.companion_size, 21);
    ASSERT_EQ(defl.D.rows(), 18);
    EXPECT_GE(full.eigenvalues.size(), 18u);
    EXPECT_LE(full.eigenvalues.size(), 21u);
    for (const auto& e : testing::EigenvalueConditions(defl.D)) {
      if (e.condition > 1e7) continue;
      const std::complex<double> x = 1.0 / e.value;
      double d = 1e300;
      for (const auto& y : full.eigenvalues) d = std::min(d, std::abs(x - y));
      EXPECT_LT(d, 1e-8 * std::abs(x)) << "trial " << trial;
      ++compared;
    }
  }
  EXPECT_GT(instances, 150);
  EXPECT_GT(compared, 200);
}

TEST(PolyEig, UnexpectedRankThrows) {
  std::mt19937_64 rng(37);
  const CubicMatrixPencil P = RandomPencil(5, rng);
  PolyEigOptions o;
  o.deflate = true;
  o.expected_rank = 3;
  try {
    PolyEigCubic(P, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnexpectedRank);
  }
}

TEST(NullVector, RankOneDeficient) {
  std::mt19937_64 rng(38);
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(6, 4);
  Eigen::VectorXd v(4);
  v << 1, 2, -1, 0.5;
  A.col(3) = -(A.leftCols(3) * v.head(3)) / v(3);
  const auto n = NullVector(A);
  ASSERT_TRUE(n.has_value());
  EXPECT_DOUBLE_EQ((*n)(0), 1.0);
  EXPECT_LT((*n - v).norm(), 1e-10);
  EXPECT_LT((A * SmallestRightSingularVector(A)).norm(), 1e-10);
}

TEST(NullVector, FullRankAndDoubleDeficiency) {
  std::mt19937_64 rng(39);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Random(6, 4);
  EXPECT_FALSE(NullVector(A).has_value());
  Eigen::MatrixXd B = A;
  B.col(2) = B.col(0);
  B.col(3) = B.col(1);
  try {
    NullVector(B);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankDeficiencyMismatch);
  }
}

}  // namespace
}  // namespace hfocal
