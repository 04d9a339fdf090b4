#pragma once

#include <array>
#include <string>
#include <vector>

namespace hfocal {

// One term coef * prod_k q_k^{exps[k]} over the variables
// q21..q26, q31..q36 (upper triangle of Q2 then Q3, row-major).
struct GeneratorTerm {
  std::array<int, 12> exps{};
  double coef = 0.0;
};

struct GeneratorPolynomial {
  std::vector<GeneratorTerm> terms;
  // Homogeneous degrees in the Q2 and Q3 entries.
  int degree_q2 = 0;
  int degree_q3 = 0;
  // Range of the focal weight sum_k w_k e_k with w = (2,2,1,2,1,0) per
  // matrix, i.e. the power of f picked up when K1 = diag(f,f,1) multiplies
  // Q on both sides. All terms share the parity of min_weight.
  int min_weight = 0;
  int max_weight = 0;

  int degree() const { return degree_q2 + degree_q3; }
};

// Elimination-ideal generators in the entries of Q2 and Q3, loaded from the
// JSON table format. Immutable after construction.
class GeneratorTable {
 public:
  static GeneratorTable FromJson(const std::string& text);
  static GeneratorTable Load(const std::string& path);
  // Table compiled into the library from data/generator_table.json.
  static const GeneratorTable& Builtin();

  size_t size() const { return polys_.size(); }
  const GeneratorPolynomial& operator[](size_t i) const { return polys_[i]; }
  const std::vector<GeneratorPolynomial>& polynomials() const { return polys_; }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::string& derivation() const { return derivation_; }

  // Factorized form g = sum coef * m2[i2] * m3[i3], where m2/m3 enumerate the
  // monomials of the generator's bidegree in the six entries of Q2 / Q3.
  struct FactorTerm {
    int i2;
    int i3;
    double coef;
    int weight;
  };
  struct Factorized {
    int degree_q2;
    int degree_q3;
    std::vector<FactorTerm> terms;
  };
  const std::vector<Factorized>& factorized() const { return factorized_; }
  // Exponent vectors (length 6) of all monomials of the given degree,
  // in the enumeration order used by Factorized.
  static const std::vector<std::array<int, 6>>& Monomials(int degree);

 private:
  std::vector<std::string> variables_;
  std::vector<GeneratorPolynomial> polys_;
  std::vector<Factorized> factorized_;
  std::string derivation_;
};

// Focal weights of the six symmetric entries (q1..q6).
inline constexpr std::array<int, 6> kEntryFocalWeight = {2, 2, 1, 2, 1, 0};

}  // namespace hfocal
