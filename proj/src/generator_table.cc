#include "hfocal/generator_table.h"

#include "hfocal/types.h"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace hfocal {

extern const char* const kBuiltinGeneratorTableJson;

namespace {

double ParseRational(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return std::stod(s);
    const double num = std::stod(s.substr(0, slash));
    const double den = std::stod(s.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("zero denominator");
    return num / den;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParseError, "bad coefficient '" + s + "'");
  }
}

std::vector<std::array<int, 6>> EnumerateMonomials(int degree) {
  std::vector<std::array<int, 6>> out;
  std::array<int, 6> e{};
  // Lexicographically descending enumeration.
  auto rec = [&](auto&& self, int k, int remaining) -> void {
    if (k == 5) {
      e[5] = remaining;
      out.push_back(e);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      e[k] = v;
      self(self, k + 1, remaining - v);
    }
  };
  rec(rec, 0, degree);
  return out;
}

int MonomialIndex(const std::array<int, 6>& e, int degree) {
  const auto& monos = GeneratorTable::Monomials(degree);
  const auto it = std::lower_bound(monos.begin(), monos.end(), e,
                                   std::greater<std::array<int, 6>>());
  return static_cast<int>(it - monos.begin());
}

}  // namespace

const std::vector<std::array<int, 6>>& GeneratorTable::Monomials(int degree) {
  static std::mutex mu;
  static std::map<int, std::vector<std::array<int, 6>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    it = cache.emplace(degree, EnumerateMonomials(degree)).first;
  }
  return it->second;
}

GeneratorTable GeneratorTable::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  GeneratorTable table;
  try {
    table.variables_ = j.at("variables").get<std::vector<std::string>>();
    if (table.variables_.size() != 12) {
      throw Error(ErrorCode::kParseError, "expected 12 variables");
    }
    table.derivation_ = j.value("derivation", std::string());
    for (const auto& jp : j.at("polynomials")) {
      GeneratorPolynomial poly;
      poly.min_weight = 1 << 20;
      poly.max_weight = -(1 << 20);
      bool first = true;
      for (const auto& jt : jp) {
        GeneratorTerm term;
        const auto exps = jt.at("exps").get<std::vector<int>>();
        if (exps.size() != 12) {
          throw Error(ErrorCode::kParseError, "term exponent vector must have 12 entries");
        }
        int d2 = 0, d3 = 0, w = 0;
        for (int k = 0; k < 12; ++k) {
          if (exps[k] < 0) throw Error(ErrorCode::kParseError, "negative exponent");
          term.exps[k] = exps[k];
          (k < 6 ? d2 : d3) += exps[k];
          w += kEntryFocalWeight[k % 6] * exps[k];
        }
        term.coef = ParseRational(jt.at("coef").get<std::string>());
        if (!std::isfinite(term.coef)) {
          throw Error(ErrorCode::kParseError, "non-finite coefficient");
        }
        if (first) {
          poly.degree_q2 = d2;
          poly.degree_q3 = d3;
          first = false;
        } else if (d2 != poly.degree_q2 || d3 != poly.degree_q3) {
          throw Error(ErrorCode::kParseError, "generator is not bihomogeneous");
        }
        poly.min_weight = std::min(poly.min_weight, w);
        poly.max_weight = std::max(poly.max_weight, w);
        poly.terms.push_back(term);
      }
      if (poly.terms.empty()) throw Error(ErrorCode::kParseError, "empty generator");
      for (const auto& t : poly.terms) {
        int w = 0;
        for (int k = 0; k < 12; ++k) w += kEntryFocalWeight[k % 6] * t.exps[k];
        if ((w - poly.min_weight) % 2 != 0) {
          throw Error(ErrorCode::kParseError, "generator mixes focal-weight parities");
        }
      }
      table.polys_.push_back(std::move(poly));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (table.polys_.empty()) throw Error(ErrorCode::kParseError, "no polynomials");

  for (const auto& poly : table.polys_) {
    Factorized f{poly.degree_q2, poly.degree_q3, {}};
    f.terms.reserve(poly.terms.size());
    for (const auto& t : poly.terms) {
      std::array<int, 6> e2, e3;
      int w = 0;
      for (int k = 0; k < 6; ++k) {
        e2[k] = t.exps[k];
        e3[k] = t.exps[6 + k];
        w += kEntryFocalWeight[k] * (e2[k] + e3[k]);
      }
      f.terms.push_back({MonomialIndex(e2, poly.degree_q2),
                         MonomialIndex(e3, poly.degree_q3), t.coef, w});
    }
    table.factorized_.push_back(std::move(f));
  }
  return table;
}

GeneratorTable GeneratorTable::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

const GeneratorTable& GeneratorTable::Builtin() {
  static const GeneratorTable table = FromJson(kBuiltinGeneratorTableJson);
  return table;
}

}  // namespace hfocal
