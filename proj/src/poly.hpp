#pragma once

#include <map>
#include <optional>
#include <vector>

#include "rational.hpp"

namespace srgeo {

using Exp = std::vector<int>;

inline int exp_total(const Exp& e) {
  int t = 0;
  for (int k : e) t += k;
  return t;
}

inline int exp_weighted(const Exp& e, const std::vector<int>& w) {
  int t = 0;
  for (size_t i = 0; i < e.size(); ++i) t += e[i] * w[i];
  return t;
}

// Graded lexicographic: total degree first, then lex on exponent vectors.
// Used as the canonical term order everywhere (storage and serialization).
struct GradedLexLess {
  bool operator()(const Exp& a, const Exp& b) const {
    int ta = exp_total(a), tb = exp_total(b);
    if (ta != tb) return ta < tb;
    return a < b;
  }
};

// Truncation spec for jet arithmetic: drop monomials of weighted degree > order.
struct Trunc {
  const std::vector<int>* weights;
  int order;
  bool keeps(const Exp& e) const { return exp_weighted(e, *weights) <= order; }
};

// Sparse multivariate polynomial over Q. Invariant: no zero coefficients.
class Poly {
 public:
  using TermMap = std::map<Exp, Rat, GradedLexLess>;

  explicit Poly(int nvars = 0) : nvars_(nvars) {}

  static Poly constant(int nvars, const Rat& c);
  static Poly variable(int nvars, int i);
  static Poly monomial(int nvars, const Exp& e, const Rat& c);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  int total_degree() const;  // -1 for the zero polynomial

  void add_term(const Exp& e, const Rat& c);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator-() const;
  Poly operator*(const Poly& o) const { return mul(o, nullptr); }
  Poly mul(const Poly& o, const Trunc* tr) const;
  Poly scale(const Rat& c) const;
  bool operator==(const Poly& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }

  Poly derivative(int var) const;
  // Antiderivative in var with zero constant term (for Picard steps).
  Poly integrate(int var) const;

  Rat eval(const std::vector<Rat>& x) const;
  double eval_d(const std::vector<double>& x) const;

  // Substitute xs[i] for variable i; xs polynomials share a common nvars.
  Poly substitute(const std::vector<Poly>& xs, const Trunc* tr = nullptr) const;

  Poly truncate(const Trunc& tr) const;
  // Part of exact weighted degree deg.
  Poly weighted_part(const std::vector<int>& w, int deg) const;
  std::optional<int> min_weighted_degree(const std::vector<int>& w) const;
  std::optional<int> max_weighted_degree(const std::vector<int>& w) const;

 private:
  int nvars_;
  TermMap terms_;
};

}  // namespace srgeo
