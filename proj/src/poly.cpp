#include "poly.hpp"

#include <stdexcept>

namespace srgeo {

Poly Poly::constant(int nvars, const Rat& c) {
  Poly p(nvars);
  p.add_term(Exp(nvars, 0), c);
  return p;
}

Poly Poly::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw std::out_of_range("variable index");
  Exp e(nvars, 0);
  e[i] = 1;
  return monomial(nvars, e, Rat(1));
}

Poly Poly::monomial(int nvars, const Exp& e, const Rat& c) {
  if ((int)e.size() != nvars) throw std::invalid_argument("exponent size");
  Poly p(nvars);
  p.add_term(e, c);
  return p;
}

int Poly::total_degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, exp_total(e));
  return d;
}

void Poly::add_term(const Exp& e, const Rat& c) {
  if (c == 0) return;
  if ((int)e.size() != nvars_) throw std::invalid_argument("exponent size");
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly Poly::operator+(const Poly& o) const {
  if (nvars_ != o.nvars_) throw std::invalid_argument("nvars mismatch");
  Poly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
  Poly r(nvars_);
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
  return r;
}

Poly Poly::mul(const Poly& o, const Trunc* tr) const {
  if (nvars_ != o.nvars_) throw std::invalid_argument("nvars mismatch");
  Poly r(nvars_);
  Exp e(nvars_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      for (int i = 0; i < nvars_; ++i) e[i] = ea[i] + eb[i];
      if (tr && !tr->keeps(e)) continue;
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Poly Poly::scale(const Rat& c) const {
  Poly r(nvars_);
  if (c == 0) return r;
  for (const auto& [e, k] : terms_) r.terms_.emplace(e, k * c);
  return r;
}

Poly Poly::derivative(int var) const {
  Poly r(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exp d = e;
    d[var] -= 1;
    r.add_term(d, c * e[var]);
  }
  return r;
}

Poly Poly::integrate(int var) const {
  Poly r(nvars_);
  for (const auto& [e, c] : terms_) {
    Exp d = e;
    d[var] += 1;
    r.add_term(d, c / d[var]);
  }
  return r;
}

Rat Poly::eval(const std::vector<Rat>& x) const {
  if ((int)x.size() != nvars_) throw std::invalid_argument("point size");
  Rat acc(0);
  for (const auto& [e, c] : terms_) {
    Rat t = c;
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    acc += t;
  }
  return acc;
}

double Poly::eval_d(const std::vector<double>& x) const {
  double acc = 0;
  for (const auto& [e, c] : terms_) {
    double t = c.get_d();
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    acc += t;
  }
  return acc;
}

Poly Poly::substitute(const std::vector<Poly>& xs, const Trunc* tr) const {
  if ((int)xs.size() != nvars_) throw std::invalid_argument("substitution size");
  int m = xs.empty() ? 0 : xs[0].nvars();
  // Memoized powers of each substituted polynomial.
  std::vector<std::vector<Poly>> pows(nvars_);
  auto power = [&](int i, int k) -> const Poly& {
    auto& tab = pows[i];
    if (tab.empty()) tab.push_back(Poly::constant(m, Rat(1)));
    while ((int)tab.size() <= k) tab.push_back(tab.back().mul(xs[i], tr));
    return tab[k];
  };
  Poly r(m);
  for (const auto& [e, c] : terms_) {
    Poly t = Poly::constant(m, c);
    for (int i = 0; i < nvars_; ++i)
      if (e[i] > 0) t = t.mul(power(i, e[i]), tr);
    r = r + t;
  }
  return r;
}

Poly Poly::truncate(const Trunc& tr) const {
  Poly r(nvars_);
  for (const auto& [e, c] : terms_)
    if (tr.keeps(e)) r.terms_.emplace(e, c);
  return r;
}

Poly Poly::weighted_part(const std::vector<int>& w, int deg) const {
  Poly r(nvars_);
  for (const auto& [e, c] : terms_)
    if (exp_weighted(e, w) == deg) r.terms_.emplace(e, c);
  return r;
}

std::optional<int> Poly::min_weighted_degree(const std::vector<int>& w) const {
  std::optional<int> m;
  for (const auto& [e, c] : terms_) {
    int d = exp_weighted(e, w);
    if (!m || d < *m) m = d;
  }
  return m;
}

std::optional<int> Poly::max_weighted_degree(const std::vector<int>& w) const {
  std::optional<int> m;
  for (const auto& [e, c] : terms_) {
    int d = exp_weighted(e, w);
    if (!m || d > *m) m = d;
  }
  return m;
}

}  // namespace srgeo
