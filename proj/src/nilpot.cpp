#include "nilpot.hpp"

namespace srgeo {

namespace {

// Jet of the time-z_tvar flow of V started at the map g(z). Picard rounds
// settle because each round only adds higher powers of z_tvar.
std::vector<Poly> flow_jet(const PolyVectorField& v, const std::vector<Poly>& g,
                           int tvar, const Trunc& tr) {
  int n = (int)g.size();
  std::vector<Poly> f = g;
  for (int round = 0; round <= tr.order + 1; ++round) {
    std::vector<Poly> next(n, Poly(n));
    bool same = true;
    for (int i = 0; i < n; ++i) {
      next[i] = (g[i] + v[i].substitute(f, &tr).integrate(tvar).truncate(tr));
      if (!(next[i] == f[i])) same = false;
    }
    if (same) return f;
    f = std::move(next);
  }
  throw PrivilegedCheckFailed("flow jet did not settle");
}

// (M0 + N)^{-1} with M0 = value at 0, via the terminating Neumann series of
// -M0^{-1}N in the truncated ring.
std::vector<std::vector<Poly>> invert_jet_matrix(
    const std::vector<std::vector<Poly>>& m, const Trunc& tr) {
  int n = (int)m.size();
  RatMat m0(n, RatVec(n));
  std::vector<Rat> origin(n, Rat(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m0[i][j] = m[i][j].eval(origin);
  auto b = rat_invert(m0);
  if (!b) throw PrivilegedCheckFailed("chart jacobian singular at origin");

  // p = -B*(m - m0), entries vanish at 0
  std::vector<std::vector<Poly>> p(n, std::vector<Poly>(n, Poly(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly acc(n);
      for (int k = 0; k < n; ++k) {
        Poly nk = m[k][j] - Poly::constant(n, m0[k][j]);
        if ((*b)[i][k] != 0 && !nk.is_zero())
          acc = acc + nk.scale(-(*b)[i][k]);
      }
      p[i][j] = acc.truncate(tr);
    }
  // s = I + p + p^2 + ...
  std::vector<std::vector<Poly>> s(n, std::vector<Poly>(n, Poly(n)));
  std::vector<std::vector<Poly>> t = p;
  for (int i = 0; i < n; ++i) s[i][i] = Poly::constant(n, Rat(1));
  for (int pw = 0; pw <= tr.order + 1; ++pw) {
    bool nonzero = false;
    for (int i = 0; i < n && !nonzero; ++i)
      for (int j = 0; j < n && !nonzero; ++j)
        if (!t[i][j].is_zero()) nonzero = true;
    if (!nonzero) break;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s[i][j] = s[i][j] + t[i][j];
    std::vector<std::vector<Poly>> nt(n, std::vector<Poly>(n, Poly(n)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Poly acc(n);
        for (int k = 0; k < n; ++k)
          if (!p[i][k].is_zero() && !t[k][j].is_zero())
            acc = acc + p[i][k].mul(t[k][j], &tr);
        nt[i][j] = acc;
      }
    t = std::move(nt);
  }
  // s * B
  std::vector<std::vector<Poly>> inv(n, std::vector<Poly>(n, Poly(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly acc(n);
      for (int k = 0; k < n; ++k)
        if ((*b)[k][j] != 0) acc = acc + s[i][k].scale((*b)[k][j]);
      inv[i][j] = acc;
    }
  return inv;
}

PolyVectorField pushforward(const PolyVectorField& v,
                            const std::vector<Poly>& phi,
                            const std::vector<std::vector<Poly>>& inv_dphi,
                            const Trunc& tr) {
  int n = (int)phi.size();
  std::vector<Poly> vphi(n, Poly(n));
  for (int i = 0; i < n; ++i) vphi[i] = v[i].substitute(phi, &tr);
  std::vector<Poly> comp(n, Poly(n));
  for (int i = 0; i < n; ++i) {
    Poly acc(n);
    for (int j = 0; j < n; ++j)
      if (!inv_dphi[i][j].is_zero() && !vphi[j].is_zero())
        acc = acc + inv_dphi[i][j].mul(vphi[j], &tr);
    comp[i] = acc;
  }
  return PolyVectorField(std::move(comp));
}

void check_min_degree(const PolyVectorField& f, const std::vector<int>& wts,
                      int field_weight, const std::string& label) {
  auto d = f.min_weighted_degree(wts);
  if (d.has_value() && *d < -field_weight)
    throw PrivilegedCheckFailed(label + " has a term of weighted degree " +
                                std::to_string(*d) + " < -" +
                                std::to_string(field_weight));
}

}  // namespace

PrivilegedChart privileged_coordinates(const Frame& frame,
                                       const std::vector<Rat>& p, int order,
                                       int max_depth) {
  auto [growth, basis] = bracket_flag(frame, p, max_depth);
  int n = frame.nvars;
  PrivilegedChart ch;
  ch.frame = frame;
  ch.base = p;
  ch.growth = growth;
  ch.basis = basis;
  ch.wts = weights(growth);
  if (order == 0) order = growth.step();
  if (order < growth.step())
    throw std::invalid_argument("truncation order below the step");
  ch.order = order;
  ch.jet_order = order + growth.step();

  Trunc tr_phi{&ch.wts, ch.jet_order};
  std::vector<Poly> cur(n, Poly(n));
  for (int i = 0; i < n; ++i) cur[i] = Poly::constant(n, p[i]);
  for (int j = n - 1; j >= 0; --j)
    cur = flow_jet(basis.entries[j].field, cur, j, tr_phi);
  ch.phi = cur;

  Trunc tr{&ch.wts, ch.order};
  std::vector<std::vector<Poly>> dphi(n, std::vector<Poly>(n, Poly(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dphi[i][j] = ch.phi[i].derivative(j).truncate(tr);
  auto inv = invert_jet_matrix(dphi, tr);

  for (int k = 0; k < frame.rank(); ++k) {
    auto f = pushforward(frame.fields[k], ch.phi, inv, tr);
    check_min_degree(f, ch.wts, 1, "frame field " + std::to_string(k + 1));
    ch.push_frame.push_back(std::move(f));
  }
  std::vector<Rat> origin(n, Rat(0));
  for (int j = 0; j < n; ++j) {
    auto f = pushforward(basis.entries[j].field, ch.phi, inv, tr);
    check_min_degree(f, ch.wts, basis.weights[j],
                     "adapted field " + std::to_string(j + 1));
    auto val = f.eval(origin);
    for (int i = 0; i < n; ++i)
      if (val[i] != (i == j ? Rat(1) : Rat(0)))
        throw PrivilegedCheckFailed("adapted field " + std::to_string(j + 1) +
                                    " does not reduce to e_" +
                                    std::to_string(j + 1) + " at the origin");
    ch.push_adapted.push_back(std::move(f));
  }
  return ch;
}

Frame nilpotent_approximation(const PrivilegedChart& chart) {
  std::vector<PolyVectorField> hats;
  for (const auto& f : chart.push_frame)
    hats.push_back(f.field_weighted_part(chart.wts, -1));
  return Frame(chart.frame.name + ".tangent", chart.frame.nvars,
               std::move(hats));
}

std::vector<PolyVectorField> hat_basis(const Frame& hat,
                                       const FlagBasis& basis) {
  std::vector<PolyVectorField> out;
  for (const auto& e : basis.entries) {
    PolyVectorField f = hat.fields[e.idx.back()];
    for (int k = (int)e.idx.size() - 2; k >= 0; --k)
      f = lie_bracket(hat.fields[e.idx[k]], f);
    out.push_back(std::move(f));
  }
  return out;
}

GradedLieAlgebra structure_constants(const Frame& hat, const FlagBasis& basis,
                                     const GrowthVector& growth) {
  int n = hat.nvars;
  auto y = hat_basis(hat, basis);
  std::vector<Rat> origin(n, Rat(0));
  for (int j = 0; j < n; ++j) {
    auto val = y[j].eval(origin);
    for (int i = 0; i < n; ++i)
      if (val[i] != (i == j ? Rat(1) : Rat(0)))
        throw BasisExpressionFailed("hat basis element " + std::to_string(j + 1) +
                                    " is not e_" + std::to_string(j + 1) +
                                    " at the origin");
  }
  std::vector<int> strata;
  int prev = 0;
  for (int d : growth.dims) {
    strata.push_back(d - prev);
    prev = d;
  }
  // A flag layer that stalls at the point but grows later cannot happen at a
  // regular point; the pointwise tangent algebra then has dimension above n.
  for (int m : strata)
    if (m == 0)
      throw BasisExpressionFailed(
          "weight gap in the growth vector: point is not regular");
  auto g = GradedLieAlgebra::zero(n, strata);
  auto w = basis.weights;
  int s = growth.step();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      auto br = lie_bracket(y[a], y[b]);
      int wt = w[a] + w[b];
      if (wt > s) {
        if (!br.is_zero())
          throw BasisExpressionFailed(
              "bracket of basis " + std::to_string(a + 1) + "," +
              std::to_string(b + 1) + " survives beyond the step");
        continue;
      }
      auto val = br.eval(origin);
      PolyVectorField recon = PolyVectorField::zero(n);
      for (int k = 0; k < n; ++k) {
        if (val[k] == 0) continue;
        if (w[k] != wt)
          throw BasisExpressionFailed("bracket of basis " + std::to_string(a + 1) +
                                      "," + std::to_string(b + 1) +
                                      " hits weight " + std::to_string(w[k]));
        recon = recon + y[k].scale(val[k]);
      }
      if (!(recon == br))
        throw BasisExpressionFailed(
            "bracket of basis " + std::to_string(a + 1) + "," +
            std::to_string(b + 1) +
            " leaves the span: tangent algebra exceeds ambient dimension "
            "(non-regular point) or truncation is broken");
      for (int k = 0; k < n; ++k)
        if (val[k] != 0) g.set_bracket(a, b, k, val[k]);
    }
  auto check = validate_graded(g);
  if (!check.ok)
    throw BasisExpressionFailed("tangent constants invalid: " + check.message);
  return g;
}

Nilpotentization nilpotentize(const Frame& frame, const std::vector<Rat>& p,
                              int order, int max_depth) {
  auto chart = privileged_coordinates(frame, p, order, max_depth);
  auto hat = nilpotent_approximation(chart);
  auto algebra = structure_constants(hat, chart.basis, chart.growth);
  return {std::move(chart), std::move(hat), std::move(algebra)};
}

}  // namespace srgeo
