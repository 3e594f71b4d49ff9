#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "exactla.hpp"
#include "poly.hpp"
#include "vectorfield.hpp"

using namespace srgeo;

namespace {

Poly mono(int nvars, std::vector<std::pair<int, int>> pows, Rat c) {
  Exp e(nvars, 0);
  for (auto [v, p] : pows) e[v] = p;
  return Poly::monomial(nvars, e, c);
}

Rat rnd_rat(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 9);
  return make_rat(num(rng), den(rng));
}

Poly rnd_poly(std::mt19937& rng, int nvars, int maxdeg, int nterms) {
  Poly p(nvars);
  std::uniform_int_distribution<int> d(0, maxdeg);
  for (int t = 0; t < nterms; ++t) {
    Exp e(nvars, 0);
    int budget = d(rng);
    std::uniform_int_distribution<int> v(0, nvars - 1);
    for (int k = 0; k < budget; ++k) e[v(rng)] += 1;
    p.add_term(e, rnd_rat(rng));
  }
  return p;
}

PolyVectorField rnd_field(std::mt19937& rng, int nvars) {
  std::vector<Poly> c;
  for (int i = 0; i < nvars; ++i) c.push_back(rnd_poly(rng, nvars, 3, 4));
  return PolyVectorField(std::move(c));
}

// Horizontal fields of the dim-7 running example.
Frame example7_frame() {
  int n = 7;
  auto x1 = [&](int pw) { return std::make_pair(0, pw); };
  std::vector<Poly> c1(n, Poly(n)), c2(n, Poly(n)), c3(n, Poly(n));
  c1[0] = Poly::constant(n, 1);
  c2[1] = Poly::constant(n, 1);
  c2[3] = mono(n, {x1(1)}, 1);
  c2[6] = mono(n, {{0, 1}, {2, 1}}, 1) + mono(n, {{0, 2}, {2, 1}}, -1);
  c3[2] = Poly::constant(n, 1);
  c3[4] = mono(n, {{1, 1}}, 1);
  c3[5] = mono(n, {x1(1)}, -1);
  c3[6] = mono(n, {{0, 2}, {1, 1}}, -1);
  return Frame("example7", n, {PolyVectorField(c1), PolyVectorField(c2),
                               PolyVectorField(c3)});
}

}  // namespace

TEST_CASE("polynomial product expands and collects") {
  // x1*x3*(-1+x1) over dim 7
  int n = 7;
  Poly a = mono(n, {{0, 1}, {2, 1}}, 1);
  Poly b = Poly::constant(n, -1) + mono(n, {{0, 1}}, 1);
  Poly prod = a * b;
  Poly want = mono(n, {{0, 1}, {2, 1}}, -1) + mono(n, {{0, 2}, {2, 1}}, 1);
  CHECK(prod == want);
  CHECK(prod.terms().size() == 2);
}

TEST_CASE("derivative and integrate are mutually inverse on zero-constant polys") {
  std::mt19937 rng(11);
  for (int it = 0; it < 20; ++it) {
    Poly p = rnd_poly(rng, 3, 4, 5);
    for (int v = 0; v < 3; ++v) {
      Poly ip = p.integrate(v);
      CHECK(ip.derivative(v) == p);
    }
  }
}

TEST_CASE("substitution at constant polys matches eval") {
  std::mt19937 rng(12);
  for (int it = 0; it < 10; ++it) {
    Poly p = rnd_poly(rng, 4, 3, 6);
    std::vector<Rat> pt;
    std::vector<Poly> consts;
    for (int v = 0; v < 4; ++v) {
      pt.push_back(rnd_rat(rng));
      consts.push_back(Poly::constant(4, pt.back()));
    }
    Poly s = p.substitute(consts, nullptr);
    CHECK(s.terms().size() <= 1);
    CHECK(s.eval(pt) == p.eval(pt));
  }
}

TEST_CASE("weighted truncation is a ring quotient") {
  std::mt19937 rng(13);
  std::vector<int> w = {1, 1, 2, 3};
  Trunc tr{&w, 3};
  for (int it = 0; it < 20; ++it) {
    Poly p = rnd_poly(rng, 4, 3, 5);
    Poly q = rnd_poly(rng, 4, 3, 5);
    Poly lhs = (p * q).truncate(tr);
    Poly rhs = (p.truncate(tr) * q.truncate(tr)).truncate(tr);
    CHECK(lhs == rhs);
    CHECK(lhs == p.mul(q, &tr).truncate(tr));
  }
}

TEST_CASE("heisenberg bracket is the vertical field") {
  int n = 3;
  std::vector<Poly> cx(n, Poly(n)), cy(n, Poly(n));
  cx[0] = Poly::constant(n, 1);
  cy[1] = Poly::constant(n, 1);
  cy[2] = mono(n, {{0, 1}}, 1);
  auto b = lie_bracket(PolyVectorField(cx), PolyVectorField(cy));
  CHECK(b == PolyVectorField::coordinate(n, 2));
}

TEST_CASE("martinet second bracket is constant vertical") {
  int n = 3;
  std::vector<Poly> cx(n, Poly(n)), cy(n, Poly(n));
  cx[0] = Poly::constant(n, 1);
  cy[1] = Poly::constant(n, 1);
  cy[2] = mono(n, {{0, 2}}, 1);
  PolyVectorField X(cx), Y(cy);
  auto b1 = lie_bracket(X, Y);
  std::vector<Poly> want1(n, Poly(n));
  want1[2] = mono(n, {{0, 1}}, 2);
  CHECK(b1 == PolyVectorField(want1));
  auto b2 = lie_bracket(X, b1);
  std::vector<Poly> want2(n, Poly(n));
  want2[2] = Poly::constant(n, 2);
  CHECK(b2 == PolyVectorField(want2));
}

TEST_CASE("dim-7 example first brackets") {
  auto fr = example7_frame();
  int n = 7;
  auto b12 = lie_bracket(fr.fields[0], fr.fields[1]);
  std::vector<Poly> w12(n, Poly(n));
  w12[3] = Poly::constant(n, 1);
  w12[6] = mono(n, {{2, 1}}, 1) + mono(n, {{0, 1}, {2, 1}}, -2);
  CHECK(b12 == PolyVectorField(w12));

  auto b13 = lie_bracket(fr.fields[0], fr.fields[2]);
  std::vector<Poly> w13(n, Poly(n));
  w13[5] = Poly::constant(n, -1);
  w13[6] = mono(n, {{0, 1}, {1, 1}}, -2);
  CHECK(b13 == PolyVectorField(w13));

  auto b23 = lie_bracket(fr.fields[1], fr.fields[2]);
  std::vector<Poly> w23(n, Poly(n));
  w23[4] = Poly::constant(n, 1);
  w23[6] = mono(n, {{0, 1}}, -1);
  CHECK(b23 == PolyVectorField(w23));

  auto b123 = lie_bracket(fr.fields[0], b23);
  std::vector<Poly> w123(n, Poly(n));
  w123[6] = Poly::constant(n, -1);
  CHECK(b123 == PolyVectorField(w123));
}

TEST_CASE("dim-5 example brackets") {
  int n = 5;
  std::vector<Poly> c0(n, Poly(n)), c1(n, Poly(n)), c2(n, Poly(n)), c3(n, Poly(n));
  c0[0] = Poly::constant(n, 1);
  c1[1] = Poly::constant(n, 1);
  c1[4] = mono(n, {{0, 2}}, 1);
  c2[2] = Poly::constant(n, 1);
  c3[3] = Poly::constant(n, 1);
  c3[4] = mono(n, {{2, 1}}, 1);
  PolyVectorField X1(c0), Y1(c1), X2(c2), Y2(c3);
  std::vector<Poly> w(n, Poly(n));
  w[4] = mono(n, {{0, 1}}, 2);
  CHECK(lie_bracket(X1, Y1) == PolyVectorField(w));
  w[4] = Poly::constant(n, 1);
  CHECK(lie_bracket(X2, Y2) == PolyVectorField(w));
  w[4] = Poly::constant(n, 2);
  CHECK(lie_bracket(X1, lie_bracket(X1, Y1)) == PolyVectorField(w));
  CHECK(lie_bracket(X1, X2).is_zero());
  CHECK(lie_bracket(Y1, Y2).is_zero());
}

TEST_CASE("bracket antisymmetry and jacobi on random fields") {
  std::mt19937 rng(21);
  for (int it = 0; it < 8; ++it) {
    int n = 3 + (int)(it % 2);
    auto U = rnd_field(rng, n), V = rnd_field(rng, n), W = rnd_field(rng, n);
    CHECK(lie_bracket(U, V) == lie_bracket(V, U).scale(Rat(-1)));
    auto jac = lie_bracket(U, lie_bracket(V, W)) +
               lie_bracket(V, lie_bracket(W, U)) +
               lie_bracket(W, lie_bracket(U, V));
    CHECK(jac.is_zero());
  }
}

TEST_CASE("fields act as derivations and bracket is the commutator action") {
  std::mt19937 rng(22);
  for (int it = 0; it < 6; ++it) {
    int n = 3;
    auto V = rnd_field(rng, n), W = rnd_field(rng, n);
    Poly f = rnd_poly(rng, n, 3, 4), g = rnd_poly(rng, n, 3, 4);
    CHECK(V.apply(f * g) == f * V.apply(g) + g * V.apply(f));
    CHECK(lie_bracket(V, W).apply(f) == V.apply(W.apply(f)) - W.apply(V.apply(f)));
  }
}

TEST_CASE("symbolic bracket agrees with jacobian formula at points") {
  std::mt19937 rng(23);
  for (int it = 0; it < 10; ++it) {
    int n = 4;
    auto V = rnd_field(rng, n), W = rnd_field(rng, n);
    auto B = lie_bracket(V, W);
    std::vector<Rat> pt;
    for (int v = 0; v < n; ++v) pt.push_back(rnd_rat(rng));
    auto vp = V.eval(pt), wp = W.eval(pt), bp = B.eval(pt);
    // J_W(pt)*V(pt) - J_V(pt)*W(pt), componentwise
    for (int i = 0; i < n; ++i) {
      Rat acc = 0;
      for (int j = 0; j < n; ++j)
        acc += W[i].derivative(j).eval(pt) * vp[j] -
               V[i].derivative(j).eval(pt) * wp[j];
      CHECK(acc == bp[i]);
    }
  }
}

TEST_CASE("weighted parts decompose a field and flag low-degree terms") {
  auto fr = example7_frame();
  std::vector<int> w = {1, 1, 1, 2, 2, 2, 3};
  // Horizontal fields of this chart-adapted frame have weighted degree >= -1.
  for (const auto& f : fr.fields) {
    PolyVectorField sum = PolyVectorField::zero(7);
    for (int d = -3; d <= 3; ++d) sum = sum + f.field_weighted_part(w, d);
    CHECK(sum == f);
    for (int d = -3; d < -1; ++d) CHECK(f.field_weighted_part(w, d).is_zero());
  }
}

TEST_CASE("compiled double evaluation matches exact evaluation") {
  std::mt19937 rng(24);
  auto fr = example7_frame();
  auto df = compile_frame(fr);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 10; ++it) {
    std::vector<double> x(7);
    for (auto& v : x) v = u(rng);
    std::vector<double> out(7);
    for (size_t k = 0; k < fr.fields.size(); ++k) {
      df.fields[k].eval(x.data(), out.data());
      auto ref = fr.fields[k].eval_d(x);
      for (int i = 0; i < 7; ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("frame json round trip is bit exact") {
  std::mt19937 rng(25);
  auto fr = example7_frame();
  auto j = frame_to_json(fr);
  auto fr2 = frame_from_json(j);
  CHECK(fr2.nvars == fr.nvars);
  REQUIRE(fr2.fields.size() == fr.fields.size());
  for (size_t k = 0; k < fr.fields.size(); ++k) CHECK(fr2.fields[k] == fr.fields[k]);
  CHECK(frame_to_json(fr2).dump() == j.dump());
  // Awkward coefficients survive too.
  std::vector<Poly> c(2, Poly(2));
  c[0] = mono(2, {{0, 3}}, make_rat(-355, 113)) + mono(2, {{1, 1}}, make_rat(1, 998244353));
  PolyVectorField v(c);
  CHECK(field_from_json(field_to_json(v)) == v);
}

TEST_CASE("malformed frames are rejected") {
  CHECK_THROWS(Frame("bad", 3, {}));
  CHECK_THROWS(Frame("bad", 3, {PolyVectorField::coordinate(2, 0)}));
  CHECK_THROWS(PolyVectorField(std::vector<Poly>{Poly(2), Poly(2), Poly(2)}));
  CHECK_THROWS(make_rat(1, 0));
}

TEST_CASE("rational elimination recovers rank solve and inverse") {
  // Hilbert 4x4: entries 1/(i+j+1); its inverse is integral.
  RatMat h(4, RatVec(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h[i][j] = make_rat(1, i + j + 1);
  CHECK(rat_rank(h) == 4);
  auto inv = rat_invert(h);
  REQUIRE(inv.has_value());
  RatMat want = {{Rat(16), Rat(-120), Rat(240), Rat(-140)},
                 {Rat(-120), Rat(1200), Rat(-2700), Rat(1680)},
                 {Rat(240), Rat(-2700), Rat(6480), Rat(-4200)},
                 {Rat(-140), Rat(1680), Rat(-4200), Rat(2800)}};
  CHECK(*inv == want);
  CHECK(rat_mat_mul(h, *inv) == rat_identity(4));

  RatVec b = {Rat(1), Rat(0), Rat(0), Rat(0)};
  auto x = rat_solve(h, b);
  REQUIRE(x.has_value());
  CHECK(rat_mat_vec(h, *x) == b);
  CHECK((*x)[0] == 16);

  // Singular and inconsistent cases.
  RatMat s = {{Rat(1), Rat(2)}, {Rat(2), Rat(4)}};
  CHECK(rat_rank(s) == 1);
  CHECK(!rat_invert(s).has_value());
  CHECK(!rat_solve({{Rat(1)}, {Rat(2)}}, {Rat(1), Rat(3)}).has_value());
}

TEST_CASE("incremental row space tracks independence exactly") {
  RatRowSpace sp(3);
  CHECK(sp.add_if_independent({Rat(1), Rat(2), Rat(3)}));
  CHECK(sp.add_if_independent({Rat(0), Rat(1), Rat(1)}));
  CHECK(!sp.add_if_independent({Rat(2), Rat(5), Rat(7)}));  // sum of the two
  CHECK(sp.rank() == 2);
  CHECK(sp.contains({Rat(3), Rat(7), Rat(10)}));
  CHECK(!sp.contains({Rat(0), Rat(0), Rat(1)}));
  CHECK(sp.add_if_independent({Rat(0), Rat(0), Rat(1)}));
  CHECK(sp.rank() == 3);
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> d(-5, 5);
  for (int it = 0; it < 20; ++it) {
    RatVec r = {Rat(d(rng)), Rat(d(rng)), Rat(d(rng))};
    CHECK(sp.contains(r));
  }
}
