#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carnot.hpp"
#include "isosearch.hpp"
#include "nilpot.hpp"

using namespace srgeo;

namespace {

// small deterministic rational stream for exact property checks
struct RatStream {
  long s = 1;
  Rat next() {
    s = (s * 1103515245 + 12345) % 2147483647;
    long num = (s % 13) - 6;
    long den = 1 + (s % 7);
    return make_rat(num, den);
  }
  RatVec vec(int n) {
    RatVec v(n);
    for (auto& x : v) x = next();
    return v;
  }
};

// Strictly upper triangular 4x4 matrices, basis E12,E23,E34,E13,E24,E14,
// graded by diagonal offset. Gives an independent route to the group law:
// exact exp/log on nilpotent matrices.
GradedLieAlgebra ut4_algebra() {
  auto g = GradedLieAlgebra::zero(6, {3, 2, 1});
  g.set_bracket(0, 1, 3, Rat(1));   // [E12,E23] = E13
  g.set_bracket(1, 2, 4, Rat(1));   // [E23,E34] = E24
  g.set_bracket(0, 4, 5, Rat(1));   // [E12,E24] = E14
  g.set_bracket(2, 3, 5, Rat(-1));  // [E34,E13] = -E14
  return g;
}

using Mat4 = std::array<std::array<Rat, 4>, 4>;

Mat4 mat_of(const RatVec& x) {
  Mat4 a{};
  a[0][1] = x[0];
  a[1][2] = x[1];
  a[2][3] = x[2];
  a[0][2] = x[3];
  a[1][3] = x[4];
  a[0][3] = x[5];
  return a;
}

RatVec coords_of(const Mat4& a) {
  return {a[0][1], a[1][2], a[2][3], a[0][2], a[1][3], a[0][3]};
}

Mat4 mmul(const Mat4& a, const Mat4& b) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Mat4 madd(const Mat4& a, const Mat4& b, const Rat& s) {
  Mat4 r = a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] += s * b[i][j];
  return r;
}

// exp for strictly upper triangular: terminates at A^3
Mat4 mexp(const Mat4& a) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i) r[i][i] = 1;
  Mat4 a2 = mmul(a, a), a3 = mmul(a2, a);
  r = madd(r, a, Rat(1));
  r = madd(r, a2, make_rat(1, 2));
  r = madd(r, a3, make_rat(1, 6));
  return r;
}

Mat4 mlog(const Mat4& p) {
  Mat4 n = p;
  for (int i = 0; i < 4; ++i) n[i][i] -= 1;
  Mat4 n2 = mmul(n, n), n3 = mmul(n2, n);
  Mat4 r{};
  r = madd(r, n, Rat(1));
  r = madd(r, n2, make_rat(-1, 2));
  r = madd(r, n3, make_rat(1, 3));
  return r;
}

}  // namespace

TEST_CASE("abelian group law is addition") {
  auto G = make_carnot_group(abelian_algebra(3));
  RatStream rs;
  for (int t = 0; t < 5; ++t) {
    auto x = rs.vec(3), y = rs.vec(3);
    RatVec sum(3);
    for (int i = 0; i < 3; ++i) sum[i] = x[i] + y[i];
    CHECK(bch_product(G, x, y) == sum);
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(G.frame.fields[i] ==
          PolyVectorField::coordinate(3, i));
  }
}

TEST_CASE("first Heisenberg product matches the closed form") {
  auto G = make_carnot_group(heisenberg_algebra(1));
  RatStream rs;
  for (int t = 0; t < 8; ++t) {
    auto x = rs.vec(3), y = rs.vec(3);
    auto z = bch_product(G, x, y);
    CHECK(z[0] == x[0] + y[0]);
    CHECK(z[1] == x[1] + y[1]);
    CHECK(z[2] == x[2] + y[2] + (x[0] * y[1] - x[1] * y[0]) / 2);
  }
}

TEST_CASE("second Heisenberg product matches the closed form") {
  auto G = make_carnot_group(heisenberg_algebra(2));
  RatStream rs;
  for (int t = 0; t < 5; ++t) {
    auto x = rs.vec(5), y = rs.vec(5);
    auto z = bch_product(G, x, y);
    for (int i = 0; i < 4; ++i) CHECK(z[i] == x[i] + y[i]);
    CHECK(z[4] == x[4] + y[4] +
                      (x[0] * y[1] - x[1] * y[0] + x[2] * y[3] - x[3] * y[2]) /
                          2);
  }
}

TEST_CASE("step-3 law agrees with the matrix exp/log route") {
  auto g = ut4_algebra();
  REQUIRE(validate_graded(g).ok);
  auto G = make_carnot_group(g);
  RatStream rs;
  for (int t = 0; t < 10; ++t) {
    auto x = rs.vec(6), y = rs.vec(6);
    auto z = bch_product(G, x, y);
    auto zm = coords_of(mlog(mmul(mexp(mat_of(x)), mexp(mat_of(y)))));
    CHECK(z == zm);
  }
}

TEST_CASE("group axioms, exact") {
  for (auto g : {heisenberg_algebra(1), ut4_algebra(),
                 e147_family(make_rat(1, 4))}) {
    auto G = make_carnot_group(g);
    RatStream rs;
    RatVec id(G.dim, Rat(0));
    for (int t = 0; t < 4; ++t) {
      auto x = rs.vec(G.dim), y = rs.vec(G.dim), z = rs.vec(G.dim);
      CHECK(bch_product(G, bch_product(G, x, y), z) ==
            bch_product(G, x, bch_product(G, y, z)));
      CHECK(bch_product(G, x, group_inverse(x)) == id);
      CHECK(bch_product(G, x, id) == x);
      CHECK(bch_product(G, id, x) == x);
    }
  }
}

TEST_CASE("dilations: diagonal weights, exact homomorphisms") {
  auto G = make_carnot_group(heisenberg_algebra(1));
  RatVec p{Rat(1), Rat(1), Rat(1)};
  CHECK(dilation(G, Rat(1), p) == p);
  CHECK(dilation(G, Rat(2), p) == RatVec{Rat(2), Rat(2), Rat(4)});
  CHECK_THROWS(dilation(G, Rat(0), p));
  CHECK_THROWS(dilation(G, Rat(-2), p));

  auto E = make_carnot_group(e147_family(make_rat(1, 3)));
  RatStream rs;
  Rat la = make_rat(3, 7), mu = make_rat(5, 2);
  for (int t = 0; t < 4; ++t) {
    auto x = rs.vec(E.dim), y = rs.vec(E.dim);
    CHECK(dilation(E, la, dilation(E, mu, x)) == dilation(E, la * mu, x));
    // dilations are group automorphisms
    CHECK(bch_product(E, dilation(E, la, x), dilation(E, la, y)) ==
          dilation(E, la, bch_product(E, x, y)));
  }
}

TEST_CASE("left-invariant frame of the first Heisenberg group") {
  auto G = make_carnot_group(heisenberg_algebra(1));
  REQUIRE((int)G.frame.fields.size() == 2);
  Poly half = Poly::constant(3, make_rat(1, 2));
  // X1 = d/da - (b/2) d/dc, X2 = d/db + (a/2) d/dc
  PolyVectorField x1({Poly::constant(3, Rat(1)), Poly(3),
                      -(half * Poly::variable(3, 1))});
  PolyVectorField x2({Poly(3), Poly::constant(3, Rat(1)),
                      half * Poly::variable(3, 0)});
  CHECK(G.frame.fields[0] == x1);
  CHECK(G.frame.fields[1] == x2);
}

TEST_CASE("frame fields are left-invariant, exactly") {
  for (auto g : {heisenberg_algebra(1), ut4_algebra(),
                 e147_family(make_rat(1, 4))}) {
    auto G = make_carnot_group(g);
    int n = G.dim;
    RatStream rs;
    for (int t = 0; t < 5; ++t) {
      auto a = rs.vec(n), h = rs.vec(n);
      auto ah = bch_product(G, a, h);
      RatVec ahxy;  // (a,h) stacked for evaluating law derivatives
      ahxy.insert(ahxy.end(), a.begin(), a.end());
      ahxy.insert(ahxy.end(), h.begin(), h.end());
      for (int i = 0; i < G.rank; ++i) {
        auto at_ah = G.frame.fields[i].eval(ah);
        auto at_h = G.frame.fields[i].eval(h);
        for (int k = 0; k < n; ++k) {
          Rat push = 0;  // (d L_a at h) applied to the field value
          for (int j = 0; j < n; ++j)
            push += G.law[k].derivative(n + j).eval(ahxy) * at_h[j];
          CHECK(push == at_ah[k]);
        }
      }
    }
  }
}

TEST_CASE("nilpotentization at the identity returns the algebra") {
  // adapted flag basis at 0 picks the coordinate directions, so the tangent
  // constants come back on the nose for these models
  for (auto g : {heisenberg_algebra(1), heisenberg_algebra(2), ut4_algebra()}) {
    auto G = make_carnot_group(g);
    auto nil = nilpotentize(G.frame, RatVec(G.dim, Rat(0)));
    CHECK(nil.algebra == g);
  }
}

TEST_CASE("round trip through the tangent algebra up to isomorphism") {
  auto g = e147_family(make_rat(1, 4));
  auto G = make_carnot_group(g);
  auto nil = nilpotentize(G.frame, RatVec(G.dim, Rat(0)));
  auto r = stratified_iso_search(nil.algebra, g, 50, 1e-8, 17);
  CHECK(r.verdict == IsoVerdict::True);
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("homogeneous quasinorm") {
  auto G = make_carnot_group(heisenberg_algebra(1));
  CHECK(homogeneous_quasinorm(G, {0, 0, 0}) == 0.0);
  CHECK(homogeneous_quasinorm(G, {1, 0, 1}) == doctest::Approx(2.0));
  auto E = make_carnot_group(e147_family(make_rat(2, 5)));
  std::vector<double> x{0.3, -1.2, 0.8, 2.0, -0.1, 0.05, -3.0};
  for (double la : {0.5, 2.0, 7.5}) {
    CHECK(homogeneous_quasinorm(E, dilation_d(E, la, x)) ==
          doctest::Approx(la * homogeneous_quasinorm(E, x)).epsilon(1e-12));
  }
  // inverse has the same quasinorm: coordinates only change sign
  CHECK(homogeneous_quasinorm(E, group_inverse_d(x)) ==
        doctest::Approx(homogeneous_quasinorm(E, x)).epsilon(1e-15));
}

TEST_CASE("translation invariance of the coordinate volume") {
  auto G = make_carnot_group(heisenberg_algebra(1));
  CHECK(haar_translation_defect(G, {0.7, -1.3, 0.4}, 8) < 1e-12);
  auto E = make_carnot_group(e147_family(make_rat(1, 3)));
  CHECK(haar_translation_defect(E, {1, 2, -1, 0.5, 0, 1, -2}, 8) < 1e-12);
}

TEST_CASE("double-precision law matches the exact law") {
  auto G = make_carnot_group(e147_family(make_rat(1, 4)));
  RatStream rs;
  for (int t = 0; t < 4; ++t) {
    auto x = rs.vec(G.dim), y = rs.vec(G.dim);
    auto z = bch_product(G, x, y);
    auto zd = bch_product_d(G, to_double_vec(x), to_double_vec(y));
    for (int k = 0; k < G.dim; ++k)
      CHECK(zd[k] == doctest::Approx(to_double(z[k])).epsilon(1e-12));
  }
}

TEST_CASE("input validation") {
  auto G = make_carnot_group(heisenberg_algebra(1));
  CHECK_THROWS(bch_product(G, RatVec(2, Rat(0)), RatVec(3, Rat(0))));
  CHECK_THROWS(homogeneous_quasinorm(G, {1, 2}));
  auto bad = GradedLieAlgebra::zero(3, {2, 1});  // V2 not generated
  CHECK_THROWS(make_carnot_group(bad));
}
