#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frames.hpp"
#include "nilpot.hpp"

using namespace srgeo;
using namespace testutil;

TEST_CASE("heisenberg chart at origin is the identity jet") {
  auto fr = heis1_frame();
  auto ch = privileged_coordinates(fr, rp({"0", "0", "0"}));
  for (int i = 0; i < 3; ++i) {
    Exp e(3, 0);
    e[i] = 1;
    CHECK(ch.phi[i] == Poly::monomial(3, e, 1));
  }
  REQUIRE(ch.push_frame.size() == 2);
  CHECK(ch.push_frame[0] == fr.fields[0]);
  CHECK(ch.push_frame[1] == fr.fields[1]);
  auto hat = nilpotent_approximation(ch);
  CHECK(hat.fields[0] == fr.fields[0]);
  CHECK(hat.fields[1] == fr.fields[1]);
}

TEST_CASE("heisenberg tangent constants are its own, at any rational point") {
  auto fr = heis1_frame();
  for (auto pt : {rp({"0", "0", "0"}), rp({"3/7", "-2/5", "1/9"})}) {
    auto nil = nilpotentize(fr, pt);
    CHECK(nil.algebra == heisenberg_algebra(1));
  }
}

TEST_CASE("martinet at a regular point gives the first heisenberg algebra") {
  auto nil = nilpotentize(martinet_frame(), rp({"1", "0", "0"}));
  CHECK(nil.algebra == heisenberg_algebra(1));
  // Chart-level hats, frozen by explicit flow composition by hand.
  int n = 3;
  std::vector<Poly> want(n, Poly(n));
  want[1] = Poly::constant(n, 1);
  want[2] = tmono(n, {{0, 1}}, 1);
  CHECK(nil.hat.fields[0] == PolyVectorField::coordinate(n, 0));
  CHECK(nil.hat.fields[1] == PolyVectorField(want));
}

TEST_CASE("martinet at the origin has no ambient-dimensional tangent algebra") {
  CHECK_THROWS_AS(nilpotentize(martinet_frame(), rp({"0", "0", "0"})),
                  BasisExpressionFailed);
}

TEST_CASE("dim-5 tangent algebra across the parameter slice") {
  auto fr = example5_frame();

  // x1 = 1/4: adapted second layer comes from the first block bracket, whose
  // value at p is half of the coordinate direction.
  auto a = nilpotentize(fr, rp({"1/4", "0", "0", "0", "0"})).algebra;
  auto want14 = GradedLieAlgebra::zero(5, {4, 1});
  want14.set_bracket(0, 1, 4, Rat(1));
  want14.set_bracket(2, 3, 4, Rat(2));
  CHECK(a == want14);

  // x1 = 1/2: exactly the second Heisenberg constants.
  auto b = nilpotentize(fr, rp({"1/2", "0", "0", "0", "0"})).algebra;
  CHECK(b == heisenberg_algebra(2));

  // x1 = 0: exactly the direct product of the plane with the first
  // Heisenberg algebra.
  auto c = nilpotentize(fr, rp({"0", "0", "0", "0", "0"})).algebra;
  CHECK(c == product_algebra(abelian_algebra(2), heisenberg_algebra(1)));

  CHECK(invariant_prescreen(b).pairing_rank == 4);
  CHECK(invariant_prescreen(c).pairing_rank == 2);
}

TEST_CASE("dim-7 tangent constants at a rational point, frozen table") {
  // Base (1/16, 1/9, -1/11, 0,...). Oracle: expand bracket values at the
  // base point in the flag-value basis, keeping top-weight coefficients;
  // computed by hand over exact rationals, independently of the jet route.
  auto nil = nilpotentize(example7_frame(),
                          rp({"1/16", "1/9", "-1/11", "0", "0", "0", "0"}));
  auto want = GradedLieAlgebra::zero(7, {3, 3, 1});
  want.set_bracket(0, 1, 3, Rat(1));
  want.set_bracket(0, 2, 4, Rat(1));
  want.set_bracket(1, 2, 5, Rat(1));
  want.set_bracket(0, 3, 6, Rat(1));
  want.set_bracket(0, 4, 6, make_rat(-11, 9));
  want.set_bracket(0, 5, 6, make_rat(-11, 2));
  want.set_bracket(1, 4, 6, make_rat(-11, 16));
  want.set_bracket(2, 3, 6, make_rat(77, 16));
  CHECK(nil.algebra == want);
  CHECK(validate_graded(nil.algebra).ok);
}

TEST_CASE("hat fields are weighted homogeneous of degree -1 and nilpotent") {
  auto nil = nilpotentize(example5_frame(), rp({"1/4", "0", "0", "0", "0"}));
  const auto& w = nil.chart.wts;
  for (const auto& f : nil.hat.fields) {
    CHECK(f == f.field_weighted_part(w, -1));
    CHECK(!f.is_zero());
  }
  // Step 2: triple brackets of hat fields vanish identically.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        CHECK(lie_bracket(nil.hat.fields[i],
                          lie_bracket(nil.hat.fields[j], nil.hat.fields[k]))
                  .is_zero());
}

TEST_CASE("pushforward jets satisfy the privileged degree bound") {
  auto ch = privileged_coordinates(example7_frame(),
                                   rp({"1/16", "1/9", "-1/11", "0", "0", "0", "0"}));
  for (const auto& f : ch.push_frame) {
    auto d = f.min_weighted_degree(ch.wts);
    REQUIRE(d.has_value());
    CHECK(*d >= -1);
    CHECK(*d == -1);
  }
  for (size_t j = 0; j < ch.push_adapted.size(); ++j) {
    auto d = ch.push_adapted[j].min_weighted_degree(ch.wts);
    REQUIRE(d.has_value());
    CHECK(*d == -ch.basis.weights[j]);
  }
}

TEST_CASE("truncation order above the step changes nothing") {
  auto p = rp({"1/4", "0", "0", "0", "0"});
  auto a = nilpotentize(example5_frame(), p, 0);
  auto b = nilpotentize(example5_frame(), p, 3);
  CHECK(a.algebra == b.algebra);
  CHECK(a.hat.fields[1] == b.hat.fields[1]);
}

TEST_CASE("order below the step is rejected") {
  CHECK_THROWS_AS(privileged_coordinates(heis1_frame(), rp({"0", "0", "0"}), 1),
                  std::invalid_argument);
}

TEST_CASE("frame reordering preserves the tangent fingerprint") {
  auto fr = example5_frame();
  Frame rev("example5_rev", 5,
            {fr.fields[3], fr.fields[2], fr.fields[1], fr.fields[0]});
  auto p = rp({"1/2", "0", "0", "0", "0"});
  auto a = nilpotentize(fr, p).algebra;
  auto b = nilpotentize(rev, p).algebra;
  CHECK(invariant_prescreen(a) == invariant_prescreen(b));
}
