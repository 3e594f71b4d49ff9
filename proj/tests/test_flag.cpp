#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exactla.hpp"
#include "flag.hpp"
#include "frames.hpp"

using namespace srgeo;
using namespace testutil;

TEST_CASE("heisenberg growth at origin") {
  auto [g, b] = bracket_flag(heis1_frame(), rp({"0", "0", "0"}));
  CHECK(g.dims == std::vector<int>{2, 3});
  CHECK(hausdorff_dimension(g) == 4);
  CHECK(weights(g) == std::vector<int>{1, 1, 2});
  REQUIRE(b.entries.size() == 3);
  CHECK(b.entries[0].idx == std::vector<int>{0});
  CHECK(b.entries[1].idx == std::vector<int>{1});
  CHECK(b.entries[2].idx == std::vector<int>{0, 1});
  CHECK(b.weights == std::vector<int>{1, 1, 2});
}

TEST_CASE("martinet growth stagnates at origin then completes") {
  auto fr = martinet_frame();
  auto [g0, b0] = bracket_flag(fr, rp({"0", "0", "0"}));
  CHECK(g0.dims == std::vector<int>{2, 2, 3});
  CHECK(hausdorff_dimension(g0) == 5);
  CHECK(weights(g0) == std::vector<int>{1, 1, 3});
  CHECK(b0.entries[2].idx == std::vector<int>{0, 0, 1});

  auto [g1, b1] = bracket_flag(fr, rp({"1", "0", "0"}));
  CHECK(g1.dims == std::vector<int>{2, 3});
  CHECK(b1.entries[2].idx == std::vector<int>{0, 1});
}

TEST_CASE("dim-5 example growth is (4,5) on and off the degenerate slice") {
  auto fr = example5_frame();
  for (auto& x1 : {"1", "0", "1/2", "-3/7"}) {
    auto [g, b] = bracket_flag(fr, rp({x1, "0", "0", "0", "0"}));
    CHECK(g.dims == std::vector<int>{4, 5});
    CHECK(hausdorff_dimension(g) == 6);
    CHECK(weights(g) == std::vector<int>{1, 1, 1, 1, 2});
  }
}

TEST_CASE("dim-7 example is equiregular (3,6,7) on a rational grid") {
  auto fr = example7_frame();
  std::vector<std::vector<Rat>> samples;
  for (auto& a : {"1/16", "1/8", "3/16"})
    for (auto& b : {"1/16", "1/5"})
      samples.push_back(rp({a, b, "1/9", "0", "0", "0", "0"}));
  auto v = equiregular_check(fr, samples);
  CHECK(v.equiregular);
  CHECK(v.growth.dims == std::vector<int>{3, 6, 7});
  CHECK(hausdorff_dimension(v.growth) == 12);
  CHECK(weights(v.growth) == std::vector<int>{1, 1, 1, 2, 2, 2, 3});
}

TEST_CASE("martinet sample set is flagged non-equiregular with witnesses") {
  auto v = equiregular_check(martinet_frame(),
                             {rp({"0", "0", "0"}), rp({"1", "0", "0"})});
  CHECK(!v.equiregular);
  CHECK(v.witness_a == 0);
  CHECK(v.witness_b == 1);
  CHECK(v.growth_a.dims == std::vector<int>{2, 2, 3});
  CHECK(v.growth_b.dims == std::vector<int>{2, 3});
}

TEST_CASE("abelian frame has step one and Q equals dimension") {
  int n = 2;
  auto fr = Frame("abelian2", n, {PolyVectorField::coordinate(n, 0),
                                  PolyVectorField::coordinate(n, 1)});
  auto [g, b] = bracket_flag(fr, rp({"0", "0"}));
  CHECK(g.dims == std::vector<int>{2});
  CHECK(hausdorff_dimension(g) == 2);
}

TEST_CASE("hausdorff dimension exceeds ambient dimension beyond step one") {
  for (auto g : {GrowthVector{{2, 3}}, GrowthVector{{4, 5}},
                 GrowthVector{{3, 6, 7}}, GrowthVector{{2, 2, 3}}})
    CHECK(hausdorff_dimension(g) > g.ambient_dim());
}

TEST_CASE("non bracket generating frames are reported") {
  int n = 2;
  auto fr = Frame("line", n, {PolyVectorField::coordinate(n, 0)});
  CHECK_THROWS_AS(bracket_flag(fr, rp({"0", "0"})), NotBracketGenerating);
  // Depth exhaustion before the flag completes.
  CHECK_THROWS_AS(bracket_flag(martinet_frame(), rp({"0", "0", "0"}), 2),
                  NotBracketGenerating);
  CHECK_THROWS(bracket_flag(martinet_frame(), rp({"0", "0"})));
  CHECK_THROWS(bracket_flag(martinet_frame(), rp({"0", "0", "0"}), 0));
  CHECK_THROWS(equiregular_check(martinet_frame(), {}));
}

TEST_CASE("flag selection is deterministic and basis values are independent") {
  auto fr = example7_frame();
  auto p = rp({"1/16", "1/9", "-1/11", "0", "0", "0", "0"});
  auto [g1, b1] = bracket_flag(fr, p);
  auto [g2, b2] = bracket_flag(fr, p);
  REQUIRE(b1.entries.size() == b2.entries.size());
  for (size_t i = 0; i < b1.entries.size(); ++i) {
    CHECK(b1.entries[i].idx == b2.entries[i].idx);
    CHECK(b1.entries[i].field == b2.entries[i].field);
  }
  RatRowSpace sp(7);
  for (auto& e : b1.entries) CHECK(sp.add_if_independent(e.field.eval(p)));
  // Layer dims never decrease.
  for (size_t i = 1; i < g1.dims.size(); ++i) CHECK(g1.dims[i] >= g1.dims[i - 1]);
}
