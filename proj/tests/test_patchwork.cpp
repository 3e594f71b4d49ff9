#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "patchwork.hpp"

using namespace srgeo;

namespace {

std::vector<std::pair<Rat, Rat>> box1(const Rat& lo, const Rat& hi) {
  return {{lo, hi}};
}

PointCloudMM line_cloud(int res, Rat lo = 0, Rat hi = 1) {
  auto G = make_carnot_group(abelian_algebra(1), "line");
  return sample_group_cloud(G, box1(lo, hi), res);
}

}  // namespace

TEST_CASE("plane cloud: grid, weights, oracle") {
  auto G = make_carnot_group(abelian_algebra(2), "plane");
  std::vector<std::pair<Rat, Rat>> box = {{0, 1}, {0, 1}};
  auto cloud = sample_group_cloud(G, box, 10);
  CHECK(cloud.points.size() == 100);
  for (auto& w : cloud.weights) CHECK(w == Rat(1, 100));
  CHECK(cloud.total_mass() == 1);
  CHECK(cloud.has_grid());
  CHECK(cloud.hom_dim == 2);
  CHECK(cloud.bracket_factor == 1.0);

  // cell centers: first point at (0.05, 0.05), strides 0.1
  CHECK(cloud.points[0][0] == doctest::Approx(0.05));
  CHECK(cloud.points[0][1] == doctest::Approx(0.05));
  CHECK(cloud.points[11][0] == doctest::Approx(0.15));
  CHECK(cloud.points[11][1] == doctest::Approx(0.15));

  // abelian distance is Euclidean and the bracket collapses
  auto [lo, hi] = cloud.dist(0, 11);
  CHECK(lo == hi);
  CHECK(lo == doctest::Approx(std::sqrt(0.02)));

  // non-unit box volume
  std::vector<std::pair<Rat, Rat>> box2 = {{-1, 1}, {0, 3}};
  auto c2 = sample_group_cloud(G, box2, 12);
  CHECK(c2.total_mass() == 6);
}

TEST_CASE("cloud preconditions") {
  auto G = make_carnot_group(abelian_algebra(2), "plane");
  std::vector<std::pair<Rat, Rat>> box = {{0, 1}, {0, 1}};
  CHECK_THROWS_AS(sample_group_cloud(G, box, 7), std::invalid_argument);
  CHECK_THROWS_AS(sample_group_cloud(G, box, 100, 4000), std::length_error);
  std::vector<std::pair<Rat, Rat>> bad = {{0, 1}, {1, 1}};
  CHECK_THROWS_AS(sample_group_cloud(G, bad, 10), std::invalid_argument);
}

TEST_CASE("heisenberg cloud mass and velocity bounds") {
  auto G = make_carnot_group(heisenberg_algebra(1), "heis1");
  std::vector<std::pair<Rat, Rat>> box = {{-1, 1}, {-1, 1}, {-1, 1}};
  auto cloud = sample_group_cloud(G, box, 32);
  CHECK(cloud.points.size() == 32768);
  CHECK(cloud.total_mass() == 8);
  CHECK(cloud.hom_dim == 4);
  // left-invariant rows over the box: (1,0,-y/2) and (0,1,x/2)
  REQUIRE(cloud.vel.size() == 3);
  CHECK(cloud.vel[0] == doctest::Approx(1.0));
  CHECK(cloud.vel[1] == doctest::Approx(1.0));
  CHECK(cloud.vel[2] == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("grid window enumerates exactly the covered cells") {
  auto G = make_carnot_group(abelian_algebra(2), "plane");
  std::vector<std::pair<Rat, Rat>> box = {{0, 1}, {0, 1}};
  auto cloud = sample_group_cloud(G, box, 10);
  std::vector<double> center = cloud.points[23];  // cell (2, 3)
  std::set<long> got;
  grid_window(cloud, center, {0.15, 0.05}, [&](long i) { got.insert(i); });
  std::set<long> want;
  for (int i = 1; i <= 3; ++i) want.insert(10L * i + 3);
  CHECK(got == want);
}

TEST_CASE("line patchwork: structure exact, constants in range") {
  auto cloud = line_cloud(128);
  auto pw = build_patchwork(cloud, 4, 7);
  REQUIRE(pw.depth == 4);
  REQUIRE(pw.levels.size() == 5);

  // every point in exactly one cube per level, masses add up exactly
  for (int k = 0; k <= 4; ++k) {
    size_t n = 0;
    Rat mass = 0;
    for (auto& Q : pw.levels[k]) {
      n += Q.members.size();
      mass += Q.mass;
      CHECK(!Q.members.empty());
      for (int m : Q.members) CHECK(pw.assign[k][m] == Q.id);
      // a cube holds its own net center
      CHECK(pw.assign[k][Q.center] == Q.id);
    }
    CHECK(n == cloud.points.size());
    CHECK(mass == cloud.total_mass());
  }

  // nesting: the parent cube contains every member
  for (int k = 1; k <= 4; ++k)
    for (auto& Q : pw.levels[k])
      for (int m : Q.members)
        CHECK(pw.assign[k - 1][m] == Q.parent);

  CHECK(pw.C1 > 0);
  CHECK(pw.C2 / pw.C1 <= 8.0);

  // same seed reproduces the nets, byte for byte
  auto pw2 = build_patchwork(cloud, 4, 7);
  CHECK(pw2.assign == pw.assign);
  for (int k = 0; k <= 4; ++k)
    for (size_t i = 0; i < pw.levels[k].size(); ++i)
      CHECK(pw2.levels[k][i].center == pw.levels[k][i].center);
}

TEST_CASE("line patchwork: strips match the direct count") {
  auto cloud = line_cloud(128);
  auto pw = build_patchwork(cloud, 4, 7);

  // interior cube at level 2
  int pick = -1;
  for (auto& Q : pw.levels[2])
    if (!Q.box_boundary) pick = Q.id;
  REQUIRE(pick >= 0);
  const Cube& Q = pw.levels[2][pick];

  double tau = 0.5 * 0.25;  // t = 1/2 at level 2
  auto strip = boundary_strip(cloud, pw, 2, pick, 0.5);

  // direct count straight from the definition, plain |x - y| distance
  std::set<int> want;
  long N = (long)cloud.points.size();
  for (long x = 0; x < N; ++x) {
    bool inside = pw.assign[2][x] == pick;
    double dmin = 1e300;
    for (long y = 0; y < N; ++y) {
      if ((pw.assign[2][y] == pick) == inside) continue;
      dmin = std::min(dmin,
                      std::abs(cloud.points[x][0] - cloud.points[y][0]));
    }
    if (dmin < tau) want.insert((int)x);
  }
  std::set<int> got(strip.begin(), strip.end());
  CHECK(got == want);

  // the inner half alone carries about 2 t 2^-k of mass per unit density
  double inner = 0;
  for (int x : strip)
    if (pw.assign[2][x] == pick) inner += cloud.weights_d[x];
  CHECK(inner == doctest::Approx(2 * tau).epsilon(0.3));

  // monotone in t
  double prev = -1;
  for (double t : {0.125, 0.25, 0.5, 1.0}) {
    auto s = boundary_strip(cloud, pw, 2, pick, t);
    double mass = 0;
    for (int x : s) mass += cloud.weights_d[x];
    CHECK(mass >= prev);
    prev = mass;
  }

  CHECK_THROWS_AS(boundary_strip(cloud, pw, 2, pick, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(boundary_strip(cloud, pw, 2, pick, 1.5),
                  std::invalid_argument);
}

TEST_CASE("line patchwork: boundary mass fit near linear") {
  auto cloud = line_cloud(128);
  auto pw = build_patchwork(cloud, 4, 7);
  auto rep = check_patchwork(cloud, pw, {1.0, 0.5, 0.25, 0.125});
  CHECK(rep.nesting_violations == 0);
  CHECK(rep.partition_violations == 0);
  CHECK(rep.mass_conserved);
  CHECK(rep.eta == doctest::Approx(1.0).epsilon(0.2));
  CHECK(rep.a0 > 0);
  CHECK(pw.eta == rep.eta);

  // the coarse thresholds overflow the scan cap and are flagged, not fit
  int capped = 0;
  for (auto& e : rep.entries) {
    if (e.capped) {
      capped++;
      CHECK(e.t * std::pow(0.5, e.level) > 0.25);
    }
    // scanned entries obey the fitted inequality by construction of a0
    if (!e.capped && e.ratio > 0)
      CHECK(e.ratio <= rep.a0 * std::pow(e.t, rep.eta) * (1 + 1e-12));
  }
  CHECK(capped > 0);
}

TEST_CASE("single-cube root: empty strip, degenerate below scale") {
  auto cloud = line_cloud(16, 0, Rat(1, 10));
  auto pw = build_patchwork(cloud, 2, 3);
  REQUIRE(pw.levels[0].size() == 1);
  // no complement anywhere: both halves of the strip are empty
  CHECK(boundary_strip(cloud, pw, 0, 0, 1.0).empty());
  // one more level would put a lone cube under the degeneracy scale
  CHECK_THROWS_AS(build_patchwork(cloud, 3, 3), DegenerateNet);
}

TEST_CASE("heisenberg patchwork: exact structure, positive exponent") {
  auto G = make_carnot_group(heisenberg_algebra(1), "heis1");
  std::vector<std::pair<Rat, Rat>> box = {{-1, 1}, {-1, 1}, {-1, 1}};
  auto cloud = sample_group_cloud(G, box, 12);
  auto pw = build_patchwork(cloud, 4, 11);
  auto rep = check_patchwork(cloud, pw, {1.0, 0.5, 0.25, 0.125});
  CHECK(rep.nesting_violations == 0);
  CHECK(rep.partition_violations == 0);
  CHECK(rep.mass_conserved);
  CHECK(pw.C1 > 0);
  CHECK(pw.C2 > 0);
  CHECK(std::isfinite(pw.C2 / pw.C1));
  CHECK(rep.eta > 0);
  for (auto& e : rep.entries)
    if (!e.capped && e.ratio > 0)
      CHECK(e.ratio <= rep.a0 * std::pow(e.t, rep.eta) * (1 + 1e-12));
}
