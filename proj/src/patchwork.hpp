// Nested dyadic-style partitions of a weighted point cloud: seeded greedy
// nets per scale, nearest-center assignment routed through ancestor chains
// so that nesting and parenthood hold exactly, plus boundary strips and the
// empirical small-boundary fit.
#pragma once

#include <cstdint>
#include <stdexcept>

#include "cloud.hpp"

namespace srgeo {

// A scale level collapsed to a single cube while the net spacing is already
// below the configured threshold; the cloud cannot resolve that scale.
struct DegenerateNet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cube {
  int level = 0;
  int id = 0;          // position within its level
  int center = 0;      // cloud point index of the net center
  int core = -1;       // member carrying the largest verified inner ball
  int parent = -1;     // cube id one level up, -1 at the top
  std::vector<int> members;
  Rat mass = 0;
  double radius_hi = 0;   // certified half-diameter: best of center and core
  double inner_lo = 0;    // largest verified inner-ball radius, scan-capped
  bool box_boundary = false;  // touches the outermost sample shell
};

struct CubicalPatchwork {
  double sigma = 0.5;  // fixed scale ratio; level k has spacing 2^-k
  int depth = 0;       // levels run 0..depth inclusive
  std::vector<std::vector<Cube>> levels;
  // assign[k][point] = cube id at level k (routed, exact partition)
  std::vector<std::vector<int>> assign;
  double C1 = 0;  // certified inner-ball factor, min over cubes
  double C2 = 0;  // certified diameter factor, max over cubes
  double a0 = 0;  // filled by check_patchwork
  double eta = 0;

  const Cube& cube(int level, int id) const { return levels[level][id]; }
};

// Greedy maximal nets at spacings 2^-k, hierarchical (every center persists
// to all finer levels), candidate order shuffled by the seed. Points take
// the nearest finest center (distance upper bounds, ties toward the lower
// point index) and coarser cubes are the ancestor fibers of that assignment.
// Net construction is sequential for determinism; the constant fits thread.
// Throws DegenerateNet when a level at spacing <= degenerate_scale still
// collapses to one cube.
CubicalPatchwork build_patchwork(const PointCloudMM& cloud, int depth,
                                 std::uint64_t seed,
                                 double degenerate_scale = 0.125,
                                 int workers = 0);

// Indices within lower-bound distance t*2^-level of the opposite side of the
// cube: members near the complement plus outside points near the cube. Lower
// bounds keep the strip a superset of the true one.
std::vector<int> boundary_strip(const PointCloudMM& cloud,
                                const CubicalPatchwork& pw, int level,
                                int cube_id, double t);

struct PatchworkReport {
  double C1 = 0, C2 = 0;
  double a0 = 0, eta = 0;
  int nesting_violations = 0;
  int partition_violations = 0;
  bool mass_conserved = false;
  struct Entry {
    int level = 0, cube = 0;
    double t = 0;
    double mass = 0;   // strip mass
    double ratio = 0;  // strip mass / cube mass
    bool capped = false;        // scan radius cap hit, mass is the whole cloud
    bool box_boundary = false;  // cube touches the sample shell
  };
  std::vector<Entry> entries;
  int zero_entries = 0;  // empty strips, left out of the log fit
  int mass_flags = 0;    // cubes far off their level's Haar scaling median
};

// Strip masses for every (cube, t), pooled log-log fit of mass ratio vs t
// giving eta, and the minimal a0 with ratio <= a0 * t^eta over all scanned
// entries. Capped entries, sample-shell cubes, and empty strips stay out of
// the fit. Writes a0/eta back into pw. workers = 0 picks a thread count.
PatchworkReport check_patchwork(const PointCloudMM& cloud,
                                CubicalPatchwork& pw,
                                const std::vector<double>& t_grid,
                                int workers = 0);

}  // namespace srgeo
