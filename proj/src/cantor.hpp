// Positive-measure Cantor sets inside a partition cube by iterative boundary
// trimming, the retained cube tree with its end space, and the certified
// two-sided comparison between end distances and point distances.
#pragma once

#include <cstdint>
#include <stdexcept>

#include "patchwork.hpp"

namespace srgeo {

// Trimming removed every point before the target depth was reached.
struct EmptyCantor : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Survivor set of repeated strip removal under one root cube. Level k + 1
// removes, from every level-k cube below the root, the two-sided strip at
// relative width tau * 2^(-k/(2s)); alive[k] marks the survivors entering
// that step. The retained tree keeps the cubes still meeting the final set.
struct CantorComplex {
  int root = 0;
  double tau = 0;
  int s = 1;        // scaling exponent from the metric, step for group clouds
  int depth = 0;
  double C2 = 0;    // diameter factor inherited from the partition
  std::vector<std::vector<char>> alive;  // [0..depth][point]
  std::vector<std::vector<int>> tree;    // retained cube ids per level
  std::vector<std::vector<char>> retained;  // [level][cube id] membership
  std::vector<Rat> level_mass;              // alive mass per level
  Rat root_mass = 0;

  double retained_fraction() const;
};

// Pre: partition checked (C2 set), 2 <= depth <= pw.depth, 0 < tau <= 1,
// root a level-0 cube id, s >= 1. Throws EmptyCantor when a trim step
// leaves nothing.
CantorComplex build_cantor(const PointCloudMM& cloud,
                           const CubicalPatchwork& pw, int root, double tau,
                           int s, int depth);

struct CantorMeasureRow {
  double tau = 0;
  bool built = false;              // false when the set emptied
  double retained = 0;             // final mass fraction of the root
  std::vector<double> level_frac;  // survivor fraction entering each level
  std::vector<double> decrement;   // removed fraction at step k
  std::vector<double> bound;       // a0 * width^eta prediction, when fitted
};

// One row per tau, shared root and depth. tau = 0 is served trivially with
// full retention. A tau whose set empties yields built = false rather than
// an error. Retention is monotone in tau by strict strip nesting.
std::vector<CantorMeasureRow> cantor_measure_report(
    const PointCloudMM& cloud, const CubicalPatchwork& pw, int root, int s,
    int depth, const std::vector<double>& tau_list);

// Ends of the retained tree: one maximal root-to-bottom cube chain per
// retained bottom cube. Each retained cube designates the survivor nearest
// its net center as its marked point; an end maps to the marked point of
// its deepest cube.
struct TreeEnds {
  int depth = 0;
  std::vector<std::vector<int>> chain;   // [end][level] cube ids
  std::vector<int> anchor;               // [end] marked point, deepest cube
  std::vector<std::vector<int>> apoint;  // [level][cube id] marked point
  std::vector<double> end_mass;          // survivor mass of the deepest cube
};

TreeEnds tree_maps(const PointCloudMM& cloud, const CubicalPatchwork& pw,
                   const CantorComplex& cc);

// Path length from the root vertex down to a level-i vertex; edges into
// level i have length 2^-i, so the sum is 1 - 2^-i.
double root_path_length(int level);

// Deepest level where the two chains still agree.
int common_level(const TreeEnds& ends, int x, int y);

// Tree distance between two ends, 2^(1 - i) at branching level i; an exact
// ultrametric on the end space, 0 only on the diagonal.
double end_distance(const TreeEnds& ends, int x, int y);

struct BiholderViolation {
  int x = 0, y = 0;        // end indices
  int cube_x = 0, cube_y = 0;  // deepest cubes
  double d_tree = 0;
  double dg_lo = 0, dg_hi = 0;
  double margin = 0;       // negative slack overrun
  bool upper = false;      // which side failed
};

struct BiholderReport {
  int pairs = 0;
  int pass_lower = 0;  // point distance below 2 * C2 * tree distance
  int pass_upper = 0;  // point distance above (tau/8) * tree^(1 + 1/(2s))
  double slack = 0;    // resolution allowance C2 * 2^-depth
  double worst_lower_margin = 0;  // most negative first, else smallest
  double worst_upper_margin = 0;
  std::vector<BiholderViolation> violations;
};

// Samples end pairs (all pairs when few enough) and checks both comparison
// inequalities conservatively: the lower inequality against the distance
// lower bound, the upper against the distance upper bound, each side padded
// by the resolution slack.
BiholderReport check_biholder(const PointCloudMM& cloud,
                              const CantorComplex& cc, const TreeEnds& ends,
                              int max_pairs, std::uint64_t seed);

}  // namespace srgeo
