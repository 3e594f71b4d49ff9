// Realizes the end space of a Cantor complex inside a manifold: dilated
// marked points in the group model, horizontal chain curves, control
// transfer into the ambient frame anchored at a chosen base point, and the
// distortion audit of the resulting map. The covering loop re-anchors the
// same complex greedily until a region is exhausted.
#pragma once

#include "cantor.hpp"
#include "steering.hpp"

namespace srgeo {

struct EmbedBudget {
  double r = 0.25;        // homothety scale; <= 0 picks the fitted default
  int geo_segments = 12;  // pieces per chain-edge geodesic
  int geo_starts = 6;
  int max_ends = 32;      // ends sampled into the realization
  int pair_cap = 48;      // metric pair budget; 0 skips manifold distances
  double step = 2e-3;     // integrator step as a fraction of curve duration
  double box = 1e6;
  std::uint64_t seed = 1;
  ChartOracleBudget chart;
};

struct EndPairRecord {
  int x = 0, y = 0;  // positions within the sampled end list
  double d_tree = 0;
  double dg_lo = 0, dg_hi = 0;  // between dilated marked points, group side
  double dm_lo = 0, dm_hi = 0;  // between transferred images, manifold side
  bool ok = true;               // false when the manifold solver failed
};

struct EmbeddingReport {
  double tau = 0, r = 0, lambda = 0, C2 = 0;
  int s = 0, depth = 0;
  int j0 = 0;              // position of the mass-heaviest end in `ends`
  std::vector<int> ends;   // sampled end indices
  std::vector<char> end_ok;
  std::vector<std::vector<double>> E;  // dilated marked points per end
  std::vector<std::vector<double>> F;  // transferred manifold images
  std::vector<ControlSignal> controls;  // chain controls per end
  std::vector<double> q0;  // transfer start, solved so the j0 curve hits p
  double anchor_residual = 0;       // |F(j0) - p| after the start solve
  double realization_residual = 0;  // worst chain endpoint gap, group side
  std::vector<EndPairRecord> pairs;
  double dist_min = 0, dist_max = 0;  // range of d_M / d_G over pairs
  int pass_factor2 = 0, fail_factor2 = 0;
  double slack_abs = 0;    // image-scale resolution allowance in the checks
  double solver_slack = 0;
  int incomplete_ends = 0;
  int failed_pairs = 0;
  bool r_checked = false;  // scale inequalities evaluated against fits
  int r_warnings = 0;
};

// Fitted default for the homothety scale: half the largest r satisfying
// both 2r < L and C * r^(1/s) <= tau / (80 * C2).
double choose_embedding_scale(double C, double L, double tau, double C2,
                              int s);

// Pre: complex and ends built on `cloud`, frameM.nvars == G.dim, p inside
// the frame's chart. Geodesic or integrator failures mark the affected end
// or pair incomplete instead of aborting.
EmbeddingReport build_embedding(const PointCloudMM& cloud,
                                const CantorComplex& cc, const TreeEnds& ends,
                                const CarnotGroup& G, const Frame& frameM,
                                const std::vector<Rat>& p,
                                const EmbedBudget& budget = {});

struct CoverageCurve {
  std::vector<double> fraction;  // fraction[i] = covered mass after i rounds
  std::vector<long> anchors;     // region point picked each round
  double cover_radius = 0;
};

// Greedy covering of a region cloud: each round anchors the embedding at
// the uncovered point with the largest uncovered mass in its radius
// neighborhood, then marks everything within radius of an image point as
// covered. Round counting starts at zero coverage.
CoverageCurve coverage_experiment(const PointCloudMM& region,
                                  const PointCloudMM& cloud,
                                  const CantorComplex& cc,
                                  const TreeEnds& ends, const CarnotGroup& G,
                                  const Frame& frameM, int iterations,
                                  double cover_radius,
                                  const EmbedBudget& budget = {});

}  // namespace srgeo
