// Weighted point clouds sampled from group models, with certified
// coordinate windows for spatial search under the CC metric.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "groupmetric.hpp"

namespace srgeo {

struct PointCloudMM {
  int dim = 0;
  std::vector<std::vector<double>> points;
  std::vector<Rat> weights;        // exact masses
  std::vector<double> weights_d;   // double view of the same
  // distance bracket between point indices; equal ends when exact
  std::function<std::pair<double, double>(int, int)> dist;

  // grid metadata, empty when the cloud did not come from the grid sampler
  std::vector<int> shape;          // cells per axis
  std::vector<double> origin, h;   // first cell center and spacing
  std::vector<Rat> origin_q, h_q;  // the same in exact form
  // certified sup of the frame row norms over the box:
  // d(p,q) <= r implies |p_j - q_j| <= vel[j] * r for cloud points
  std::vector<double> vel;
  // upper / lower ratio of the dist bracket (1 when the oracle is exact)
  double bracket_factor = 1.0;
  // homogeneous dimension of the source group, 0 when unknown
  int hom_dim = 0;

  Rat total_mass() const;
  bool has_grid() const { return !shape.empty(); }
  long cell_of(const std::vector<int>& idx) const;
  std::vector<int> index_of(long flat) const;
  // true when the point sits on the outermost grid shell
  bool on_box_boundary(long flat) const;
  // exact coordinates of a grid point
  std::vector<Rat> rat_point(long flat) const;
};

// Grid in exponential coordinates over a coordinate box, weight = exact cell
// volume, distances served by the group metric oracle.
PointCloudMM sample_group_cloud(const CarnotGroup& G,
                                const std::vector<std::pair<Rat, Rat>>& box,
                                int resolution, long max_points = 2000000);

// Grid over a plain coordinate box with Euclidean distances, for chart
// regions that carry no group structure. Unit velocity bounds.
PointCloudMM sample_box_cloud(const std::vector<std::pair<Rat, Rat>>& box,
                              int resolution, long max_points = 2000000);

// Enumerates cloud indices whose coordinates lie within the per-axis windows
// around a center point; complete for any query radius r with
// window_j = vel[j] * r by the certified bound above.
void grid_window(const PointCloudMM& cloud, const std::vector<double>& center,
                 const std::vector<double>& window,
                 const std::function<void(long)>& fn);

}  // namespace srgeo
