#include "cloud.hpp"

#include <cmath>
#include <stdexcept>

namespace srgeo {

Rat PointCloudMM::total_mass() const {
  Rat s = 0;
  for (auto& w : weights) s += w;
  return s;
}

long PointCloudMM::cell_of(const std::vector<int>& idx) const {
  long flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * shape[a] + idx[a];
  return flat;
}

std::vector<int> PointCloudMM::index_of(long flat) const {
  std::vector<int> idx(dim);
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = (int)(flat % shape[a]);
    flat /= shape[a];
  }
  return idx;
}

bool PointCloudMM::on_box_boundary(long flat) const {
  auto idx = index_of(flat);
  for (int a = 0; a < dim; ++a)
    if (idx[a] == 0 || idx[a] == shape[a] - 1) return true;
  return false;
}

std::vector<Rat> PointCloudMM::rat_point(long flat) const {
  auto idx = index_of(flat);
  std::vector<Rat> p(dim);
  for (int a = 0; a < dim; ++a) p[a] = origin_q[a] + idx[a] * h_q[a];
  return p;
}

namespace {

// geometry, points, and exact cell weights shared by the grid samplers
void fill_grid(PointCloudMM& cloud, const std::vector<std::pair<Rat, Rat>>& box,
               int resolution, long max_points) {
  int n = static_cast<int>(box.size());
  if (resolution < 8)
    throw std::invalid_argument("resolution must be at least 8 per axis");
  for (auto& [lo, hi] : box)
    if (!(lo < hi)) throw std::invalid_argument("empty box range");
  double count = 1;
  for (int a = 0; a < n; ++a) count *= resolution;
  if (count > (double)max_points)
    throw std::length_error("cloud would exceed the configured point budget");

  cloud.dim = n;
  cloud.shape.assign(n, resolution);
  Rat cell = 1;
  cloud.origin.resize(n);
  cloud.h.resize(n);
  cloud.origin_q.resize(n);
  cloud.h_q.resize(n);
  for (int a = 0; a < n; ++a) {
    Rat width = (box[a].second - box[a].first) / resolution;
    cell *= width;
    cloud.h_q[a] = width;
    cloud.origin_q[a] = box[a].first + width / 2;
    cloud.h[a] = to_double(width);
    cloud.origin[a] = to_double(cloud.origin_q[a]);
  }
  long total = (long)count;
  cloud.points.reserve(total);
  cloud.weights.assign(total, cell);
  cloud.weights_d.assign(total, to_double(cell));
  std::vector<int> idx(n, 0);
  for (long f = 0; f < total; ++f) {
    std::vector<double> p(n);
    for (int a = 0; a < n; ++a) p[a] = cloud.origin[a] + idx[a] * cloud.h[a];
    cloud.points.push_back(std::move(p));
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < resolution) break;
      idx[a] = 0;
    }
  }
}

// sup of |p| over the box through absolute coefficients; exact upper bound
double poly_abs_sup(const Poly& p, const std::vector<double>& amax) {
  double s = 0;
  for (auto& [e, c] : p.terms()) {
    double term = std::abs(to_double(c));
    for (size_t v = 0; v < e.size(); ++v)
      for (int k = 0; k < e[v]; ++k) term *= amax[v];
    s += term;
  }
  return s;
}

}  // namespace

PointCloudMM sample_group_cloud(const CarnotGroup& G,
                                const std::vector<std::pair<Rat, Rat>>& box,
                                int resolution, long max_points) {
  int n = G.dim;
  if ((int)box.size() != n)
    throw std::invalid_argument("box dimension does not match the group");
  PointCloudMM cloud;
  fill_grid(cloud, box, resolution, max_points);

  // coordinate velocity bounds from the frame over the box
  std::vector<double> amax(n);
  for (int a = 0; a < n; ++a)
    amax[a] =
        std::max(std::abs(to_double(box[a].first)),
                 std::abs(to_double(box[a].second)));
  cloud.vel.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s2 = 0;
    for (int i = 0; i < G.rank; ++i) {
      double b = poly_abs_sup(G.frame.fields[i][j], amax);
      s2 += b * b;
    }
    cloud.vel[j] = std::sqrt(s2);
  }

  for (int j = 0; j < n; ++j) cloud.hom_dim += G.weights[j];
  auto metric = std::make_shared<GroupMetric>(G);
  cloud.bracket_factor =
      metric->exact() ? 1.0
                      : metric->constants().C0 * metric->constants().C0;
  auto pts = std::make_shared<std::vector<std::vector<double>>>(cloud.points);
  cloud.dist = [metric, pts](int i, int j) {
    return metric->dist_bounds((*pts)[i], (*pts)[j]);
  };
  return cloud;
}

PointCloudMM sample_box_cloud(const std::vector<std::pair<Rat, Rat>>& box,
                              int resolution, long max_points) {
  PointCloudMM cloud;
  fill_grid(cloud, box, resolution, max_points);
  cloud.vel.assign(cloud.dim, 1.0);
  cloud.hom_dim = cloud.dim;
  auto pts = std::make_shared<std::vector<std::vector<double>>>(cloud.points);
  int n = cloud.dim;
  cloud.dist = [pts, n](int i, int j) {
    double s = 0;
    for (int a = 0; a < n; ++a) {
      double d = (*pts)[i][a] - (*pts)[j][a];
      s += d * d;
    }
    double d = std::sqrt(s);
    return std::make_pair(d, d);
  };
  return cloud;
}

void grid_window(const PointCloudMM& cloud, const std::vector<double>& center,
                 const std::vector<double>& window,
                 const std::function<void(long)>& fn) {
  int n = cloud.dim;
  std::vector<int> lo(n), hi(n);
  for (int a = 0; a < n; ++a) {
    double rel = (center[a] - cloud.origin[a]) / cloud.h[a];
    lo[a] = std::max(0, (int)std::ceil(rel - window[a] / cloud.h[a] - 1e-9));
    hi[a] = std::min(cloud.shape[a] - 1,
                     (int)std::floor(rel + window[a] / cloud.h[a] + 1e-9));
    if (lo[a] > hi[a]) return;
  }
  std::vector<int> idx = lo;
  while (true) {
    fn(cloud.cell_of(idx));
    int a = n - 1;
    for (; a >= 0; --a) {
      if (++idx[a] <= hi[a]) break;
      idx[a] = lo[a];
    }
    if (a < 0) break;
  }
}

}  // namespace srgeo
