#include "patchwork.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace srgeo {

namespace {

// bulk scans stop at this query radius; larger thresholds fall back to the
// conservative whole-cloud answer and the entry is flagged
constexpr double kScanCap = 0.25;

int pick_workers(int workers) {
  if (workers > 0) return workers;
  unsigned hc = std::thread::hardware_concurrency();
  return std::clamp(hc ? (int)hc : 4, 1, 8);
}

void parallel_for(long n, int workers,
                  const std::function<void(long, long)>& chunk) {
  workers = (int)std::min<long>(pick_workers(workers), std::max<long>(1, n));
  if (workers <= 1) {
    chunk(0, n);
    return;
  }
  std::vector<std::thread> ts;
  long step = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    long lo = w * step, hi = std::min(n, lo + step);
    if (lo >= hi) break;
    ts.emplace_back(chunk, lo, hi);
  }
  for (auto& t : ts) t.join();
}

// deterministic shuffle independent of the standard library's distribution
void seeded_order(std::vector<long>& v, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  for (long i = (long)v.size() - 1; i > 0; --i)
    std::swap(v[i], v[g() % (std::uint64_t)(i + 1)]);
}

// all cloud indices that can lie within true distance r of the coords c
void near_points(const PointCloudMM& cloud, const std::vector<double>& c,
                 double r, const std::function<void(long)>& fn) {
  if (cloud.has_grid() && !cloud.vel.empty()) {
    std::vector<double> win(cloud.dim);
    for (int a = 0; a < cloud.dim; ++a) win[a] = cloud.vel[a] * r;
    grid_window(cloud, c, win, fn);
    return;
  }
  for (long i = 0; i < (long)cloud.points.size(); ++i) fn(i);
}

double window_cells(const PointCloudMM& cloud, double r) {
  if (!cloud.has_grid() || cloud.vel.empty())
    return (double)cloud.points.size();
  double v = 1;
  for (int a = 0; a < cloud.dim; ++a) {
    double w = 2 * std::floor(cloud.vel[a] * r / cloud.h[a] + 1e-9) + 1;
    v *= std::min((double)cloud.shape[a], w);
  }
  return v;
}

// largest scan radius <= rk whose coordinate window stays affordable
double inner_scan_radius(const PointCloudMM& cloud, double rk) {
  if (!cloud.has_grid() || cloud.vel.empty()) return std::min(rk, kScanCap);
  double r = rk;
  for (int i = 0; i < 40 && window_cells(cloud, cloud.bracket_factor * r) > 4096;
       ++i)
    r /= 2;
  return r;
}

bool coords_within(const PointCloudMM& cloud, long p, long q, double r) {
  if (cloud.vel.empty()) return true;
  for (int a = 0; a < cloud.dim; ++a)
    if (std::abs(cloud.points[p][a] - cloud.points[q][a]) >
        cloud.vel[a] * r + 1e-12)
      return false;
  return true;
}

}  // namespace

CubicalPatchwork build_patchwork(const PointCloudMM& cloud, int depth,
                                 std::uint64_t seed,
                                 double degenerate_scale, int workers) {
  long N = (long)cloud.points.size();
  if (depth < 2) throw std::invalid_argument("depth must be at least 2");
  if (N == 0) throw std::invalid_argument("empty cloud");

  CubicalPatchwork pw;
  pw.depth = depth;

  // hierarchical greedy nets: a center, once accepted, persists to every
  // finer level, so each cube later contains its own center point
  std::vector<std::vector<long>> centers(depth + 1);
  std::vector<char> flag(N, 0);
  for (int k = 0; k <= depth; ++k) {
    double rk = std::pow(pw.sigma, k);
    auto& cs = centers[k];
    if (k > 0) cs = centers[k - 1];
    std::fill(flag.begin(), flag.end(), 0);
    for (long c : cs) flag[c] = 1;
    std::vector<long> order(N);
    for (long i = 0; i < N; ++i) order[i] = i;
    seeded_order(order, seed ^ (0x9e3779b97f4a7c15ull * (std::uint64_t)(k + 1)));
    double wcells = window_cells(cloud, rk);
    for (long p : order) {
      if (flag[p]) continue;
      bool covered = false;
      if ((double)cs.size() < wcells) {
        for (long c : cs) {
          if (!coords_within(cloud, p, c, rk)) continue;
          if (cloud.dist((int)p, (int)c).second <= rk) {
            covered = true;
            break;
          }
        }
      } else {
        near_points(cloud, cloud.points[p], rk, [&](long q) {
          if (covered || !flag[q] || !coords_within(cloud, p, q, rk)) return;
          if (cloud.dist((int)p, (int)q).second <= rk) covered = true;
        });
      }
      if (!covered) {
        cs.push_back(p);
        flag[p] = 1;
      }
    }
    if (N > 1 && (long)cs.size() == 1 && rk <= degenerate_scale + 1e-15)
      throw DegenerateNet("net spacing below the resolvable scale: one cube");
  }

  // nearest center by distance upper bound, ties toward lower point index
  auto nearest = [&](long p, int k) -> long {
    double rk = std::pow(pw.sigma, k);
    double best = std::numeric_limits<double>::infinity();
    long who = -1;
    auto consider = [&](long c) {
      if (who >= 0 && !coords_within(cloud, p, c, best)) return;
      double d = cloud.dist((int)p, (int)c).second;
      if (d < best || (d == best && c < who)) {
        best = d;
        who = c;
      }
    };
    double wcells = window_cells(cloud, rk);
    if ((double)centers[k].size() < wcells) {
      for (long c : centers[k])
        if (coords_within(cloud, p, c, rk)) consider(c);
    } else {
      near_points(cloud, cloud.points[p], rk,
                  [&](long q) { if (flag[q]) consider(q); });
    }
    if (who < 0)
      for (long c : centers[k]) consider(c);
    return who;
  };

  // position of each center within its level list
  std::vector<long> pos(N, -1);
  std::vector<int> fine(N, -1);
  {
    std::fill(flag.begin(), flag.end(), 0);
    for (long c : centers[depth]) flag[c] = 1;
    for (long i = 0; i < (long)centers[depth].size(); ++i)
      pos[centers[depth][i]] = i;
    for (long p = 0; p < N; ++p) fine[p] = (int)pos[nearest(p, depth)];
  }
  // parent of the cube around center c at level k is the cube of the
  // level-(k-1) center nearest to the point c
  std::vector<std::vector<int>> parent_pos(depth + 1);
  for (int k = depth; k >= 1; --k) {
    std::fill(flag.begin(), flag.end(), 0);
    std::fill(pos.begin(), pos.end(), -1);
    for (long i = 0; i < (long)centers[k - 1].size(); ++i) {
      flag[centers[k - 1][i]] = 1;
      pos[centers[k - 1][i]] = i;
    }
    parent_pos[k].resize(centers[k].size());
    for (long i = 0; i < (long)centers[k].size(); ++i)
      parent_pos[k][i] = (int)pos[nearest(centers[k][i], k - 1)];
  }

  // route every point through the ancestor chain of its finest cube
  pw.assign.assign(depth + 1, std::vector<int>(N, -1));
  for (long p = 0; p < N; ++p) {
    int cur = fine[p];
    pw.assign[depth][p] = cur;
    for (int k = depth; k >= 1; --k) {
      cur = parent_pos[k][cur];
      pw.assign[k - 1][p] = cur;
    }
  }

  pw.levels.resize(depth + 1);
  for (int k = 0; k <= depth; ++k) {
    auto& lev = pw.levels[k];
    lev.resize(centers[k].size());
    for (long i = 0; i < (long)centers[k].size(); ++i) {
      lev[i].level = k;
      lev[i].id = (int)i;
      lev[i].center = (int)centers[k][i];
      lev[i].parent = k > 0 ? parent_pos[k][i] : -1;
    }
    for (long p = 0; p < N; ++p) {
      auto& Q = lev[pw.assign[k][p]];
      Q.members.push_back((int)p);
      Q.mass += cloud.weights[p];
      if (cloud.has_grid() && cloud.on_box_boundary(p)) Q.box_boundary = true;
    }
  }

  // constant fits: the largest inner ball verified anywhere in the cube and
  // the half-diameter certified from the better of net center and that core
  pw.C1 = std::numeric_limits<double>::infinity();
  pw.C2 = 0;
  for (int k = 0; k <= depth; ++k) {
    double rk = std::pow(pw.sigma, k);
    double rscan = inner_scan_radius(cloud, rk);
    std::vector<double> dout(N);
    parallel_for(N, workers, [&](long lo, long hi) {
      for (long p = lo; p < hi; ++p) {
        double m = rscan;
        near_points(cloud, cloud.points[p], cloud.bracket_factor * rscan,
                    [&](long q) {
                      if (pw.assign[k][q] == pw.assign[k][p]) return;
                      if (!coords_within(cloud, p, q,
                                         cloud.bracket_factor * m))
                        return;
                      m = std::min(m, cloud.dist((int)p, (int)q).first);
                    });
        dout[p] = m;
      }
    });
    for (auto& Q : pw.levels[k]) {
      Q.core = Q.members.front();
      for (int m : Q.members)
        if (dout[m] > dout[Q.core]) Q.core = m;
      Q.inner_lo = dout[Q.core];
      pw.C1 = std::min(pw.C1, Q.inner_lo / rk);
      double rc = 0, rv = 0;
      for (int m : Q.members) {
        rv = std::max(rv, cloud.dist(Q.center, m).second);
        rc = std::max(rc, cloud.dist(Q.core, m).second);
      }
      Q.radius_hi = std::min(rv, rc);
      pw.C2 = std::max(pw.C2, 2 * Q.radius_hi / rk);
    }
  }
  return pw;
}

std::vector<int> boundary_strip(const PointCloudMM& cloud,
                                const CubicalPatchwork& pw, int level,
                                int cube_id, double t) {
  if (!(t > 0 && t <= 1))
    throw std::invalid_argument("strip width t must lie in (0, 1]");
  if (level < 0 || level > pw.depth ||
      cube_id < 0 || cube_id >= (int)pw.levels[level].size())
    throw std::invalid_argument("no such cube");
  const Cube& Q = pw.levels[level][cube_id];
  double tau = t * std::pow(pw.sigma, level);
  std::vector<char> in(cloud.points.size(), 0);
  for (int x : Q.members) {
    near_points(cloud, cloud.points[x], cloud.bracket_factor * tau,
                [&](long y) {
                  if (pw.assign[level][y] == cube_id) return;
                  if (cloud.dist(x, (int)y).first < tau) {
                    in[x] = 1;       // member near the complement
                    in[y] = 1;       // outside point near the cube
                  }
                });
  }
  std::vector<int> out;
  for (long i = 0; i < (long)in.size(); ++i)
    if (in[i]) out.push_back((int)i);
  return out;
}

PatchworkReport check_patchwork(const PointCloudMM& cloud,
                                CubicalPatchwork& pw,
                                const std::vector<double>& t_grid,
                                int workers) {
  long N = (long)cloud.points.size();
  PatchworkReport rep;
  rep.C1 = pw.C1;
  rep.C2 = pw.C2;

  // structural checks, exact
  Rat total = cloud.total_mass();
  rep.mass_conserved = true;
  for (int k = 0; k <= pw.depth; ++k) {
    Rat s = 0;
    long counted = 0;
    for (auto& Q : pw.levels[k]) {
      s += Q.mass;
      counted += (long)Q.members.size();
    }
    if (s != total) rep.mass_conserved = false;
    if (counted != N) rep.partition_violations++;
    for (long p = 0; p < N; ++p) {
      int c = pw.assign[k][p];
      if (c < 0 || c >= (int)pw.levels[k].size()) {
        rep.partition_violations++;
        continue;
      }
      if (k > 0 && pw.levels[k][c].parent != pw.assign[k - 1][p])
        rep.nesting_violations++;
    }
  }

  double total_d = to_double(total);
  for (int k = 0; k <= pw.depth; ++k) {
    double rk = std::pow(pw.sigma, k);
    double rscan = std::min(kScanCap, rk);
    // per point: least lower-bound distance to each nearby foreign cube
    std::vector<double> dout(N, std::numeric_limits<double>::infinity());
    std::vector<std::vector<std::pair<int, double>>> nb(N);
    parallel_for(N, workers, [&](long lo, long hi) {
      for (long p = lo; p < hi; ++p) {
        int own = pw.assign[k][p];
        auto& list = nb[p];
        near_points(cloud, cloud.points[p], cloud.bracket_factor * rscan,
                    [&](long q) {
                      int c = pw.assign[k][q];
                      if (c == own) return;
                      std::pair<int, double>* slot = nullptr;
                      for (auto& e : list)
                        if (e.first == c) slot = &e;
                      double cap = slot ? slot->second : rscan;
                      if (!coords_within(cloud, p, q,
                                         cloud.bracket_factor * cap))
                        return;
                      double d = cloud.dist((int)p, (int)q).first;
                      if (d >= cap) return;
                      if (slot)
                        slot->second = d;
                      else
                        list.push_back({c, d});
                    });
        for (auto& e : list) dout[p] = std::min(dout[p], e.second);
      }
    });

    long ncubes = (long)pw.levels[k].size();
    for (double t : t_grid) {
      double tau = t * rk;
      bool capped = tau > rscan;
      std::vector<double> inner(ncubes, 0.0), outer(ncubes, 0.0);
      if (!capped) {
        for (long p = 0; p < N; ++p) {
          if (dout[p] < tau) inner[pw.assign[k][p]] += cloud.weights_d[p];
          for (auto& e : nb[p])
            if (e.second < tau) outer[e.first] += cloud.weights_d[p];
        }
      }
      for (long i = 0; i < ncubes; ++i) {
        auto& Q = pw.levels[k][i];
        double mq = to_double(Q.mass);
        PatchworkReport::Entry e;
        e.level = k;
        e.cube = (int)i;
        e.t = t;
        e.capped = capped;
        e.box_boundary = Q.box_boundary;
        e.mass = capped ? total_d : inner[i] + outer[i];
        e.ratio = mq > 0 ? e.mass / mq : 0;
        rep.entries.push_back(e);
      }
    }
  }

  // pooled fit of log(ratio) against log(t) over clean entries
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (auto& e : rep.entries) {
    if (e.capped || e.box_boundary) continue;
    if (!(e.ratio > 0)) {
      rep.zero_entries++;
      continue;
    }
    double x = std::log(e.t), y = std::log(e.ratio);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m++;
  }
  double denom = m * sxx - sx * sx;
  rep.eta = (m >= 2 && std::abs(denom) > 1e-12)
                ? (m * sxy - sx * sy) / denom
                : 0;
  rep.a0 = 0;
  for (auto& e : rep.entries)
    if (!e.capped && e.ratio > 0)
      rep.a0 = std::max(rep.a0, e.ratio / std::pow(e.t, rep.eta));

  // cubes far off the Haar scaling of their level
  if (cloud.hom_dim > 0) {
    for (int k = 0; k <= pw.depth; ++k) {
      std::vector<double> r;
      double scale = std::pow(std::pow(pw.sigma, k), cloud.hom_dim);
      for (auto& Q : pw.levels[k]) r.push_back(to_double(Q.mass) / scale);
      std::vector<double> s = r;
      std::sort(s.begin(), s.end());
      double med = s[s.size() / 2];
      for (double v : r)
        if (med > 0 && (v > 8 * med || v < med / 8)) rep.mass_flags++;
    }
  }

  pw.a0 = rep.a0;
  pw.eta = rep.eta;
  return rep;
}

}  // namespace srgeo
