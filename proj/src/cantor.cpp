#include "cantor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace srgeo {

namespace {

// level-0 ancestor of every cube, by parent chains
std::vector<std::vector<int>> top_ancestors(const CubicalPatchwork& pw) {
  std::vector<std::vector<int>> anc(pw.levels.size());
  for (size_t k = 0; k < pw.levels.size(); ++k) {
    anc[k].resize(pw.levels[k].size());
    for (size_t c = 0; c < pw.levels[k].size(); ++c)
      anc[k][c] = k == 0 ? static_cast<int>(c)
                         : anc[k - 1][pw.levels[k][c].parent];
  }
  return anc;
}

double strip_t(double tau, int k, int s) {
  return tau * std::pow(2.0, -k / (2.0 * s));
}

}  // namespace

double CantorComplex::retained_fraction() const {
  if (root_mass == 0) return 0;
  return to_double(level_mass.back() / root_mass);
}

CantorComplex build_cantor(const PointCloudMM& cloud,
                           const CubicalPatchwork& pw, int root, double tau,
                           int s, int depth) {
  if (depth < 2 || depth > pw.depth)
    throw std::invalid_argument("cantor depth out of range");
  if (!(tau > 0) || tau > 1)
    throw std::invalid_argument("tau must lie in (0, 1]");
  if (s < 1) throw std::invalid_argument("scaling exponent must be >= 1");
  if (root < 0 || root >= static_cast<int>(pw.levels[0].size()))
    throw std::invalid_argument("root cube id out of range");

  const long n = static_cast<long>(cloud.points.size());
  CantorComplex cc;
  cc.root = root;
  cc.tau = tau;
  cc.s = s;
  cc.depth = depth;
  cc.C2 = pw.C2;
  cc.alive.assign(depth + 1, std::vector<char>(n, 0));
  cc.level_mass.assign(depth + 1, Rat(0));

  for (int p : pw.levels[0][root].members) cc.alive[0][p] = 1;
  cc.root_mass = pw.levels[0][root].mass;
  cc.level_mass[0] = cc.root_mass;

  auto anc = top_ancestors(pw);
  for (int k = 0; k < depth; ++k) {
    cc.alive[k + 1] = cc.alive[k];
    cc.level_mass[k + 1] = cc.level_mass[k];
    double t = strip_t(tau, k, s);
    for (size_t c = 0; c < pw.levels[k].size(); ++c) {
      if (anc[k][c] != root) continue;
      for (int idx : boundary_strip(cloud, pw, k, static_cast<int>(c), t)) {
        if (!cc.alive[k + 1][idx]) continue;
        cc.alive[k + 1][idx] = 0;
        cc.level_mass[k + 1] -= cloud.weights[idx];
      }
    }
    if (cc.level_mass[k + 1] == 0)
      throw EmptyCantor("trimming emptied the set at level " +
                        std::to_string(k + 1) + " with tau " +
                        std::to_string(tau));
  }

  cc.retained.resize(depth + 1);
  cc.tree.resize(depth + 1);
  for (int k = 0; k <= depth; ++k) {
    cc.retained[k].assign(pw.levels[k].size(), 0);
    for (long p = 0; p < n; ++p)
      if (cc.alive[depth][p]) cc.retained[k][pw.assign[k][p]] = 1;
    for (size_t c = 0; c < cc.retained[k].size(); ++c)
      if (cc.retained[k][c]) cc.tree[k].push_back(static_cast<int>(c));
  }
  return cc;
}

std::vector<CantorMeasureRow> cantor_measure_report(
    const PointCloudMM& cloud, const CubicalPatchwork& pw, int root, int s,
    int depth, const std::vector<double>& tau_list) {
  std::vector<CantorMeasureRow> rows;
  for (double tau : tau_list) {
    CantorMeasureRow row;
    row.tau = tau;
    if (tau == 0) {
      row.built = true;
      row.retained = 1;
      row.level_frac.assign(depth + 1, 1.0);
      row.decrement.assign(depth, 0.0);
      row.bound.assign(depth, 0.0);
      rows.push_back(std::move(row));
      continue;
    }
    try {
      CantorComplex cc = build_cantor(cloud, pw, root, tau, s, depth);
      row.built = true;
      row.retained = cc.retained_fraction();
      for (int k = 0; k <= depth; ++k)
        row.level_frac.push_back(to_double(cc.level_mass[k] / cc.root_mass));
      for (int k = 0; k < depth; ++k) {
        row.decrement.push_back(row.level_frac[k] - row.level_frac[k + 1]);
        row.bound.push_back(pw.a0 > 0 ? pw.a0 *
                                            std::pow(strip_t(tau, k, s),
                                                     pw.eta) *
                                            row.level_frac[k]
                                      : 0.0);
      }
    } catch (const EmptyCantor&) {
      row.built = false;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

TreeEnds tree_maps(const PointCloudMM& cloud, const CubicalPatchwork& pw,
                   const CantorComplex& cc) {
  TreeEnds ends;
  ends.depth = cc.depth;
  ends.apoint.resize(cc.depth + 1);
  const auto& survivors = cc.alive[cc.depth];
  for (int k = 0; k <= cc.depth; ++k) {
    ends.apoint[k].assign(pw.levels[k].size(), -1);
    for (int c : cc.tree[k]) {
      const Cube& q = pw.levels[k][c];
      int best = -1;
      double best_d = 0;
      for (int p : q.members) {
        if (!survivors[p]) continue;
        double d = cloud.dist(q.center, p).second;
        if (best < 0 || d < best_d || (d == best_d && p < best)) {
          best = p;
          best_d = d;
        }
      }
      ends.apoint[k][c] = best;
    }
  }

  for (int c : cc.tree[cc.depth]) {
    std::vector<int> chain(cc.depth + 1);
    chain[cc.depth] = c;
    for (int k = cc.depth; k > 0; --k)
      chain[k - 1] = pw.levels[k][chain[k]].parent;
    Rat mass = 0;
    for (int p : pw.levels[cc.depth][c].members)
      if (survivors[p]) mass += cloud.weights[p];
    ends.chain.push_back(std::move(chain));
    ends.anchor.push_back(ends.apoint[cc.depth][c]);
    ends.end_mass.push_back(to_double(mass));
  }
  return ends;
}

double root_path_length(int level) { return 1.0 - std::pow(2.0, -level); }

int common_level(const TreeEnds& ends, int x, int y) {
  int i = 0;
  while (i < ends.depth && ends.chain[x][i + 1] == ends.chain[y][i + 1]) ++i;
  return i;
}

double end_distance(const TreeEnds& ends, int x, int y) {
  if (x == y) return 0;
  return std::pow(2.0, 1 - common_level(ends, x, y));
}

BiholderReport check_biholder(const PointCloudMM& cloud,
                              const CantorComplex& cc, const TreeEnds& ends,
                              int max_pairs, std::uint64_t seed) {
  const int m = static_cast<int>(ends.chain.size());
  std::vector<std::pair<int, int>> pairs;
  long all = static_cast<long>(m) * (m - 1) / 2;
  if (all <= max_pairs) {
    for (int x = 0; x < m; ++x)
      for (int y = x + 1; y < m; ++y) pairs.emplace_back(x, y);
  } else {
    std::mt19937_64 gen(seed);
    std::set<std::pair<int, int>> seen;
    while (static_cast<int>(pairs.size()) < max_pairs) {
      int x = static_cast<int>(gen() % m), y = static_cast<int>(gen() % m);
      if (x == y) continue;
      if (x > y) std::swap(x, y);
      if (seen.insert({x, y}).second) pairs.emplace_back(x, y);
    }
  }

  BiholderReport rep;
  rep.pairs = static_cast<int>(pairs.size());
  rep.slack = cc.C2 * std::pow(2.0, -cc.depth);
  const double expo = 1.0 + 1.0 / (2.0 * cc.s);
  bool first = true;
  for (auto [x, y] : pairs) {
    double dt = end_distance(ends, x, y);
    auto [lo, hi] = cloud.dist(ends.anchor[x], ends.anchor[y]);
    // cap side: point distance must stay below 2 * C2 * tree distance
    double cap_margin = 2.0 * cc.C2 * dt + rep.slack - lo;
    // floor side: point distance must stay above (tau/8) * tree^expo
    double floor_margin = hi - (cc.tau / 8.0) * std::pow(dt, expo) + rep.slack;
    if (cap_margin >= 0)
      ++rep.pass_lower;
    else if (rep.violations.size() < 100)
      rep.violations.push_back({x, y, ends.chain[x][cc.depth],
                                ends.chain[y][cc.depth], dt, lo, hi,
                                cap_margin, true});
    if (floor_margin >= 0)
      ++rep.pass_upper;
    else if (rep.violations.size() < 100)
      rep.violations.push_back({x, y, ends.chain[x][cc.depth],
                                ends.chain[y][cc.depth], dt, lo, hi,
                                floor_margin, false});
    if (first) {
      rep.worst_lower_margin = cap_margin;
      rep.worst_upper_margin = floor_margin;
      first = false;
    } else {
      rep.worst_lower_margin = std::min(rep.worst_lower_margin, cap_margin);
      rep.worst_upper_margin = std::min(rep.worst_upper_margin, floor_margin);
    }
  }
  return rep;
}

}  // namespace srgeo
