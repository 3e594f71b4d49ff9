#include "embed.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace srgeo {

namespace {

double sup_norm_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// start point whose controlled curve ends at the target, Newton on the
// integrated endpoint with a finite-difference Jacobian
std::vector<double> solve_curve_start(const DFrame& dM,
                                      const ControlSignal& u,
                                      const std::vector<double>& target,
                                      std::vector<double> guess, double step,
                                      double box) {
  const int n = static_cast<int>(target.size());
  double dt = step * std::max(u.total_duration(), 1e-9);
  for (int it = 0; it < 12; ++it) {
    auto end = flow_endpoint(dM, guess, u, dt, box);
    Eigen::VectorXd res(n);
    for (int i = 0; i < n; ++i) res(i) = end[i] - target[i];
    if (res.lpNorm<Eigen::Infinity>() < 1e-13) break;
    Eigen::MatrixXd J(n, n);
    for (int b = 0; b < n; ++b) {
      double eps = 1e-6 * std::max(1.0, std::abs(guess[b]));
      auto bumped = guess;
      bumped[b] += eps;
      auto endb = flow_endpoint(dM, bumped, u, dt, box);
      for (int i = 0; i < n; ++i) J(i, b) = (endb[i] - end[i]) / eps;
    }
    Eigen::VectorXd dq = J.partialPivLu().solve(-res);
    for (int i = 0; i < n; ++i) guess[i] += dq(i);
  }
  return guess;
}

std::vector<int> pick_ends(const TreeEnds& ends, int max_ends, int j0_global,
                           std::uint64_t seed) {
  const int m = static_cast<int>(ends.chain.size());
  std::vector<int> sel;
  if (m <= max_ends) {
    sel.resize(m);
    for (int i = 0; i < m; ++i) sel[i] = i;
    return sel;
  }
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  std::mt19937_64 gen(seed);
  for (int i = m - 1; i > 0; --i) {
    int j = static_cast<int>(gen() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  sel.assign(perm.begin(), perm.begin() + max_ends);
  if (std::find(sel.begin(), sel.end(), j0_global) == sel.end())
    sel.back() = j0_global;
  std::sort(sel.begin(), sel.end());
  return sel;
}

}  // namespace

double choose_embedding_scale(double C, double L, double tau, double C2,
                              int s) {
  if (!(C > 0) || !(L > 0) || !(tau > 0) || !(C2 > 0) || s < 1)
    throw std::invalid_argument("scale rule needs positive fitted inputs");
  double r1 = L / 2;
  double r2 = std::pow(tau / (80.0 * C2 * C), s);
  return std::min(r1, r2) / 2;
}

EmbeddingReport build_embedding(const PointCloudMM& cloud,
                                const CantorComplex& cc, const TreeEnds& ends,
                                const CarnotGroup& G, const Frame& frameM,
                                const std::vector<Rat>& p,
                                const EmbedBudget& budget) {
  if (frameM.nvars != G.dim)
    throw std::invalid_argument("frame and model dimensions differ");
  if (static_cast<int>(frameM.fields.size()) != G.rank)
    throw std::invalid_argument("frame and model ranks differ");
  if (static_cast<int>(p.size()) != frameM.nvars)
    throw std::invalid_argument("base point dimension mismatch");
  if (ends.chain.empty()) throw std::invalid_argument("no ends to realize");
  if (!(budget.r > 0)) throw std::invalid_argument("homothety scale not set");

  EmbeddingReport rep;
  rep.tau = cc.tau;
  rep.r = budget.r;
  rep.C2 = cc.C2;
  rep.s = cc.s;
  rep.depth = cc.depth;
  rep.lambda = budget.r / (2.0 * cc.C2);

  int j0_global = 0;
  for (size_t e = 1; e < ends.end_mass.size(); ++e)
    if (ends.end_mass[e] > ends.end_mass[j0_global])
      j0_global = static_cast<int>(e);
  rep.ends = pick_ends(ends, budget.max_ends, j0_global, budget.seed);
  const int k = static_cast<int>(rep.ends.size());
  rep.j0 = static_cast<int>(std::find(rep.ends.begin(), rep.ends.end(),
                                      j0_global) -
                            rep.ends.begin());

  GroupMetric gm(G);
  rep.end_ok.assign(k, 1);
  rep.E.resize(k);
  rep.F.resize(k);
  rep.controls.resize(k);

  for (int a = 0; a < k; ++a) {
    const auto& chain = ends.chain[rep.ends[a]];
    std::vector<std::vector<double>> marks(cc.depth + 1);
    for (int i = 0; i <= cc.depth; ++i)
      marks[i] = dilation_d(G, rep.lambda,
                            cloud.points[ends.apoint[i][chain[i]]]);
    rep.E[a] = marks[cc.depth];
    ControlSignal u;
    u.d = G.rank;
    try {
      for (int i = 0; i < cc.depth; ++i) {
        if (marks[i] == marks[i + 1]) continue;
        auto geo = group_geodesic(G, marks[i], marks[i + 1],
                                  budget.geo_segments, budget.geo_starts,
                                  budget.seed + 977 * a + i);
        u = u.segments.empty() ? geo.control : concat(u, geo.control);
      }
    } catch (const SolverFailed&) {
      rep.end_ok[a] = 0;
      ++rep.incomplete_ends;
      continue;
    }
    rep.controls[a] = u;
    if (!u.segments.empty()) {
      auto roll = group_rollout(G, marks[0], u);
      rep.realization_residual =
          std::max(rep.realization_residual, sup_norm_gap(roll, rep.E[a]));
    }
  }

  DFrame dM = compile_frame(frameM);
  std::vector<double> p_d = to_double_vec(p);
  rep.q0 = p_d;
  if (rep.end_ok[rep.j0] && !rep.controls[rep.j0].segments.empty()) {
    const auto& u0 = rep.controls[rep.j0];
    double dt = budget.step * std::max(u0.total_duration(), 1e-9);
    try {
      auto guess =
          flow_endpoint(dM, p_d, reverse_negate(u0), dt, budget.box);
      rep.q0 = solve_curve_start(dM, u0, p_d, guess, budget.step, budget.box);
    } catch (const BlowUp&) {
      rep.end_ok[rep.j0] = 0;
      ++rep.incomplete_ends;
    }
  }

  for (int a = 0; a < k; ++a) {
    if (!rep.end_ok[a]) continue;
    const auto& u = rep.controls[a];
    if (u.segments.empty()) {
      rep.F[a] = rep.q0;
      continue;
    }
    try {
      double dt = budget.step * std::max(u.total_duration(), 1e-9);
      rep.F[a] = flow_endpoint(dM, rep.q0, u, dt, budget.box);
    } catch (const BlowUp&) {
      rep.end_ok[a] = 0;
      ++rep.incomplete_ends;
    }
  }
  if (rep.end_ok[rep.j0]) rep.anchor_residual = sup_norm_gap(rep.F[rep.j0], p_d);

  if (budget.pair_cap > 0) {
    ChartMetric chart(frameM, p, budget.chart);
    rep.solver_slack = chart.solver_slack();
    rep.slack_abs = 2.0 * rep.lambda * cc.C2 * std::pow(2.0, -cc.depth);

    double C = chart.constants().C0, L = chart.constants().L0;
    if (C > 0 && L > 0) {
      rep.r_checked = true;
      if (!(2 * budget.r < L)) {
        ++rep.r_warnings;
        std::fprintf(stderr,
                     "warning: homothety scale %.3g too large for the fitted "
                     "length scale %.3g\n",
                     budget.r, L);
      }
      if (!(C * std::pow(budget.r, 1.0 / cc.s) <=
            cc.tau / (80.0 * cc.C2))) {
        ++rep.r_warnings;
        std::fprintf(stderr,
                     "warning: homothety scale %.3g violates the separation "
                     "inequality at tau %.3g\n",
                     budget.r, cc.tau);
      }
    }

    std::vector<int> ok;
    for (int a = 0; a < k; ++a)
      if (rep.end_ok[a]) ok.push_back(a);
    std::vector<std::pair<int, int>> want;
    long all = static_cast<long>(ok.size()) * (ok.size() - 1) / 2;
    if (all <= budget.pair_cap) {
      for (size_t x = 0; x < ok.size(); ++x)
        for (size_t y = x + 1; y < ok.size(); ++y)
          want.emplace_back(ok[x], ok[y]);
    } else {
      std::mt19937_64 gen(budget.seed ^ 0x5bd1e995u);
      std::set<std::pair<int, int>> seen;
      while (static_cast<int>(want.size()) < budget.pair_cap) {
        int x = ok[gen() % ok.size()], y = ok[gen() % ok.size()];
        if (x == y) continue;
        if (x > y) std::swap(x, y);
        if (seen.insert({x, y}).second) want.emplace_back(x, y);
      }
    }

    bool first = true;
    for (auto [x, y] : want) {
      EndPairRecord pr;
      pr.x = x;
      pr.y = y;
      pr.d_tree = end_distance(ends, rep.ends[x], rep.ends[y]);
      auto dg = gm.dist_bounds(rep.E[x], rep.E[y]);
      pr.dg_lo = dg.first;
      pr.dg_hi = dg.second;
      try {
        auto dm = chart.dist_tight(rep.F[x], rep.F[y]);
        pr.dm_lo = dm.first;
        pr.dm_hi = dm.second;
      } catch (const SolverFailed&) {
        pr.ok = false;
        ++rep.failed_pairs;
        rep.pairs.push_back(pr);
        continue;
      }
      if (pr.dg_lo > 0) {
        double hi = pr.dm_hi / pr.dg_lo, lo = pr.dm_lo / pr.dg_hi;
        if (first) {
          rep.dist_min = lo;
          rep.dist_max = hi;
          first = false;
        } else {
          rep.dist_min = std::min(rep.dist_min, lo);
          rep.dist_max = std::max(rep.dist_max, hi);
        }
        bool bad_hi = pr.dm_lo > 2.0 * pr.dg_hi * (1 + rep.solver_slack) +
                                     rep.slack_abs;
        bool bad_lo = pr.dm_hi < 0.5 * pr.dg_lo / (1 + rep.solver_slack) -
                                     rep.slack_abs;
        if (bad_hi || bad_lo)
          ++rep.fail_factor2;
        else
          ++rep.pass_factor2;
      }
      rep.pairs.push_back(pr);
    }
  }
  return rep;
}

CoverageCurve coverage_experiment(const PointCloudMM& region,
                                  const PointCloudMM& cloud,
                                  const CantorComplex& cc,
                                  const TreeEnds& ends, const CarnotGroup& G,
                                  const Frame& frameM, int iterations,
                                  double cover_radius,
                                  const EmbedBudget& budget) {
  if (!(cover_radius > 0))
    throw std::invalid_argument("cover radius must be positive");
  if (!region.has_grid())
    throw std::invalid_argument("region must be a grid cloud");

  const long n = static_cast<long>(region.points.size());
  const int dim = region.dim;
  std::vector<char> covered(n, 0);
  Rat covered_mass = 0;
  Rat total = region.total_mass();
  CoverageCurve curve;
  curve.cover_radius = cover_radius;
  curve.fraction.push_back(0.0);

  EmbedBudget eb = budget;
  eb.pair_cap = 0;  // covering needs images only, not pair metrics

  std::vector<double> window(dim, cover_radius);
  auto euclid = [&](const std::vector<double>& a,
                    const std::vector<double>& b) {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };

  for (int it = 0; it < iterations; ++it) {
    long best = -1;
    double best_mass = -1;
    for (long i = 0; i < n; ++i) {
      if (covered[i]) continue;
      double local = 0;
      grid_window(region, region.points[i], window, [&](long u) {
        if (!covered[u] &&
            euclid(region.points[u], region.points[i]) <= cover_radius)
          local += region.weights_d[u];
      });
      if (local > best_mass) {
        best_mass = local;
        best = i;
      }
    }
    if (best < 0) break;

    auto rep = build_embedding(cloud, cc, ends, G, frameM,
                               region.rat_point(best), eb);
    Rat before = covered_mass;
    for (size_t a = 0; a < rep.F.size(); ++a) {
      if (!rep.end_ok[a]) continue;
      grid_window(region, rep.F[a], window, [&](long u) {
        if (!covered[u] &&
            euclid(region.points[u], rep.F[a]) <= cover_radius) {
          covered[u] = 1;
          covered_mass += region.weights[u];
        }
      });
    }
    if (covered_mass == before) break;  // stalled, report what happened
    curve.anchors.push_back(best);
    curve.fraction.push_back(to_double(covered_mass / total));
  }
  return curve;
}

}  // namespace srgeo
