#include "steering.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace srgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// endpoint of the flat transcription controls, +inf sentinel on blowup
std::optional<std::vector<double>> try_roll(const DFrame& M,
                                            const std::vector<double>& a,
                                            int d,
                                            const std::vector<double>& flat,
                                            int segments, double h,
                                            double box) {
  try {
    return flow_endpoint(M, a, controls_from_flat(d, flat, segments), h, box);
  } catch (const BlowUp&) {
    return std::nullopt;
  }
}

// Gauss-Newton closure of the integrated endpoint onto target.
double close_rk4(const DFrame& M, const std::vector<double>& a, int d,
                 std::vector<double>& flat, int segments,
                 const std::vector<double>& target, int iters, double tol,
                 double h, double box) {
  int n = (int)a.size(), P = segments * d;
  auto gap = [&](const std::vector<double>& fl) -> std::optional<Eigen::VectorXd> {
    auto e = try_roll(M, a, d, fl, segments, h, box);
    if (!e) return std::nullopt;
    Eigen::VectorXd r(n);
    for (int j = 0; j < n; ++j) r[j] = (*e)[j] - target[j];
    return r;
  };
  auto r0 = gap(flat);
  if (!r0) return kInf;
  Eigen::VectorXd r = *r0;
  for (int it = 0; it < iters && r.norm() > tol; ++it) {
    Eigen::MatrixXd J(n, P);
    for (int p = 0; p < P; ++p) {
      double hp = 1e-6 * (1 + std::abs(flat[p]));
      auto fl = flat;
      fl[p] += hp;
      auto rp = gap(fl);
      if (!rp) return kInf;
      J.col(p) = (*rp - r) / hp;
    }
    Eigen::MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12 + 1e-9 * JJt.trace();
    Eigen::VectorXd du = J.transpose() * JJt.ldlt().solve(r);
    auto cand = flat;
    double damp = 1.0;
    for (int tries = 0; tries < 8; ++tries) {
      for (int p = 0; p < P; ++p) cand[p] = flat[p] - damp * du[p];
      auto rc = gap(cand);
      if (rc && rc->norm() < r.norm()) {
        flat = cand;
        r = *rc;
        break;
      }
      damp *= 0.5;
      if (tries == 7) return r.norm();  // stalled
    }
  }
  return r.norm();
}

double flat_length(const std::vector<double>& flat, int d, int segments) {
  double dt = 1.0 / segments, l = 0;
  for (int k = 0; k < segments; ++k) {
    double n2 = 0;
    for (int i = 0; i < d; ++i) {
      double v = flat[(size_t)k * d + i];
      n2 += v * v;
    }
    l += dt * std::sqrt(n2);
  }
  return l;
}

// length descent restricted to endpoint-preserving directions
void shorten_rk4(const DFrame& M, const std::vector<double>& a, int d,
                 std::vector<double>& flat, int segments,
                 const std::vector<double>& target, int rounds, double tol,
                 double h, double box) {
  int n = (int)a.size(), P = segments * d;
  double alpha = 0.5;
  for (int round = 0; round < rounds; ++round) {
    double len0 = flat_length(flat, d, segments);
    Eigen::VectorXd gl(P);
    double dt = 1.0 / segments;
    for (int k = 0; k < segments; ++k) {
      double n2 = 1e-18;
      for (int i = 0; i < d; ++i) {
        double v = flat[(size_t)k * d + i];
        n2 += v * v;
      }
      double nn = std::sqrt(n2);
      for (int i = 0; i < d; ++i)
        gl[(size_t)k * d + i] = dt * flat[(size_t)k * d + i] / nn;
    }
    auto e0 = try_roll(M, a, d, flat, segments, h, box);
    if (!e0) return;
    Eigen::MatrixXd J(n, P);
    for (int p = 0; p < P; ++p) {
      double hp = 1e-6 * (1 + std::abs(flat[p]));
      auto fl = flat;
      fl[p] += hp;
      auto e1 = try_roll(M, a, d, fl, segments, h, box);
      if (!e1) return;
      for (int j = 0; j < n; ++j) J(j, p) = ((*e1)[j] - (*e0)[j]) / hp;
    }
    Eigen::MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12 + 1e-9 * JJt.trace();
    Eigen::VectorXd proj = gl - J.transpose() * JJt.ldlt().solve(J * gl);
    bool accepted = false;
    for (int tries = 0; tries < 5 && !accepted; ++tries) {
      auto cand = flat;
      for (int p = 0; p < P; ++p) cand[p] -= alpha * proj[p];
      double res = close_rk4(M, a, d, cand, segments, target, 4, tol, h, box);
      if (res <= tol && flat_length(cand, d, segments) < len0 - 1e-14) {
        flat = cand;
        accepted = true;
        alpha = std::min(alpha * 1.5, 2.0);
      } else {
        alpha *= 0.4;
      }
    }
    if (!accepted) break;
  }
}

}  // namespace

ChartMetric::ChartMetric(const Frame& frame, const std::vector<Rat>& base,
                         ChartOracleBudget budget, int calib_samples)
    : dM_(compile_frame(frame)),
      nz_(nilpotentize(frame, base)),
      G_(make_carnot_group(nz_.algebra, "tangent")),
      budget_(budget) {
  init(calib_samples, true);
}

ChartMetric::ChartMetric(const Frame& frame, PrivilegedChart chart,
                         EstimateConstants constants, ChartOracleBudget budget,
                         int calib_samples)
    : dM_(compile_frame(frame)), budget_(budget) {
  Frame hat = nilpotent_approximation(chart);
  GradedLieAlgebra alg =
      structure_constants(hat, chart.basis, chart.growth);
  nz_ = Nilpotentization{std::move(chart), std::move(hat), std::move(alg)};
  G_ = make_carnot_group(nz_.algebra, "tangent");
  k_ = constants;
  init(calib_samples, !constants.c0_fitted);
}

void ChartMetric::init(int calib_samples, bool fit_constants) {
  int n = G_.dim;
  base_d_ = to_double_vec(nz_.chart.base);
  budget_.segments = std::max(budget_.segments, n);
  phi_c_.reserve(n);
  dphi_c_.reserve((size_t)n * n);
  for (int i = 0; i < n; ++i) phi_c_.push_back(compile_poly(nz_.chart.phi[i]));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dphi_c_.push_back(compile_poly(nz_.chart.phi[i].derivative(j)));

  // solver tightness against exact group distances where available
  std::vector<double> zero(n, 0.0);
  bool exact_model = exact_cc_distance(G_, zero, zero).has_value();
  if (exact_model) {
    std::mt19937_64 rng(budget_.seed ^ 0x5eedca11u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0;
    for (int t = 0; t < 10; ++t) {
      std::vector<double> y(n);
      for (auto& v : y) v = uni(rng);
      double qw = homogeneous_quasinorm(G_, y);
      if (qw < 1e-9) continue;
      y = dilation_d(G_, 1.0 / qw, y);
      double d = *exact_cc_distance(G_, zero, y);
      try {
        auto gg = group_geodesic(G_, zero, y, budget_.segments,
                                 std::max(2, budget_.starts / 2),
                                 budget_.seed + t);
        worst = std::max(worst, gg.length / d - 1.0);
      } catch (const SolverFailed&) {
        worst = std::max(worst, 0.05);
      }
    }
    slack_ = std::max(2e-3, 2.0 * worst);
  } else {
    slack_ = 0.05;
  }

  if (!fit_constants) return;
  // comparison constant over quasinorm shells; transcription upper estimates
  // bound the true distance from above, the slack converts them to lower ones
  ChartOracleBudget save = budget_;
  budget_.starts = std::min(budget_.starts, 3);
  budget_.shorten_rounds = std::min(budget_.shorten_rounds, 2);
  std::mt19937_64 rng(budget_.seed ^ 0xc0011af5u);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double shells[4] = {0.4, 0.2, 0.1, 0.05};
  int per = std::max(1, calib_samples / 4);
  double c0 = 1.0, l0 = 0.0;
  for (double rho : shells) {
    if (rho > budget_.chart_box) continue;
    for (int t = 0; t < per; ++t) {
      std::vector<double> z(n);
      for (auto& v : z) v = uni(rng);
      double qw = homogeneous_quasinorm(G_, z);
      if (qw < 1e-9) continue;
      z = dilation_d(G_, rho / qw, z);
      std::vector<double> q = ambient_point(z);
      double U;
      try {
        U = connect(base_d_, q).length;
      } catch (const SolverFailed&) {
        continue;
      }
      if (U <= 0) continue;
      c0 = std::max({c0, U / rho, rho * (1 + slack_) / U});
      l0 = std::max(l0, U);
    }
  }
  budget_ = save;
  k_.C0 = 1.05 * c0;
  k_.L0 = l0;
  k_.c0_fitted = true;
}

std::vector<double> ChartMetric::ambient_point(
    const std::vector<double>& z) const {
  int n = G_.dim;
  if ((int)z.size() != n) throw std::invalid_argument("chart point dimension");
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = phi_c_[i].eval(z.data());
  return q;
}

std::vector<double> ChartMetric::chart_coords(
    const std::vector<double>& q) const {
  int n = G_.dim;
  if ((int)q.size() != n)
    throw std::invalid_argument("ambient point dimension");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  double tol = 1e-13 * (1 + max_abs(q));
  Eigen::VectorXd F(n);
  Eigen::MatrixXd J(n, n);
  std::vector<double> zv(n, 0.0);
  double fn_prev = kInf;
  for (int it = 0; it < 80; ++it) {
    for (int i = 0; i < n; ++i) zv[i] = z[i];
    for (int i = 0; i < n; ++i) F[i] = phi_c_[i].eval(zv.data()) - q[i];
    double fn = F.lpNorm<Eigen::Infinity>();
    if (fn < tol) {
      if (homogeneous_quasinorm(G_, zv) > budget_.chart_box)
        throw std::invalid_argument("point is outside the chart validity box");
      return zv;
    }
    if (fn > 4 * fn_prev)
      throw SolverFailed("chart inversion diverged");
    fn_prev = std::min(fn_prev, fn);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J(i, j) = dphi_c_[(size_t)i * n + j].eval(zv.data());
    z -= J.partialPivLu().solve(F);
  }
  throw SolverFailed("chart inversion did not converge");
}

GeodesicResult ChartMetric::connect(const std::vector<double>& a,
                                    const std::vector<double>& b) const {
  int n = G_.dim, d = G_.rank;
  auto za = chart_coords(a), zb = chart_coords(b);
  auto delta = bch_product_d(G_, group_inverse_d(za), zb);
  double qd = homogeneous_quasinorm(G_, delta);
  GeodesicResult best;
  best.control.d = d;
  if (qd < 1e-12) return best;

  int segments = budget_.segments;
  double h = budget_.step, box = budget_.box;
  double tol = 1e-10 * (1 + max_abs(b));
  int P = segments * d;

  std::vector<std::vector<double>> inits;
  {
    std::vector<double> s0(P, 0.0);
    for (int k = 0; k < segments; ++k)
      for (int i = 0; i < d; ++i) s0[(size_t)k * d + i] = zb[i] - za[i];
    inits.push_back(std::move(s0));
  }
  try {
    auto gg = group_geodesic(G_, za, zb, segments,
                             std::max(2, budget_.starts / 2), budget_.seed);
    inits.insert(inits.begin(), flat_from_controls(gg.control));
  } catch (const SolverFailed&) {
  }
  std::mt19937_64 rng(budget_.seed ^ 0x7ea5eed5u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while ((int)inits.size() < budget_.starts) {
    auto fl = inits[0];
    for (auto& v : fl) v += 0.4 * qd * gauss(rng);
    inits.push_back(std::move(fl));
  }

  bool found = false;
  for (auto& flat : inits) {
    double res = close_rk4(dM_, a, d, flat, segments, b, 40, tol, h, box);
    if (!(res <= tol)) continue;
    shorten_rk4(dM_, a, d, flat, segments, b, budget_.shorten_rounds, tol, h,
                box);
    res = close_rk4(dM_, a, d, flat, segments, b, 6, tol, h, box);
    if (!(res <= tol)) continue;
    double len = flat_length(flat, d, segments);
    if (!found || len < best.length) {
      found = true;
      best.control = controls_from_flat(d, flat, segments);
      best.length = len;
      best.residual = res;
    }
  }
  if (!found)
    throw SolverFailed("endpoint closure failed in the ambient frame");
  return best;
}

std::pair<double, double> ChartMetric::dist_bounds(
    const std::vector<double>& q) {
  auto z = chart_coords(q);
  double qw = homogeneous_quasinorm(G_, z);
  if (qw < 1e-12) return {0.0, 0.0};
  double lower = qw / k_.C0;
  double upper = connect(base_d_, q).length;
  if (upper < lower) {
    k_.C0 = 1.05 * std::max(k_.C0, qw / upper);
    lower = qw / k_.C0;
    ++refits_;
    std::fprintf(stderr,
                 "[chart-metric] comparison constant refit to %.6g after a "
                 "bound inversion\n",
                 k_.C0);
  }
  return {lower, upper};
}

std::pair<double, double> ChartMetric::dist_tight(
    const std::vector<double>& a, const std::vector<double>& b) const {
  double U = connect(a, b).length;
  return {U / (1 + slack_), U};
}

ChartMetric::DefectReport ChartMetric::loop_defect(
    const CarnotGroup& model, const ControlSignal& loop,
    const std::vector<double>& scales) {
  if (loop.d != G_.rank || loop.d != model.rank)
    throw std::invalid_argument("control dimension does not match the rank");
  std::vector<double> zero(model.dim, 0.0);
  auto end_g = group_rollout(model, zero, loop);
  double miss = homogeneous_quasinorm(model, end_g);
  if (miss > 1e-8 * (1 + control_length(loop)))
    throw LoopNotClosed("loop does not close in the group model");

  DefectReport rep;
  rep.exponent = 1.0 + 1.0 / model.step;
  double dur = loop.total_duration();
  for (double lam : scales) {
    auto u = scale_controls(loop, lam);
    double len = control_length(u);
    auto gend = flow_endpoint(dM_, base_d_, u, budget_.step * dur, budget_.box);
    DefectRow row;
    row.scale = lam;
    row.length = len;
    auto z = chart_coords(gend);
    double qw = homogeneous_quasinorm(G_, z);
    if (qw >= 1e-10 * (1 + lam)) {
      auto [lo, hi] = dist_bounds(gend);
      row.defect_lo = lo;
      row.defect_hi = hi;
      row.ratio = len > 0 ? hi / std::pow(len, rep.exponent) : 0.0;
    }
    rep.rows.push_back(row);
  }
  // log-log regression of the defect's upper end against loop length
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (auto& r : rep.rows)
    if (r.defect_hi > 0 && r.length > 0) {
      double x = std::log(r.length), y = std::log(r.defect_hi);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  if (m >= 2 && sxx * m - sx * sx > 1e-15)
    rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

ChartMetric::TransferDefect ChartMetric::transfer(const CarnotGroup& model,
                                                  const ControlSignal& u1,
                                                  const ControlSignal& u2) {
  if (u1.d != G_.rank || u2.d != G_.rank || u1.d != model.rank)
    throw std::invalid_argument("control dimension does not match the rank");
  double l1 = control_length(u1), l2 = control_length(u2);
  if (k_.c_fitted && k_.L > 0 && (l1 > k_.L || l2 > k_.L))
    throw std::invalid_argument("control length exceeds the configured cap");

  TransferDefect td;
  td.length_sum = l1 + l2;
  auto e1 = flow_endpoint(dM_, base_d_, u1, budget_.step * u1.total_duration(),
                          budget_.box);
  auto e2 = flow_endpoint(dM_, base_d_, u2, budget_.step * u2.total_duration(),
                          budget_.box);
  std::vector<double> zero(model.dim, 0.0);
  auto g1 = group_rollout(model, zero, u1);
  auto g2 = group_rollout(model, zero, u2);

  if (auto dg = exact_cc_distance(model, g1, g2)) {
    td.d_group_lo = td.d_group_hi = *dg;
  } else {
    GroupMetric gm(model, 12, std::max(model.dim, 12), budget_.seed);
    auto [lo, hi] = gm.dist_bounds(g1, g2);
    td.d_group_lo = lo;
    td.d_group_hi = hi;
  }

  auto z1 = chart_coords(e1), z2 = chart_coords(e2);
  double qgap =
      homogeneous_quasinorm(G_, bch_product_d(G_, group_inverse_d(z1), z2));
  td.d_model_lo = qgap / k_.C0;
  td.d_model_hi = qgap * k_.C0;

  if (qgap < 1e-12 && td.d_group_hi < 1e-12) return td;
  auto [mlo, mhi] = dist_tight(e1, e2);
  td.d_manifold_lo = mlo;
  td.d_manifold_hi = mhi;

  td.defect_lo = std::max(
      0.0, std::max(mlo - td.d_group_hi, td.d_group_lo - mhi));
  td.defect_hi = std::max(mhi - td.d_group_lo, td.d_group_hi - mlo);
  td.ratio = td.length_sum > 0
                 ? td.defect_hi / std::pow(td.length_sum, 1.0 + 1.0 / model.step)
                 : 0.0;
  return td;
}

std::pair<double, double> cc_distance_bounds(const Frame& frame,
                                             const std::vector<Rat>& p,
                                             const std::vector<double>& q,
                                             const PrivilegedChart& chart,
                                             EstimateConstants& constants,
                                             const ChartOracleBudget& budget) {
  for (size_t i = 0; i < p.size(); ++i)
    if (!(p[i] == chart.base[i]))
      throw std::invalid_argument("chart is not based at the given point");
  ChartMetric cm(frame, chart, constants, budget);
  auto out = cm.dist_bounds(q);
  constants = cm.constants();
  return out;
}

ChartMetric::DefectReport closed_loop_defect(const Frame& frame,
                                             const CarnotGroup& model,
                                             const std::vector<Rat>& p,
                                             const ControlSignal& loop,
                                             const std::vector<double>& scales,
                                             const ChartOracleBudget& budget) {
  ChartMetric cm(frame, p, budget);
  return cm.loop_defect(model, loop, scales);
}

ChartMetric::TransferDefect transfer_defect(const Frame& frame,
                                            const CarnotGroup& model,
                                            const std::vector<Rat>& q,
                                            const ControlSignal& u1,
                                            const ControlSignal& u2,
                                            const ChartOracleBudget& budget) {
  ChartMetric cm(frame, q, budget);
  return cm.transfer(model, u1, u2);
}

}  // namespace srgeo
