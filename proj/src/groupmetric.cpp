#include "groupmetric.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace srgeo {

namespace {

constexpr double kPi = std::numbers::pi;

struct Factor {
  int kind;  // 0 = abelian, 1 = heisenberg
  int m;     // heisenberg index (2m+1 coords) or abelian dimension
  std::vector<int> coords;  // global coordinate indices, factor order
};

// Coordinate slices of product_algebra(a, b): stratum by stratum, a first.
std::vector<std::vector<int>> product_slices(const std::vector<int>& sa,
                                             const std::vector<int>& sb) {
  size_t steps = std::max(sa.size(), sb.size());
  std::vector<std::vector<int>> out(2);
  int pos = 0;
  for (size_t i = 0; i < steps; ++i) {
    int da = i < sa.size() ? sa[i] : 0;
    int db = i < sb.size() ? sb[i] : 0;
    for (int t = 0; t < da; ++t) out[0].push_back(pos++);
    for (int t = 0; t < db; ++t) out[1].push_back(pos++);
  }
  return out;
}

std::optional<std::vector<Factor>> recognize(const GradedLieAlgebra& g) {
  int n = g.dim;
  if (g == abelian_algebra(n)) {
    Factor f{0, n, {}};
    for (int i = 0; i < n; ++i) f.coords.push_back(i);
    return std::vector<Factor>{f};
  }
  for (int m = 1; 2 * m + 1 <= n; ++m)
    if (g == heisenberg_algebra(m)) {
      Factor f{1, m, {}};
      for (int i = 0; i < n; ++i) f.coords.push_back(i);
      return std::vector<Factor>{f};
    }
  auto try_product = [&](const GradedLieAlgebra& a, int ka, int ma,
                         const GradedLieAlgebra& b, int kb,
                         int mb) -> std::optional<std::vector<Factor>> {
    if (product_algebra(a, b) != g) return std::nullopt;
    auto sl = product_slices(a.strata, b.strata);
    return std::vector<Factor>{{ka, ma, sl[0]}, {kb, mb, sl[1]}};
  };
  for (int ka = 1; ka < n; ++ka)
    for (int mb = 1; ka + 2 * mb + 1 <= n; ++mb) {
      if (auto f = try_product(abelian_algebra(ka), 0, ka,
                               heisenberg_algebra(mb), 1, mb))
        return f;
      if (auto f = try_product(heisenberg_algebra(mb), 1, mb,
                               abelian_algebra(ka), 0, ka))
        return f;
    }
  for (int ma = 1; 2 * ma + 1 < n; ++ma)
    for (int mb = ma; (2 * ma + 1) + (2 * mb + 1) <= n; ++mb) {
      if (auto f = try_product(heisenberg_algebra(ma), 1, ma,
                               heisenberg_algebra(mb), 1, mb))
        return f;
      if (mb != ma)
        if (auto f = try_product(heisenberg_algebra(mb), 1, mb,
                                 heisenberg_algebra(ma), 1, ma))
          return f;
    }
  return std::nullopt;
}

// chord-to-area profile of the unit-speed arc, increasing on (0, 2pi)
double arc_profile(double th) {
  double s = std::sin(th / 2);
  return (th - std::sin(th)) / (8 * s * s);
}

double heis_arc_angle(double ratio) {
  double lo = 1e-9, hi = 2 * kPi - 1e-9;
  for (int it = 0; it < 12; ++it) {
    double mid = 0.5 * (lo + hi);
    (arc_profile(mid) < ratio ? lo : hi) = mid;
  }
  // Newton on the bracketed root; g'(th) = (2s - th*c) / (8 s^3)
  double th = 0.5 * (lo + hi);
  for (int it = 0; it < 40 && hi - lo > 4e-16 * hi; ++it) {
    double s = std::sin(th / 2), c = std::cos(th / 2);
    double f = (th - 2 * s * c) / (8 * s * s) - ratio;
    (f < 0 ? lo : hi) = th;
    double fp = (2 * s - th * c) / (8 * s * s * s);
    double nxt = th - f / fp;
    th = (nxt > lo && nxt < hi) ? nxt : 0.5 * (lo + hi);
  }
  return th;
}

double heis_distance_raw(int m, const double* d) {
  double rho2 = 0;
  for (int i = 0; i < 2 * m; ++i) rho2 += d[i] * d[i];
  double rho = std::sqrt(rho2);
  double zeta = std::abs(d[2 * m]);
  if (zeta == 0) return rho;
  if (rho == 0) return std::sqrt(4 * kPi * zeta);
  double ratio = zeta / rho2;
  if (ratio <= arc_profile(1e-9)) return rho;
  if (ratio >= arc_profile(2 * kPi - 1e-9))
    return std::sqrt(4 * kPi * zeta + rho2);
  double th = heis_arc_angle(ratio);
  return rho * th / (2 * std::sin(th / 2));
}

double heis_distance_delta(int m, const std::vector<double>& d) {
  return heis_distance_raw(m, d.data());
}

double factor_distance(const Factor& f, const std::vector<double>& delta) {
  if (f.kind == 0) {
    double s = 0;
    for (int c : f.coords) s += delta[c] * delta[c];
    return std::sqrt(s);
  }
  bool contiguous = true;
  for (size_t i = 0; i + 1 < f.coords.size(); ++i)
    if (f.coords[i + 1] != f.coords[i] + 1) contiguous = false;
  if (contiguous) return heis_distance_raw(f.m, delta.data() + f.coords[0]);
  thread_local std::vector<double> sub;
  sub.clear();
  for (int c : f.coords) sub.push_back(delta[c]);
  return heis_distance_raw(f.m, sub.data());
}

// Gauss-Newton closure of the rollout endpoint onto target; returns the
// Euclidean endpoint gap after the last iteration.
double close_endpoint(const CarnotGroup& G, std::vector<double>& flat,
                      int segments, const std::vector<double>& target,
                      int iters, double tol) {
  int n = G.dim, d = G.rank, P = segments * d;
  auto gap = [&](const std::vector<double>& fl) {
    auto e = group_rollout(G, std::vector<double>(n, 0.0),
                           controls_from_flat(d, fl, segments));
    Eigen::VectorXd r(n);
    for (int j = 0; j < n; ++j) r[j] = e[j] - target[j];
    return r;
  };
  Eigen::VectorXd r = gap(flat);
  for (int it = 0; it < iters && r.norm() > tol; ++it) {
    Eigen::MatrixXd J(n, P);
    double h = 1e-6;
    for (int p = 0; p < P; ++p) {
      auto fl = flat;
      fl[p] += h;
      J.col(p) = (gap(fl) - r) / h;
    }
    Eigen::MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12 + 1e-9 * JJt.trace();
    Eigen::VectorXd lam = JJt.ldlt().solve(r);
    Eigen::VectorXd du = J.transpose() * lam;
    for (int p = 0; p < P; ++p) flat[p] -= du[p];
    r = gap(flat);
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

// projected descent on length along the endpoint-preserving directions
void shorten(const CarnotGroup& G, std::vector<double>& flat, int segments,
             const std::vector<double>& target, int rounds, double tol) {
  int n = G.dim, d = G.rank, P = segments * d;
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
    // endpoint Jacobian for the projection
    auto roll = [&](const std::vector<double>& fl) {
      return group_rollout(G, std::vector<double>(n, 0.0),
                           controls_from_flat(d, fl, segments));
    };
    auto e0 = roll(flat);
    Eigen::MatrixXd J(n, P);
    double h = 1e-6;
    for (int p = 0; p < P; ++p) {
      auto fl = flat;
      fl[p] += h;
      auto e1 = roll(fl);
      for (int j = 0; j < n; ++j) J(j, p) = (e1[j] - e0[j]) / h;
    }
    Eigen::MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12 + 1e-9 * JJt.trace();
    Eigen::VectorXd proj = gl - J.transpose() * JJt.ldlt().solve(J * gl);
    bool accepted = false;
    for (int tries = 0; tries < 6 && !accepted; ++tries) {
      auto cand = flat;
      for (int p = 0; p < P; ++p) cand[p] -= alpha * proj[p];
      double res = close_endpoint(G, cand, segments, target, 4, tol);
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

std::optional<double> exact_cc_distance(const CarnotGroup& G,
                                        const std::vector<double>& x,
                                        const std::vector<double>& y) {
  auto fac = recognize(G.algebra);
  if (!fac) return std::nullopt;
  auto delta = bch_product_d(G, group_inverse_d(x), y);
  double s = 0;
  for (auto& f : *fac) {
    double df = factor_distance(f, delta);
    s += df * df;
  }
  return std::sqrt(s);
}

std::vector<double> group_rollout(const CarnotGroup& G,
                                  const std::vector<double>& start,
                                  const ControlSignal& u) {
  if (u.d != G.rank)
    throw std::invalid_argument("control dimension does not match the rank");
  std::vector<double> x = start;
  std::vector<double> stepv(G.dim, 0.0);
  for (auto& seg : u.segments) {
    std::fill(stepv.begin(), stepv.end(), 0.0);
    for (int i = 0; i < G.rank; ++i) stepv[i] = seg.duration * seg.u[i];
    x = bch_product_d(G, x, stepv);
  }
  return x;
}

GeodesicResult group_geodesic(const CarnotGroup& G,
                              const std::vector<double>& x,
                              const std::vector<double>& y, int segments,
                              int starts, std::uint64_t seed) {
  if ((int)x.size() != G.dim || (int)y.size() != G.dim)
    throw std::invalid_argument("point dimension mismatch");
  GeodesicResult best;
  if (x == y) {
    best.control.d = G.rank;
    return best;
  }
  if (segments < G.dim)
    throw std::invalid_argument("segments must be at least the dimension");
  auto delta = bch_product_d(G, group_inverse_d(x), y);
  double qd = homogeneous_quasinorm(G, delta);
  double tol = 1e-11 * (1.0 + qd);
  int d = G.rank, P = segments * d;

  std::vector<std::vector<double>> inits;
  // straight shot at the first-stratum part
  {
    std::vector<double> flat(P, 0.0);
    for (int k = 0; k < segments; ++k)
      for (int i = 0; i < d; ++i) flat[(size_t)k * d + i] = delta[i];
    inits.push_back(flat);
  }
  auto fac = recognize(G.algebra);
  bool heis_like = fac && fac->size() == 1 && (*fac)[0].kind == 1;
  if (heis_like) {
    // the optimal arc: constant-speed rotation in the plane of the chord
    // and its bracket partner, both turning directions tried
    int m = (*fac)[0].m;
    double rho2 = 0;
    for (int i = 0; i < 2 * m; ++i) rho2 += delta[i] * delta[i];
    double rho = std::sqrt(rho2), zeta = delta[2 * m];
    if (std::abs(zeta) > 1e-14 * std::max(1.0, rho2)) {
      double th, L;
      std::vector<double> a(2 * m, 0.0), b(2 * m, 0.0);
      if (rho > 1e-14) {
        double ratio = std::abs(zeta) / rho2;
        double lo = 1e-9, hi = 2 * kPi - 1e-9;
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          (arc_profile(mid) < ratio ? lo : hi) = mid;
        }
        th = 0.5 * (lo + hi);
        L = rho * th / (2 * std::sin(th / 2));
        for (int i = 0; i < 2 * m; ++i) a[i] = delta[i] / rho;
      } else {
        th = 2 * kPi - 1e-7;
        L = std::sqrt(4 * kPi * std::abs(zeta));
        a[0] = 1;
      }
      // symplectic partner: J e_{2i} = e_{2i+1}, J e_{2i+1} = -e_{2i}
      for (int i = 0; i < m; ++i) {
        b[2 * i] = -a[2 * i + 1];
        b[2 * i + 1] = a[2 * i];
      }
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> flat(P, 0.0);
        for (int k = 0; k < segments; ++k) {
          double t = (k + 0.5) / segments - 0.5;
          for (int i = 0; i < 2 * m; ++i)
            flat[(size_t)k * d + i] =
                L * (std::cos(th * t) * a[i] + sgn * std::sin(th * t) * b[i]);
        }
        inits.push_back(flat);
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while ((int)inits.size() < starts) {
    auto flat = inits[0];
    for (auto& v : flat) v += 0.7 * qd * gauss(rng);
    inits.push_back(flat);
  }

  bool found = false;
  for (auto& flat : inits) {
    double res = close_endpoint(G, flat, segments, delta, 80, tol);
    if (res > tol) continue;
    if (!heis_like) shorten(G, flat, segments, delta, 30, tol);
    res = close_endpoint(G, flat, segments, delta, 10, tol);
    double len = flat_length(flat, d, segments);
    if (!found || len < best.length) {
      found = true;
      best.control = controls_from_flat(d, flat, segments);
      best.length = len;
      best.residual = res;
    }
  }
  if (!found)
    throw SolverFailed("endpoint closure failed for all starts");
  return best;
}

EstimateConstants fit_group_constants(const CarnotGroup& G, int samples,
                                      int segments, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xabcdef12345ull);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  EstimateConstants k;
  double worst = 1.0, maxlen = 0.0;
  std::vector<double> zero(G.dim, 0.0);
  auto exact = exact_cc_distance(G, zero, zero).has_value();
  for (int t = 0; t < samples; ++t) {
    std::vector<double> y(G.dim);
    for (auto& v : y) v = uni(rng);
    double q = homogeneous_quasinorm(G, y);
    if (q < 1e-9) continue;
    y = dilation_d(G, 1.0 / q, y);  // quasinorm 1 shell
    double dist;
    if (exact) {
      dist = *exact_cc_distance(G, zero, y);
    } else {
      dist = group_geodesic(G, zero, y, std::max(G.dim, segments), 8,
                            seed + (std::uint64_t)t)
                 .length;
    }
    worst = std::max({worst, 1.0 / dist, dist});
    maxlen = std::max(maxlen, dist);
  }
  k.C0 = worst;
  k.L0 = maxlen;
  k.c0_fitted = true;
  return k;
}

GroupMetric::GroupMetric(CarnotGroup G, int calib_samples, int segments,
                         std::uint64_t seed)
    : grp_(std::move(G)) {
  auto fac = recognize(grp_.algebra);
  exact_ = fac.has_value();
  if (!exact_)
    k_ = fit_group_constants(grp_, calib_samples, segments, seed);
  else {
    k_.C0 = 1;
    k_.c0_fitted = false;
    exact_delta_ = [f = std::move(*fac)](const std::vector<double>& delta) {
      double s = 0;
      for (auto& fc : f) {
        double df = factor_distance(fc, delta);
        s += df * df;
      }
      return std::sqrt(s);
    };
  }
}

std::pair<double, double> GroupMetric::dist_bounds(
    const std::vector<double>& x, const std::vector<double>& y) const {
  if (exact_) {
    int n = grp_.dim;
    thread_local std::vector<double> xy, dl;
    xy.resize(2 * n);
    dl.resize(n);
    for (int i = 0; i < n; ++i) {
      xy[i] = -x[i];
      xy[n + i] = y[i];
    }
    for (int k = 0; k < n; ++k) dl[k] = grp_.law_d[k].eval(xy.data());
    double d = exact_delta_(dl);
    return {d, d};
  }
  auto delta = bch_product_d(grp_, group_inverse_d(x), y);
  double q = homogeneous_quasinorm(grp_, delta);
  return {q / k_.C0, q * k_.C0};
}

}  // namespace srgeo
