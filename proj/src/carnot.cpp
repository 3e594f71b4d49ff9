#include "carnot.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace srgeo {

namespace {

Rat factorial(int n) {
  Rat f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::vector<Poly> poly_bracket(const GradedLieAlgebra& g,
                               const std::vector<Poly>& u,
                               const std::vector<Poly>& v, int nvars) {
  int n = g.dim;
  std::vector<Poly> r(n, Poly(nvars));
  for (int i = 0; i < n; ++i) {
    if (u[i].is_zero()) continue;
    for (int j = 0; j < n; ++j) {
      if (v[j].is_zero()) continue;
      Poly uv = u[i] * v[j];
      for (int k = 0; k < n; ++k)
        if (g.c[i][j][k] != 0) r[k] = r[k] + uv.scale(g.c[i][j][k]);
    }
  }
  return r;
}

}  // namespace

std::vector<Poly> bch_polynomials(const GradedLieAlgebra& g) {
  int n = g.dim, s = g.step();
  int nv = 2 * n;
  std::vector<std::vector<Poly>> letter(2);
  for (int i = 0; i < n; ++i) {
    letter[0].push_back(Poly::variable(nv, i));
    letter[1].push_back(Poly::variable(nv, n + i));
  }
  std::vector<Poly> z(n, Poly(nv));

  // Dynkin: z = sum over block sequences ((p_1,q_1),...,(p_m,q_m)) of
  //   (-1)^(m-1)/m * 1/(len * prod p_i! q_i!) * [x^p1 y^q1 ... ]
  // with the right-nested bracketing; words longer than the step vanish.
  std::vector<std::pair<int, int>> blocks;
  std::function<void(int)> gen = [&](int len) {
    if (!blocks.empty()) {
      std::vector<int> word;
      for (auto [p, q] : blocks) {
        word.insert(word.end(), p, 0);
        word.insert(word.end(), q, 1);
      }
      // innermost pair of equal letters brackets to zero
      int m = (int)word.size();
      if (m == 1 || word[m - 1] != word[m - 2]) {
        std::vector<Poly> v = letter[word[m - 1]];
        for (int i = m - 2; i >= 0; --i)
          v = poly_bracket(g, letter[word[i]], v, nv);
        Rat denom = Rat((int)blocks.size()) * m;
        for (auto [p, q] : blocks) denom *= factorial(p) * factorial(q);
        Rat coef = ((blocks.size() % 2) ? Rat(1) : Rat(-1)) / denom;
        for (int k = 0; k < n; ++k)
          if (!v[k].is_zero()) z[k] = z[k] + v[k].scale(coef);
      }
    }
    for (int t = 1; len + t <= s; ++t)
      for (int p = 0; p <= t; ++p) {
        blocks.push_back({p, t - p});
        gen(len + t);
        blocks.pop_back();
      }
  };
  gen(0);
  return z;
}

CarnotGroup make_carnot_group(const GradedLieAlgebra& g,
                              const std::string& name) {
  if (auto ck = validate_graded(g); !ck.ok)
    throw std::invalid_argument("not a stratified algebra: " + ck.message);
  CarnotGroup G;
  G.algebra = g;
  G.name = name;
  G.dim = g.dim;
  G.rank = g.strata[0];
  G.step = g.step();
  G.weights = g.coord_weights();
  G.law = bch_polynomials(g);
  for (auto& p : G.law) G.law_d.push_back(compile_poly(p));

  // Frame field i = d/dt at 0 of x * (t e_i), i.e. the y_i-linear part of
  // the law at y = 0.
  std::vector<Poly> at_y0(2 * G.dim, Poly(G.dim));
  for (int j = 0; j < G.dim; ++j) at_y0[j] = Poly::variable(G.dim, j);
  G.frame.name = name + ".left";
  G.frame.nvars = G.dim;
  for (int i = 0; i < G.rank; ++i) {
    std::vector<Poly> comp;
    for (int k = 0; k < G.dim; ++k)
      comp.push_back(G.law[k].derivative(G.dim + i).substitute(at_y0));
    G.frame.fields.push_back(PolyVectorField(std::move(comp)));
  }
  return G;
}

RatVec bch_product(const CarnotGroup& G, const RatVec& x, const RatVec& y) {
  if ((int)x.size() != G.dim || (int)y.size() != G.dim)
    throw std::invalid_argument("point dimension mismatch");
  std::vector<Rat> xy;
  xy.reserve(2 * G.dim);
  xy.insert(xy.end(), x.begin(), x.end());
  xy.insert(xy.end(), y.begin(), y.end());
  RatVec z(G.dim);
  for (int k = 0; k < G.dim; ++k) z[k] = G.law[k].eval(xy);
  return z;
}

std::vector<double> bch_product_d(const CarnotGroup& G,
                                  const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if ((int)x.size() != G.dim || (int)y.size() != G.dim)
    throw std::invalid_argument("point dimension mismatch");
  std::vector<double> xy;
  xy.reserve(2 * G.dim);
  xy.insert(xy.end(), x.begin(), x.end());
  xy.insert(xy.end(), y.begin(), y.end());
  std::vector<double> z(G.dim);
  for (int k = 0; k < G.dim; ++k) z[k] = G.law_d[k].eval(xy.data());
  return z;
}

RatVec group_inverse(const RatVec& x) {
  RatVec y = x;
  for (auto& v : y) v = -v;
  return y;
}

std::vector<double> group_inverse_d(const std::vector<double>& x) {
  std::vector<double> y = x;
  for (auto& v : y) v = -v;
  return y;
}

RatVec dilation(const CarnotGroup& G, const Rat& lambda, const RatVec& x) {
  if (lambda <= 0) throw std::invalid_argument("dilation factor must be > 0");
  if ((int)x.size() != G.dim)
    throw std::invalid_argument("point dimension mismatch");
  RatVec y = x;
  for (int j = 0; j < G.dim; ++j) {
    Rat f = 1;
    for (int t = 0; t < G.weights[j]; ++t) f *= lambda;
    y[j] *= f;
  }
  return y;
}

std::vector<double> dilation_d(const CarnotGroup& G, double lambda,
                               const std::vector<double>& x) {
  if (!(lambda > 0)) throw std::invalid_argument("dilation factor must be > 0");
  if ((int)x.size() != G.dim)
    throw std::invalid_argument("point dimension mismatch");
  std::vector<double> y = x;
  for (int j = 0; j < G.dim; ++j) y[j] *= std::pow(lambda, G.weights[j]);
  return y;
}

double homogeneous_quasinorm(const CarnotGroup& G,
                             const std::vector<double>& x) {
  if ((int)x.size() != G.dim)
    throw std::invalid_argument("point dimension mismatch");
  double s = 0;
  for (int j = 0; j < G.dim; ++j)
    s += std::pow(std::abs(x[j]), 1.0 / G.weights[j]);
  return s;
}

double haar_translation_defect(const CarnotGroup& G,
                               const std::vector<double>& x, int resolution) {
  if (resolution < 2) throw std::invalid_argument("resolution must be >= 2");
  int n = G.dim;
  // compiled y-Jacobian entries of the law
  std::vector<std::vector<DPoly>> jac(n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      jac[k].push_back(compile_poly(G.law[k].derivative(n + j)));

  // midpoint grid while it fits, deterministic uniform draws beyond that
  long cells = 1;
  bool grid = true;
  for (int j = 0; j < n && grid; ++j) {
    cells *= resolution;
    if (cells > 8192) grid = false;
  }
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  long total = grid ? cells : 8192;

  std::vector<double> xy(2 * n);
  std::copy(x.begin(), x.end(), xy.begin());
  std::vector<int> idx(n, 0);
  double acc = 0;
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (long count = 0; count < total; ++count) {
    if (grid) {
      for (int j = 0; j < n; ++j)
        xy[n + j] = -1.0 + 2.0 * (idx[j] + 0.5) / resolution;
      int j = 0;
      while (j < n && ++idx[j] == resolution) idx[j++] = 0;
    } else {
      for (int j = 0; j < n; ++j) xy[n + j] = uni(rng);
    }
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) m[k][j] = jac[k][j].eval(xy.data());
    // determinant by partial-pivot elimination
    double det = 1;
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
      if (piv != c) {
        std::swap(m[piv], m[c]);
        det = -det;
      }
      det *= m[c][c];
      if (m[c][c] == 0) break;
      for (int r = c + 1; r < n; ++r) {
        double f = m[r][c] / m[c][c];
        for (int cc = c; cc < n; ++cc) m[r][cc] -= f * m[c][cc];
      }
    }
    acc += std::abs(det);
  }
  return std::abs(acc / (double)total - 1.0);
}

}  // namespace srgeo
