#include "algebra.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace srgeo {

GradedLieAlgebra GradedLieAlgebra::zero(int dim, std::vector<int> strata) {
  if (dim <= 0) throw std::invalid_argument("dim must be positive");
  if (std::accumulate(strata.begin(), strata.end(), 0) != dim)
    throw std::invalid_argument("strata must sum to dim");
  for (int m : strata)
    if (m <= 0) throw std::invalid_argument("empty stratum");
  GradedLieAlgebra g;
  g.dim = dim;
  g.strata = std::move(strata);
  g.c.assign(dim, std::vector<RatVec>(dim, RatVec(dim, Rat(0))));
  return g;
}

int GradedLieAlgebra::stratum_of(int i) const {
  int acc = 0;
  for (int a = 0; a < (int)strata.size(); ++a) {
    acc += strata[a];
    if (i < acc) return a + 1;
  }
  throw std::out_of_range("coordinate index");
}

std::vector<int> GradedLieAlgebra::coord_weights() const {
  std::vector<int> w;
  w.reserve(dim);
  for (int a = 0; a < (int)strata.size(); ++a)
    for (int j = 0; j < strata[a]; ++j) w.push_back(a + 1);
  return w;
}

void GradedLieAlgebra::set_bracket(int i, int j, int k, const Rat& v) {
  c[i][j][k] = v;
  c[j][i][k] = -v;
}

RatVec GradedLieAlgebra::bracket(const RatVec& x, const RatVec& y) const {
  RatVec out(dim, Rat(0));
  for (int i = 0; i < dim; ++i) {
    if (x[i] == 0) continue;
    for (int j = 0; j < dim; ++j) {
      if (y[j] == 0) continue;
      Rat f = x[i] * y[j];
      for (int k = 0; k < dim; ++k)
        if (c[i][j][k] != 0) out[k] += f * c[i][j][k];
    }
  }
  return out;
}

static std::string ijk(int i, int j, int k) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
         std::to_string(k + 1) + ")";
}

CheckResult validate_graded(const GradedLieAlgebra& g) {
  int n = g.dim;
  if (n <= 0) return {false, "dimension must be positive"};
  if (std::accumulate(g.strata.begin(), g.strata.end(), 0) != n)
    return {false, "strata do not sum to dim"};
  if ((int)g.c.size() != n) return {false, "tensor shape"};
  for (auto& r : g.c) {
    if ((int)r.size() != n) return {false, "tensor shape"};
    for (auto& v : r)
      if ((int)v.size() != n) return {false, "tensor shape"};
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (g.c[i][j][k] != -g.c[j][i][k])
          return {false, "antisymmetry violated at " + ijk(i, j, k)};
  auto w = g.coord_weights();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (g.c[i][j][k] != 0 && w[k] != w[i] + w[j])
          return {false, "grading violated at " + ijk(i, j, k)};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        // [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
        for (int l = 0; l < n; ++l) {
          Rat acc = 0;
          for (int m = 0; m < n; ++m)
            acc += g.c[j][k][m] * g.c[i][m][l] + g.c[k][i][m] * g.c[j][m][l] +
                   g.c[i][j][m] * g.c[k][m][l];
          if (acc != 0)
            return {false, "jacobi violated at triple " + ijk(i, j, k)};
        }
      }
  // First stratum generates: brackets of V1 with stratum a-1 span stratum a.
  int off_prev = 0;
  for (int a = 2; a <= g.step(); ++a) {
    int off = off_prev + g.strata[a - 2];
    int m = g.strata[a - 1];
    RatRowSpace sp(m);
    for (int i = 0; i < g.strata[0]; ++i)
      for (int j = off_prev; j < off_prev + g.strata[a - 2]; ++j) {
        RatVec row(m);
        for (int k = 0; k < m; ++k) row[k] = g.c[i][j][off + k];
        sp.add_if_independent(row);
      }
    if (sp.rank() < m)
      return {false, "stratum " + std::to_string(a) +
                         " not generated by the first stratum"};
    off_prev = off;
  }
  return {true, ""};
}

bool is_graded_map(const GradedLieAlgebra& g, const RatMat& a, std::string* why) {
  int n = g.dim;
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if ((int)a.size() != n) return fail("matrix size");
  for (auto& r : a)
    if ((int)r.size() != n) return fail("matrix size");
  auto w = g.coord_weights();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w[i] != w[j] && a[i][j] != 0)
        return fail("off-block entry at (" + std::to_string(i + 1) + "," +
                    std::to_string(j + 1) + ")");
  // Blocks invertible <=> whole matrix invertible given block-diagonality.
  if (!rat_invert(a).has_value()) return fail("singular block");
  return true;
}

GradedLieAlgebra change_basis(const GradedLieAlgebra& g, const RatMat& a) {
  std::string why;
  if (!is_graded_map(g, a, &why))
    throw std::invalid_argument("not a graded map: " + why);
  auto inv = rat_invert(a);
  int n = g.dim;
  auto out = GradedLieAlgebra::zero(n, g.strata);
  for (int i = 0; i < n; ++i) {
    RatVec fi(n);
    for (int r = 0; r < n; ++r) fi[r] = a[r][i];
    for (int j = i + 1; j < n; ++j) {
      RatVec fj(n);
      for (int r = 0; r < n; ++r) fj[r] = a[r][j];
      RatVec br = g.bracket(fi, fj);
      RatVec coef = rat_mat_vec(*inv, br);
      for (int k = 0; k < n; ++k)
        if (coef[k] != 0) out.set_bracket(i, j, k, coef[k]);
    }
  }
  return out;
}

Fingerprint invariant_prescreen(const GradedLieAlgebra& g) {
  int n = g.dim;
  Fingerprint f;
  f.strata = g.strata;

  // Lower central series via spanning sets of bracket values.
  std::vector<RatVec> cur;  // spanning set of g^(k)
  for (int i = 0; i < n; ++i) {
    RatVec e(n, Rat(0));
    e[i] = 1;
    cur.push_back(e);
  }
  for (;;) {
    RatRowSpace sp(n);
    std::vector<RatVec> next;
    for (int i = 0; i < n; ++i) {
      RatVec e(n, Rat(0));
      e[i] = 1;
      for (const auto& v : cur) {
        RatVec b = g.bracket(e, v);
        if (sp.add_if_independent(b)) next.push_back(b);
      }
    }
    f.lcs_dims.push_back(sp.rank());
    if (sp.rank() == 0) break;
    cur = std::move(next);
  }

  // Rank of x in V1 -> [x,.] as a map V1 -> Hom(V1, V2).
  int m1 = g.strata[0];
  int m2 = g.step() >= 2 ? g.strata[1] : 0;
  if (m2 > 0) {
    RatRowSpace sp(m1 * m2);
    for (int i = 0; i < m1; ++i) {
      RatVec row;
      row.reserve(m1 * m2);
      for (int j = 0; j < m1; ++j)
        for (int k = 0; k < m2; ++k) row.push_back(g.c[i][j][m1 + k]);
      sp.add_if_independent(row);
    }
    f.pairing_rank = sp.rank();
  }

  // Center = kernel of x -> (sum_i x_i c[i][j][k])_{j,k}.
  RatMat m(n, RatVec(n * n, Rat(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) m[i][j * n + k] = g.c[i][j][k];
  f.center_dim = n - rat_rank(m);
  return f;
}

std::string fingerprint_str(const Fingerprint& f) {
  std::string s = "strata(";
  for (size_t i = 0; i < f.strata.size(); ++i)
    s += (i ? "," : "") + std::to_string(f.strata[i]);
  s += ") lcs(";
  for (size_t i = 0; i < f.lcs_dims.size(); ++i)
    s += (i ? "," : "") + std::to_string(f.lcs_dims[i]);
  s += ") pairing_rank " + std::to_string(f.pairing_rank) + " center " +
       std::to_string(f.center_dim);
  return s;
}

GradedLieAlgebra abelian_algebra(int n) {
  return GradedLieAlgebra::zero(n, {n});
}

GradedLieAlgebra heisenberg_algebra(int m) {
  if (m < 1) throw std::invalid_argument("m >= 1");
  auto g = GradedLieAlgebra::zero(2 * m + 1, {2 * m, 1});
  for (int i = 0; i < m; ++i) g.set_bracket(2 * i, 2 * i + 1, 2 * m, Rat(1));
  return g;
}

GradedLieAlgebra product_algebra(const GradedLieAlgebra& a,
                                 const GradedLieAlgebra& b) {
  int s = std::max(a.step(), b.step());
  auto stratum = [&](const GradedLieAlgebra& g, int i) {
    return i < g.step() ? g.strata[i] : 0;
  };
  std::vector<int> strata;
  for (int i = 0; i < s; ++i) strata.push_back(stratum(a, i) + stratum(b, i));
  auto g = GradedLieAlgebra::zero(a.dim + b.dim, strata);
  // Coordinate maps: a's stratum-i block precedes b's inside stratum i.
  std::vector<int> amap(a.dim), bmap(b.dim);
  {
    int pos = 0, ai = 0, bi = 0;
    for (int i = 0; i < s; ++i) {
      for (int k = 0; k < stratum(a, i); ++k) amap[ai++] = pos++;
      for (int k = 0; k < stratum(b, i); ++k) bmap[bi++] = pos++;
    }
  }
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j)
      for (int k = 0; k < a.dim; ++k)
        if (a.c[i][j][k] != 0) g.c[amap[i]][amap[j]][amap[k]] = a.c[i][j][k];
  for (int i = 0; i < b.dim; ++i)
    for (int j = 0; j < b.dim; ++j)
      for (int k = 0; k < b.dim; ++k)
        if (b.c[i][j][k] != 0) g.c[bmap[i]][bmap[j]][bmap[k]] = b.c[i][j][k];
  return g;
}

GradedLieAlgebra e147_family(const Rat& xi) {
  auto g = GradedLieAlgebra::zero(7, {3, 3, 1});
  g.set_bracket(0, 1, 3, Rat(1));
  g.set_bracket(1, 2, 4, Rat(1));
  g.set_bracket(0, 2, 5, Rat(-1));
  g.set_bracket(0, 4, 6, Rat(-1));
  g.set_bracket(1, 5, 6, xi);
  g.set_bracket(2, 3, 6, Rat(1) - xi);
  return g;
}

std::vector<Rat> e147_orbit(const Rat& xi) {
  if (xi == 0 || xi == 1)
    throw std::domain_error("orbit undefined at 0 and 1");
  std::vector<Rat> o = {xi,
                        1 / xi,
                        1 - xi,
                        (xi - 1) / xi,
                        1 / (1 - xi),
                        xi / (xi - 1)};
  std::sort(o.begin(), o.end());
  o.erase(std::unique(o.begin(), o.end()), o.end());
  return o;
}

nlohmann::json algebra_to_json(const GradedLieAlgebra& g) {
  nlohmann::json j;
  j["dim"] = g.dim;
  j["strata"] = g.strata;
  nlohmann::json cs = nlohmann::json::array();
  for (int i = 0; i < g.dim; ++i)
    for (int jj = i + 1; jj < g.dim; ++jj)
      for (int k = 0; k < g.dim; ++k)
        if (g.c[i][jj][k] != 0) {
          nlohmann::json e;
          e["i"] = i + 1;
          e["j"] = jj + 1;
          e["k"] = k + 1;
          e["num"] = g.c[i][jj][k].get_num().get_str();
          e["den"] = g.c[i][jj][k].get_den().get_str();
          cs.push_back(std::move(e));
        }
  j["constants"] = std::move(cs);
  return j;
}

GradedLieAlgebra algebra_from_json(const nlohmann::json& j) {
  auto g = GradedLieAlgebra::zero(j.at("dim").get<int>(),
                                  j.at("strata").get<std::vector<int>>());
  for (const auto& e : j.at("constants")) {
    int i = e.at("i").get<int>() - 1;
    int jj = e.at("j").get<int>() - 1;
    int k = e.at("k").get<int>() - 1;
    if (i < 0 || jj < 0 || k < 0 || i >= g.dim || jj >= g.dim || k >= g.dim)
      throw std::invalid_argument("constant index out of range");
    g.set_bracket(i, jj, k,
                  rat_from_strings(e.at("num").get<std::string>(),
                                   e.at("den").get<std::string>()));
  }
  return g;
}

}  // namespace srgeo
