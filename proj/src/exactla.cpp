#include "exactla.hpp"

#include <cassert>
#include <stdexcept>

namespace srgeo {

RatMat rat_identity(int n) {
  RatMat m(n, RatVec(n, Rat(0)));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

RatMat rat_mat_mul(const RatMat& a, const RatMat& b) {
  int n = (int)a.size(), k = (int)b.size(), p = (int)b[0].size();
  RatMat c(n, RatVec(p, Rat(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      if (a[i][j] == 0) continue;
      for (int l = 0; l < p; ++l) c[i][l] += a[i][j] * b[j][l];
    }
  return c;
}

RatVec rat_mat_vec(const RatMat& a, const RatVec& x) {
  RatVec y(a.size(), Rat(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j)
      if (a[i][j] != 0) y[i] += a[i][j] * x[j];
  return y;
}

// Row-echelon reduction in place; returns pivot (row, col) list.
static std::vector<std::pair<int, int>> echelon(RatMat& m) {
  int nr = (int)m.size();
  int nc = nr ? (int)m[0].size() : 0;
  std::vector<std::pair<int, int>> pivots;
  int r = 0;
  for (int c = 0; c < nc && r < nr; ++c) {
    int pr = -1;
    for (int i = r; i < nr; ++i)
      if (m[i][c] != 0) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(m[r], m[pr]);
    Rat inv = 1 / m[r][c];
    for (int j = c; j < nc; ++j) m[r][j] *= inv;
    for (int i = 0; i < nr; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Rat f = m[i][c];
      for (int j = c; j < nc; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.emplace_back(r, c);
    ++r;
  }
  return pivots;
}

int rat_rank(RatMat m) { return (int)echelon(m).size(); }

std::optional<RatVec> rat_solve(RatMat a, RatVec b) {
  int nr = (int)a.size();
  int nc = nr ? (int)a[0].size() : 0;
  for (int i = 0; i < nr; ++i) a[i].push_back(b[i]);
  auto pivots = echelon(a);
  // Inconsistent when the augmented column holds a pivot.
  for (auto& [r, c] : pivots)
    if (c == nc) return std::nullopt;
  assert((int)pivots.size() == nc && "rat_solve needs full column rank");
  RatVec x(nc, Rat(0));
  for (auto& [r, c] : pivots) x[c] = a[r][nc];
  return x;
}

std::optional<RatMat> rat_invert(const RatMat& a) {
  int n = (int)a.size();
  RatMat aug(n, RatVec(2 * n, Rat(0)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug[i][j] = a[i][j];
    aug[i][n + i] = 1;
  }
  auto pivots = echelon(aug);
  int rank_left = 0;
  for (auto& [r, c] : pivots)
    if (c < n) ++rank_left;
  if (rank_left < n) return std::nullopt;
  RatMat inv(n, RatVec(n, Rat(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
  return inv;
}

RatVec RatRowSpace::reduce(RatVec row) const {
  for (size_t k = 0; k < rows_.size(); ++k) {
    int p = pivots_[k];
    if (row[p] == 0) continue;
    Rat f = row[p];
    for (int j = 0; j < ncols_; ++j)
      if (rows_[k][j] != 0) row[j] -= f * rows_[k][j];
  }
  return row;
}

bool RatRowSpace::add_if_independent(const RatVec& row) {
  if ((int)row.size() != ncols_) throw std::invalid_argument("row size");
  RatVec r = reduce(row);
  int p = -1;
  for (int j = 0; j < ncols_; ++j)
    if (r[j] != 0) {
      p = j;
      break;
    }
  if (p < 0) return false;
  Rat inv = 1 / r[p];
  for (int j = 0; j < ncols_; ++j) r[j] *= inv;
  // Back-reduce stored rows so membership stays a single forward pass.
  for (size_t k = 0; k < rows_.size(); ++k) {
    if (rows_[k][p] == 0) continue;
    Rat f = rows_[k][p];
    for (int j = 0; j < ncols_; ++j) rows_[k][j] -= f * r[j];
  }
  rows_.push_back(std::move(r));
  pivots_.push_back(p);
  return true;
}

bool RatRowSpace::contains(const RatVec& row) const {
  if ((int)row.size() != ncols_) throw std::invalid_argument("row size");
  RatVec r = reduce(row);
  for (const auto& v : r)
    if (v != 0) return false;
  return true;
}

}  // namespace srgeo
