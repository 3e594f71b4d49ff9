// Exact linear algebra over the rationals. Dense, fraction-based Gaussian
// elimination; fine for the small systems this project solves (dims <= ~60).
#pragma once

#include <optional>
#include <vector>

#include "rational.hpp"

namespace srgeo {

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;  // row-major, rectangular

RatMat rat_identity(int n);
RatMat rat_mat_mul(const RatMat& a, const RatMat& b);
RatVec rat_mat_vec(const RatMat& a, const RatVec& x);

int rat_rank(RatMat m);

// Solves a*x = b. Empty optional when inconsistent; a must have full column
// rank for the solution to be unique (asserted).
std::optional<RatVec> rat_solve(RatMat a, RatVec b);

// Empty optional when singular.
std::optional<RatMat> rat_invert(const RatMat& a);

// Incremental row space with exact membership tests. Rows are reduced against
// the stored echelon basis as they arrive.
class RatRowSpace {
 public:
  explicit RatRowSpace(int ncols) : ncols_(ncols) {}

  // True and absorbs the row when it enlarges the span.
  bool add_if_independent(const RatVec& row);
  bool contains(const RatVec& row) const;
  int rank() const { return (int)rows_.size(); }
  int ncols() const { return ncols_; }

 private:
  // Reduced row plus its pivot column; rows kept sorted by pivot.
  RatVec reduce(RatVec row) const;

  int ncols_;
  std::vector<RatVec> rows_;
  std::vector<int> pivots_;
};

}  // namespace srgeo
