// Graded (stratified) Lie algebra values: validation, basis change,
// isomorphism-invariant fingerprints, model families.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "exactla.hpp"
#include "rational.hpp"

namespace srgeo {

struct GradedLieAlgebra {
  int dim = 0;
  std::vector<int> strata;  // stratum dimensions m_1..m_s
  // Dense constants tensor, c[i][j][k] = coefficient of e_k in [e_i,e_j].
  std::vector<std::vector<std::vector<Rat>>> c;

  static GradedLieAlgebra zero(int dim, std::vector<int> strata);

  int step() const { return (int)strata.size(); }
  // 1-based stratum label of 0-based coordinate i; doubles as the weight.
  int stratum_of(int i) const;
  std::vector<int> coord_weights() const;

  // Sets c[i][j][k] = v and c[j][i][k] = -v.
  void set_bracket(int i, int j, int k, const Rat& v);

  RatVec bracket(const RatVec& x, const RatVec& y) const;

  bool operator==(const GradedLieAlgebra&) const = default;
};

struct CheckResult {
  bool ok = true;
  std::string message;  // first violation, with indices
};

// Antisymmetry, Jacobi, grading compatibility, and generation of the whole
// algebra by the first stratum.
CheckResult validate_graded(const GradedLieAlgebra& g);

// a's columns are the new basis vectors written in the old coordinates and
// must be block-diagonal for g's strata with invertible blocks. The result
// expresses brackets of the new basis in the new basis.
bool is_graded_map(const GradedLieAlgebra& g, const RatMat& a,
                   std::string* why = nullptr);
GradedLieAlgebra change_basis(const GradedLieAlgebra& g, const RatMat& a);

struct Fingerprint {
  std::vector<int> strata;
  std::vector<int> lcs_dims;  // dims of [g,g], [g,[g,g]], ... down to 0
  int pairing_rank = 0;       // rank of V1 -> Hom(V1,V2), x -> [x,.]
  int center_dim = 0;
  bool operator==(const Fingerprint&) const = default;
};
Fingerprint invariant_prescreen(const GradedLieAlgebra& g);
std::string fingerprint_str(const Fingerprint& f);

GradedLieAlgebra abelian_algebra(int n);
// Heisenberg algebra of dim 2m+1: strata (2m,1), [e_{2i-1},e_{2i}] = e_{2m+1}.
GradedLieAlgebra heisenberg_algebra(int m);
// Direct product; coordinates interleaved stratum by stratum (all of a's
// stratum-i block, then b's).
GradedLieAlgebra product_algebra(const GradedLieAlgebra& a,
                                 const GradedLieAlgebra& b);

// One-parameter dim-7 family, strata (3,3,1):
// [e1,e2]=e4, [e2,e3]=e5, [e1,e3]=-e6, [e1,e5]=-e7, [e2,e6]=xi e7,
// [e3,e4]=(1-xi)e7.
GradedLieAlgebra e147_family(const Rat& xi);
// Parameter values giving an isomorphic member; xi in {0,1} is rejected.
std::vector<Rat> e147_orbit(const Rat& xi);

// {"dim":n,"strata":[...],"constants":[{"i","j","k","num","den"}]} with
// 1-based indices, entries i<j only, lexicographic order; bit-exact.
nlohmann::json algebra_to_json(const GradedLieAlgebra& g);
GradedLieAlgebra algebra_from_json(const nlohmann::json& j);

}  // namespace srgeo
