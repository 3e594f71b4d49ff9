// Carnot group models in exponential coordinates of the first kind: the
// group law from the terminating BCH series, diagonal dilations, and the
// left-invariant polynomial frame spanning the first stratum.
#pragma once

#include <string>
#include <vector>

#include "algebra.hpp"
#include "vectorfield.hpp"

namespace srgeo {

struct CarnotGroup {
  GradedLieAlgebra algebra;
  std::string name;
  int dim = 0;
  int rank = 0;  // dim of the first stratum
  int step = 0;
  std::vector<int> weights;
  // Component k of log(exp x * exp y), polynomial in 2*dim variables
  // (x coordinates first, then y).
  std::vector<Poly> law;
  std::vector<DPoly> law_d;  // compiled copy for double-precision paths
  Frame frame;               // left-invariant extension of the V1 basis
};

// Validates the algebra, expands the group law, derives the frame.
CarnotGroup make_carnot_group(const GradedLieAlgebra& g,
                              const std::string& name = "group");

// The BCH series of the algebra through bracket length = step, via the
// Dynkin expansion; exact rational coefficients.
std::vector<Poly> bch_polynomials(const GradedLieAlgebra& g);

RatVec bch_product(const CarnotGroup& G, const RatVec& x, const RatVec& y);
std::vector<double> bch_product_d(const CarnotGroup& G,
                                  const std::vector<double>& x,
                                  const std::vector<double>& y);

// exp(X)^{-1} = exp(-X); valid in any coordinate system of the first kind.
RatVec group_inverse(const RatVec& x);
std::vector<double> group_inverse_d(const std::vector<double>& x);

RatVec dilation(const CarnotGroup& G, const Rat& lambda, const RatVec& x);
std::vector<double> dilation_d(const CarnotGroup& G, double lambda,
                               const std::vector<double>& x);

double homogeneous_quasinorm(const CarnotGroup& G,
                             const std::vector<double>& x);

// Mean absolute Jacobian determinant of y -> x*y over a coordinate grid in
// [-1,1]^n, minus one. Zero up to roundoff: the law's y-Jacobian is
// unitriangular in the grading, so Lebesgue measure is left-invariant.
double haar_translation_defect(const CarnotGroup& G,
                               const std::vector<double>& x, int resolution);

}  // namespace srgeo
