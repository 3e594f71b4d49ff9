// Privileged coordinates at a point via composed flows of an adapted frame,
// pushforward jets, weighted-homogeneous parts, and the tangent-group
// structure constants.
#pragma once

#include <stdexcept>

#include "algebra.hpp"
#include "flag.hpp"

namespace srgeo {

struct PrivilegedCheckFailed : std::runtime_error {
  explicit PrivilegedCheckFailed(const std::string& w) : std::runtime_error(w) {}
};
struct BasisExpressionFailed : std::runtime_error {
  explicit BasisExpressionFailed(const std::string& w) : std::runtime_error(w) {}
};

struct PrivilegedChart {
  Frame frame;  // source frame on the ambient space
  std::vector<Rat> base;
  GrowthVector growth;
  FlagBasis basis;
  std::vector<int> wts;  // chart coordinate weights

  // Pushforward jets keep monomials of weighted degree <= order; the chart
  // map phi keeps <= jet_order = order + step so that Jacobian entries are
  // still exact at order.
  int order = 0;
  int jet_order = 0;

  // phi: chart coords z -> ambient coords, phi(0) = base.
  std::vector<Poly> phi;
  // The d frame fields and the n adapted basis fields in chart coordinates.
  std::vector<PolyVectorField> push_frame;
  std::vector<PolyVectorField> push_adapted;
};

// Flows the adapted basis fields in sequence (last basis field first) and
// pushes the frame through the resulting jet. Validates that every retained
// term of adapted field j has weighted degree >= -w_j, and that adapted
// field j evaluates to e_j at the origin. order = 0 means "use the step".
PrivilegedChart privileged_coordinates(const Frame& frame,
                                       const std::vector<Rat>& p,
                                       int order = 0, int max_depth = 6);

// Weighted-degree -1 parts of the pushforward frame fields.
Frame nilpotent_approximation(const PrivilegedChart& chart);

// Bracket words of the flag basis evaluated on hat fields; entry j is
// homogeneous of weighted degree -w_j and evaluates to e_j at the origin.
std::vector<PolyVectorField> hat_basis(const Frame& hat, const FlagBasis& basis);

// Expresses every pairwise bracket of the hat basis in the hat basis by an
// exact polynomial identity. A bracket outside the span means the pointwise
// tangent algebra has dimension above the ambient one (non-regular point) or
// a truncation bug; both raise BasisExpressionFailed.
GradedLieAlgebra structure_constants(const Frame& hat, const FlagBasis& basis,
                                     const GrowthVector& growth);

struct Nilpotentization {
  PrivilegedChart chart;
  Frame hat;
  GradedLieAlgebra algebra;
};

Nilpotentization nilpotentize(const Frame& frame, const std::vector<Rat>& p,
                              int order = 0, int max_depth = 6);

}  // namespace srgeo
