// Distance machinery on Carnot group models: exact CC distances for
// Heisenberg-type and product models, piecewise-constant geodesic
// approximation with endpoint closure, and calibrated quasinorm bounds.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "carnot.hpp"
#include "controls.hpp"

namespace srgeo {

struct SolverFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Comparability and transfer constants, all empirically fitted; a zero value
// with fitted=false means not calibrated yet.
struct EstimateConstants {
  double C0 = 0, L0 = 0, C = 0, L = 0;
  bool c0_fitted = false, c_fitted = false;
};

// Exact CC distance from x to y when the algebra is recognized: abelian,
// any heisenberg_algebra(m), or a two-factor product of those.
std::optional<double> exact_cc_distance(const CarnotGroup& G,
                                        const std::vector<double>& x,
                                        const std::vector<double>& y);

// Endpoint of piecewise-constant controls in the left-invariant frame;
// exact segment flows through the group law, no ODE solve.
std::vector<double> group_rollout(const CarnotGroup& G,
                                  const std::vector<double>& start,
                                  const ControlSignal& u);

struct GeodesicResult {
  ControlSignal control;
  double length = 0;
  double residual = 0;  // endpoint closure gap in coordinates
};

// Horizontal path from x to y: closed-form arc for Heisenberg-type targets,
// otherwise multi-start transcription; endpoint closed by Gauss-Newton on
// the exact rollout. Length is an upper estimate of the CC distance.
GeodesicResult group_geodesic(const CarnotGroup& G,
                              const std::vector<double>& x,
                              const std::vector<double>& y, int segments,
                              int starts = 8, std::uint64_t seed = 1);

// Largest two-sided ratio between quasinorm and geodesic length over seeded
// sample points; the fitted C0 of the box comparison.
EstimateConstants fit_group_constants(const CarnotGroup& G, int samples,
                                      int segments, std::uint64_t seed);

// Distance bound oracle: exact formulas when recognized, else calibrated
// quasinorm brackets (lower = q/C0, upper = C0*q).
class GroupMetric {
 public:
  GroupMetric(CarnotGroup G, int calib_samples = 40, int segments = 24,
              std::uint64_t seed = 1);

  const CarnotGroup& group() const { return grp_; }
  bool exact() const { return exact_; }
  const EstimateConstants& constants() const { return k_; }

  std::pair<double, double> dist_bounds(const std::vector<double>& x,
                                        const std::vector<double>& y) const;

 private:
  CarnotGroup grp_;
  bool exact_ = false;
  EstimateConstants k_;
  // recognized factorization baked into a closure so repeated queries skip
  // the structure-constant scan
  std::function<double(const std::vector<double>&)> exact_delta_;
};

}  // namespace srgeo
