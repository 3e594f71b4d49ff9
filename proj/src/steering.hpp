// Manifold-side CC distance estimation through a privileged chart: quasinorm
// brackets with fitted comparison constants, transcription upper bounds with
// group-geodesic steering initialization, and the loop/transfer defect
// experiments against a Carnot group model.
#pragma once

#include <cstdint>
#include <utility>

#include "groupmetric.hpp"
#include "nilpot.hpp"

namespace srgeo {

struct LoopNotClosed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChartOracleBudget {
  int segments = 32;        // transcription pieces
  int starts = 8;           // multi-start count (steering + straight + seeded)
  int shorten_rounds = 3;   // projected length-descent rounds after closure
  double step = 1e-3;       // integrator step as a fraction of curve duration
  double box = 1e6;         // integrator bounding box
  double chart_box = 8.0;   // quasinorm validity radius of the chart
  std::uint64_t seed = 1;
};

// Distance oracle at a fixed base point. Bounds are chart-mediated: the lower
// end divides the coordinate quasinorm by the fitted comparison constant, the
// upper end is the length of an integrated horizontal path found by direct
// transcription, initialized from a geodesic of the tangent group run through
// the same controls.
class ChartMetric {
 public:
  ChartMetric(const Frame& frame, const std::vector<Rat>& base,
              ChartOracleBudget budget = {}, int calib_samples = 16);
  // Wrap an existing chart; skips calibration when constants arrive fitted.
  ChartMetric(const Frame& frame, PrivilegedChart chart,
              EstimateConstants constants, ChartOracleBudget budget = {},
              int calib_samples = 16);

  const PrivilegedChart& chart() const { return nz_.chart; }
  const Nilpotentization& nilp() const { return nz_; }
  const CarnotGroup& tangent_group() const { return G_; }
  const EstimateConstants& constants() const { return k_; }
  // upper estimates exceed the true distance by at most this factor - 1,
  // fitted on group cases with exact distances
  double solver_slack() const { return slack_; }
  int refit_count() const { return refits_; }
  const std::vector<double>& base_point() const { return base_d_; }

  // chart coordinates of an ambient point by Newton inversion of the chart
  // polynomial map; throws SolverFailed off the chart
  std::vector<double> chart_coords(const std::vector<double>& q) const;
  std::vector<double> ambient_point(const std::vector<double>& z) const;

  // bracket for d(base, q); refits the comparison constant downward-safe
  // when the transcription upper end undercuts the quasinorm lower end
  std::pair<double, double> dist_bounds(const std::vector<double>& q);

  // tight bracket [U/(1+slack), U] for d(a, b), both points near base
  std::pair<double, double> dist_tight(const std::vector<double>& a,
                                       const std::vector<double>& b) const;

  // transcription path a -> b in the ambient frame
  GeodesicResult connect(const std::vector<double>& a,
                         const std::vector<double>& b) const;

  struct DefectRow {
    double scale = 0;
    double length = 0;
    double defect_lo = 0;
    double defect_hi = 0;
    double ratio = 0;  // defect_hi / length^(1 + 1/s)
  };
  struct DefectReport {
    std::vector<DefectRow> rows;
    double exponent = 0;  // 1 + 1/s used for the ratios
    double slope = 0;     // log-log slope of defect_hi against length
  };
  // Runs dilated copies of a group-closed loop in the ambient frame and
  // brackets the endpoint gap at each scale. Pre: the loop's group rollout
  // returns to the identity, else LoopNotClosed.
  DefectReport loop_defect(const CarnotGroup& model, const ControlSignal& loop,
                           const std::vector<double>& scales);

  struct TransferDefect {
    double d_manifold_lo = 0, d_manifold_hi = 0;  // tight bracket in M
    double d_model_lo = 0, d_model_hi = 0;  // chart-group quasinorm bracket
    double d_group_lo = 0, d_group_hi = 0;  // between the model rollouts
    double defect_lo = 0, defect_hi = 0;    // |d_M - d_G| interval
    double length_sum = 0;
    double ratio = 0;  // defect_hi / length_sum^(1 + 1/s)
  };
  // Runs the same two controls in the ambient frame (from base) and in the
  // model group (from identity) and compares endpoint distances.
  TransferDefect transfer(const CarnotGroup& model, const ControlSignal& u1,
                          const ControlSignal& u2);

 private:
  void init(int calib_samples, bool fit_constants);

  DFrame dM_;
  Nilpotentization nz_;
  CarnotGroup G_;
  std::vector<double> base_d_;
  std::vector<DPoly> phi_c_;   // compiled chart map
  std::vector<DPoly> dphi_c_;  // row-major n x n compiled Jacobian
  EstimateConstants k_;
  double slack_ = 0.05;
  int refits_ = 0;
  ChartOracleBudget budget_;
};

// Contract-shaped entry points; each builds a ChartMetric internally.
std::pair<double, double> cc_distance_bounds(
    const Frame& frame, const std::vector<Rat>& p, const std::vector<double>& q,
    const PrivilegedChart& chart, EstimateConstants& constants,
    const ChartOracleBudget& budget = {});

ChartMetric::DefectReport closed_loop_defect(const Frame& frame,
                                             const CarnotGroup& model,
                                             const std::vector<Rat>& p,
                                             const ControlSignal& loop,
                                             const std::vector<double>& scales,
                                             const ChartOracleBudget& budget = {});

ChartMetric::TransferDefect transfer_defect(const Frame& frame,
                                            const CarnotGroup& model,
                                            const std::vector<Rat>& q,
                                            const ControlSignal& u1,
                                            const ControlSignal& u2,
                                            const ChartOracleBudget& budget = {});

}  // namespace srgeo
