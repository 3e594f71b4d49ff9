// Piecewise-constant control signals, horizontal curves by fixed-step RK4
// integration in a polynomial frame, and signal algebra (concatenation,
// reversal, scaling).
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vectorfield.hpp"

namespace srgeo {

struct ControlSegment {
  double duration = 0;
  std::vector<double> u;
};

struct ControlSignal {
  int d = 0;  // control dimension = frame rank
  std::vector<ControlSegment> segments;
  double total_duration() const;
};

ControlSignal constant_control(int d, const std::vector<double>& u,
                               double duration);
ControlSignal concat(const ControlSignal& a, const ControlSignal& b);
// Reversed segment order with negated controls; undoes the original curve.
ControlSignal reverse_negate(const ControlSignal& u);
ControlSignal scale_controls(const ControlSignal& u, double s);
double control_length(const ControlSignal& u);

// Equal-duration signal over [0,1] from a flat (segments x d) value array,
// and back; the transcription optimizers work on the flat form.
ControlSignal controls_from_flat(int d, const std::vector<double>& flat,
                                 int segments);
std::vector<double> flat_from_controls(const ControlSignal& u);

struct BlowUp : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizontalCurve {
  std::vector<double> start;
  ControlSignal control;
  double step = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> points;
  std::vector<double> endpoint_fine;  // from the half-step comparison pass
  double error_estimate = 0;          // endpoint gap between the two passes
  double length = 0;
  const std::vector<double>& endpoint() const { return endpoint_fine; }
};

// Classical RK4 at fixed step per segment; the a posteriori error estimate
// compares the endpoint against a half-step pass. Throws BlowUp when the
// trajectory leaves [-box, box]^n.
HorizontalCurve integrate_controls(const DFrame& frame,
                                   const std::vector<double>& start,
                                   const ControlSignal& u, double step,
                                   double box = 1e6);
HorizontalCurve integrate_controls(const Frame& frame,
                                   const std::vector<double>& start,
                                   const ControlSignal& u, double step,
                                   double box = 1e6);

// Endpoint only, no sample storage, no halving pass; the workhorse for
// optimization inner loops.
std::vector<double> flow_endpoint(const DFrame& frame,
                                  const std::vector<double>& start,
                                  const ControlSignal& u, double step,
                                  double box = 1e6);

// Same controls, different frame: the transfer construction.
HorizontalCurve transfer_controls(const ControlSignal& u, const DFrame& target,
                                  const std::vector<double>& start, double step,
                                  double box = 1e6);
HorizontalCurve transfer_controls(const ControlSignal& u, const Frame& target,
                                  const std::vector<double>& start, double step,
                                  double box = 1e6);

}  // namespace srgeo
