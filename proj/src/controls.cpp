#include "controls.hpp"

#include <cmath>

namespace srgeo {

double ControlSignal::total_duration() const {
  double t = 0;
  for (auto& s : segments) t += s.duration;
  return t;
}

ControlSignal constant_control(int d, const std::vector<double>& u,
                               double duration) {
  if ((int)u.size() != d) throw std::invalid_argument("control size mismatch");
  if (!(duration > 0)) throw std::invalid_argument("duration must be > 0");
  ControlSignal s;
  s.d = d;
  s.segments.push_back({duration, u});
  return s;
}

ControlSignal concat(const ControlSignal& a, const ControlSignal& b) {
  if (a.d != b.d) throw std::invalid_argument("control dimension mismatch");
  ControlSignal s = a;
  s.segments.insert(s.segments.end(), b.segments.begin(), b.segments.end());
  return s;
}

ControlSignal reverse_negate(const ControlSignal& u) {
  ControlSignal s;
  s.d = u.d;
  for (auto it = u.segments.rbegin(); it != u.segments.rend(); ++it) {
    ControlSegment seg = *it;
    for (auto& v : seg.u) v = -v;
    s.segments.push_back(seg);
  }
  return s;
}

ControlSignal scale_controls(const ControlSignal& u, double s) {
  ControlSignal r = u;
  for (auto& seg : r.segments)
    for (auto& v : seg.u) v *= s;
  return r;
}

double control_length(const ControlSignal& u) {
  double l = 0;
  for (auto& seg : u.segments) {
    double n2 = 0;
    for (double v : seg.u) n2 += v * v;
    l += seg.duration * std::sqrt(n2);
  }
  return l;
}

ControlSignal controls_from_flat(int d, const std::vector<double>& flat,
                                 int segments) {
  ControlSignal u;
  u.d = d;
  double dt = 1.0 / segments;
  for (int k = 0; k < segments; ++k) {
    ControlSegment seg;
    seg.duration = dt;
    seg.u.assign(flat.begin() + (size_t)k * d,
                 flat.begin() + (size_t)(k + 1) * d);
    u.segments.push_back(seg);
  }
  return u;
}

std::vector<double> flat_from_controls(const ControlSignal& u) {
  std::vector<double> flat;
  for (auto& seg : u.segments)
    flat.insert(flat.end(), seg.u.begin(), seg.u.end());
  return flat;
}

namespace {

void velocity(const DFrame& f, const std::vector<double>& u,
              const double* x, std::vector<double>& tmp,
              std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (size_t i = 0; i < f.fields.size(); ++i) {
    if (u[i] == 0) continue;
    f.fields[i].eval(x, tmp.data());
    for (size_t j = 0; j < out.size(); ++j) out[j] += u[i] * tmp[j];
  }
}

void check_inputs(const DFrame& frame, const std::vector<double>& start,
                  const ControlSignal& u, double step) {
  if ((int)frame.fields.size() != u.d)
    throw std::invalid_argument("frame rank does not match control dimension");
  if ((int)start.size() != frame.nvars)
    throw std::invalid_argument("start point dimension mismatch");
  if (!(step > 0)) throw std::invalid_argument("step must be > 0");
  for (auto& seg : u.segments)
    if (!(seg.duration > 0) || (int)seg.u.size() != u.d)
      throw std::invalid_argument("malformed control segment");
}

// One full pass; records samples when times/points are non-null.
std::vector<double> run_pass(const DFrame& frame,
                             const std::vector<double>& start,
                             const ControlSignal& u, double step, double box,
                             std::vector<double>* times,
                             std::vector<std::vector<double>>* points) {
  int n = frame.nvars;
  std::vector<double> x = start, tmp(n), k1(n), k2(n), k3(n), k4(n), xs(n);
  double t = 0;
  if (times) {
    times->push_back(0);
    points->push_back(x);
  }
  for (auto& seg : u.segments) {
    long nsteps = std::max(1L, std::lround(seg.duration / step));
    double h = seg.duration / (double)nsteps;
    for (long sidx = 0; sidx < nsteps; ++sidx) {
      velocity(frame, seg.u, x.data(), tmp, k1);
      for (int j = 0; j < n; ++j) xs[j] = x[j] + 0.5 * h * k1[j];
      velocity(frame, seg.u, xs.data(), tmp, k2);
      for (int j = 0; j < n; ++j) xs[j] = x[j] + 0.5 * h * k2[j];
      velocity(frame, seg.u, xs.data(), tmp, k3);
      for (int j = 0; j < n; ++j) xs[j] = x[j] + h * k3[j];
      velocity(frame, seg.u, xs.data(), tmp, k4);
      for (int j = 0; j < n; ++j)
        x[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
      t += h;
      for (int j = 0; j < n; ++j)
        if (!(std::abs(x[j]) <= box))
          throw BlowUp("trajectory left the bounding box at t=" +
                       std::to_string(t));
      if (times) {
        times->push_back(t);
        points->push_back(x);
      }
    }
  }
  return x;
}

}  // namespace

std::vector<double> flow_endpoint(const DFrame& frame,
                                  const std::vector<double>& start,
                                  const ControlSignal& u, double step,
                                  double box) {
  check_inputs(frame, start, u, step);
  return run_pass(frame, start, u, step, box, nullptr, nullptr);
}

HorizontalCurve integrate_controls(const DFrame& frame,
                                   const std::vector<double>& start,
                                   const ControlSignal& u, double step,
                                   double box) {
  check_inputs(frame, start, u, step);
  HorizontalCurve c;
  c.start = start;
  c.control = u;
  c.step = step;
  c.length = control_length(u);
  auto coarse = run_pass(frame, start, u, step, box, &c.times, &c.points);
  c.endpoint_fine = run_pass(frame, start, u, step / 2, box, nullptr, nullptr);
  double e = 0;
  for (size_t j = 0; j < coarse.size(); ++j)
    e = std::max(e, std::abs(coarse[j] - c.endpoint_fine[j]));
  c.error_estimate = e;
  return c;
}

HorizontalCurve integrate_controls(const Frame& frame,
                                   const std::vector<double>& start,
                                   const ControlSignal& u, double step,
                                   double box) {
  return integrate_controls(compile_frame(frame), start, u, step, box);
}

HorizontalCurve transfer_controls(const ControlSignal& u, const DFrame& target,
                                  const std::vector<double>& start, double step,
                                  double box) {
  return integrate_controls(target, start, u, step, box);
}

HorizontalCurve transfer_controls(const ControlSignal& u, const Frame& target,
                                  const std::vector<double>& start, double step,
                                  double box) {
  return integrate_controls(compile_frame(target), start, u, step, box);
}

}  // namespace srgeo
