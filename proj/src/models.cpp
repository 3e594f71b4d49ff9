#include "models.hpp"

#include <stdexcept>

namespace srgeo {

namespace {

Poly mono(int nvars, std::vector<std::pair<int, int>> pows, Rat c) {
  Exp e(nvars, 0);
  for (auto [v, p] : pows) e[v] = p;
  return Poly::monomial(nvars, e, c);
}

Frame heis1_frame() {
  int n = 3;
  std::vector<Poly> cx(n, Poly(n)), cy(n, Poly(n));
  cx[0] = Poly::constant(n, 1);
  cy[1] = Poly::constant(n, 1);
  cy[2] = mono(n, {{0, 1}}, 1);
  return Frame("heis1", n, {PolyVectorField(cx), PolyVectorField(cy)});
}

Frame heis2_frame() {
  // coords (x1, y1, x2, y2, z), generator pairs bracket into d5
  int n = 5;
  std::vector<Poly> a(n, Poly(n)), b(n, Poly(n)), c(n, Poly(n)),
      d(n, Poly(n));
  a[0] = Poly::constant(n, 1);
  b[1] = Poly::constant(n, 1);
  b[4] = mono(n, {{0, 1}}, 1);
  c[2] = Poly::constant(n, 1);
  d[3] = Poly::constant(n, 1);
  d[4] = mono(n, {{2, 1}}, 1);
  return Frame("heis2", n,
               {PolyVectorField(a), PolyVectorField(b), PolyVectorField(c),
                PolyVectorField(d)});
}

Frame martinet_frame() {
  int n = 3;
  std::vector<Poly> cx(n, Poly(n)), cy(n, Poly(n));
  cx[0] = Poly::constant(n, 1);
  cy[1] = Poly::constant(n, 1);
  cy[2] = mono(n, {{0, 2}}, 1);
  return Frame("martinet", n, {PolyVectorField(cx), PolyVectorField(cy)});
}

Frame example5_frame() {
  int n = 5;
  std::vector<Poly> c0(n, Poly(n)), c1(n, Poly(n)), c2(n, Poly(n)),
      c3(n, Poly(n));
  c0[0] = Poly::constant(n, 1);
  c1[1] = Poly::constant(n, 1);
  c1[4] = mono(n, {{0, 2}}, 1);
  c2[2] = Poly::constant(n, 1);
  c3[3] = Poly::constant(n, 1);
  c3[4] = mono(n, {{2, 1}}, 1);
  return Frame("example5", n,
               {PolyVectorField(c0), PolyVectorField(c1), PolyVectorField(c2),
                PolyVectorField(c3)});
}

Frame example7_frame() {
  int n = 7;
  std::vector<Poly> c1(n, Poly(n)), c2(n, Poly(n)), c3(n, Poly(n));
  c1[0] = Poly::constant(n, 1);
  c2[1] = Poly::constant(n, 1);
  c2[3] = mono(n, {{0, 1}}, 1);
  c2[6] = mono(n, {{0, 1}, {2, 1}}, 1) + mono(n, {{0, 2}, {2, 1}}, -1);
  c3[2] = Poly::constant(n, 1);
  c3[4] = mono(n, {{1, 1}}, 1);
  c3[5] = mono(n, {{0, 1}}, -1);
  c3[6] = mono(n, {{0, 2}, {1, 1}}, -1);
  return Frame("example7", n, {PolyVectorField(c1), PolyVectorField(c2),
                               PolyVectorField(c3)});
}

std::string poly_text(const Poly& p) {
  std::string out;
  for (auto& [e, c] : p.terms()) {
    Rat a = c;
    bool neg = a < 0;
    if (neg) a = -a;
    if (out.empty()) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    std::string mag = a.get_str();
    std::string vars;
    for (size_t v = 0; v < e.size(); ++v) {
      if (e[v] == 0) continue;
      if (!vars.empty()) vars += " ";
      vars += "x" + std::to_string(v + 1);
      if (e[v] > 1) vars += "^" + std::to_string(e[v]);
    }
    if (vars.empty())
      out += mag;
    else if (mag == "1")
      out += vars;
    else
      out += mag + " " + vars;
  }
  return out.empty() ? "0" : out;
}

}  // namespace

std::string field_formula(const PolyVectorField& v) {
  std::string out;
  for (int j = 0; j < v.nvars(); ++j) {
    const Poly& p = v[j];
    if (p.is_zero()) continue;
    std::string piece;
    if (p.terms().size() == 1 && p.terms().begin()->second == 1 &&
        exp_total(p.terms().begin()->first) == 0)
      piece = "d" + std::to_string(j + 1);
    else
      piece = "(" + poly_text(p) + ") d" + std::to_string(j + 1);
    out += out.empty() ? piece : " + " + piece;
  }
  return out.empty() ? "0" : out;
}

const std::vector<std::string>& bundled_names() {
  static const std::vector<std::string> names = {"heis1", "heis2", "martinet",
                                                "example5", "example7"};
  return names;
}

bool is_bundled(const std::string& name) {
  for (auto& n : bundled_names())
    if (n == name) return true;
  return false;
}

BundledExample bundled_example(const std::string& name) {
  BundledExample ex;
  ex.name = name;
  if (name == "heis1") {
    ex.frame = heis1_frame();
    ex.facts =
        "first Heisenberg model; equiregular, growth (2,3), homogeneous "
        "dimension 4";
    ex.probe = rat_point({"0", "0", "0"});
  } else if (name == "heis2") {
    ex.frame = heis2_frame();
    ex.facts =
        "second Heisenberg model; equiregular, growth (4,5), homogeneous "
        "dimension 6";
    ex.probe = rat_point({"0", "0", "0", "0", "0"});
  } else if (name == "martinet") {
    ex.frame = martinet_frame();
    ex.facts =
        "growth (2,3) off the plane x1 = 0 but (2,2,3) on it; not "
        "equiregular";
    ex.probe = rat_point({"1", "0", "0"});
  } else if (name == "example5") {
    ex.frame = example5_frame();
    ex.facts =
        "rank-4 frame on R^5, growth (4,5) wherever x1 != 0; tangent model "
        "switches from the second Heisenberg group to R^2 x heis1 at x1 = 0";
    ex.probe = rat_point({"1/4", "0", "0", "0", "0"});
  } else if (name == "example7") {
    ex.frame = example7_frame();
    ex.facts =
        "rank-3 frame on R^7, growth (3,6,7) on a full-measure set, "
        "homogeneous dimension 12";
    ex.probe = rat_point({"1/8", "1/8", "1/8", "1/8", "1/8", "1/8", "1/8"});
  } else {
    throw std::invalid_argument("unknown bundled example: " + name);
  }
  for (auto& f : ex.frame.fields) ex.formulas.push_back(field_formula(f));
  return ex;
}

}  // namespace srgeo
