#pragma once

#include <string>

#include "json.hpp"
#include "poly.hpp"

namespace srgeo {

// Vector field with polynomial components, V = sum_i comp[i] d/dx_i.
class PolyVectorField {
 public:
  PolyVectorField() = default;
  explicit PolyVectorField(std::vector<Poly> comp);
  static PolyVectorField zero(int nvars);
  static PolyVectorField coordinate(int nvars, int i);  // d/dx_i

  int nvars() const { return nvars_; }
  bool is_zero() const;
  const std::vector<Poly>& comp() const { return comp_; }
  const Poly& operator[](int i) const { return comp_[i]; }

  // Derivation applied to a scalar polynomial: V(f) = sum_i V_i df/dx_i.
  Poly apply(const Poly& f) const;

  PolyVectorField operator+(const PolyVectorField& o) const;
  PolyVectorField operator-(const PolyVectorField& o) const;
  PolyVectorField scale(const Rat& c) const;
  PolyVectorField scale_by_poly(const Poly& f) const;

  std::vector<Rat> eval(const std::vector<Rat>& x) const;
  std::vector<double> eval_d(const std::vector<double>& x) const;

  PolyVectorField truncate(const Trunc& tr) const;
  // Keep terms whose field weighted degree (monomial minus component weight)
  // equals deg.
  PolyVectorField field_weighted_part(const std::vector<int>& w, int deg) const;
  // Smallest weighted degree over all terms, counting the -w[i] of the
  // component direction; empty for the zero field.
  std::optional<int> min_weighted_degree(const std::vector<int>& w) const;

  bool operator==(const PolyVectorField& o) const {
    return comp_ == o.comp_;
  }

 private:
  int nvars_ = 0;
  std::vector<Poly> comp_;
};

// [V,W]_i = V(W_i) - W(V_i).
PolyVectorField lie_bracket(const PolyVectorField& v, const PolyVectorField& w);

struct Frame {
  std::string name;
  int nvars = 0;
  std::vector<PolyVectorField> fields;

  Frame() = default;
  Frame(std::string name, int nvars, std::vector<PolyVectorField> fields);
  int rank() const { return (int)fields.size(); }
};

// Flat double-precision form for hot evaluation loops.
struct DPoly {
  std::vector<double> coef;
  std::vector<std::vector<int>> mono;  // list of (var, power) pairs flattened
  double eval(const double* x) const;
};
struct DField {
  std::vector<DPoly> comp;
  void eval(const double* x, double* out) const;
};
struct DFrame {
  int nvars = 0;
  std::vector<DField> fields;
};

DPoly compile_poly(const Poly& p);
DField compile_field(const PolyVectorField& v);
DFrame compile_frame(const Frame& f);

// JSON: a term is {"exp": [...], "num": "...", "den": "..."}; a field is
// {"nvars": n, "components": [[term...], ...]}. Round trips are bit exact.
nlohmann::json poly_terms_to_json(const Poly& p);
nlohmann::json field_to_json(const PolyVectorField& v);
PolyVectorField field_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const Frame& f);
Frame frame_from_json(const nlohmann::json& j);

}  // namespace srgeo
