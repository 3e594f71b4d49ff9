#include "vectorfield.hpp"

#include <stdexcept>

namespace srgeo {

PolyVectorField::PolyVectorField(std::vector<Poly> comp) : comp_(std::move(comp)) {
  if (comp_.empty()) throw std::invalid_argument("empty vector field");
  nvars_ = comp_[0].nvars();
  if ((int)comp_.size() != nvars_)
    throw std::invalid_argument("component count must equal nvars");
  for (const auto& p : comp_)
    if (p.nvars() != nvars_) throw std::invalid_argument("nvars mismatch");
}

PolyVectorField PolyVectorField::zero(int nvars) {
  return PolyVectorField(std::vector<Poly>(nvars, Poly(nvars)));
}

PolyVectorField PolyVectorField::coordinate(int nvars, int i) {
  auto comp = std::vector<Poly>(nvars, Poly(nvars));
  comp[i] = Poly::constant(nvars, Rat(1));
  return PolyVectorField(std::move(comp));
}

bool PolyVectorField::is_zero() const {
  for (const auto& p : comp_)
    if (!p.is_zero()) return false;
  return true;
}

Poly PolyVectorField::apply(const Poly& f) const {
  Poly r(nvars_);
  for (int i = 0; i < nvars_; ++i) {
    if (comp_[i].is_zero()) continue;
    r = r + comp_[i] * f.derivative(i);
  }
  return r;
}

PolyVectorField PolyVectorField::operator+(const PolyVectorField& o) const {
  std::vector<Poly> c;
  c.reserve(nvars_);
  for (int i = 0; i < nvars_; ++i) c.push_back(comp_[i] + o.comp_[i]);
  return PolyVectorField(std::move(c));
}

PolyVectorField PolyVectorField::operator-(const PolyVectorField& o) const {
  std::vector<Poly> c;
  c.reserve(nvars_);
  for (int i = 0; i < nvars_; ++i) c.push_back(comp_[i] - o.comp_[i]);
  return PolyVectorField(std::move(c));
}

PolyVectorField PolyVectorField::scale(const Rat& k) const {
  std::vector<Poly> c;
  c.reserve(nvars_);
  for (const auto& p : comp_) c.push_back(p.scale(k));
  return PolyVectorField(std::move(c));
}

PolyVectorField PolyVectorField::scale_by_poly(const Poly& f) const {
  std::vector<Poly> c;
  c.reserve(nvars_);
  for (const auto& p : comp_) c.push_back(p * f);
  return PolyVectorField(std::move(c));
}

std::vector<Rat> PolyVectorField::eval(const std::vector<Rat>& x) const {
  std::vector<Rat> out;
  out.reserve(nvars_);
  for (const auto& p : comp_) out.push_back(p.eval(x));
  return out;
}

std::vector<double> PolyVectorField::eval_d(const std::vector<double>& x) const {
  std::vector<double> out;
  out.reserve(nvars_);
  for (const auto& p : comp_) out.push_back(p.eval_d(x));
  return out;
}

PolyVectorField PolyVectorField::truncate(const Trunc& tr) const {
  std::vector<Poly> c;
  c.reserve(nvars_);
  for (const auto& p : comp_) c.push_back(p.truncate(tr));
  return PolyVectorField(std::move(c));
}

PolyVectorField PolyVectorField::field_weighted_part(const std::vector<int>& w,
                                                     int deg) const {
  std::vector<Poly> c;
  c.reserve(nvars_);
  for (int i = 0; i < nvars_; ++i)
    c.push_back(comp_[i].weighted_part(w, deg + w[i]));
  return PolyVectorField(std::move(c));
}

std::optional<int> PolyVectorField::min_weighted_degree(
    const std::vector<int>& w) const {
  std::optional<int> best;
  for (int i = 0; i < nvars_; ++i) {
    auto d = comp_[i].min_weighted_degree(w);
    if (!d) continue;
    int fd = *d - w[i];
    if (!best || fd < *best) best = fd;
  }
  return best;
}

PolyVectorField lie_bracket(const PolyVectorField& v, const PolyVectorField& w) {
  if (v.nvars() != w.nvars()) throw std::invalid_argument("nvars mismatch");
  std::vector<Poly> c;
  c.reserve(v.nvars());
  for (int i = 0; i < v.nvars(); ++i) c.push_back(v.apply(w[i]) - w.apply(v[i]));
  return PolyVectorField(std::move(c));
}

Frame::Frame(std::string name_, int nvars_, std::vector<PolyVectorField> fields_)
    : name(std::move(name_)), nvars(nvars_), fields(std::move(fields_)) {
  if (nvars <= 0) throw std::invalid_argument("frame needs ambient dim >= 1");
  if (fields.empty()) throw std::invalid_argument("frame needs at least one field");
  for (const auto& f : fields)
    if (f.nvars() != nvars) throw std::invalid_argument("field dim mismatch");
}

double DPoly::eval(const double* x) const {
  double acc = 0;
  for (size_t t = 0; t < coef.size(); ++t) {
    double v = coef[t];
    const auto& m = mono[t];
    for (size_t k = 0; k + 1 < m.size(); k += 2) {
      double b = x[m[k]];
      for (int p = 0; p < m[k + 1]; ++p) v *= b;
    }
    acc += v;
  }
  return acc;
}

void DField::eval(const double* x, double* out) const {
  for (size_t i = 0; i < comp.size(); ++i) out[i] = comp[i].eval(x);
}

DPoly compile_poly(const Poly& p) {
  DPoly d;
  for (const auto& [e, c] : p.terms()) {
    d.coef.push_back(c.get_d());
    std::vector<int> m;
    for (size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) {
        m.push_back((int)i);
        m.push_back(e[i]);
      }
    d.mono.push_back(std::move(m));
  }
  return d;
}

DField compile_field(const PolyVectorField& v) {
  DField f;
  f.comp.reserve(v.nvars());
  for (int i = 0; i < v.nvars(); ++i) f.comp.push_back(compile_poly(v[i]));
  return f;
}

DFrame compile_frame(const Frame& fr) {
  DFrame d;
  d.nvars = fr.nvars;
  for (const auto& f : fr.fields) d.fields.push_back(compile_field(f));
  return d;
}

nlohmann::json poly_terms_to_json(const Poly& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) {
    nlohmann::json t;
    t["exp"] = e;
    t["num"] = c.get_num().get_str();
    t["den"] = c.get_den().get_str();
    terms.push_back(std::move(t));
  }
  return terms;
}

nlohmann::json field_to_json(const PolyVectorField& v) {
  nlohmann::json j;
  j["nvars"] = v.nvars();
  nlohmann::json comps = nlohmann::json::array();
  for (int i = 0; i < v.nvars(); ++i) comps.push_back(poly_terms_to_json(v[i]));
  j["components"] = std::move(comps);
  return j;
}

static Poly poly_from_json_terms(const nlohmann::json& terms, int nvars) {
  Poly p(nvars);
  for (const auto& t : terms) {
    Exp e = t.at("exp").get<Exp>();
    if ((int)e.size() != nvars) throw std::invalid_argument("bad exponent size");
    p.add_term(e, rat_from_strings(t.at("num").get<std::string>(),
                                   t.at("den").get<std::string>()));
  }
  return p;
}

PolyVectorField field_from_json(const nlohmann::json& j) {
  int n = j.at("nvars").get<int>();
  const auto& comps = j.at("components");
  if ((int)comps.size() != n)
    throw std::invalid_argument("component count must equal nvars");
  std::vector<Poly> c;
  c.reserve(n);
  for (const auto& cj : comps) c.push_back(poly_from_json_terms(cj, n));
  return PolyVectorField(std::move(c));
}

nlohmann::json frame_to_json(const Frame& f) {
  nlohmann::json j;
  j["name"] = f.name;
  j["nvars"] = f.nvars;
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& v : f.fields) fields.push_back(field_to_json(v));
  j["fields"] = std::move(fields);
  return j;
}

Frame frame_from_json(const nlohmann::json& j) {
  std::vector<PolyVectorField> fields;
  for (const auto& fj : j.at("fields")) fields.push_back(field_from_json(fj));
  return Frame(j.value("name", std::string("frame")), j.at("nvars").get<int>(),
               std::move(fields));
}

}  // namespace srgeo
