#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "cantor.hpp"
#include "embed.hpp"
#include "flag.hpp"
#include "isosearch.hpp"
#include "models.hpp"
#include "nilpot.hpp"
#include "steering.hpp"

namespace srgeo {
namespace {

using nlohmann::json;

enum class Kind { Str, Num, Int, Bool, NumList, StrList, Points, Box, Obj };

const std::map<std::string, Kind>& schema() {
  static const std::map<std::string, Kind> k = {
      {"example", Kind::Str},        {"frame_file", Kind::Str},
      {"model", Kind::Str},          {"family", Kind::Str},
      {"xi", Kind::Str},             {"eta", Kind::Str},
      {"point", Kind::StrList},      {"points", Kind::Points},
      {"points_res", Kind::Int},     {"box", Kind::Box},
      {"region_box", Kind::Box},     {"region_resolution", Kind::Int},
      {"resolution", Kind::Int},     {"depth", Kind::Int},
      {"t_grid", Kind::NumList},     {"tau", Kind::Num},
      {"tau_grid", Kind::NumList},   {"s", Kind::Int},
      {"r", Kind::Num},              {"scales", Kind::NumList},
      {"pairs", Kind::Int},          {"drop", Kind::Int},
      {"mode", Kind::Str},           {"iterations", Kind::Int},
      {"cover_radius", Kind::Num},   {"seed", Kind::Int},
      {"workers", Kind::Int},        {"strict", Kind::Bool},
      {"out", Kind::Str},            {"max_points", Kind::Int},
      {"max_ends", Kind::Int},       {"pair_cap", Kind::Int},
      {"geo_segments", Kind::Int},   {"geo_starts", Kind::Int},
      {"segments", Kind::Int},       {"starts", Kind::Int},
      {"restarts", Kind::Int},       {"inputs", Kind::StrList},
      {"tolerances", Kind::Obj},
  };
  return k;
}

const std::vector<std::string>& tolerance_keys() {
  static const std::vector<std::string> k = {
      "iso_residual", "anchor_residual", "defect_factor", "decrement_factor"};
  return k;
}

[[noreturn]] void fail_key(const std::string& key, const char* want) {
  throw ConfigError("config key '" + key + "' must be " + want);
}

void check_entry(const std::string& key, const json& v, Kind kind) {
  switch (kind) {
    case Kind::Str:
      if (!v.is_string()) fail_key(key, "a string");
      break;
    case Kind::Num:
      if (!v.is_number()) fail_key(key, "a number");
      break;
    case Kind::Int:
      if (!v.is_number_integer()) fail_key(key, "an integer");
      break;
    case Kind::Bool:
      if (!v.is_boolean()) fail_key(key, "a boolean");
      break;
    case Kind::NumList:
      if (!v.is_array()) fail_key(key, "an array of numbers");
      for (const auto& e : v)
        if (!e.is_number()) fail_key(key, "an array of numbers");
      break;
    case Kind::StrList:
      if (!v.is_array()) fail_key(key, "an array of strings");
      for (const auto& e : v)
        if (!e.is_string()) fail_key(key, "an array of strings");
      break;
    case Kind::Points:
      if (v.is_string()) {
        if (v.get<std::string>() != "grid")
          fail_key(key, "\"grid\" or an array of coordinate-string arrays");
        break;
      }
      if (!v.is_array())
        fail_key(key, "\"grid\" or an array of coordinate-string arrays");
      for (const auto& row : v) {
        if (!row.is_array())
          fail_key(key, "\"grid\" or an array of coordinate-string arrays");
        for (const auto& c : row)
          if (!c.is_string())
            fail_key(key, "\"grid\" or an array of coordinate-string arrays");
      }
      break;
    case Kind::Box:
      if (!v.is_array()) fail_key(key, "an array of [lo, hi] string pairs");
      for (const auto& row : v) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_string() ||
            !row[1].is_string())
          fail_key(key, "an array of [lo, hi] string pairs");
      }
      break;
    case Kind::Obj:
      if (!v.is_object()) fail_key(key, "an object");
      for (const auto& [tk, tv] : v.items()) {
        const auto& allowed = tolerance_keys();
        if (std::find(allowed.begin(), allowed.end(), tk) == allowed.end())
          throw ConfigError("unknown tolerance '" + tk + "'");
        if (!tv.is_number()) fail_key(key + "." + tk, "a number");
      }
      break;
  }
}

Rat parse_rat(const std::string& text, const std::string& key) {
  try {
    return rat_from_string(text);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text +
                      "' as a rational");
  }
}

std::vector<Rat> parse_rat_list(const json& arr, const std::string& key) {
  std::vector<Rat> out;
  for (const auto& e : arr) out.push_back(parse_rat(e.get<std::string>(), key));
  return out;
}

std::vector<std::string> rat_strings(const std::vector<Rat>& v) {
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& r : v) out.push_back(r.get_str());
  return out;
}

// A frame with a label, a generic base point, and its printed formulas.
struct FrameSource {
  Frame frame;
  std::string label;
  std::vector<Rat> probe;
  std::vector<std::string> formulas;
};

FrameSource resolve_frame(const ExperimentConfig& cfg) {
  if (cfg.has("example")) {
    const std::string name = cfg.require_str("example");
    if (!is_bundled(name)) {
      std::string valid;
      for (const auto& n : bundled_names()) valid += " " + n;
      throw ConfigError("unknown example '" + name + "'; bundled:" + valid);
    }
    auto ex = bundled_example(name);
    return {std::move(ex.frame), ex.name, std::move(ex.probe),
            std::move(ex.formulas)};
  }
  if (cfg.has("frame_file")) {
    const std::string path = cfg.require_str("frame_file");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open frame file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("frame file '" + path + "' is not valid JSON");
    Frame f;
    try {
      f = frame_from_json(j);
    } catch (const std::exception& e) {
      throw ConfigError("frame file '" + path + "': " + e.what());
    }
    FrameSource fs;
    fs.label = f.name.empty() ? path : f.name;
    fs.probe.assign(f.nvars, Rat(0));
    for (const auto& v : f.fields) fs.formulas.push_back(field_formula(v));
    fs.frame = std::move(f);
    return fs;
  }
  throw ConfigError("a frame source is required: set 'example' or 'frame_file'");
}

std::vector<Rat> resolve_point(const ExperimentConfig& cfg,
                               const std::vector<Rat>& fallback, int nvars) {
  if (!cfg.has("point")) return fallback;
  auto p = parse_rat_list(cfg.raw.at("point"), "point");
  if ((int)p.size() != nvars)
    throw ConfigError("config key 'point' needs " + std::to_string(nvars) +
                      " coordinates, got " + std::to_string(p.size()));
  return p;
}

CarnotGroup resolve_model(const ExperimentConfig& cfg,
                          const std::string& fallback) {
  const std::string name = cfg.str("model", fallback);
  if (name.empty())
    throw ConfigError("a group model is required: set 'model'");
  if (name == "heis1") return make_carnot_group(heisenberg_algebra(1), name);
  if (name == "heis2") return make_carnot_group(heisenberg_algebra(2), name);
  if (name.rfind("abelian", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(name.substr(7));
    } catch (const std::exception&) {
    }
    if (n < 1 || n > 9)
      throw ConfigError("abelian models range from abelian1 to abelian9");
    return make_carnot_group(abelian_algebra(n), name);
  }
  if (name == "e147") {
    Rat xi = parse_rat(cfg.require_str("xi"), "xi");
    if (xi == 0 || xi == 1)
      throw ConfigError("the one-parameter family degenerates at xi = 0, 1");
    return make_carnot_group(e147_family(xi), name);
  }
  if (is_bundled(name)) {
    auto ex = bundled_example(name);
    auto nz = nilpotentize(ex.frame, ex.probe);
    return make_carnot_group(nz.algebra, name);
  }
  throw ConfigError("unknown model '" + name +
                    "'; use heis1, heis2, e147, or a bundled example name");
}

std::vector<std::pair<Rat, Rat>> resolve_box(const ExperimentConfig& cfg,
                                             const std::string& key, int dim,
                                             const Rat& lo_def,
                                             const Rat& hi_def) {
  if (!cfg.has(key))
    return std::vector<std::pair<Rat, Rat>>(dim, {lo_def, hi_def});
  const auto& arr = cfg.raw.at(key);
  if ((int)arr.size() != dim)
    throw ConfigError("config key '" + key + "' needs " + std::to_string(dim) +
                      " axis ranges, got " + std::to_string(arr.size()));
  std::vector<std::pair<Rat, Rat>> box;
  for (const auto& row : arr) {
    Rat lo = parse_rat(row[0].get<std::string>(), key);
    Rat hi = parse_rat(row[1].get<std::string>(), key);
    if (!(lo < hi))
      throw ConfigError("config key '" + key + "': each range needs lo < hi");
    box.push_back({lo, hi});
  }
  return box;
}

// Interior rational grid: res values per axis at lo + (hi-lo)(i+1)/(res+1),
// so endpoints are never sampled and a symmetric box contains the center.
std::vector<std::vector<Rat>> interior_grid(
    const std::vector<std::pair<Rat, Rat>>& box, int res) {
  if (res < 1) throw ConfigError("config key 'points_res' must be >= 1");
  const int n = (int)box.size();
  double total = std::pow((double)res, n);
  if (total > 20000)
    throw ConfigError("grid too large: " + std::to_string(res) + "^" +
                      std::to_string(n) + " points; lower 'points_res'");
  std::vector<std::vector<Rat>> pts;
  std::vector<int> idx(n, 0);
  while (true) {
    std::vector<Rat> p(n);
    for (int j = 0; j < n; ++j) {
      Rat frac = make_rat(idx[j] + 1, res + 1);
      p[j] = box[j].first + (box[j].second - box[j].first) * frac;
    }
    pts.push_back(std::move(p));
    int j = 0;
    while (j < n && ++idx[j] == res) idx[j++] = 0;
    if (j == n) break;
  }
  return pts;
}

ChartOracleBudget chart_budget(const ExperimentConfig& cfg) {
  ChartOracleBudget b;
  b.segments = (int)cfg.integer("segments", b.segments);
  b.starts = (int)cfg.integer("starts", b.starts);
  b.seed = (std::uint64_t)cfg.integer("seed", 1);
  if (b.segments < 2 || b.starts < 1)
    throw ConfigError("'segments' must be >= 2 and 'starts' >= 1");
  return b;
}

EmbedBudget embed_budget(const ExperimentConfig& cfg, int max_ends_def) {
  EmbedBudget b;
  b.r = cfg.num("r", b.r);
  b.geo_segments = (int)cfg.integer("geo_segments", b.geo_segments);
  b.geo_starts = (int)cfg.integer("geo_starts", b.geo_starts);
  b.max_ends = (int)cfg.integer("max_ends", max_ends_def);
  b.pair_cap = (int)cfg.integer("pair_cap", b.pair_cap);
  b.seed = (std::uint64_t)cfg.integer("seed", 1);
  b.chart = chart_budget(cfg);
  return b;
}

int heaviest_root(const CubicalPatchwork& pw) {
  int best = 0;
  for (int c = 1; c < (int)pw.levels[0].size(); ++c)
    if (pw.levels[0][c].mass > pw.levels[0][best].mass) best = c;
  return best;
}

json growth_json(const GrowthVector& g) { return json(g.dims); }

json fingerprint_json(const Fingerprint& f) {
  return json{{"strata", f.strata},
              {"lcs_dims", f.lcs_dims},
              {"pairing_rank", f.pairing_rank},
              {"center_dim", f.center_dim},
              {"text", fingerprint_str(f)}};
}

// Square then the same square reversed, in the first two control slots; the
// signed areas cancel, so the rollout closes in any step-2 model.
ControlSignal figure_eight(int d, double amp, double seg_duration) {
  if (d < 2) throw ConfigError("loop defect needs a frame of rank >= 2");
  static const int dirs[8][2] = {{+1, 0}, {0, +1}, {-1, 0}, {0, -1},
                                 {0, +1}, {+1, 0}, {0, -1}, {-1, 0}};
  ControlSignal u;
  u.d = d;
  for (auto& dir : dirs) {
    std::vector<double> v(d, 0.0);
    v[0] = amp * dir[0];
    v[1] = amp * dir[1];
    u.segments.push_back({seg_duration, v});
  }
  return u;
}

struct WindowStat {
  double rmax = 0, rmin = 0;
  int kept = 0;
  bool ok = false;
};

// Ratios arrive coarsest scale first; the first `drop` entries are warm-up
// scales outside the asymptotic window.
WindowStat ratio_window(const std::vector<double>& ratios, int drop,
                        double factor) {
  WindowStat w;
  if (drop < 0 || drop >= (int)ratios.size()) return w;
  w.rmax = 0;
  w.rmin = std::numeric_limits<double>::infinity();
  for (size_t i = drop; i < ratios.size(); ++i) {
    w.rmax = std::max(w.rmax, ratios[i]);
    w.rmin = std::min(w.rmin, ratios[i]);
    ++w.kept;
  }
  w.ok = w.rmin > 0 ? (w.rmax <= factor * w.rmin) : (w.rmax == 0);
  return w;
}

std::vector<double> dyadic_scales(int first, int last) {
  std::vector<double> s;
  for (int k = first; k <= last; ++k) s.push_back(std::pow(2.0, -k));
  return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// ---- commands ----

json cmd_flag(const ExperimentConfig& cfg, std::string& summary) {
  FrameSource fs = resolve_frame(cfg);
  const int n = fs.frame.nvars;
  std::vector<std::vector<Rat>> pts;
  std::string source = "probe";
  if (cfg.has("points")) {
    const auto& pv = cfg.raw.at("points");
    if (pv.is_string()) {
      auto box = resolve_box(cfg, "box", n, Rat(-1), Rat(1));
      pts = interior_grid(box, (int)cfg.integer("points_res", 3));
      source = "grid";
    } else {
      for (const auto& row : pv) {
        auto p = parse_rat_list(row, "points");
        if ((int)p.size() != n)
          throw ConfigError("config key 'points': each point needs " +
                            std::to_string(n) + " coordinates");
        pts.push_back(std::move(p));
      }
      source = "list";
    }
  } else if (cfg.has("point")) {
    pts.push_back(resolve_point(cfg, fs.probe, n));
    source = "point";
  } else {
    pts.push_back(fs.probe);
  }
  if (pts.empty()) throw ConfigError("no sample points for the flag check");

  auto v = equiregular_check(fs.frame, pts, (int)cfg.integer("depth", 6));

  json body;
  body["frame"] = fs.label;
  body["formulas"] = fs.formulas;
  body["points"] = pts.size();
  body["point_source"] = source;
  body["equiregular"] = v.equiregular;
  if (v.equiregular) {
    body["growth"] = growth_json(v.growth);
    body["weights"] = weights(v.growth);
    body["hausdorff_dimension"] = hausdorff_dimension(v.growth);
  } else {
    body["witness"] = json{{"point_a", rat_strings(pts[v.witness_a])},
                           {"growth_a", growth_json(v.growth_a)},
                           {"point_b", rat_strings(pts[v.witness_b])},
                           {"growth_b", growth_json(v.growth_b)}};
  }
  body["checks"] = json::object();

  char line[160];
  if (v.equiregular) {
    std::string g;
    for (size_t i = 0; i < v.growth.dims.size(); ++i)
      g += (i ? "," : "") + std::to_string(v.growth.dims[i]);
    std::snprintf(line, sizeof line,
                  "%s: equiregular on %zu points, growth (%s), Q = %d\n",
                  fs.label.c_str(), pts.size(), g.c_str(),
                  hausdorff_dimension(v.growth));
  } else {
    std::snprintf(line, sizeof line,
                  "%s: not equiregular (%zu points, growth differs)\n",
                  fs.label.c_str(), pts.size());
  }
  summary = line;
  return body;
}

json cmd_nilp(const ExperimentConfig& cfg, std::string& summary) {
  FrameSource fs = resolve_frame(cfg);
  auto p = resolve_point(cfg, fs.probe, fs.frame.nvars);
  auto nz = nilpotentize(fs.frame, p, 0, (int)cfg.integer("depth", 6));
  auto cr = validate_graded(nz.algebra);
  auto fp = invariant_prescreen(nz.algebra);

  json body;
  body["frame"] = fs.label;
  body["point"] = rat_strings(p);
  body["growth"] = growth_json(nz.chart.growth);
  body["weights"] = nz.chart.wts;
  std::vector<std::string> hat;
  for (const auto& f : nz.hat.fields) hat.push_back(field_formula(f));
  body["hat_formulas"] = hat;
  body["algebra"] = algebra_to_json(nz.algebra);
  body["fingerprint"] = fingerprint_json(fp);
  body["checks"] = json{{"algebra_graded", cr.ok}};

  char line[160];
  std::snprintf(line, sizeof line,
                "tangent model at the given point: %s, pairing rank %d\n",
                fingerprint_str(fp).c_str(), fp.pairing_rank);
  summary = line;
  return body;
}

json cmd_iso(const ExperimentConfig& cfg, std::string& summary) {
  const std::string family = cfg.str("family", "e147");
  if (family != "e147")
    throw ConfigError("unknown family '" + family + "'; only e147 is bundled");
  Rat xi = parse_rat(cfg.require_str("xi"), "xi");
  Rat eta = parse_rat(cfg.require_str("eta"), "eta");
  for (const Rat* v : {&xi, &eta})
    if (*v == 0 || *v == 1)
      throw ConfigError("the one-parameter family degenerates at 0 and 1");

  auto g1 = e147_family(xi);
  auto g2 = e147_family(eta);
  double tol = cfg.tolerance("iso_residual", 1e-8);
  auto res = stratified_iso_search(g1, g2, (int)cfg.integer("restarts", 50),
                                   tol, (std::uint64_t)cfg.integer("seed", 1),
                                   (int)cfg.integer("workers", 0));

  // Membership up to float tolerance: decimal inputs land near, not on, the
  // orbit, and the search itself works at float precision.
  bool orbit_member = false;
  double ed = to_double(eta);
  for (const Rat& o : e147_orbit(xi))
    if (std::abs(to_double(o) - ed) <= 1e-9 * std::max(1.0, std::abs(ed)))
      orbit_member = true;

  bool is_true = res.verdict == IsoVerdict::True;
  json body;
  body["family"] = family;
  body["xi"] = xi.get_str();
  body["eta"] = eta.get_str();
  body["verdict"] = iso_verdict_str(res.verdict);
  body["residual"] = res.residual;
  body["exact_witness"] = res.exact;
  body["best_restart"] = res.best_restart;
  body["fingerprint_1"] = fingerprint_json(res.fp1);
  body["fingerprint_2"] = fingerprint_json(res.fp2);
  body["orbit_member"] = orbit_member;
  if (is_true) body["witness"] = res.witness_float;
  body["checks"] = json{{"verdict_matches_orbit", is_true == orbit_member}};

  char line[160];
  std::snprintf(line, sizeof line, "verdict %s (residual %.3g), %s orbit\n",
                iso_verdict_str(res.verdict), res.residual,
                orbit_member ? "parameter on" : "parameter off");
  summary = line;
  return body;
}

json cmd_group(const ExperimentConfig& cfg, std::string& summary) {
  auto G = resolve_model(cfg, "");
  auto cr = validate_graded(G.algebra);
  auto fp = invariant_prescreen(G.algebra);

  RatVec x(G.dim), y(G.dim);
  for (int i = 0; i < G.dim; ++i) {
    x[i] = make_rat(1, i + 2);
    y[i] = make_rat(1, i + 3);
  }
  RatVec xy = bch_product(G, x, y);
  double haar = haar_translation_defect(G, to_double_vec(x), 3);

  json body;
  body["model"] = G.name;
  body["dim"] = G.dim;
  body["rank"] = G.rank;
  body["step"] = G.step;
  body["weights"] = G.weights;
  body["fingerprint"] = fingerprint_json(fp);
  body["algebra"] = algebra_to_json(G.algebra);
  body["product_sample"] =
      json{{"x", rat_strings(x)}, {"y", rat_strings(y)}, {"xy", rat_strings(xy)}};
  body["haar_translation_defect"] = haar;
  body["checks"] = json{{"algebra_graded", cr.ok},
                        {"translation_invariant_volume", haar < 1e-9}};

  char line[160];
  std::snprintf(line, sizeof line,
                "%s: dim %d, rank %d, step %d, volume defect %.2g\n",
                G.name.c_str(), G.dim, G.rank, G.step, haar);
  summary = line;
  return body;
}

json cmd_defect(const ExperimentConfig& cfg, std::string& summary) {
  FrameSource fs = resolve_frame(cfg);
  auto p = resolve_point(cfg, fs.probe, fs.frame.nvars);
  ChartMetric cm(fs.frame, p, chart_budget(cfg));
  const CarnotGroup* model = &cm.tangent_group();
  CarnotGroup explicit_model;
  if (cfg.has("model")) {
    explicit_model = resolve_model(cfg, "");
    if (explicit_model.rank != fs.frame.rank())
      throw ConfigError("model rank does not match the frame rank");
    model = &explicit_model;
  }

  const std::string mode = cfg.str("mode", "loop");
  const int drop = (int)cfg.integer("drop", 2);
  const double factor = cfg.tolerance("defect_factor", 2.0);

  json body;
  body["frame"] = fs.label;
  body["model"] = model->name;
  body["point"] = rat_strings(p);
  body["mode"] = mode;

  if (mode == "loop") {
    auto scales = cfg.num_list("scales", dyadic_scales(1, 6));
    auto loop = figure_eight(fs.frame.rank(), 1.0, 1.0);
    auto rep = cm.loop_defect(*model, loop, scales);
    json rows = json::array();
    std::vector<double> ratios;
    for (const auto& r : rep.rows) {
      rows.push_back(json{{"scale", r.scale},
                          {"length", r.length},
                          {"defect_lo", r.defect_lo},
                          {"defect_hi", r.defect_hi},
                          {"ratio", r.ratio}});
      ratios.push_back(r.ratio);
    }
    auto w = ratio_window(ratios, drop, factor);
    body["rows"] = rows;
    body["exponent"] = rep.exponent;
    body["slope"] = rep.slope;
    body["dropped_scales"] = drop;
    body["ratio_max"] = w.rmax;
    body["ratio_min"] = w.rmin;
    body["checks"] = json{{"ratio_window", w.ok}};
    char line[200];
    std::snprintf(line, sizeof line,
                  "loop gap over %zu scales: slope %.3f, ratio window "
                  "[%.3g, %.3g] on the %d finest\n",
                  scales.size(), rep.slope, w.rmin, w.rmax, w.kept);
    summary = line;
    return body;
  }
  if (mode != "transfer")
    throw ConfigError("config key 'mode' must be \"loop\" or \"transfer\"");

  auto scales = cfg.num_list("scales", dyadic_scales(1, 5));
  const int pairs = (int)cfg.integer("pairs", 20);
  if (pairs < 1) throw ConfigError("config key 'pairs' must be >= 1");
  const std::uint64_t seed = (std::uint64_t)cfg.integer("seed", 1);
  const int d = fs.frame.rank();
  const double expo = 1.0 + 1.0 / model->step;

  // Fixed shapes across scales: pair k reuses its base controls at every
  // scale, so the ratio traces one family as the scale shrinks.
  std::vector<ControlSignal> base(pairs);
  std::vector<double> bump(pairs);
  for (int k = 0; k < pairs; ++k) {
    std::mt19937_64 rng(mix_seed(seed, k));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    ControlSignal u;
    u.d = d;
    for (int seg = 0; seg < 4; ++seg) {
      std::vector<double> v(d);
      for (int j = 0; j < d; ++j) v[j] = unit(rng);
      u.segments.push_back({0.25, v});
    }
    base[k] = std::move(u);
    bump[k] = 0.5 + 0.75 * (unit(rng) + 1.0);
  }

  json rows = json::array();
  json per_scale = json::array();
  std::vector<double> stat;
  for (double lam : scales) {
    double worst = 0, mean = 0;
    for (int k = 0; k < pairs; ++k) {
      ControlSignal u1 = scale_controls(base[k], lam);
      ControlSignal u2 = u1;
      for (double& c : u2.segments.back().u) c *= 1.0 + bump[k] * lam;
      u2 = concat(u2, figure_eight(d, lam, 0.25));
      auto t = cm.transfer(*model, u1, u2);
      rows.push_back(json{{"scale", lam},
                          {"length", t.length_sum},
                          {"defect_lo", t.defect_lo},
                          {"defect_hi", t.defect_hi},
                          {"ratio", t.ratio}});
      worst = std::max(worst, t.ratio);
      mean += t.ratio / pairs;
    }
    per_scale.push_back(
        json{{"scale", lam}, {"ratio_max", worst}, {"ratio_mean", mean}});
    stat.push_back(worst);
  }
  auto w = ratio_window(stat, drop, factor);
  body["rows"] = rows;
  body["per_scale"] = per_scale;
  body["exponent"] = expo;
  body["pairs_per_scale"] = pairs;
  body["dropped_scales"] = drop;
  body["ratio_max"] = w.rmax;
  body["ratio_min"] = w.rmin;
  body["checks"] = json{{"ratio_window", w.ok}};
  char line[200];
  std::snprintf(line, sizeof line,
                "transfer gap, %d pairs x %zu scales: ratio window "
                "[%.3g, %.3g] on the %d finest\n",
                pairs, scales.size(), w.rmin, w.rmax, w.kept);
  summary = line;
  return body;
}

struct PartitionRun {
  CarnotGroup G;
  PointCloudMM cloud;
  CubicalPatchwork pw;
  PatchworkReport rep;
  int depth = 0;
};

PartitionRun run_partition(const ExperimentConfig& cfg,
                           const std::string& model_fallback,
                           int resolution_def, int depth_def) {
  PartitionRun run;
  run.G = resolve_model(cfg, model_fallback);
  auto box = resolve_box(cfg, "box", run.G.dim, Rat(-1), Rat(1));
  run.depth = (int)cfg.integer("depth", depth_def);
  run.cloud = sample_group_cloud(run.G, box,
                                 (int)cfg.integer("resolution", resolution_def),
                                 cfg.integer("max_points", 2000000));
  run.pw = build_patchwork(run.cloud, run.depth,
                           (std::uint64_t)cfg.integer("seed", 1), 0.125,
                           (int)cfg.integer("workers", 0));
  run.rep = check_patchwork(run.cloud, run.pw,
                            cfg.num_list("t_grid", {1.0, 0.5, 0.25, 0.125}),
                            (int)cfg.integer("workers", 0));
  return run;
}

json cmd_patchwork(const ExperimentConfig& cfg, std::string& summary) {
  auto run = run_partition(cfg, "heis1", 16, 4);
  const auto& rep = run.rep;

  // Strips at nested widths are nested sets, so per-cube masses must be
  // monotone in t; count the exceptions.
  std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> strips;
  for (const auto& e : rep.entries)
    strips[{e.level, e.cube}].push_back({e.t, e.mass});
  int strip_violations = 0;
  for (auto& [cube, list] : strips) {
    std::sort(list.begin(), list.end());
    for (size_t i = 0; i + 1 < list.size(); ++i)
      if (list[i + 1].second < list[i].second) ++strip_violations;
  }

  json levels = json::array();
  for (int k = 0; k <= run.pw.depth; ++k)
    levels.push_back(json{{"level", k}, {"cubes", run.pw.levels[k].size()}});

  json body;
  body["model"] = run.G.name;
  body["points"] = run.cloud.points.size();
  body["depth"] = run.pw.depth;
  body["levels"] = levels;
  body["C1"] = rep.C1;
  body["C2"] = rep.C2;
  body["a0"] = rep.a0;
  body["eta"] = rep.eta;
  body["nesting_violations"] = rep.nesting_violations;
  body["partition_violations"] = rep.partition_violations;
  body["strip_violations"] = strip_violations;
  body["zero_strips"] = rep.zero_entries;
  body["mass_flags"] = rep.mass_flags;
  body["checks"] =
      json{{"exact_nesting", rep.nesting_violations == 0},
           {"exact_partition", rep.partition_violations == 0},
           {"mass_conserved", rep.mass_conserved},
           {"constants_finite",
            rep.C1 > 0 && rep.C2 > 0 && std::isfinite(rep.C2)},
           {"boundary_exponent_positive", rep.eta > 0},
           {"strip_monotone", strip_violations == 0}};

  char line[200];
  std::snprintf(line, sizeof line,
                "%zu points, depth %d: C1 %.3g, C2 %.3g, boundary fit "
                "a0 %.3g, eta %.3g\n",
                run.cloud.points.size(), run.pw.depth, rep.C1, rep.C2, rep.a0,
                rep.eta);
  summary = line;
  return body;
}

json measure_rows_json(const std::vector<CantorMeasureRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back(json{{"tau", r.tau},
                       {"built", r.built},
                       {"retained", r.retained},
                       {"level_frac", r.level_frac},
                       {"decrement", r.decrement},
                       {"bound", r.bound}});
  return out;
}

// Consecutive trim decrements against the fitted geometric rate; the first
// trim and emptied levels stay out. Needs two usable ratios to count.
bool decrement_geometric(const CantorMeasureRow& row, double eta, int s,
                         double factor, int& usable) {
  usable = 0;
  if (!row.built || eta <= 0) return false;
  double target = std::pow(2.0, -eta / (2.0 * s));
  bool ok = true;
  for (size_t k = 1; k + 1 < row.decrement.size(); ++k) {
    double a = row.decrement[k], b = row.decrement[k + 1];
    if (a <= 0 || b <= 0) continue;
    ++usable;
    double r = b / a;
    if (r > factor * target || r < target / factor) ok = false;
  }
  return usable >= 2 && ok;
}

json cmd_cantor(const ExperimentConfig& cfg, std::string& summary) {
  auto run = run_partition(cfg, "abelian2", 256, 5);
  const int root = heaviest_root(run.pw);
  const int s = (int)cfg.integer("s", run.G.step);
  const int depth = run.depth;
  const double tau = cfg.num("tau", 0.1);
  auto tau_grid = cfg.num_list("tau_grid", {0.2, 0.1, 0.05, 0.025});

  auto rows = cantor_measure_report(run.cloud, run.pw, root, s, depth, tau_grid);

  bool built = false;
  double retained = 0;
  int ends_count = 0;
  json tree_levels = json::array();
  try {
    auto cc = build_cantor(run.cloud, run.pw, root, tau, s, depth);
    built = true;
    retained = cc.retained_fraction();
    auto ends = tree_maps(run.cloud, run.pw, cc);
    ends_count = (int)ends.anchor.size();
    for (int k = 0; k <= cc.depth; ++k)
      tree_levels.push_back(json{{"level", k}, {"cubes", cc.tree[k].size()}});
  } catch (const EmptyCantor&) {
  }

  // Retention must grow with tau read along the halving grid.
  bool monotone = true;
  {
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.tau > b.tau; });
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
      if (sorted[i + 1].retained < sorted[i].retained) monotone = false;
  }
  const CantorMeasureRow* at_tau = nullptr;
  for (const auto& r : rows)
    if (std::abs(r.tau - tau) < 1e-12 && r.built) at_tau = &r;
  if (!at_tau)
    for (const auto& r : rows)
      if (r.built && r.tau > 0) {
        at_tau = &r;
        break;
      }
  int usable = 0;
  bool geometric =
      at_tau && decrement_geometric(*at_tau, run.pw.eta, s,
                                    cfg.tolerance("decrement_factor", 2.0),
                                    usable);

  json body;
  body["model"] = run.G.name;
  body["root"] = root;
  body["root_mass"] = to_double(run.pw.levels[0][root].mass);
  body["s"] = s;
  body["depth"] = depth;
  body["tau"] = tau;
  body["built"] = built;
  body["retained_fraction"] = retained;
  body["ends"] = ends_count;
  body["tree_levels"] = tree_levels;
  body["eta"] = run.pw.eta;
  body["a0"] = run.pw.a0;
  body["C2"] = run.pw.C2;
  body["rows"] = measure_rows_json(rows);
  body["decrement_ratios_used"] = usable;
  body["checks"] = json{{"retention_positive", built && retained > 0},
                        {"retention_monotone", monotone},
                        {"decrement_geometric", geometric}};

  char line[200];
  std::snprintf(line, sizeof line,
                "trim at tau %.3g kept %.3f of the root cube, %d ends at "
                "depth %d\n",
                tau, retained, ends_count, depth);
  summary = line;
  return body;
}

struct EmbedSetup {
  PartitionRun run;
  CantorComplex cc;
  TreeEnds ends;
  Frame frameM;
  std::string frame_label;
  std::vector<Rat> p;
  int s = 0;
  double tau = 0;
};

EmbedSetup embed_setup(const ExperimentConfig& cfg) {
  EmbedSetup es;
  std::string model_fallback = "heis1";
  if (cfg.has("example")) model_fallback = cfg.require_str("example");
  es.run = run_partition(cfg, model_fallback, 12, 4);
  if (cfg.has("example") || cfg.has("frame_file")) {
    FrameSource fs = resolve_frame(cfg);
    es.frameM = std::move(fs.frame);
    es.frame_label = fs.label;
    es.p = resolve_point(cfg, fs.probe, es.frameM.nvars);
  } else {
    es.frameM = es.run.G.frame;
    es.frame_label = es.run.G.name + " (self)";
    es.p = resolve_point(cfg, std::vector<Rat>(es.run.G.dim, Rat(0)),
                         es.run.G.dim);
  }
  if (es.frameM.nvars != es.run.G.dim)
    throw ConfigError("the frame chart dimension must match the model dim");
  es.s = (int)cfg.integer("s", es.run.G.step);
  es.tau = cfg.num("tau", 0.1);
  const int root = heaviest_root(es.run.pw);
  es.cc = build_cantor(es.run.cloud, es.run.pw, root, es.tau, es.s,
                       es.run.depth);
  es.ends = tree_maps(es.run.cloud, es.run.pw, es.cc);
  return es;
}

json cmd_embed(const ExperimentConfig& cfg, std::string& summary) {
  auto es = embed_setup(cfg);
  auto bh = check_biholder(es.run.cloud, es.cc, es.ends,
                           (int)cfg.integer("pairs", 500),
                           (std::uint64_t)cfg.integer("seed", 1));
  auto emb = build_embedding(es.run.cloud, es.cc, es.ends, es.run.G, es.frameM,
                             es.p, embed_budget(cfg, 32));

  json pair_rows = json::array();
  for (const auto& pr : emb.pairs)
    pair_rows.push_back(json{{"x", pr.x},
                             {"y", pr.y},
                             {"d_tree", pr.d_tree},
                             {"dg_lo", pr.dg_lo},
                             {"dg_hi", pr.dg_hi},
                             {"dm_lo", pr.dm_lo},
                             {"dm_hi", pr.dm_hi},
                             {"ok", pr.ok}});

  json viol = json::array();
  for (const auto& v : bh.violations)
    viol.push_back(json{{"x", v.x},
                        {"y", v.y},
                        {"d_tree", v.d_tree},
                        {"dg_lo", v.dg_lo},
                        {"dg_hi", v.dg_hi},
                        {"margin", v.margin},
                        {"upper_side", v.upper}});

  json body;
  body["model"] = es.run.G.name;
  body["frame"] = es.frame_label;
  body["point"] = rat_strings(es.p);
  body["tau"] = emb.tau;
  body["s"] = emb.s;
  body["depth"] = emb.depth;
  body["r"] = emb.r;
  body["lambda"] = emb.lambda;
  body["C2"] = emb.C2;
  body["ends_total"] = es.ends.anchor.size();
  body["ends_sampled"] = emb.ends.size();
  body["j0"] = emb.j0;
  body["anchor_residual"] = emb.anchor_residual;
  body["realization_residual"] = emb.realization_residual;
  body["incomplete_ends"] = emb.incomplete_ends;
  body["failed_pairs"] = emb.failed_pairs;
  body["pairs"] = pair_rows;
  body["dist_min"] = emb.dist_min;
  body["dist_max"] = emb.dist_max;
  body["pass_factor2"] = emb.pass_factor2;
  body["fail_factor2"] = emb.fail_factor2;
  body["slack_abs"] = emb.slack_abs;
  body["solver_slack"] = emb.solver_slack;
  body["r_checked"] = emb.r_checked;
  body["r_warnings"] = emb.r_warnings;
  body["tree_comparison"] = json{{"pairs", bh.pairs},
                                 {"pass_lower", bh.pass_lower},
                                 {"pass_upper", bh.pass_upper},
                                 {"slack", bh.slack},
                                 {"worst_lower_margin", bh.worst_lower_margin},
                                 {"worst_upper_margin", bh.worst_upper_margin},
                                 {"violations", viol}};

  bool dist_ok = !emb.pairs.empty() && emb.dist_min > 0 &&
                 std::isfinite(emb.dist_max);
  body["checks"] =
      json{{"tree_comparison_two_sided", bh.violations.empty()},
           {"anchor_identity",
            emb.anchor_residual <= cfg.tolerance("anchor_residual", 1e-8)},
           {"ends_complete", emb.incomplete_ends == 0},
           {"pairs_complete", emb.failed_pairs == 0},
           {"distortion_finite", dist_ok},
           {"factor2_within_slack", emb.fail_factor2 == 0}};

  char line[220];
  std::snprintf(line, sizeof line,
                "%zu ends realized at lambda %.3g; distortion range "
                "[%.3g, %.3g] over %zu pairs, %d tree-side pairs clean\n",
                emb.ends.size(), emb.lambda, emb.dist_min, emb.dist_max,
                emb.pairs.size(), bh.pairs - (int)bh.violations.size());
  summary = line;
  return body;
}

json cmd_cover(const ExperimentConfig& cfg, std::string& summary) {
  auto es = embed_setup(cfg);
  std::vector<std::pair<Rat, Rat>> region_def;
  for (int j = 0; j < es.frameM.nvars; ++j)
    region_def.push_back({es.p[j] - make_rat(1, 4), es.p[j] + make_rat(1, 4)});
  auto region_box = cfg.has("region_box")
                        ? resolve_box(cfg, "region_box", es.frameM.nvars,
                                      Rat(0), Rat(1))
                        : region_def;
  auto region = sample_box_cloud(region_box,
                                 (int)cfg.integer("region_resolution", 6),
                                 cfg.integer("max_points", 2000000));
  const int iterations = (int)cfg.integer("iterations", 8);
  const double radius = cfg.num("cover_radius", 0.35);
  auto curve = coverage_experiment(region, es.run.cloud, es.cc, es.ends,
                                   es.run.G, es.frameM, iterations, radius,
                                   embed_budget(cfg, 16));

  bool growing = curve.fraction.size() > 1;
  for (size_t i = 1; i < std::min<size_t>(5, curve.fraction.size()); ++i)
    if (curve.fraction[i] <= curve.fraction[i - 1]) growing = false;
  double final_frac = curve.fraction.empty() ? 0 : curve.fraction.back();

  json body;
  body["model"] = es.run.G.name;
  body["frame"] = es.frame_label;
  body["point"] = rat_strings(es.p);
  body["region_points"] = region.points.size();
  body["iterations"] = iterations;
  body["cover_radius"] = radius;
  body["fraction"] = curve.fraction;
  body["anchors"] = curve.anchors;
  body["checks"] = json{{"coverage_strictly_grows", growing},
                        {"coverage_exceeds_half", final_frac > 0.5}};

  char line[200];
  std::snprintf(line, sizeof line,
                "%zu region points, %zu rounds: covered %.3f\n",
                region.points.size(), curve.anchors.size(), final_frac);
  summary = line;
  return body;
}

}  // namespace

bool ExperimentConfig::has(const std::string& key) const {
  return raw.contains(key);
}

std::string ExperimentConfig::str(const std::string& key,
                                  const std::string& fallback) const {
  return raw.contains(key) ? raw.at(key).get<std::string>() : fallback;
}

std::string ExperimentConfig::require_str(const std::string& key) const {
  if (!raw.contains(key))
    throw ConfigError("config key '" + key + "' is required");
  return raw.at(key).get<std::string>();
}

double ExperimentConfig::num(const std::string& key, double fallback) const {
  return raw.contains(key) ? raw.at(key).get<double>() : fallback;
}

long ExperimentConfig::integer(const std::string& key, long fallback) const {
  return raw.contains(key) ? raw.at(key).get<long>() : fallback;
}

bool ExperimentConfig::truthy(const std::string& key, bool fallback) const {
  return raw.contains(key) ? raw.at(key).get<bool>() : fallback;
}

std::vector<double> ExperimentConfig::num_list(
    const std::string& key, const std::vector<double>& fallback) const {
  if (!raw.contains(key)) return fallback;
  auto v = raw.at(key).get<std::vector<double>>();
  if (v.empty())
    throw ConfigError("config key '" + key + "' must not be empty");
  return v;
}

double ExperimentConfig::tolerance(const std::string& key,
                                   double fallback) const {
  if (!raw.contains("tolerances")) return fallback;
  const auto& t = raw.at("tolerances");
  return t.contains(key) ? t.at(key).get<double>() : fallback;
}

ExperimentConfig make_config(const nlohmann::json& j) {
  if (!j.is_object())
    throw ConfigError("the config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = schema().find(key);
    if (it == schema().end())
      throw ConfigError("unknown config key '" + key + "'");
    check_entry(key, value, it->second);
  }
  ExperimentConfig cfg;
  cfg.raw = j;
  return cfg;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "flag", "nilp",      "iso",    "group", "defect",
      "patchwork", "cantor", "embed", "cover", "report"};
  return names;
}

RunOutcome run_command(const std::string& command,
                       const ExperimentConfig& cfg) {
  RunOutcome out;
  const std::string out_dir = cfg.str("out", "out");

  if (command == "report") {
    std::vector<std::string> inputs;
    if (cfg.has("inputs"))
      inputs = cfg.raw.at("inputs").get<std::vector<std::string>>();
    auto rr = report_render(inputs, out_dir);
    json body;
    body["inputs"] = inputs;
    body["artifacts"] = rr.artifacts;
    out.report = report_envelope(command, cfg.raw, body);
    out.artifacts = rr.artifacts;
    out.summary = rr.summary;
    out.exit_code = 0;
    return out;
  }

  std::string summary;
  json body;
  if (command == "flag")
    body = cmd_flag(cfg, summary);
  else if (command == "nilp")
    body = cmd_nilp(cfg, summary);
  else if (command == "iso")
    body = cmd_iso(cfg, summary);
  else if (command == "group")
    body = cmd_group(cfg, summary);
  else if (command == "defect")
    body = cmd_defect(cfg, summary);
  else if (command == "patchwork")
    body = cmd_patchwork(cfg, summary);
  else if (command == "cantor")
    body = cmd_cantor(cfg, summary);
  else if (command == "embed")
    body = cmd_embed(cfg, summary);
  else if (command == "cover")
    body = cmd_cover(cfg, summary);
  else
    throw ConfigError("unknown command '" + command + "'");

  bool all_ok = true;
  std::string check_lines;
  if (body.contains("checks"))
    for (const auto& [name, v] : body.at("checks").items()) {
      bool ok = v.get<bool>();
      all_ok = all_ok && ok;
      check_lines += std::string("  [") + (ok ? "pass" : "FAIL") + "] " +
                     name + "\n";
    }

  out.report = report_envelope(command, cfg.raw, body);
  out.artifacts.push_back(write_report(out_dir, command, out.report));
  out.summary = summary + check_lines;
  out.exit_code = (cfg.truthy("strict", false) && !all_ok) ? 3 : 0;
  return out;
}

}  // namespace srgeo
