#include "srgeo/srgeo.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "flag.hpp"
#include "isosearch.hpp"
#include "models.hpp"
#include "nilpot.hpp"
#include "runner.hpp"

using nlohmann::json;

struct srgeo_ctx {
  std::string err;
};

struct srgeo_frame {
  srgeo::Frame frame;
};

namespace {

char* dup_text(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// ConfigError and request-shaped JSON problems are the caller's fault;
// everything else that throws is a math-layer failure.
template <typename Fn>
int guarded(srgeo_ctx* ctx, Fn&& fn) {
  if (!ctx) return SRGEO_ERR_CONFIG;
  ctx->err.clear();
  try {
    return fn();
  } catch (const srgeo::ConfigError& e) {
    ctx->err = e.what();
    return SRGEO_ERR_CONFIG;
  } catch (const json::exception& e) {
    ctx->err = e.what();
    return SRGEO_ERR_CONFIG;
  } catch (const std::exception& e) {
    ctx->err = e.what();
    return SRGEO_ERR_MATH;
  }
}

json parse_or_throw(const char* text, const char* what) {
  if (!text)
    throw srgeo::ConfigError(std::string(what) + " must not be NULL");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw srgeo::ConfigError(std::string(what) + " is not valid JSON");
  return j;
}

std::vector<srgeo::Rat> point_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw srgeo::ConfigError(std::string(what) +
                             " must be an array of coordinate strings");
  std::vector<std::string> coords;
  for (const auto& c : j) {
    if (!c.is_string())
      throw srgeo::ConfigError(std::string(what) +
                               " must be an array of coordinate strings");
    coords.push_back(c.get<std::string>());
  }
  try {
    return srgeo::rat_point(coords);
  } catch (const std::exception& e) {
    throw srgeo::ConfigError(std::string(what) + ": " + e.what());
  }
}

int emit(char** out_json, const json& j) {
  *out_json = dup_text(srgeo::canonical_json(j));
  return *out_json ? SRGEO_OK : SRGEO_ERR_MATH;
}

}  // namespace

extern "C" {

const char* srgeo_version(void) { return srgeo::kVersion; }

srgeo_ctx* srgeo_ctx_new(void) { return new (std::nothrow) srgeo_ctx; }

void srgeo_ctx_free(srgeo_ctx* ctx) { delete ctx; }

const char* srgeo_last_error(const srgeo_ctx* ctx) {
  return ctx ? ctx->err.c_str() : "NULL context";
}

void srgeo_free(char* text) { std::free(text); }

srgeo_frame* srgeo_frame_bundled(srgeo_ctx* ctx, const char* name) {
  srgeo_frame* out = nullptr;
  guarded(ctx, [&] {
    if (!name) throw srgeo::ConfigError("name must not be NULL");
    if (!srgeo::is_bundled(name))
      throw srgeo::ConfigError("unknown bundled frame '" + std::string(name) +
                               "'");
    out = new srgeo_frame{srgeo::bundled_example(name).frame};
    return SRGEO_OK;
  });
  return out;
}

srgeo_frame* srgeo_frame_parse(srgeo_ctx* ctx, const char* json_text) {
  srgeo_frame* out = nullptr;
  guarded(ctx, [&] {
    json j = parse_or_throw(json_text, "frame JSON");
    try {
      out = new srgeo_frame{srgeo::frame_from_json(j)};
    } catch (const std::exception& e) {
      throw srgeo::ConfigError(std::string("frame JSON: ") + e.what());
    }
    return SRGEO_OK;
  });
  return out;
}

void srgeo_frame_free(srgeo_frame* frame) { delete frame; }

int srgeo_frame_formulas(srgeo_ctx* ctx, const srgeo_frame* frame,
                         char** out_json) {
  return guarded(ctx, [&] {
    if (!frame || !out_json)
      throw srgeo::ConfigError("frame and out_json must not be NULL");
    json arr = json::array();
    for (const auto& f : frame->frame.fields)
      arr.push_back(srgeo::field_formula(f));
    return emit(out_json, arr);
  });
}

int srgeo_frame_to_json(srgeo_ctx* ctx, const srgeo_frame* frame,
                        char** out_json) {
  return guarded(ctx, [&] {
    if (!frame || !out_json)
      throw srgeo::ConfigError("frame and out_json must not be NULL");
    return emit(out_json, srgeo::frame_to_json(frame->frame));
  });
}

int srgeo_equiregular(srgeo_ctx* ctx, const srgeo_frame* frame,
                      const char* points_json, char** out_json) {
  return guarded(ctx, [&] {
    if (!frame || !out_json)
      throw srgeo::ConfigError("frame and out_json must not be NULL");
    json pj = parse_or_throw(points_json, "points JSON");
    if (!pj.is_array() || pj.empty())
      throw srgeo::ConfigError("points JSON must be a non-empty array");
    std::vector<std::vector<srgeo::Rat>> pts;
    for (const auto& row : pj) {
      auto p = point_from_json(row, "points JSON entry");
      if ((int)p.size() != frame->frame.nvars)
        throw srgeo::ConfigError("each point needs " +
                                 std::to_string(frame->frame.nvars) +
                                 " coordinates");
      pts.push_back(std::move(p));
    }
    auto v = srgeo::equiregular_check(frame->frame, pts);
    json out;
    out["equiregular"] = v.equiregular;
    if (v.equiregular) {
      out["growth"] = v.growth.dims;
      out["hausdorff_dimension"] = srgeo::hausdorff_dimension(v.growth);
    } else {
      out["witness_a"] = v.witness_a;
      out["witness_b"] = v.witness_b;
      out["growth_a"] = v.growth_a.dims;
      out["growth_b"] = v.growth_b.dims;
    }
    return emit(out_json, out);
  });
}

int srgeo_nilpotentize(srgeo_ctx* ctx, const srgeo_frame* frame,
                       const char* point_json, char** out_json) {
  return guarded(ctx, [&] {
    if (!frame || !out_json)
      throw srgeo::ConfigError("frame and out_json must not be NULL");
    auto p = point_from_json(parse_or_throw(point_json, "point JSON"),
                             "point JSON");
    if ((int)p.size() != frame->frame.nvars)
      throw srgeo::ConfigError("the point needs " +
                               std::to_string(frame->frame.nvars) +
                               " coordinates");
    auto nz = srgeo::nilpotentize(frame->frame, p);
    auto fp = srgeo::invariant_prescreen(nz.algebra);
    json out;
    out["growth"] = nz.chart.growth.dims;
    out["weights"] = nz.chart.wts;
    out["algebra"] = srgeo::algebra_to_json(nz.algebra);
    out["fingerprint"] = json{{"strata", fp.strata},
                              {"lcs_dims", fp.lcs_dims},
                              {"pairing_rank", fp.pairing_rank},
                              {"center_dim", fp.center_dim},
                              {"text", srgeo::fingerprint_str(fp)}};
    return emit(out_json, out);
  });
}

int srgeo_iso_search(srgeo_ctx* ctx, const char* algebra1_json,
                     const char* algebra2_json, int restarts, double tol,
                     unsigned long long seed, int workers, char** out_json) {
  return guarded(ctx, [&] {
    if (!out_json) throw srgeo::ConfigError("out_json must not be NULL");
    if (restarts < 1) throw srgeo::ConfigError("restarts must be >= 1");
    if (!(tol > 0)) throw srgeo::ConfigError("tol must be positive");
    srgeo::GradedLieAlgebra g1, g2;
    try {
      g1 = srgeo::algebra_from_json(
          parse_or_throw(algebra1_json, "algebra 1 JSON"));
      g2 = srgeo::algebra_from_json(
          parse_or_throw(algebra2_json, "algebra 2 JSON"));
    } catch (const srgeo::ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw srgeo::ConfigError(std::string("algebra JSON: ") + e.what());
    }
    auto res = srgeo::stratified_iso_search(g1, g2, restarts, tol, seed,
                                            workers);
    json out;
    out["verdict"] = srgeo::iso_verdict_str(res.verdict);
    out["residual"] = res.residual;
    out["exact_witness"] = res.exact;
    out["best_restart"] = res.best_restart;
    if (res.verdict == srgeo::IsoVerdict::True)
      out["witness"] = res.witness_float;
    return emit(out_json, out);
  });
}

int srgeo_run(srgeo_ctx* ctx, const char* command, const char* config_json,
              char** out_json) {
  int strict_rc = SRGEO_OK;
  int rc = guarded(ctx, [&] {
    if (!command || !out_json)
      throw srgeo::ConfigError("command and out_json must not be NULL");
    *out_json = nullptr;
    json cj = config_json && *config_json
                  ? parse_or_throw(config_json, "config JSON")
                  : json::object();
    auto cfg = srgeo::make_config(cj);
    auto outcome = srgeo::run_command(command, cfg);
    json wrapper;
    wrapper["report"] = outcome.report;
    wrapper["artifacts"] = outcome.artifacts;
    wrapper["summary"] = outcome.summary;
    wrapper["exit_code"] = outcome.exit_code;
    if (outcome.exit_code == 3) strict_rc = SRGEO_CHECKS_FAILED;
    return emit(out_json, wrapper);
  });
  return rc == SRGEO_OK ? strict_rc : rc;
}

}  // extern "C"
