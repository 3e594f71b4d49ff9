// Command-line front end: each subcommand assembles a JSON request from its
// flags (over an optional config file) and drives the shared library
// through the C surface only. Reports go to stdout, human summaries to
// stderr, so stdout stays machine-readable.
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srgeo/srgeo.h"

using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Bind {
  CLI::Option* opt;
  std::function<void(json&)> put;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-Riemannian tangent models, cube partitions, and "
               "end-space embeddings"};
  app.require_subcommand(1);

  // Option storage; one slot per flag, shared across subcommands that
  // reuse a name. Binds fire only for options the parser actually saw.
  struct {
    std::string config_path, out_dir, example, frame_file, model, family;
    std::string xi, eta, point, points, mode;
    long seed = 0, workers = 0, points_res = 0, depth = 0, resolution = 0;
    long region_resolution = 0, restarts = 0, pairs = 0, drop = 0;
    long iterations = 0, max_ends = 0, pair_cap = 0, s = 0, segments = 0;
    long starts = 0, geo_segments = 0;
    double tau = 0, r = 0, cover_radius = 0;
    bool strict = false;
    std::vector<std::string> inputs;
  } o;
  std::vector<Bind> binds;

  app.add_option("--config", o.config_path,
                 "JSON config file; flags override its keys");
  binds.push_back({app.add_option("--seed", o.seed, "base RNG seed"),
                   [&](json& j) { j["seed"] = o.seed; }});
  binds.push_back(
      {app.add_option("--workers", o.workers, "thread count, 0 = hardware"),
       [&](json& j) { j["workers"] = o.workers; }});
  binds.push_back(
      {app.add_flag("--strict", o.strict, "exit 3 when a data check fails"),
       [&](json& j) { j["strict"] = o.strict; }});
  binds.push_back(
      {app.add_option("--out", o.out_dir, "output directory for reports"),
       [&](json& j) { j["out"] = o.out_dir; }});

  auto bind_str = [&](CLI::App* cmd, const char* flag, std::string& var,
                      const char* key, const char* help) {
    binds.push_back({cmd->add_option(flag, var, help),
                     [&var, key](json& j) { j[key] = var; }});
  };
  auto bind_int = [&](CLI::App* cmd, const char* flag, long& var,
                      const char* key, const char* help) {
    binds.push_back({cmd->add_option(flag, var, help),
                     [&var, key](json& j) { j[key] = var; }});
  };
  auto bind_num = [&](CLI::App* cmd, const char* flag, double& var,
                      const char* key, const char* help) {
    binds.push_back({cmd->add_option(flag, var, help),
                     [&var, key](json& j) { j[key] = var; }});
  };
  auto bind_point = [&](CLI::App* cmd) {
    binds.push_back(
        {cmd->add_option("--point", o.point,
                         "base point, comma-separated rationals"),
         [&](json& j) { j["point"] = split_csv(o.point); }});
  };
  auto bind_frame = [&](CLI::App* cmd) {
    bind_str(cmd, "--example", o.example, "example", "bundled frame name");
    bind_str(cmd, "--frame-file", o.frame_file, "frame_file",
             "frame JSON file");
  };
  auto bind_model = [&](CLI::App* cmd) {
    bind_str(cmd, "--model", o.model, "model",
             "group model: heis1, heis2, e147, abelianN, or example name");
  };
  auto bind_partition = [&](CLI::App* cmd) {
    bind_int(cmd, "--resolution", o.resolution, "resolution",
             "grid points per axis");
    bind_int(cmd, "--depth", o.depth, "depth", "partition depth");
  };

  auto* c_flag = app.add_subcommand("flag", "growth flag over sample points");
  bind_frame(c_flag);
  bind_point(c_flag);
  binds.push_back({c_flag->add_option("--points", o.points,
                                      "\"grid\" for an interior sample grid"),
                   [&](json& j) { j["points"] = o.points; }});
  bind_int(c_flag, "--points-res", o.points_res, "points_res",
           "grid points per axis");

  auto* c_nilp =
      app.add_subcommand("nilp", "tangent group model at a point");
  bind_frame(c_nilp);
  bind_point(c_nilp);

  auto* c_iso = app.add_subcommand("iso", "stratified isomorphism search");
  bind_str(c_iso, "--family", o.family, "family", "algebra family (e147)");
  bind_str(c_iso, "--xi", o.xi, "xi", "first parameter, rational or decimal");
  bind_str(c_iso, "--eta", o.eta, "eta", "second parameter");
  bind_int(c_iso, "--restarts", o.restarts, "restarts", "search restarts");

  auto* c_group =
      app.add_subcommand("group", "group model constants and law sample");
  bind_model(c_group);
  bind_str(c_group, "--xi", o.xi, "xi", "family parameter for e147");

  auto* c_defect = app.add_subcommand(
      "defect", "endpoint gap between a frame and its group model");
  bind_frame(c_defect);
  bind_model(c_defect);
  bind_point(c_defect);
  bind_str(c_defect, "--mode", o.mode, "mode", "loop or transfer");
  bind_int(c_defect, "--pairs", o.pairs, "pairs", "control pairs per scale");
  bind_int(c_defect, "--drop", o.drop, "drop",
           "coarsest scales left out of the ratio window");
  bind_int(c_defect, "--segments", o.segments, "segments",
           "transcription pieces");
  bind_int(c_defect, "--starts", o.starts, "starts", "multi-start count");

  auto* c_patch =
      app.add_subcommand("patchwork", "nested cube partition of a cloud");
  bind_model(c_patch);
  bind_partition(c_patch);

  auto* c_cantor = app.add_subcommand(
      "cantor", "boundary-trimmed survivor set inside a cube");
  bind_model(c_cantor);
  bind_partition(c_cantor);
  bind_num(c_cantor, "--tau", o.tau, "tau", "relative trim width");
  bind_int(c_cantor, "--s", o.s, "s", "scaling exponent");

  auto* c_embed = app.add_subcommand(
      "embed", "end-space realization and distortion audit");
  bind_frame(c_embed);
  bind_model(c_embed);
  bind_point(c_embed);
  bind_partition(c_embed);
  bind_num(c_embed, "--tau", o.tau, "tau", "relative trim width");
  bind_num(c_embed, "--r", o.r, "r", "homothety scale");
  bind_int(c_embed, "--max-ends", o.max_ends, "max_ends", "ends sampled");
  bind_int(c_embed, "--pair-cap", o.pair_cap, "pair_cap",
           "manifold distance pair budget");
  bind_int(c_embed, "--pairs", o.pairs, "pairs",
           "tree-side comparison pairs");
  bind_int(c_embed, "--geo-segments", o.geo_segments, "geo_segments",
           "pieces per chain-edge geodesic");

  auto* c_cover =
      app.add_subcommand("cover", "greedy region covering by re-anchoring");
  bind_frame(c_cover);
  bind_model(c_cover);
  bind_point(c_cover);
  bind_partition(c_cover);
  bind_num(c_cover, "--tau", o.tau, "tau", "relative trim width");
  bind_int(c_cover, "--region-resolution", o.region_resolution,
           "region_resolution", "region grid points per axis");
  bind_int(c_cover, "--iterations", o.iterations, "iterations",
           "covering rounds");
  bind_num(c_cover, "--cover-radius", o.cover_radius, "cover_radius",
           "marking radius");
  bind_int(c_cover, "--max-ends", o.max_ends, "max_ends", "ends per round");

  auto* c_report = app.add_subcommand(
      "report", "render reports into summaries, tables, and plots");
  binds.push_back({c_report->add_option("inputs", o.inputs, "report files"),
                   [&](json& j) { j["inputs"] = o.inputs; }});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  json cfg = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open config file '%s'\n",
                   o.config_path.c_str());
      return 1;
    }
    cfg = json::parse(in, nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) {
      std::fprintf(stderr, "error: config file '%s' is not a JSON object\n",
                   o.config_path.c_str());
      return 1;
    }
  }
  for (const auto& b : binds)
    if (b.opt->count() > 0) b.put(cfg);

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  srgeo_ctx* ctx = srgeo_ctx_new();
  if (!ctx) {
    std::fprintf(stderr, "error: out of memory\n");
    return 2;
  }
  char* out = nullptr;
  int rc = srgeo_run(ctx, command.c_str(), cfg.dump().c_str(), &out);
  if (!out) {
    std::fprintf(stderr, "error: %s\n", srgeo_last_error(ctx));
    srgeo_ctx_free(ctx);
    return rc == 0 ? 2 : rc;
  }

  json res = json::parse(out);
  srgeo_free(out);
  srgeo_ctx_free(ctx);

  const std::string summary = res.value("summary", "");
  if (command == "report") {
    // the rendering command is for humans; summary is the payload
    std::fputs(summary.c_str(), stdout);
    for (const auto& a : res["artifacts"])
      std::fprintf(stderr, "wrote %s\n", a.get<std::string>().c_str());
  } else {
    std::fputs((res["report"].dump(2) + "\n").c_str(), stdout);
    std::fputs(summary.c_str(), stderr);
    for (const auto& a : res["artifacts"])
      std::fprintf(stderr, "wrote %s\n", a.get<std::string>().c_str());
  }
  return res.value("exit_code", rc);
}
