#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace srgeo {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string canonical_json(const nlohmann::json& j) {
  return j.dump(2) + "\n";
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a64(canonical_json(config)));
  return buf;
}

nlohmann::json report_envelope(const std::string& command,
                               const nlohmann::json& config,
                               nlohmann::json body) {
  nlohmann::json env;
  env["command"] = command;
  env["version"] = kVersion;
  env["config_hash"] = config_hash(config);
  env["config"] = config;
  env["body"] = std::move(body);
  return env;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string write_report(const std::string& out_dir, const std::string& name,
                         const nlohmann::json& envelope) {
  std::filesystem::create_directories(out_dir);
  std::string path = out_dir + "/" + name + ".json";
  write_text_file(path, canonical_json(envelope));

  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ",
                std::gmtime(&now));
  nlohmann::json meta;
  meta["report"] = name + ".json";
  meta["written_at"] = stamp;
  write_text_file(out_dir + "/" + name + ".meta.json", canonical_json(meta));
  return path;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i)
    out += (i ? "," : "") + header[i];
  out += "\n";
  for (auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  }
  return out;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

constexpr int kW = 640, kH = 400, kPad = 56;

std::string svg_head(const std::string& title) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       std::to_string(kW) + "\" height=\"" + std::to_string(kH) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(kW / 2) +
       "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
       "font-size=\"14\">" +
       title + "</text>\n";
  return s;
}

double nice(double v) { return std::isfinite(v) ? v : 0; }

}  // namespace

std::string svg_curve(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  std::string s = svg_head(title);
  if (!xs.empty() && xs.size() == ys.size()) {
    double x0 = xs[0], x1 = xs[0], y0 = ys[0], y1 = ys[0];
    for (size_t i = 0; i < xs.size(); ++i) {
      x0 = std::min(x0, nice(xs[i]));
      x1 = std::max(x1, nice(xs[i]));
      y0 = std::min(y0, nice(ys[i]));
      y1 = std::max(y1, nice(ys[i]));
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) {
      return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad);
    };
    auto py = [&](double y) {
      return kH - kPad - (y - y0) / (y1 - y0) * (kH - 2 * kPad);
    };
    s += "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i)
      s += fmt_num(px(nice(xs[i]))) + "," + fmt_num(py(nice(ys[i]))) + " ";
    s += "\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
      s += "<circle cx=\"" + fmt_num(px(nice(xs[i]))) + "\" cy=\"" +
           fmt_num(py(nice(ys[i]))) + "\" r=\"3\" fill=\"black\"/>\n";
    s += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"" +
         std::to_string(kH - 12) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"12\">" +
         x_label + " [" + fmt_num(x0) + ", " + fmt_num(x1) + "]</text>\n";
    s += "<text x=\"16\" y=\"" + std::to_string(kH / 2) +
         "\" font-family=\"monospace\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " +
         std::to_string(kH / 2) + ")\" text-anchor=\"middle\">" + y_label +
         " [" + fmt_num(y0) + ", " + fmt_num(y1) + "]</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string svg_histogram(const std::string& title,
                          const std::vector<double>& values, int bins) {
  std::string s = svg_head(title);
  if (!values.empty() && bins > 0) {
    double v0 = values[0], v1 = values[0];
    for (double v : values) {
      v0 = std::min(v0, nice(v));
      v1 = std::max(v1, nice(v));
    }
    if (v1 == v0) v1 = v0 + 1;
    std::vector<int> count(bins, 0);
    for (double v : values) {
      int b = (int)((nice(v) - v0) / (v1 - v0) * bins);
      count[std::min(b, bins - 1)]++;
    }
    int peak = *std::max_element(count.begin(), count.end());
    double bw = double(kW - 2 * kPad) / bins;
    for (int b = 0; b < bins; ++b) {
      double h = peak ? double(count[b]) / peak * (kH - 2 * kPad) : 0;
      s += "<rect x=\"" + fmt_num(kPad + b * bw) + "\" y=\"" +
           fmt_num(kH - kPad - h) + "\" width=\"" + fmt_num(bw - 1) +
           "\" height=\"" + fmt_num(h) +
           "\" fill=\"steelblue\" stroke=\"black\"/>\n";
    }
    s += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"" +
         std::to_string(kH - 12) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"12\">range [" +
         fmt_num(v0) + ", " + fmt_num(v1) + "], n=" +
         std::to_string(values.size()) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

namespace {

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void render_checks(const nlohmann::json& env, std::string& summary) {
  if (!env.contains("body") || !env["body"].contains("checks")) return;
  int pass = 0, total = 0;
  std::string lines;
  for (auto& [k, v] : env["body"]["checks"].items()) {
    bool ok = v.get<bool>();
    ++total;
    pass += ok;
    lines += std::string("  [") + (ok ? "pass" : "FAIL") + "] " + k + "\n";
  }
  summary += "  checks: " + std::to_string(pass) + "/" +
             std::to_string(total) + " passed\n" + lines;
}

}  // namespace

RenderResult report_render(const std::vector<std::string>& report_paths,
                           const std::string& out_dir) {
  RenderResult res;
  if (!report_paths.empty()) std::filesystem::create_directories(out_dir);
  for (auto& path : report_paths) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read report: " + path);
    nlohmann::json env;
    try {
      env = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("malformed report " + path + ": " +
                                  e.what());
    }
    if (!env.contains("command") || !env.contains("body"))
      throw std::invalid_argument("report missing envelope fields: " + path);
    std::string cmd = env["command"];
    std::string stem = stem_of(path);
    res.summary += cmd + " " + env.value("config_hash", "?") + " (" + path +
                   ")\n";
    render_checks(env, res.summary);
    const auto& body = env["body"];

    if (cmd == "embed" && body.contains("pairs")) {
      std::vector<std::vector<std::string>> rows;
      std::vector<double> ratios;
      for (auto& p : body["pairs"]) {
        rows.push_back({std::to_string(p["x"].get<int>()),
                        std::to_string(p["y"].get<int>()),
                        fmt_num(p["d_tree"].get<double>()),
                        fmt_num(p["dg_lo"].get<double>()),
                        fmt_num(p["dg_hi"].get<double>()),
                        fmt_num(p["dm_lo"].get<double>()),
                        fmt_num(p["dm_hi"].get<double>()),
                        p["ok"].get<bool>() ? "1" : "0"});
        double glo = p["dg_lo"].get<double>(), ghi = p["dg_hi"].get<double>();
        if (p["ok"].get<bool>() && glo > 0)
          ratios.push_back((p["dm_lo"].get<double>() +
                            p["dm_hi"].get<double>()) /
                           (glo + ghi));
      }
      std::string csv = csv_table(
          {"x", "y", "d_tree", "dg_lo", "dg_hi", "dm_lo", "dm_hi", "ok"},
          rows);
      std::string cp = out_dir + "/" + stem + "_pairs.csv";
      write_text_file(cp, csv);
      res.artifacts.push_back(cp);
      std::string sp = out_dir + "/" + stem + "_distortion.svg";
      write_text_file(sp, svg_histogram("image to model distance ratio",
                                        ratios, 16));
      res.artifacts.push_back(sp);
    } else if (cmd == "cover" && body.contains("fraction")) {
      std::vector<std::vector<std::string>> rows;
      std::vector<double> xs, ys;
      int i = 0;
      for (auto& v : body["fraction"]) {
        rows.push_back({std::to_string(i), fmt_num(v.get<double>())});
        xs.push_back(i);
        ys.push_back(v.get<double>());
        ++i;
      }
      std::string cp = out_dir + "/" + stem + "_coverage.csv";
      write_text_file(cp, csv_table({"iteration", "fraction"}, rows));
      res.artifacts.push_back(cp);
    } else if (cmd == "defect" && body.contains("rows")) {
      std::vector<std::vector<std::string>> rows;
      std::vector<double> xs, ys;
      for (auto& r : body["rows"]) {
        rows.push_back({fmt_num(r["scale"].get<double>()),
                        fmt_num(r["length"].get<double>()),
                        fmt_num(r["defect_lo"].get<double>()),
                        fmt_num(r["defect_hi"].get<double>()),
                        fmt_num(r["ratio"].get<double>())});
        xs.push_back(r["length"].get<double>());
        ys.push_back(r["ratio"].get<double>());
      }
      std::string cp = out_dir + "/" + stem + "_defect.csv";
      write_text_file(
          cp, csv_table({"scale", "length", "defect_lo", "defect_hi",
                         "ratio"},
                        rows));
      res.artifacts.push_back(cp);
      std::string sp = out_dir + "/" + stem + "_ratio.svg";
      write_text_file(sp, svg_curve("gap over length to the exponent",
                                    "length", "ratio", xs, ys));
      res.artifacts.push_back(sp);
    }
  }
  return res;
}

}  // namespace srgeo
