// Deterministic artifact emission: canonical JSON reports carrying a config
// hash and the library version, wall-clock stamps kept in a sidecar file so
// report bytes depend only on inputs, plus CSV tables and small SVG plots.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace srgeo {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view s);

// Canonical byte form: sorted keys, two-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);

// 16 hex digits over the canonical form.
std::string config_hash(const nlohmann::json& config);

nlohmann::json report_envelope(const std::string& command,
                               const nlohmann::json& config,
                               nlohmann::json body);

void write_text_file(const std::string& path, const std::string& content);

// Writes <out_dir>/<name>.json canonically and <name>.meta.json with the
// timestamp; creates the directory. Returns the report path.
std::string write_report(const std::string& out_dir, const std::string& name,
                         const nlohmann::json& envelope);

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

std::string fmt_num(double v);

std::string svg_curve(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<double>& xs,
                      const std::vector<double>& ys);

std::string svg_histogram(const std::string& title,
                          const std::vector<double>& values, int bins);

struct RenderResult {
  std::string summary;                 // human text, one block per report
  std::vector<std::string> artifacts;  // derived CSV/SVG paths
};

// Derives tables and plots per report kind and aggregates check outcomes.
// Unreadable or shapeless input raises std::invalid_argument.
RenderResult report_render(const std::vector<std::string>& report_paths,
                           const std::string& out_dir);

}  // namespace srgeo
