#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frequalize/grid.hpp"

namespace frequalize {

using Json = nlohmann::json;

/// Typed, path-aware access to a JSON config object. Every failure is an
/// InputError naming the JSON path (e.g. "/grid/points_per_axis").
class ConfigNode {
public:
  ConfigNode(const Json& json, std::string path);

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] ConfigNode child(const std::string& key) const;
  /// Empty object when the key is absent.
  [[nodiscard]] ConfigNode child_or_empty(const std::string& key) const;

  [[nodiscard]] double number(const std::string& key, std::optional<double> fallback = {}) const;
  /// Accepts a number or the string "inf".
  [[nodiscard]] double extended(const std::string& key, std::optional<double> fallback = {}) const;
  [[nodiscard]] long integer(const std::string& key, std::optional<long> fallback = {}) const;
  [[nodiscard]] std::uint64_t unsigned_integer(const std::string& key,
                                               std::optional<std::uint64_t> fallback = {}) const;
  [[nodiscard]] bool boolean(const std::string& key, std::optional<bool> fallback = {}) const;
  [[nodiscard]] std::string text(const std::string& key,
                                 std::optional<std::string> fallback = {}) const;
  [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
  [[nodiscard]] Vec3 vec3(const std::string& key, std::optional<Vec3> fallback = {}) const;

  /// Rejects keys outside `allowed`.
  void only(const std::vector<std::string>& allowed) const;

private:
  const Json* json_;
  std::string path_;
  [[nodiscard]] const Json* find(const std::string& key) const;
  [[nodiscard]] std::string at(const std::string& key) const { return path_ + "/" + key; }
};

/// Reads and parses a JSON file; errors name the file.
Json load_config(const std::filesystem::path& path);

/// grid {dim, box_length, points_per_axis}; missing keys take the given defaults.
TorusGrid parse_grid(const ConfigNode& node, int dim = 3, double box_length = 100.0,
                     int points = 32);

/// "t0:t1:n" (linear) or "t0:t1:n:log"; a JSON array of times; or an object
/// {t0, t1, n, log}.
std::vector<double> parse_times(const std::string& text);
std::vector<double> parse_times(const ConfigNode& parent, const std::string& key,
                                const std::vector<double>& fallback);

struct RunOptions {
  Json config = Json::object();
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  bool dump = false;
};

struct RunOutput {
  std::filesystem::path csv;
  std::filesystem::path summary;
  std::vector<std::filesystem::path> dumps;
  Json summary_json;
};

/// Partition-of-unity defects, reconstruction error and Bernstein ratio extremes.
RunOutput run_lp(const RunOptions& options);
/// Besov norm of a dumped or generated field.
RunOutput run_besov(const RunOptions& options);
/// Both sides of the frequency-localized decay inequality over a time grid.
RunOutput run_kernel(const RunOptions& options);
/// linear.mode = "gap" (spectral gap sweep) or "decay" (continuum decay table).
RunOutput run_linear(const RunOptions& options);
/// Nonlinear decay experiment.
RunOutput run_nonlinear(const RunOptions& options);

/// Merges summaries into one table of measured vs predicted exponents.
RunOutput run_report(const std::vector<std::filesystem::path>& summaries,
                     const std::filesystem::path& out);

/// Gaussian bump exp(-|x - c|^2 / (2 width^2)) centred in the box.
PhysicalField gaussian_field(const TorusGrid& grid, double width);

/// Writes text atomically enough for our purposes (truncate + write), creating
/// parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace frequalize
