#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quasispec/dos.hpp"
#include "quasispec/model.hpp"
#include "quasispec/tracemap.hpp"

namespace quasispec {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// 17 significant digits, round-trip exact for doubles.
std::string format_real(double v);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::span<const double> values);
  void add_row(std::initializer_list<double> values) { add_row(std::span<const double>(values.begin(), values.size())); }
  void add_text_row(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  std::size_t columns_;
  std::string text_;
};

/// Parses a numeric CSV with one header row into rows of doubles.
std::vector<std::vector<double>> parse_numeric_csv(std::string_view text);

std::string measure_csv(const AtomicMeasure& m);
AtomicMeasure parse_measure_csv(std::string_view text);
std::string interval_csv(const IntervalSet& s);
IntervalSet parse_interval_csv(std::string_view text);

/// Provenance for one CLI invocation. The hash covers everything except the
/// wall-clock duration, so it is reproducible.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> params;
  std::map<std::string, std::string> input_hashes;
  std::vector<std::string> outputs;
  nlohmann::json results = nlohmann::json::object();
  double duration_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string version;

  nlohmann::json to_json() const;
  std::string hash() const;
};

/// Writes each output through `files` (name -> content) into `dir`, plus a
/// sidecar `<name>.json` per output and a run-level `manifest.json`.
void emit_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files,
                  RunManifest& manifest);

/// Canonical encoding of the parameters that determine a box spectrum.
std::string spectrum_cache_key(const ModelParams& p, double tol);

/// On-disk cache of sorted eigenvalue lists, one file per content hash.
class EigenvalueCache {
 public:
  explicit EigenvalueCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path path_for(const std::string& key) const;
  std::optional<std::vector<double>> load(const std::string& key) const;
  void store(const std::string& key, std::span<const double> eigenvalues) const;

 private:
  std::filesystem::path dir_;
};

/// Parses a flat key=value file; '#' starts a comment.
std::map<std::string, std::string> parse_key_value(std::string_view text);

}  // namespace quasispec
