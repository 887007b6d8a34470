#include "quasispec/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "quasispec/error.hpp"

namespace quasispec {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericFailure("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string format_real(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw NumericFailure("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw NumericFailure("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  add_text_row(header);
}

void CsvTable::add_row(std::span<const double> values) {
  require(values.size() == columns_, "CSV row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += format_real(values[i]);
  }
  text_ += '\n';
}

void CsvTable::add_text_row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_, "CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

std::string CsvTable::str() const { return text_; }

std::vector<std::vector<double>> parse_numeric_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  bool header = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::size_t cell = 0;
    while (cell <= line.size()) {
      std::size_t comma = line.find(',', cell);
      if (comma == std::string_view::npos) comma = line.size();
      const std::string token(line.substr(cell, comma - cell));
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw InvalidArgument("trailing characters");
      } catch (const std::exception&) {
        throw InvalidArgument("malformed CSV number '" + token + "'");
      }
      cell = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string measure_csv(const AtomicMeasure& m) {
  CsvTable t({"position", "weight"});
  for (const Atom& a : m.atoms()) t.add_row({a.position, a.weight});
  return t.str();
}

AtomicMeasure parse_measure_csv(std::string_view text) {
  std::vector<Atom> atoms;
  for (const auto& row : parse_numeric_csv(text)) {
    require(row.size() == 2, "measure CSV rows need position,weight");
    atoms.push_back({row[0], row[1]});
  }
  return AtomicMeasure(std::move(atoms));
}

std::string interval_csv(const IntervalSet& s) {
  CsvTable t({"a", "b"});
  for (const auto& [a, b] : s.intervals()) t.add_row({a, b});
  return t.str();
}

IntervalSet parse_interval_csv(std::string_view text) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& row : parse_numeric_csv(text)) {
    require(row.size() == 2, "interval CSV rows need a,b");
    iv.emplace_back(row[0], row[1]);
  }
  return IntervalSet(std::move(iv));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["params"] = params;
  j["input_hashes"] = input_hashes;
  j["outputs"] = outputs;
  j["results"] = results;
  j["seed"] = seed;
  j["version"] = version;
  j["duration_seconds"] = duration_seconds;
  return j;
}

std::string RunManifest::hash() const {
  nlohmann::json j = to_json();
  j.erase("duration_seconds");
  return sha256_hex(j.dump());
}

void emit_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files,
                  RunManifest& manifest) {
  manifest.outputs.clear();
  for (const auto& [name, content] : files) manifest.outputs.push_back(name);
  const std::string mhash = manifest.hash();
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) {
    write_file_atomic(dir / name, content);
    nlohmann::json side = manifest.to_json();
    side.erase("duration_seconds");
    side["manifest_hash"] = mhash;
    side["file"] = name;
    side["file_sha256"] = sha256_hex(content);
    write_file_atomic(dir / (name + ".json"), side.dump(2) + "\n");
  }
  nlohmann::json run = manifest.to_json();
  run["manifest_hash"] = mhash;
  write_file_atomic(dir / "manifest.json", run.dump(2) + "\n");
}

std::string spectrum_cache_key(const ModelParams& p, double tol) {
  return "spectrum1d;lambda=" + format_real(p.lambda) + ";omega=" + format_real(p.omega) +
         ";alpha=" + format_real(p.alpha) + ";n=" + std::to_string(p.n_sites) +
         ";start=" + std::to_string(p.start) + ";tol=" + format_real(tol);
}

std::filesystem::path EigenvalueCache::path_for(const std::string& key) const {
  return dir_ / (sha256_hex(key) + ".eig");
}

std::optional<std::vector<double>> EigenvalueCache::load(const std::string& key) const {
  const auto path = path_for(key);
  std::ifstream f(path);
  if (!f) return std::nullopt;
  std::string first;
  if (!std::getline(f, first) || first != "# " + key) return std::nullopt;
  std::vector<double> values;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    try {
      values.push_back(std::stod(line));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return values;
}

void EigenvalueCache::store(const std::string& key, std::span<const double> eigenvalues) const {
  std::string text = "# " + key + "\n";
  for (double v : eigenvalues) {
    text += format_real(v);
    text += '\n';
  }
  write_file_atomic(path_for(key), text);
}

std::map<std::string, std::string> parse_key_value(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace quasispec
