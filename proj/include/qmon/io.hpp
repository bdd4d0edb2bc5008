#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmon/hilbert.hpp"
#include "qmon/types.hpp"

namespace qmon::io {

using nlohmann::json;

// System document: {dim, H, O, rho0, metadata} with complex matrices stored
// row-major as [re, im] pairs. nlohmann serializes doubles with the shortest
// round-trip-safe representation, so floats survive a save/load cycle
// exactly. The eigendata of both operators rides along in metadata so that
// systems with refined bases (degenerate observables) reload verbatim.
json system_to_json(const QuantumSystem& sys, const DensityMatrix& rho0,
                    json metadata = json::object());
std::pair<QuantumSystem, DensityMatrix> system_from_json(const json& doc);

json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, int rows, int cols);

// CSV writing: comma separated, '.' decimal, header row, LF line endings,
// %.17g floats (deterministic for identical inputs).
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);
  const std::string& str() const { return buf_; }

  static std::string format(double v);

 private:
  std::size_t columns_;
  std::string buf_;
};

// Collects files written during one experiment; on failure every file
// written so far is removed, on success a manifest with fingerprints is
// emitted alongside them.
class OutputSession {
 public:
  explicit OutputSession(std::filesystem::path dir);
  ~OutputSession();

  const std::filesystem::path& dir() const { return dir_; }
  void write_text(const std::string& filename, const std::string& content);
  void write_json(const std::string& filename, const json& doc);

  // writes manifest.json (inputs + per-file fnv1a fingerprints) and disarms
  // the cleanup
  void commit(json inputs);

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  bool committed_ = false;
};

std::string read_text(const std::filesystem::path& path);

}  // namespace qmon::io
