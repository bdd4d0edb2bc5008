#include "qmon/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qmon/stats.hpp"

namespace qmon::io {

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      rows.push_back({m(i, j).real(), m(i, j).imag()});
  return rows;
}

Mat matrix_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(rows) * cols)
    throw ConfigError("matrix_from_json: wrong element count");
  Mat m(rows, cols);
  std::size_t idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c, ++idx)
      m(i, c) = Cplx(j[idx][0].get<double>(), j[idx][1].get<double>());
  return m;
}

namespace {

json vector_to_json(const RVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RVec vector_from_json(const json& j) {
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json operator_eigendata(const HermitianOperator& op) {
  return {{"eigenvalues", vector_to_json(op.eigenvalues)},
          {"eigenvectors", matrix_to_json(op.eigenvectors)}};
}

HermitianOperator operator_from(const Mat& matrix, const json& eigendata) {
  HermitianOperator op;
  op.dim = static_cast<int>(matrix.rows());
  op.matrix = matrix;
  op.eigenvalues = vector_from_json(eigendata.at("eigenvalues"));
  op.eigenvectors = matrix_from_json(eigendata.at("eigenvectors"), op.dim, op.dim);
  op.validate();
  return op;
}

}  // namespace

json system_to_json(const QuantumSystem& sys, const DensityMatrix& rho0, json metadata) {
  metadata["hamiltonian_eigendata"] = operator_eigendata(sys.hamiltonian);
  metadata["observable_eigendata"] = operator_eigendata(sys.observable);
  return {{"dim", sys.dim()},
          {"H", matrix_to_json(sys.hamiltonian.matrix)},
          {"O", matrix_to_json(sys.observable.matrix)},
          {"rho0", matrix_to_json(rho0.matrix)},
          {"metadata", std::move(metadata)}};
}

std::pair<QuantumSystem, DensityMatrix> system_from_json(const json& doc) {
  const int n = doc.at("dim").get<int>();
  const Mat h = matrix_from_json(doc.at("H"), n, n);
  const Mat o = matrix_from_json(doc.at("O"), n, n);

  DensityMatrix rho;
  rho.dim = n;
  rho.matrix = matrix_from_json(doc.at("rho0"), n, n);
  rho.validate();

  const json& meta = doc.value("metadata", json::object());
  HermitianOperator ham, obs;
  if (meta.contains("hamiltonian_eigendata") && meta.contains("observable_eigendata")) {
    ham = operator_from(h, meta.at("hamiltonian_eigendata"));
    obs = operator_from(o, meta.at("observable_eigendata"));
  } else {
    ham = spectral_decompose(h);
    obs = spectral_decompose(o);
  }
  return {make_system(std::move(ham), std::move(obs)), std::move(rho)};
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += header[i];
  }
  buf_ += '\n';
}

std::string CsvWriter::format(double v) {
  char tmp[32];
  std::snprintf(tmp, sizeof tmp, "%.17g", v);
  return tmp;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw ConfigError("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += cells[i];
  }
  buf_ += '\n';
}

void CsvWriter::row_values(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format(v));
  row(cells);
}

OutputSession::OutputSession(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

OutputSession::~OutputSession() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& p : written_) std::filesystem::remove(p, ec);
}

void OutputSession::write_text(const std::string& filename, const std::string& content) {
  const auto path = dir_ / filename;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  out.close();
  written_.push_back(path);
}

void OutputSession::write_json(const std::string& filename, const json& doc) {
  write_text(filename, doc.dump(2) + "\n");
}

void OutputSession::commit(json inputs) {
  json files = json::array();
  for (const auto& p : written_) {
    const std::string content = read_text(p);
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(stats::fnv1a(content)));
    files.push_back({{"file", p.filename().string()},
                     {"bytes", content.size()},
                     {"fnv1a64", hash}});
  }
  json manifest = {{"inputs", std::move(inputs)}, {"outputs", std::move(files)}};
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << manifest.dump(2) << "\n";
  committed_ = true;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qmon::io
