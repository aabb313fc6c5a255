#include "trekit/matrix_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace trekit {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string matrix_to_json(const CMatrix& m) {
  std::ostringstream out;
  out << "{\"dim\": " << m.rows() << ", \"entries\": [";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << (i ? ", [" : "[");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? ", [" : "[") << format_double(m(i, j).real()) << ", "
          << format_double(m(i, j).imag()) << "]";
    }
    out << "]";
  }
  out << "]}";
  return out.str();
}

CMatrix matrix_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries")) {
    throw ParseError("matrix file must be an object with \"dim\" and \"entries\"");
  }
  if (!j["dim"].is_number_integer() || j["dim"].get<long>() < 1) {
    throw ParseError("\"dim\" must be a positive integer");
  }
  const long n = j["dim"].get<long>();
  const auto& rows = j["entries"];
  if (!rows.is_array() || static_cast<long>(rows.size()) != n) {
    throw ParseError("\"entries\" must be an array of dim rows");
  }
  CMatrix m(n, n);
  for (long i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<long>(row.size()) != n) {
      throw ParseError("row " + std::to_string(i) + " must have dim entries");
    }
    for (long k = 0; k < n; ++k) {
      const auto& cell = row[k];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
          !cell[1].is_number()) {
        throw ParseError("entry (" + std::to_string(i) + "," + std::to_string(k) +
                         ") must be [re, im]");
      }
      m(i, k) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

void write_matrix_file(const std::filesystem::path& path, const CMatrix& m) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open " + path.string() + " for writing");
  }
  out << matrix_to_json(m) << "\n";
}

CMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return matrix_from_json(buf.str());
}

HermitianMatrix read_hermitian_file(const std::filesystem::path& path,
                                    double hermiticity_tol) {
  return HermitianMatrix(read_matrix_file(path), hermiticity_tol);
}

PsdMatrix read_psd_file(const std::filesystem::path& path, double hermiticity_tol) {
  return PsdMatrix(read_matrix_file(path), hermiticity_tol);
}

DensityMatrix read_density_file(const std::filesystem::path& path,
                                double hermiticity_tol) {
  return DensityMatrix(read_matrix_file(path), hermiticity_tol);
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trekit
