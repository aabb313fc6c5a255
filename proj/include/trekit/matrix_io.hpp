#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "trekit/operator_core.hpp"

namespace trekit {

/// Serializes a matrix as {"dim": n, "entries": [[[re,im], ...], ...]},
/// row-major, every float printed with 17 significant digits so a re-read
/// recovers bit-identical values.
std::string matrix_to_json(const CMatrix& m);

/// Parses the matrix format; throws ParseError on malformed input.
CMatrix matrix_from_json(const std::string& text);

void write_matrix_file(const std::filesystem::path& path, const CMatrix& m);
CMatrix read_matrix_file(const std::filesystem::path& path);

HermitianMatrix read_hermitian_file(const std::filesystem::path& path,
                                    double hermiticity_tol = 1e-12);
PsdMatrix read_psd_file(const std::filesystem::path& path,
                        double hermiticity_tol = 1e-12);
DensityMatrix read_density_file(const std::filesystem::path& path,
                                double hermiticity_tol = 1e-12);

/// FNV-1a 64-bit digest, hex-encoded; used for config echoes and per-trial
/// input digests in reports.
std::string fnv1a_hex(std::string_view data);

}  // namespace trekit
