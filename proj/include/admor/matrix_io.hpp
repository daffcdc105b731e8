#pragma once

// On-disk matrix exchange. Binary container layout:
//   bytes 0..7   magic "ADMORMAT"
//   bytes 8..15  rows, unsigned 64-bit little-endian
//   bytes 16..23 cols, unsigned 64-bit little-endian
//   then rows*cols IEEE-754 doubles, little-endian, row-major.
// CSV export uses %.17g so doubles round-trip exactly.

#include "admor/linalg.hpp"

#include <filesystem>

namespace admor {

void write_matrix(const std::filesystem::path& file, const Matrix& M);
Matrix read_matrix(const std::filesystem::path& file);

void write_matrix_csv(const std::filesystem::path& file, const Matrix& M);
Matrix read_matrix_csv(const std::filesystem::path& file);

}  // namespace admor
