#pragma once

// Matrix text format shared by every module:
//
//   n
//   a11 a12 ... a1n
//   ...
//   an1 an2 ... ann
//
// Entries are written with 17 significant digits and separated by single
// spaces; row i of the matrix is line i+1.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "geoflow/lie.hpp"

namespace geoflow {

void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

/// 17-significant-digit rendering used in every output file.
std::string format_double(double v);

}  // namespace geoflow
