// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "etaplab/matrix.hpp"

namespace etaplab {

// Golden matrix exchange format, bit-exact:
//   4 magic bytes "ATNM"
//   u32 little-endian rows, u32 little-endian cols
//   rows*cols binary32 little-endian values, row-major
// Values are narrowed to binary32 on save.
void save_matrix(std::ostream& out, const Matrix& m);
void save_matrix(const std::string& path, const Matrix& m);

// Throws std::runtime_error on wrong magic, truncated payload, or zero dims.
Matrix load_matrix(std::istream& in);
Matrix load_matrix(const std::string& path);

} // namespace etaplab
