#pragma once

// NPY v1.0 reader/writer for 2-D little-endian float64 arrays.

#include <filesystem>
#include <string>
#include <string_view>

#include "l1prune/linalg.hpp"

namespace l1prune {

/// Serialises `m` as an NPY v1.0 byte string ('<f8', C order).
std::string encode_npy(const MatrixD& m);

/// Parses an NPY byte string. Throws FormatError (with byte offset) on a bad
/// magic, unsupported version, malformed header, dtype other than '<f8' or
/// truncated payload, and ShapeError for non-2-D or empty shapes.
MatrixD decode_npy(std::string_view bytes);

MatrixD load_array(const std::filesystem::path& path);
void save_array(const std::filesystem::path& path, const MatrixD& m);

}  // namespace l1prune
