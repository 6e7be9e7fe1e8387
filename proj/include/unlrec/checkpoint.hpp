#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "unlrec/matrix.hpp"

namespace unlrec {

// Matrix file: header line "UNLREC1 <rows> <cols>\n" followed by row-major
// 64-bit little-endian floats. Writes are atomic (temp file then rename).
void write_matrix_file(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix_file(const std::string& path);

// Ordered key=value text files (artifact manifests, config echo).
using KvList = std::vector<std::pair<std::string, std::string>>;
void write_kv_file(const std::string& path, const KvList& kv);
KvList read_kv_file(const std::string& path);
std::string kv_get(const KvList& kv, const std::string& key);

std::uint64_t fnv1a_file(const std::string& path);

bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

}  // namespace unlrec
