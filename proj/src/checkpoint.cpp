#include "unlrec/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "unlrec/errors.hpp"

namespace unlrec {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void write_matrix_file(const std::string& path, const DenseMatrix& m) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParseError("cannot write matrix file: " + tmp);
    out << "UNLREC1 " << m.rows << " " << m.cols << "\n";
    out.write(reinterpret_cast<const char*>(m.v.data()),
              static_cast<std::streamsize>(m.v.size() * sizeof(double)));
    if (!out) throw ParseError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

DenseMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open matrix file: " + path);
  std::string magic;
  int rows = 0, cols = 0;
  in >> magic >> rows >> cols;
  if (magic != "UNLREC1" || rows < 0 || cols < 0)
    throw ParseError(path + ": bad matrix header");
  in.get();  // newline
  DenseMatrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.v.data()),
          static_cast<std::streamsize>(m.v.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != m.v.size() * sizeof(double))
    throw ParseError(path + ": truncated matrix payload");
  return m;
}

void write_kv_file(const std::string& path, const KvList& kv) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ParseError("cannot write file: " + tmp);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
  }
  std::filesystem::rename(tmp, path);
}

KvList read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  KvList kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path + ": line without '=': " + line);
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

std::string kv_get(const KvList& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  throw ParseError("missing key: " + key);
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

}  // namespace unlrec
