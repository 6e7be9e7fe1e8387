#include "unlrec/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unlrec/errors.hpp"

namespace unlrec {

DenseMatrix DenseMatrix::eye(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::random_uniform(int r, int c, double lo, double hi, Rng& rng) {
  DenseMatrix m(r, c);
  for (auto& x : m.v) x = rng.uniform(lo, hi);
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  DenseMatrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.cols)
    throw ShapeError("matmul_nt: inner dims " + std::to_string(a.cols) + " vs " +
                     std::to_string(b.cols));
  DenseMatrix out(a.rows, b.rows);
  const int kc = a.cols;
  const int k4 = kc & ~3;
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      int k = 0;
      for (; k < k4; k += 4) {
        s0 += arow[k] * brow[k];
        s1 += arow[k + 1] * brow[k + 1];
        s2 += arow[k + 2] * brow[k + 2];
        s3 += arow[k + 3] * brow[k + 3];
      }
      double s = (s0 + s1) + (s2 + s3);
      for (; k < kc; ++k) s += arow[k] * brow[k];
      orow[j] = s;
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows)
    throw ShapeError("matmul_tn: inner dims " + std::to_string(a.rows) + " vs " +
                     std::to_string(b.rows));
  DenseMatrix out(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = out.row(i);
      for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

static void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols));
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "add");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
  return out;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "sub");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.v[i];
  return out;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "hadamard");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

DenseMatrix scaled(const DenseMatrix& a, double c) {
  DenseMatrix out = a;
  for (auto& x : out.v) x *= c;
  return out;
}

void add_into(DenseMatrix& acc, const DenseMatrix& x, double c) {
  check_same_shape(acc, x, "add_into");
  for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += c * x.v[i];
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
  return m;
}

double dot_all(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "dot_all");
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

SparseSymMatrix SparseSymMatrix::from_entries(int dim, std::vector<SparseSymEntry> entries) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= dim || e.col < 0 || e.col >= dim)
      throw ShapeError("sparse entry out of range: (" + std::to_string(e.row) + "," +
                       std::to_string(e.col) + ") dim " + std::to_string(dim));
    if (e.row == e.col)
      throw ContractError("sparse self loop at " + std::to_string(e.row));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col)
      throw ContractError("duplicate sparse entry (" + std::to_string(entries[i].row) + "," +
                          std::to_string(entries[i].col) + ")");
  // symmetry: every (i,j) must have a matching (j,i) with equal weight
  auto find = [&](int r, int c) -> const SparseSymEntry* {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair<int, int>{r, c},
                               [](const SparseSymEntry& e, const std::pair<int, int>& key) {
                                 return e.row != key.first ? e.row < key.first
                                                           : e.col < key.second;
                               });
    if (it == entries.end() || it->row != r || it->col != c) return nullptr;
    return &*it;
  };
  for (const auto& e : entries) {
    const SparseSymEntry* t = find(e.col, e.row);
    if (t == nullptr || t->w != e.w)
      throw ContractError("asymmetric sparse entry (" + std::to_string(e.row) + "," +
                          std::to_string(e.col) + ")");
  }

  SparseSymMatrix m(dim);
  m.col_.reserve(entries.size());
  m.w_.reserve(entries.size());
  for (const auto& e : entries) m.row_ptr_[e.row + 1]++;
  for (int i = 0; i < dim; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  for (const auto& e : entries) {
    m.col_.push_back(e.col);
    m.w_.push_back(e.w);
  }
  return m;
}

SparseSymMatrix SparseSymMatrix::from_undirected(int dim,
                                                 const std::vector<std::pair<int, int>>& pairs,
                                                 const std::vector<double>& weights) {
  if (pairs.size() != weights.size())
    throw ShapeError("from_undirected: pairs/weights size mismatch");
  std::vector<SparseSymEntry> entries;
  entries.reserve(pairs.size() * 2);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    entries.push_back({pairs[k].first, pairs[k].second, weights[k]});
    entries.push_back({pairs[k].second, pairs[k].first, weights[k]});
  }
  return from_entries(dim, std::move(entries));
}

void SparseSymMatrix::multiply(const DenseMatrix& x, DenseMatrix& out) const {
  if (x.rows != dim_)
    throw ShapeError("spmm: adjacency dim " + std::to_string(dim_) + " vs rows " +
                     std::to_string(x.rows));
  if (out.rows != dim_ || out.cols != x.cols) out = DenseMatrix(dim_, x.cols);
  else out.fill(0.0);
  for (int i = 0; i < dim_; ++i) {
    double* orow = out.row(i);
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const double w = w_[k];
      const double* xrow = x.row(col_[k]);
      for (int j = 0; j < x.cols; ++j) orow[j] += w * xrow[j];
    }
  }
}

DenseMatrix SparseSymMatrix::multiply(const DenseMatrix& x) const {
  DenseMatrix out(dim_, x.cols);
  multiply(x, out);
  return out;
}

std::vector<SparseSymEntry> SparseSymMatrix::entries() const {
  std::vector<SparseSymEntry> out;
  out.reserve(col_.size());
  for (int i = 0; i < dim_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.push_back({i, col_[k], w_[k]});
  return out;
}

}  // namespace unlrec
