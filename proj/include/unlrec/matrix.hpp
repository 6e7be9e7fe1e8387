#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "unlrec/rng.hpp"

namespace unlrec {

// Row-major dense matrix of 64-bit floats. All numeric state in the library
// (embeddings, influence matrices, MLP weights) lives in these.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  DenseMatrix() = default;
  DenseMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  static DenseMatrix eye(int n);
  static DenseMatrix random_uniform(int r, int c, double lo, double hi, Rng& rng);

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
  double* row(int i) { return v.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * cols; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
  bool is_scalar() const { return rows == 1 && cols == 1; }
  double scalar() const { return v[0]; }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);      // a * b
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);   // a * b^T
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);   // a^T * b
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scaled(const DenseMatrix& a, double c);
void add_into(DenseMatrix& acc, const DenseMatrix& x, double c = 1.0);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double dot_all(const DenseMatrix& a, const DenseMatrix& b);

// Symmetric sparse matrix in CSR form: coordinate entries sorted by row with a
// row-offset index. Both (i,j) and (j,i) are stored. No self loops.
struct SparseSymEntry {
  int row;
  int col;
  double w;
};

class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(int dim) : dim_(dim), row_ptr_(dim + 1, 0) {}

  // Validates symmetry, index bounds and absence of self loops.
  static SparseSymMatrix from_entries(int dim, std::vector<SparseSymEntry> entries);

  // Inserts both orientations of each undirected (a, b, w) triple.
  static SparseSymMatrix from_undirected(int dim,
                                         const std::vector<std::pair<int, int>>& pairs,
                                         const std::vector<double>& weights);

  int dim() const { return dim_; }
  std::size_t nnz() const { return col_.size(); }  // stored entries, 2 per undirected edge

  int row_begin(int i) const { return row_ptr_[i]; }
  int row_end(int i) const { return row_ptr_[i + 1]; }
  int col_at(int k) const { return col_[k]; }
  double weight_at(int k) const { return w_[k]; }
  int degree(int i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  // out = A * x
  void multiply(const DenseMatrix& x, DenseMatrix& out) const;
  DenseMatrix multiply(const DenseMatrix& x) const;

  std::vector<SparseSymEntry> entries() const;  // sorted (row, col)

 private:
  int dim_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> w_;
};

}  // namespace unlrec
