#pragma once

#include <memory>
#include <vector>

#include "unlrec/matrix.hpp"

namespace unlrec {

using ValueId = int;

// Reverse-mode gradient tape over the fixed primitive set the training losses
// need. Nodes are recorded in evaluation order, which is also a topological
// order, so backward() is a single reverse sweep. Single-writer: one training
// step builds and consumes one tape on one thread.
class GradientTape {
 public:
  enum class Op {
    kLeaf,
    kSpmm,          // sparse * dense
    kMatmul,        // a * b
    kMatmulNT,      // a * b^T
    kAdd,
    kSub,
    kMul,           // elementwise
    kScale,         // constant scalar
    kAddRowVec,     // broadcast 1 x c over rows
    kRowScale,      // broadcast r x 1 over columns
    kGatherRows,
    kTranspose,
    kRowwiseDot,    // -> r x 1
    kRowNormalize,  // rows to unit L2 norm, zero rows stay zero
    kLeakyRelu,
    kLogSigmoid,
    kLogsumexpRows,  // -> r x 1
    kDiag,           // square -> r x 1
    kSum,            // -> 1 x 1
  };

  ValueId constant(DenseMatrix m) { return push_leaf(std::move(m), false); }
  ValueId trainable(DenseMatrix m) { return push_leaf(std::move(m), true); }

  // The adjacency must stay alive for the lifetime of the tape; use
  // own_sparse() for matrices built on the fly (dropped views, simulated IDMs).
  ValueId spmm(const SparseSymMatrix& a, ValueId x);
  const SparseSymMatrix& own_sparse(SparseSymMatrix m);

  ValueId matmul(ValueId a, ValueId b);
  ValueId matmul_nt(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  ValueId sub(ValueId a, ValueId b);
  ValueId mul(ValueId a, ValueId b);
  ValueId scale(ValueId a, double c);
  ValueId add_rowvec(ValueId a, ValueId v);
  ValueId row_scale(ValueId a, ValueId w);
  ValueId gather_rows(ValueId a, std::vector<int> idx);
  ValueId transposed(ValueId a);
  ValueId rowwise_dot(ValueId a, ValueId b);
  ValueId row_normalize(ValueId a);
  ValueId leaky_relu(ValueId a, double neg_slope);
  ValueId log_sigmoid(ValueId a);
  ValueId logsumexp_rows(ValueId a);
  ValueId diag(ValueId a);
  ValueId sum(ValueId a);

  const DenseMatrix& value(ValueId id) const { return nodes_[id].value; }
  double scalar(ValueId id) const;

  // Populates gradients for every trainable leaf reachable from `loss`.
  // `loss` must be a 1x1 node.
  void backward(ValueId loss);

  bool has_grad(ValueId id) const { return !nodes_[id].grad.v.empty(); }
  const DenseMatrix& grad(ValueId id) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::kLeaf;
    DenseMatrix value;
    DenseMatrix grad;  // lazily allocated in backward
    ValueId a = -1, b = -1;
    double c = 0.0;                       // scale factor / leaky slope
    const SparseSymMatrix* sparse = nullptr;
    std::vector<int> idx;                 // gather indices
    bool trainable = false;
    bool needs_grad = false;
  };

  ValueId push_leaf(DenseMatrix m, bool trainable);
  ValueId push(Node n);
  Node& node(ValueId id) { return nodes_[id]; }
  DenseMatrix& grad_buf(ValueId id);

  std::vector<Node> nodes_;
  std::vector<std::unique_ptr<SparseSymMatrix>> owned_sparse_;
};

}  // namespace unlrec
