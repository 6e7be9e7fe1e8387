#include "unlrec/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unlrec/errors.hpp"

namespace unlrec {

namespace {

double stable_log_sigmoid(double x) {
  // log(1/(1+e^-x)) without overflow on either tail
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

ValueId GradientTape::push_leaf(DenseMatrix m, bool trainable) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(m);
  n.trainable = trainable;
  n.needs_grad = trainable;
  return push(std::move(n));
}

ValueId GradientTape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<ValueId>(nodes_.size() - 1);
}

const SparseSymMatrix& GradientTape::own_sparse(SparseSymMatrix m) {
  owned_sparse_.push_back(std::make_unique<SparseSymMatrix>(std::move(m)));
  return *owned_sparse_.back();
}

ValueId GradientTape::spmm(const SparseSymMatrix& a, ValueId x) {
  Node n;
  n.op = Op::kSpmm;
  n.a = x;
  n.sparse = &a;
  n.value = a.multiply(value(x));
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::matmul(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.value = unlrec::matmul(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::matmul_nt(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kMatmulNT;
  n.a = a;
  n.b = b;
  n.value = unlrec::matmul_nt(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::add(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = unlrec::add(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::sub(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = unlrec::sub(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::mul(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.value = hadamard(value(a), value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::scale(ValueId a, double c) {
  if (c == 1.0) return a;
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.c = c;
  n.value = scaled(value(a), c);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::add_rowvec(ValueId a, ValueId v) {
  const DenseMatrix& av = value(a);
  const DenseMatrix& vv = value(v);
  if (vv.rows != 1 || vv.cols != av.cols)
    throw ShapeError("add_rowvec: vector must be 1x" + std::to_string(av.cols));
  Node n;
  n.op = Op::kAddRowVec;
  n.a = a;
  n.b = v;
  n.value = av;
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) n.value.at(i, j) += vv.at(0, j);
  n.needs_grad = node(a).needs_grad || node(v).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::row_scale(ValueId a, ValueId w) {
  const DenseMatrix& av = value(a);
  const DenseMatrix& wv = value(w);
  if (wv.cols != 1 || wv.rows != av.rows)
    throw ShapeError("row_scale: weights must be " + std::to_string(av.rows) + "x1");
  Node n;
  n.op = Op::kRowScale;
  n.a = a;
  n.b = w;
  n.value = av;
  for (int i = 0; i < av.rows; ++i) {
    const double wi = wv.at(i, 0);
    for (int j = 0; j < av.cols; ++j) n.value.at(i, j) *= wi;
  }
  n.needs_grad = node(a).needs_grad || node(w).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::gather_rows(ValueId a, std::vector<int> idx) {
  const DenseMatrix& av = value(a);
  for (int i : idx)
    if (i < 0 || i >= av.rows)
      throw ShapeError("gather_rows: index " + std::to_string(i) + " out of " +
                       std::to_string(av.rows));
  Node n;
  n.op = Op::kGatherRows;
  n.a = a;
  n.value = DenseMatrix(static_cast<int>(idx.size()), av.cols);
  for (std::size_t k = 0; k < idx.size(); ++k)
    std::copy(av.row(idx[k]), av.row(idx[k]) + av.cols, n.value.row(static_cast<int>(k)));
  n.idx = std::move(idx);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::transposed(ValueId a) {
  Node n;
  n.op = Op::kTranspose;
  n.a = a;
  n.value = unlrec::transpose(value(a));
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::rowwise_dot(ValueId a, ValueId b) {
  const DenseMatrix& av = value(a);
  const DenseMatrix& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("rowwise_dot: shape mismatch");
  Node n;
  n.op = Op::kRowwiseDot;
  n.a = a;
  n.b = b;
  n.value = DenseMatrix(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += av.at(i, j) * bv.at(i, j);
    n.value.at(i, 0) = s;
  }
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::row_normalize(ValueId a) {
  const DenseMatrix& av = value(a);
  Node n;
  n.op = Op::kRowNormalize;
  n.a = a;
  n.value = av;
  for (int i = 0; i < av.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += av.at(i, j) * av.at(i, j);
    const double norm = std::sqrt(s);
    if (norm > 0.0)
      for (int j = 0; j < av.cols; ++j) n.value.at(i, j) /= norm;
  }
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::leaky_relu(ValueId a, double neg_slope) {
  Node n;
  n.op = Op::kLeakyRelu;
  n.a = a;
  n.c = neg_slope;
  n.value = value(a);
  for (auto& x : n.value.v)
    if (x < 0.0) x *= neg_slope;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::log_sigmoid(ValueId a) {
  Node n;
  n.op = Op::kLogSigmoid;
  n.a = a;
  n.value = value(a);
  for (auto& x : n.value.v) x = stable_log_sigmoid(x);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::logsumexp_rows(ValueId a) {
  const DenseMatrix& av = value(a);
  Node n;
  n.op = Op::kLogsumexpRows;
  n.a = a;
  n.value = DenseMatrix(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) {
    double m = av.at(i, 0);
    for (int j = 1; j < av.cols; ++j) m = std::max(m, av.at(i, j));
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += std::exp(av.at(i, j) - m);
    n.value.at(i, 0) = m + std::log(s);
  }
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::diag(ValueId a) {
  const DenseMatrix& av = value(a);
  if (av.rows != av.cols) throw ShapeError("diag: matrix not square");
  Node n;
  n.op = Op::kDiag;
  n.a = a;
  n.value = DenseMatrix(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) n.value.at(i, 0) = av.at(i, i);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

ValueId GradientTape::sum(ValueId a) {
  const DenseMatrix& av = value(a);
  Node n;
  n.op = Op::kSum;
  n.a = a;
  n.value = DenseMatrix(1, 1);
  double s = 0.0;
  for (double x : av.v) s += x;
  n.value.at(0, 0) = s;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

double GradientTape::scalar(ValueId id) const {
  const DenseMatrix& m = value(id);
  if (!m.is_scalar()) throw ContractError("scalar: node is not 1x1");
  return m.scalar();
}

DenseMatrix& GradientTape::grad_buf(ValueId id) {
  Node& n = nodes_[id];
  if (n.grad.v.empty()) n.grad = DenseMatrix(n.value.rows, n.value.cols);
  return n.grad;
}

const DenseMatrix& GradientTape::grad(ValueId id) const {
  if (!has_grad(id)) throw ContractError("grad: node has no gradient");
  return nodes_[id].grad;
}

void GradientTape::backward(ValueId loss) {
  if (loss < 0 || loss >= static_cast<ValueId>(nodes_.size()))
    throw ContractError("backward: invalid loss handle");
  if (!value(loss).is_scalar()) throw ContractError("backward: loss is not scalar");

  grad_buf(loss).at(0, 0) = 1.0;

  for (ValueId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.v.empty()) continue;
    const DenseMatrix& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kSpmm:
        if (node(n.a).needs_grad) {
          // A symmetric, so A^T g == A g
          DenseMatrix tmp = n.sparse->multiply(g);
          add_into(grad_buf(n.a), tmp);
        }
        break;
      case Op::kMatmul:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), unlrec::matmul_nt(g, value(n.b)));
        if (node(n.b).needs_grad) add_into(grad_buf(n.b), unlrec::matmul_tn(value(n.a), g));
        break;
      case Op::kMatmulNT:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), unlrec::matmul(g, value(n.b)));
        if (node(n.b).needs_grad) add_into(grad_buf(n.b), unlrec::matmul_tn(g, value(n.a)));
        break;
      case Op::kAdd:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), g);
        if (node(n.b).needs_grad) add_into(grad_buf(n.b), g);
        break;
      case Op::kSub:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), g);
        if (node(n.b).needs_grad) add_into(grad_buf(n.b), g, -1.0);
        break;
      case Op::kMul:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), hadamard(g, value(n.b)));
        if (node(n.b).needs_grad) add_into(grad_buf(n.b), hadamard(g, value(n.a)));
        break;
      case Op::kScale:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), g, n.c);
        break;
      case Op::kAddRowVec: {
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), g);
        if (node(n.b).needs_grad) {
          DenseMatrix& gv = grad_buf(n.b);
          for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) gv.at(0, j) += g.at(i, j);
        }
        break;
      }
      case Op::kRowScale: {
        const DenseMatrix& av = value(n.a);
        const DenseMatrix& wv = value(n.b);
        if (node(n.a).needs_grad) {
          DenseMatrix& ga = grad_buf(n.a);
          for (int i = 0; i < g.rows; ++i) {
            const double wi = wv.at(i, 0);
            for (int j = 0; j < g.cols; ++j) ga.at(i, j) += g.at(i, j) * wi;
          }
        }
        if (node(n.b).needs_grad) {
          DenseMatrix& gw = grad_buf(n.b);
          for (int i = 0; i < g.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < g.cols; ++j) s += g.at(i, j) * av.at(i, j);
            gw.at(i, 0) += s;
          }
        }
        break;
      }
      case Op::kGatherRows: {
        if (node(n.a).needs_grad) {
          DenseMatrix& ga = grad_buf(n.a);
          for (std::size_t k = 0; k < n.idx.size(); ++k) {
            const double* grow = g.row(static_cast<int>(k));
            double* arow = ga.row(n.idx[k]);
            for (int j = 0; j < g.cols; ++j) arow[j] += grow[j];
          }
        }
        break;
      }
      case Op::kTranspose:
        if (node(n.a).needs_grad) add_into(grad_buf(n.a), unlrec::transpose(g));
        break;
      case Op::kRowwiseDot: {
        const DenseMatrix& av = value(n.a);
        const DenseMatrix& bv = value(n.b);
        if (node(n.a).needs_grad) {
          DenseMatrix& ga = grad_buf(n.a);
          for (int i = 0; i < av.rows; ++i) {
            const double gi = g.at(i, 0);
            for (int j = 0; j < av.cols; ++j) ga.at(i, j) += gi * bv.at(i, j);
          }
        }
        if (node(n.b).needs_grad) {
          DenseMatrix& gb = grad_buf(n.b);
          for (int i = 0; i < av.rows; ++i) {
            const double gi = g.at(i, 0);
            for (int j = 0; j < av.cols; ++j) gb.at(i, j) += gi * av.at(i, j);
          }
        }
        break;
      }
      case Op::kRowNormalize: {
        if (node(n.a).needs_grad) {
          const DenseMatrix& av = value(n.a);
          const DenseMatrix& yv = n.value;
          DenseMatrix& ga = grad_buf(n.a);
          for (int i = 0; i < av.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < av.cols; ++j) s += av.at(i, j) * av.at(i, j);
            const double norm = std::sqrt(s);
            if (norm == 0.0) continue;  // zero rows carry no gradient
            double gy = 0.0;
            for (int j = 0; j < av.cols; ++j) gy += g.at(i, j) * yv.at(i, j);
            for (int j = 0; j < av.cols; ++j)
              ga.at(i, j) += (g.at(i, j) - gy * yv.at(i, j)) / norm;
          }
        }
        break;
      }
      case Op::kLeakyRelu: {
        if (node(n.a).needs_grad) {
          const DenseMatrix& av = value(n.a);
          DenseMatrix& ga = grad_buf(n.a);
          for (std::size_t k = 0; k < av.v.size(); ++k)
            ga.v[k] += g.v[k] * (av.v[k] >= 0.0 ? 1.0 : n.c);
        }
        break;
      }
      case Op::kLogSigmoid: {
        if (node(n.a).needs_grad) {
          const DenseMatrix& av = value(n.a);
          DenseMatrix& ga = grad_buf(n.a);
          for (std::size_t k = 0; k < av.v.size(); ++k)
            ga.v[k] += g.v[k] * sigmoid(-av.v[k]);
        }
        break;
      }
      case Op::kLogsumexpRows: {
        if (node(n.a).needs_grad) {
          const DenseMatrix& av = value(n.a);
          DenseMatrix& ga = grad_buf(n.a);
          for (int i = 0; i < av.rows; ++i) {
            const double lse = n.value.at(i, 0);
            const double gi = g.at(i, 0);
            for (int j = 0; j < av.cols; ++j)
              ga.at(i, j) += gi * std::exp(av.at(i, j) - lse);
          }
        }
        break;
      }
      case Op::kDiag: {
        if (node(n.a).needs_grad) {
          DenseMatrix& ga = grad_buf(n.a);
          for (int i = 0; i < g.rows; ++i) ga.at(i, i) += g.at(i, 0);
        }
        break;
      }
      case Op::kSum: {
        if (node(n.a).needs_grad) {
          DenseMatrix& ga = grad_buf(n.a);
          const double gs = g.at(0, 0);
          for (auto& x : ga.v) x += gs;
        }
        break;
      }
    }
  }
}

}  // namespace unlrec
