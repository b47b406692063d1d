#include "optdisc/tape.hpp"

#include <algorithm>
#include <cmath>

namespace optdisc::ad {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// rows/cols treating rank-1 as a single row
int nrows(const Tensor& t) { return t.rank() == 2 ? t.shape[0] : 1; }
int ncols(const Tensor& t) { return t.rank() == 2 ? t.shape[1] : t.shape[0]; }

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw Error("tape: var does not belong to this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

Tape::Node& Tape::node(Var v) {
  return const_cast<Node&>(static_cast<const Tape*>(this)->node(v));
}

Var Tape::push(Op op, std::vector<int> in, Tensor value, bool track,
               std::vector<int> ai, std::vector<double> ad) {
  Node n;
  n.op = op;
  n.in = std::move(in);
  n.value = std::move(value);
  n.track = track;
  n.ai = std::move(ai);
  n.ad = std::move(ad);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::check_same(const char* op, Var a, Var b) const {
  if (!node(a).value.same_shape(node(b).value))
    throw Error(std::string(op) + ": shape mismatch " +
                Tensor::shape_str(node(a).value.shape) + " vs " +
                Tensor::shape_str(node(b).value.shape));
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.data.empty())
    throw Error("tape: no gradient recorded for this var");
  return n.grad;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[0])
    throw Error("matmul: shape mismatch " + Tensor::shape_str(A.shape) +
                " vs " + Tensor::shape_str(B.shape));
  int m = A.shape[0], n = A.shape[1], p = B.shape[1];
  Tensor out({m, p});
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < p; ++j) out.at(i, j) += aik * B.at(k, j);
    }
  return push(Op::kMatMul, {a.id, b.id}, std::move(out),
              tracked(a) || tracked(b));
}

Var Tape::matvec(Var a, Var x) {
  const Tensor& A = val(a);
  const Tensor& X = val(x);
  if (A.rank() != 2 || X.rank() != 1 || A.shape[1] != X.shape[0])
    throw Error("matvec: shape mismatch " + Tensor::shape_str(A.shape) +
                " vs " + Tensor::shape_str(X.shape));
  int m = A.shape[0], n = A.shape[1];
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += A.at(i, k) * X[k];
    out[i] = acc;
  }
  return push(Op::kMatVec, {a.id, x.id}, std::move(out),
              tracked(a) || tracked(x));
}

Var Tape::add(Var a, Var b) {
  check_same("add", a, b);
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return push(Op::kAdd, {a.id, b.id}, std::move(out), tracked(a) || tracked(b));
}

Var Tape::sub(Var a, Var b) {
  check_same("sub", a, b);
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return push(Op::kSub, {a.id, b.id}, std::move(out), tracked(a) || tracked(b));
}

Var Tape::mul(Var a, Var b) {
  check_same("mul", a, b);
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return push(Op::kMul, {a.id, b.id}, std::move(out), tracked(a) || tracked(b));
}

Var Tape::div(Var a, Var b) {
  check_same("div", a, b);
  Tensor out = val(a);
  const Tensor& B = val(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= B[i];
  return push(Op::kDiv, {a.id, b.id}, std::move(out), tracked(a) || tracked(b));
}

Var Tape::add_rowvec(Var m, Var v) {
  const Tensor& M = val(m);
  const Tensor& V = val(v);
  if (M.rank() != 2 || V.rank() != 1 || M.shape[1] != V.shape[0])
    throw Error("add_rowvec: shape mismatch " + Tensor::shape_str(M.shape) +
                " vs " + Tensor::shape_str(V.shape));
  Tensor out = M;
  for (int i = 0; i < M.shape[0]; ++i)
    for (int j = 0; j < M.shape[1]; ++j) out.at(i, j) += V[j];
  return push(Op::kAddRowVec, {m.id, v.id}, std::move(out),
              tracked(m) || tracked(v));
}

Var Tape::affine(Var x, double a, double b) {
  Tensor out = val(x);
  for (double& v : out.data) v = a * v + b;
  return push(Op::kAffine, {x.id}, std::move(out), tracked(x), {}, {a, b});
}

Var Tape::sigmoid(Var x) {
  Tensor out = val(x);
  for (double& v : out.data) v = stable_sigmoid(v);
  return push(Op::kSigmoid, {x.id}, std::move(out), tracked(x));
}

Var Tape::tanh(Var x) {
  Tensor out = val(x);
  for (double& v : out.data) v = std::tanh(v);
  return push(Op::kTanh, {x.id}, std::move(out), tracked(x));
}

Var Tape::relu(Var x) {
  Tensor out = val(x);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return push(Op::kRelu, {x.id}, std::move(out), tracked(x));
}

Var Tape::exp(Var x) {
  Tensor out = val(x);
  for (double& v : out.data) v = std::exp(v);
  return push(Op::kExp, {x.id}, std::move(out), tracked(x));
}

Var Tape::log(Var x) {
  Tensor out = val(x);
  for (double& v : out.data) v = std::log(v);
  return push(Op::kLog, {x.id}, std::move(out), tracked(x));
}

Var Tape::abs(Var x) {
  Tensor out = val(x);
  for (double& v : out.data) v = std::fabs(v);
  return push(Op::kAbs, {x.id}, std::move(out), tracked(x));
}

Var Tape::softplus(Var x) {
  Tensor out = val(x);
  for (double& v : out.data)
    v = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  return push(Op::kSoftplus, {x.id}, std::move(out), tracked(x));
}

Var Tape::clamp(Var x, double lo, double hi) {
  Tensor out = val(x);
  for (double& v : out.data) v = std::min(std::max(v, lo), hi);
  return push(Op::kClamp, {x.id}, std::move(out), tracked(x), {}, {lo, hi});
}

Var Tape::softmax_rows(Var x) {
  Tensor out = val(x);
  int m = nrows(out), n = ncols(out);
  for (int i = 0; i < m; ++i) {
    double* row = out.data.data() + static_cast<std::size_t>(i) * n;
    double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      z += row[j];
    }
    for (int j = 0; j < n; ++j) row[j] /= z;
  }
  return push(Op::kSoftmaxRows, {x.id}, std::move(out), tracked(x));
}

Var Tape::log_softmax_rows(Var x) {
  Tensor out = val(x);
  int m = nrows(out), n = ncols(out);
  for (int i = 0; i < m; ++i) {
    double* row = out.data.data() + static_cast<std::size_t>(i) * n;
    double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(row[j] - mx);
    double lz = mx + std::log(z);
    for (int j = 0; j < n; ++j) row[j] -= lz;
  }
  return push(Op::kLogSoftmaxRows, {x.id}, std::move(out), tracked(x));
}

Var Tape::logsumexp_rows(Var x) {
  const Tensor& X = val(x);
  int m = nrows(X), n = ncols(X);
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    const double* row = X.data.data() + static_cast<std::size_t>(i) * n;
    double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(row[j] - mx);
    out[i] = mx + std::log(z);
  }
  return push(Op::kLogSumExpRows, {x.id}, std::move(out), tracked(x));
}

Var Tape::sum_all(Var x) {
  double acc = 0.0;
  for (double v : val(x).data) acc += v;
  return push(Op::kSumAll, {x.id}, Tensor({1}, {acc}), tracked(x));
}

Var Tape::mean_all(Var x) {
  double acc = 0.0;
  for (double v : val(x).data) acc += v;
  acc /= static_cast<double>(val(x).size());
  return push(Op::kMeanAll, {x.id}, Tensor({1}, {acc}), tracked(x));
}

Var Tape::row_sum(Var x) {
  const Tensor& X = val(x);
  if (X.rank() != 2) throw Error("row_sum: expects rank-2 input");
  Tensor out({X.shape[0]});
  for (int i = 0; i < X.shape[0]; ++i) {
    double acc = 0.0;
    for (int j = 0; j < X.shape[1]; ++j) acc += X.at(i, j);
    out[i] = acc;
  }
  return push(Op::kRowSum, {x.id}, std::move(out), tracked(x));
}

Var Tape::col_sum(Var x) {
  const Tensor& X = val(x);
  if (X.rank() != 2) throw Error("col_sum: expects rank-2 input");
  Tensor out({X.shape[1]});
  for (int i = 0; i < X.shape[0]; ++i)
    for (int j = 0; j < X.shape[1]; ++j) out[j] += X.at(i, j);
  return push(Op::kColSum, {x.id}, std::move(out), tracked(x));
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw Error("concat_cols: no inputs");
  int m = nrows(val(xs[0]));
  int rank = val(xs[0]).rank();
  int total = 0;
  bool track = false;
  std::vector<int> in, offsets;
  for (Var v : xs) {
    const Tensor& t = val(v);
    if (t.rank() != rank || nrows(t) != m)
      throw Error("concat_cols: incompatible input " +
                  Tensor::shape_str(t.shape));
    offsets.push_back(total);
    total += ncols(t);
    track = track || tracked(v);
    in.push_back(v.id);
  }
  Tensor out(rank == 2 ? std::vector<int>{m, total} : std::vector<int>{total});
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Tensor& t = val(xs[k]);
    int w = ncols(t);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j)
        out.data[static_cast<std::size_t>(i) * total + offsets[k] + j] =
            t.data[static_cast<std::size_t>(i) * w + j];
  }
  offsets.push_back(total);
  return push(Op::kConcatCols, std::move(in), std::move(out), track,
              std::move(offsets));
}

Var Tape::slice_cols(Var x, int c0, int c1) {
  const Tensor& X = val(x);
  int m = nrows(X), n = ncols(X);
  if (c0 < 0 || c1 > n || c0 >= c1)
    throw Error("slice_cols: range [" + std::to_string(c0) + "," +
                std::to_string(c1) + ") out of " + Tensor::shape_str(X.shape));
  int w = c1 - c0;
  Tensor out(X.rank() == 2 ? std::vector<int>{m, w} : std::vector<int>{w});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j)
      out.data[static_cast<std::size_t>(i) * w + j] =
          X.data[static_cast<std::size_t>(i) * n + c0 + j];
  return push(Op::kSliceCols, {x.id}, std::move(out), tracked(x), {c0, c1});
}

Var Tape::repeat_row(Var v, int m) {
  const Tensor& V = val(v);
  if (V.rank() != 1) throw Error("repeat_row: expects rank-1 input");
  int n = V.shape[0];
  Tensor out({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = V[j];
  return push(Op::kRepeatRow, {v.id}, std::move(out), tracked(v), {m});
}

Var Tape::broadcast_scalar(Var s, int n) {
  const Tensor& S = val(s);
  if (!S.is_scalar()) throw Error("broadcast_scalar: expects scalar input");
  Tensor out({n}, S[0]);
  return push(Op::kBroadcastScalar, {s.id}, std::move(out), tracked(s), {n});
}

Var Tape::cumsum(Var x) {
  const Tensor& X = val(x);
  if (X.rank() != 1) throw Error("cumsum: expects rank-1 input");
  Tensor out = X;
  for (std::size_t i = 1; i < out.size(); ++i) out[i] += out[i - 1];
  return push(Op::kCumSum, {x.id}, std::move(out), tracked(x));
}

Var Tape::reshape(Var x, std::vector<int> shape) {
  if (Tensor::numel(shape) != val(x).size())
    throw Error("reshape: cannot view " + Tensor::shape_str(val(x).shape) +
                " as " + Tensor::shape_str(shape));
  Tensor out(shape, val(x).data);
  return push(Op::kReshape, {x.id}, std::move(out), tracked(x));
}

void Tape::backward(Var loss) {
  const Node& top = node(loss);
  if (!top.value.is_scalar())
    throw Error("backward: loss must be scalar, got " +
                Tensor::shape_str(top.value.shape));
  if (!top.track) throw Error("backward: loss is not tracked");

  // Pass-local gradients; merged into persistent node grads at the end so
  // repeated backward calls accumulate.
  std::vector<Tensor> g(static_cast<std::size_t>(loss.id) + 1);
  g[static_cast<std::size_t>(loss.id)] = Tensor({1}, {1.0});
  for (int id = loss.id; id >= 0; --id) {
    if (g[static_cast<std::size_t>(id)].data.empty()) continue;
    if (!nodes_[static_cast<std::size_t>(id)].track) continue;
    backward_node(id, g);
  }
  for (int id = 0; id <= loss.id; ++id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.track) continue;
    Tensor& gi = g[static_cast<std::size_t>(id)];
    if (gi.data.empty()) {
      // tracked leaves always end up with a gradient, zero if unreached
      if (n.op == Op::kLeaf && n.grad.data.empty())
        n.grad = Tensor(n.value.shape, 0.0);
      continue;
    }
    if (n.grad.data.empty()) n.grad = Tensor(n.value.shape, 0.0);
    for (std::size_t i = 0; i < gi.size(); ++i) n.grad[i] += gi[i];
  }
}

void Tape::backward_node(int id, std::vector<Tensor>& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  const Tensor& gy = g[static_cast<std::size_t>(id)];
  auto acc = [&](int in_id, int flat, double v) {
    const Node& src = nodes_[static_cast<std::size_t>(in_id)];
    if (!src.track) return;
    Tensor& t = g[static_cast<std::size_t>(in_id)];
    if (t.data.empty()) t = Tensor(src.value.shape, 0.0);
    t[static_cast<std::size_t>(flat)] += v;
  };
  auto in_val = [&](int k) -> const Tensor& {
    return nodes_[static_cast<std::size_t>(n.in[static_cast<std::size_t>(k)])]
        .value;
  };

  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul: {
      const Tensor& A = in_val(0);
      const Tensor& B = in_val(1);
      int m = A.shape[0], nn = A.shape[1], p = B.shape[1];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < p; ++j) {
          double gij = gy.at(i, j);
          if (gij == 0.0) continue;
          for (int k = 0; k < nn; ++k) {
            acc(n.in[0], i * nn + k, gij * B.at(k, j));
            acc(n.in[1], k * p + j, gij * A.at(i, k));
          }
        }
      break;
    }
    case Op::kMatVec: {
      const Tensor& A = in_val(0);
      const Tensor& X = in_val(1);
      int m = A.shape[0], nn = A.shape[1];
      for (int i = 0; i < m; ++i) {
        double gi = gy[static_cast<std::size_t>(i)];
        if (gi == 0.0) continue;
        for (int k = 0; k < nn; ++k) {
          acc(n.in[0], i * nn + k, gi * X[k]);
          acc(n.in[1], k, gi * A.at(i, k));
        }
      }
      break;
    }
    case Op::kAdd:
      for (std::size_t i = 0; i < gy.size(); ++i) {
        acc(n.in[0], static_cast<int>(i), gy[i]);
        acc(n.in[1], static_cast<int>(i), gy[i]);
      }
      break;
    case Op::kSub:
      for (std::size_t i = 0; i < gy.size(); ++i) {
        acc(n.in[0], static_cast<int>(i), gy[i]);
        acc(n.in[1], static_cast<int>(i), -gy[i]);
      }
      break;
    case Op::kMul: {
      const Tensor& A = in_val(0);
      const Tensor& B = in_val(1);
      for (std::size_t i = 0; i < gy.size(); ++i) {
        acc(n.in[0], static_cast<int>(i), gy[i] * B[i]);
        acc(n.in[1], static_cast<int>(i), gy[i] * A[i]);
      }
      break;
    }
    case Op::kDiv: {
      const Tensor& A = in_val(0);
      const Tensor& B = in_val(1);
      for (std::size_t i = 0; i < gy.size(); ++i) {
        acc(n.in[0], static_cast<int>(i), gy[i] / B[i]);
        acc(n.in[1], static_cast<int>(i), -gy[i] * A[i] / (B[i] * B[i]));
      }
      break;
    }
    case Op::kAddRowVec: {
      const Tensor& M = in_val(0);
      int m = M.shape[0], nn = M.shape[1];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < nn; ++j) {
          double v = gy.at(i, j);
          acc(n.in[0], i * nn + j, v);
          acc(n.in[1], j, v);
        }
      break;
    }
    case Op::kAffine:
      for (std::size_t i = 0; i < gy.size(); ++i)
        acc(n.in[0], static_cast<int>(i), gy[i] * n.ad[0]);
      break;
    case Op::kSigmoid:
      for (std::size_t i = 0; i < gy.size(); ++i) {
        double y = n.value[i];
        acc(n.in[0], static_cast<int>(i), gy[i] * y * (1.0 - y));
      }
      break;
    case Op::kTanh:
      for (std::size_t i = 0; i < gy.size(); ++i) {
        double y = n.value[i];
        acc(n.in[0], static_cast<int>(i), gy[i] * (1.0 - y * y));
      }
      break;
    case Op::kRelu: {
      const Tensor& X = in_val(0);
      for (std::size_t i = 0; i < gy.size(); ++i)
        acc(n.in[0], static_cast<int>(i), X[i] > 0.0 ? gy[i] : 0.0);
      break;
    }
    case Op::kExp:
      for (std::size_t i = 0; i < gy.size(); ++i)
        acc(n.in[0], static_cast<int>(i), gy[i] * n.value[i]);
      break;
    case Op::kLog: {
      const Tensor& X = in_val(0);
      for (std::size_t i = 0; i < gy.size(); ++i)
        acc(n.in[0], static_cast<int>(i), gy[i] / X[i]);
      break;
    }
    case Op::kAbs: {
      const Tensor& X = in_val(0);
      for (std::size_t i = 0; i < gy.size(); ++i) {
        double s = X[i] > 0.0 ? 1.0 : (X[i] < 0.0 ? -1.0 : 0.0);
        acc(n.in[0], static_cast<int>(i), gy[i] * s);
      }
      break;
    }
    case Op::kSoftplus: {
      const Tensor& X = in_val(0);
      for (std::size_t i = 0; i < gy.size(); ++i)
        acc(n.in[0], static_cast<int>(i), gy[i] * stable_sigmoid(X[i]));
      break;
    }
    case Op::kClamp: {
      const Tensor& X = in_val(0);
      for (std::size_t i = 0; i < gy.size(); ++i) {
        bool inside = X[i] > n.ad[0] && X[i] < n.ad[1];
        if (inside) acc(n.in[0], static_cast<int>(i), gy[i]);
      }
      break;
    }
    case Op::kSoftmaxRows: {
      int m = nrows(n.value), nn = ncols(n.value);
      for (int i = 0; i < m; ++i) {
        const double* y = n.value.data.data() + static_cast<std::size_t>(i) * nn;
        const double* gr = gy.data.data() + static_cast<std::size_t>(i) * nn;
        double dot = 0.0;
        for (int j = 0; j < nn; ++j) dot += gr[j] * y[j];
        for (int j = 0; j < nn; ++j)
          acc(n.in[0], i * nn + j, y[j] * (gr[j] - dot));
      }
      break;
    }
    case Op::kLogSoftmaxRows: {
      int m = nrows(n.value), nn = ncols(n.value);
      for (int i = 0; i < m; ++i) {
        const double* y = n.value.data.data() + static_cast<std::size_t>(i) * nn;
        const double* gr = gy.data.data() + static_cast<std::size_t>(i) * nn;
        double gsum = 0.0;
        for (int j = 0; j < nn; ++j) gsum += gr[j];
        for (int j = 0; j < nn; ++j)
          acc(n.in[0], i * nn + j, gr[j] - std::exp(y[j]) * gsum);
      }
      break;
    }
    case Op::kLogSumExpRows: {
      const Tensor& X = in_val(0);
      int m = nrows(X), nn = ncols(X);
      for (int i = 0; i < m; ++i) {
        double gi = gy[static_cast<std::size_t>(i)];
        if (gi == 0.0) continue;
        double lse = n.value[static_cast<std::size_t>(i)];
        for (int j = 0; j < nn; ++j)
          acc(n.in[0], i * nn + j,
              gi * std::exp(X.data[static_cast<std::size_t>(i) * nn + j] - lse));
      }
      break;
    }
    case Op::kSumAll: {
      const Tensor& X = in_val(0);
      for (std::size_t i = 0; i < X.size(); ++i)
        acc(n.in[0], static_cast<int>(i), gy[0]);
      break;
    }
    case Op::kMeanAll: {
      const Tensor& X = in_val(0);
      double w = gy[0] / static_cast<double>(X.size());
      for (std::size_t i = 0; i < X.size(); ++i)
        acc(n.in[0], static_cast<int>(i), w);
      break;
    }
    case Op::kRowSum: {
      const Tensor& X = in_val(0);
      for (int i = 0; i < X.shape[0]; ++i)
        for (int j = 0; j < X.shape[1]; ++j)
          acc(n.in[0], i * X.shape[1] + j, gy[static_cast<std::size_t>(i)]);
      break;
    }
    case Op::kColSum: {
      const Tensor& X = in_val(0);
      for (int i = 0; i < X.shape[0]; ++i)
        for (int j = 0; j < X.shape[1]; ++j)
          acc(n.in[0], i * X.shape[1] + j, gy[static_cast<std::size_t>(j)]);
      break;
    }
    case Op::kConcatCols: {
      int m = nrows(n.value), total = ncols(n.value);
      for (std::size_t k = 0; k < n.in.size(); ++k) {
        int c0 = n.ai[k], c1 = n.ai[k + 1];
        int w = c1 - c0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < w; ++j)
            acc(n.in[k], i * w + j,
                gy.data[static_cast<std::size_t>(i) * total + c0 + j]);
      }
      break;
    }
    case Op::kSliceCols: {
      const Tensor& X = in_val(0);
      int m = nrows(X), nn = ncols(X);
      int c0 = n.ai[0], w = n.ai[1] - n.ai[0];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
          acc(n.in[0], i * nn + c0 + j,
              gy.data[static_cast<std::size_t>(i) * w + j]);
      break;
    }
    case Op::kRepeatRow: {
      int m = n.ai[0], nn = ncols(n.value);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < nn; ++j)
          acc(n.in[0], j, gy.data[static_cast<std::size_t>(i) * nn + j]);
      break;
    }
    case Op::kBroadcastScalar:
      for (std::size_t i = 0; i < gy.size(); ++i) acc(n.in[0], 0, gy[i]);
      break;
    case Op::kCumSum: {
      int nn = static_cast<int>(gy.size());
      double suffix = 0.0;
      for (int i = nn - 1; i >= 0; --i) {
        suffix += gy[static_cast<std::size_t>(i)];
        acc(n.in[0], i, suffix);
      }
      break;
    }
    case Op::kReshape:
      for (std::size_t i = 0; i < gy.size(); ++i)
        acc(n.in[0], static_cast<int>(i), gy[i]);
      break;
  }
}

}  // namespace optdisc::ad
