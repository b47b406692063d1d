// Reverse-mode autodiff over rank-1/2 tensors.
//
// A Tape is an append-only arena of primitive ops in topological order.
// Var is a cheap handle into one tape. Graphs are rebuilt per step; leaf
// gradients accumulate across backward() calls until the tape is discarded.
#ifndef OPTDISC_TAPE_HPP
#define OPTDISC_TAPE_HPP

#include <vector>

#include "optdisc/tensor.hpp"

namespace optdisc::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

enum class Op {
  kLeaf,
  kMatMul,
  kMatVec,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kAddRowVec,
  kAffine,
  kSigmoid,
  kTanh,
  kRelu,
  kExp,
  kLog,
  kAbs,
  kSoftplus,
  kClamp,
  kSoftmaxRows,
  kLogSoftmaxRows,
  kLogSumExpRows,
  kSumAll,
  kMeanAll,
  kRowSum,
  kColSum,
  kConcatCols,
  kSliceCols,
  kRepeatRow,
  kBroadcastScalar,
  kCumSum,
  kReshape,
};

class Tape {
 public:
  Var constant(Tensor v) { return push(Op::kLeaf, {}, std::move(v), false); }
  Var leaf(Tensor v, bool track = true) {
    return push(Op::kLeaf, {}, std::move(v), track);
  }
  Var scalar_const(double v) { return constant(Tensor({1}, {v})); }

  Var matmul(Var a, Var b);            // (m,n)x(n,p) -> (m,p)
  Var matvec(Var a, Var x);            // (m,n)x(n)   -> (m)
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var add_rowvec(Var m, Var v);        // (m,n)+(n) broadcast over rows
  Var affine(Var x, double a, double b);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var relu(Var x);
  Var exp(Var x);
  Var log(Var x);
  Var abs(Var x);
  Var softplus(Var x);
  Var clamp(Var x, double lo, double hi);
  Var softmax_rows(Var x);             // last axis; rank-1 = one row
  Var log_softmax_rows(Var x);
  Var logsumexp_rows(Var x);           // (m,n)->(m); (n)->(1)
  Var sum_all(Var x);                  // -> (1)
  Var mean_all(Var x);                 // -> (1)
  Var row_sum(Var x);                  // (m,n)->(m)
  Var col_sum(Var x);                  // (m,n)->(n)
  Var concat_cols(const std::vector<Var>& xs);  // along last axis
  Var slice_cols(Var x, int c0, int c1);        // [c0,c1) of last axis
  Var repeat_row(Var v, int m);        // (n)->(m,n)
  Var broadcast_scalar(Var s, int n);  // (1)->(n)
  Var cumsum(Var x);                   // rank-1 inclusive prefix sum
  Var reshape(Var x, std::vector<int> shape);

  // dloss/dnode for every tracked node; loss must be scalar. Contributions
  // add into existing gradients, so repeated calls accumulate.
  void backward(Var loss);

  const Tensor& val(Var v) const { return node(v).value; }
  const Tensor& grad(Var v) const;
  bool has_grad(Var v) const { return !node(v).grad.data.empty(); }
  bool tracked(Var v) const { return node(v).track; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    std::vector<int> in;
    Tensor value;
    Tensor grad;  // empty until first backward touches it
    bool track = false;
    std::vector<int> ai;
    std::vector<double> ad;
  };

  Var push(Op op, std::vector<int> in, Tensor value, bool track,
           std::vector<int> ai = {}, std::vector<double> ad = {});
  const Node& node(Var v) const;
  Node& node(Var v);
  void check_same(const char* op, Var a, Var b) const;
  void backward_node(int id, std::vector<Tensor>& g);

  std::vector<Node> nodes_;
};

// Operator sugar for elementwise arithmetic on one tape.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }

}  // namespace optdisc::ad

#endif
