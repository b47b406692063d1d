#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "optdisc/rng.hpp"
#include "optdisc/tape.hpp"
#include "oracles.hpp"

using namespace optdisc;
using ad::Tape;
using ad::Var;

TEST_CASE("elementwise forward values") {
  Tape t;
  Var x = t.constant(Tensor({3}, {0.0, 1.0, -1.0}));
  CHECK(t.val(t.sigmoid(x))[0] == doctest::Approx(0.5));
  CHECK(t.val(t.tanh(x))[1] == doctest::Approx(std::tanh(1.0)));
  CHECK(t.val(t.relu(x))[2] == 0.0);
  CHECK(t.val(t.exp(x))[1] == doctest::Approx(std::exp(1.0)));

  Var z = t.constant(Tensor({3}, {0.0, 0.0, 0.0}));
  const Tensor& sm = t.val(t.softmax_rows(z));
  for (double v : sm.data) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("log-softmax normalizes") {
  Rng rng(7);
  Tape t;
  Var z = t.constant(rng.uniform_tensor({4}, -2.0, 2.0));
  const Tensor& ls = t.val(t.log_softmax_rows(z));
  double total = 0.0;
  for (double v : ls.data) total += std::exp(v);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shape mismatch raises a structured error") {
  Tape t;
  Var a = t.constant(Tensor({2, 3}, 1.0));
  Var b = t.constant(Tensor({2, 2}, 1.0));
  CHECK_THROWS_WITH_AS(t.matmul(a, b),
                       doctest::Contains("matmul: shape mismatch"), Error);
  CHECK_THROWS_AS(t.add(a, b), Error);
}

TEST_CASE("backward on x^2 gives 2x") {
  Tape t;
  Var x = t.leaf(Tensor({1}, {3.0}));
  Var loss = t.mul(x, x);
  t.backward(loss);
  CHECK(t.grad(x)[0] == doctest::Approx(6.0));
}

TEST_CASE("sum of softmax has zero gradient") {
  Rng rng(3);
  Tape t;
  Var z = t.leaf(rng.uniform_tensor({5}, -1.0, 1.0));
  t.backward(t.sum_all(t.softmax_rows(z)));
  for (double g : t.grad(z).data) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("backward requires a scalar tracked loss") {
  Tape t;
  Var x = t.leaf(Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(x), Error);
  Var c = t.constant(Tensor({1}, {1.0}));
  CHECK_THROWS_AS(t.backward(c), Error);
}

TEST_CASE("repeated backward accumulates leaf gradients") {
  Tape t;
  Var x = t.leaf(Tensor({1}, {3.0}));
  Var loss = t.mul(x, x);
  t.backward(loss);
  t.backward(loss);
  CHECK(t.grad(x)[0] == doctest::Approx(12.0));
}

TEST_CASE("fresh tapes give identical gradients") {
  auto run = [] {
    Tape t;
    Var x = t.leaf(Tensor({2, 2}, {0.3, -0.2, 0.11, 0.7}));
    Var y = t.leaf(Tensor({2, 2}, {1.0, 0.5, -0.4, 0.2}));
    Var loss = t.sum_all(t.tanh(t.matmul(x, y)));
    t.backward(loss);
    return std::make_pair(t.val(loss)[0], t.grad(x).data);
  };
  auto a = run();
  auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

namespace {

// builds y = f(x) through each op kind and checks d sum(y) / dx against
// central differences
void check_op_gradient(
    const std::function<Var(Tape&, Var)>& op, const std::vector<int>& shape,
    Rng& rng, double lo = -2.0, double hi = 2.0, double tol = 1e-4) {
  Tensor x0 = rng.uniform_tensor(shape, lo, hi);
  auto value = [&](const std::vector<double>& xs) {
    Tape t;
    Var x = t.leaf(Tensor(shape, xs), false);
    return t.val(t.sum_all(op(t, x)))[0];
  };
  Tape t;
  Var x = t.leaf(x0);
  t.backward(t.sum_all(op(t, x)));
  CHECK(oracles::max_rel_err(t.grad(x).data,
                             oracles::finite_diff(value, x0.data)) < tol);
}

}  // namespace

TEST_CASE("finite differences agree for every op kind") {
  Rng rng(11);
  check_op_gradient([](Tape& t, Var x) { return t.sigmoid(x); }, {3, 4}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.tanh(x); }, {3, 4}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.exp(x); }, {5}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.log(x); }, {5}, rng, 0.5, 3.0);
  check_op_gradient([](Tape& t, Var x) { return t.softplus(x); }, {6}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.abs(x); }, {6}, rng, 0.2, 2.0);
  check_op_gradient([](Tape& t, Var x) { return t.relu(x); }, {6}, rng, 0.2,
                    2.0);
  check_op_gradient([](Tape& t, Var x) { return t.affine(x, 2.5, -1.0); },
                    {2, 3}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.clamp(x, -0.5, 0.5); },
                    {6}, rng, 0.6, 2.0);  // fully clamped: zero grad
  check_op_gradient([](Tape& t, Var x) { return t.softmax_rows(x); }, {2, 4},
                    rng);
  check_op_gradient([](Tape& t, Var x) { return t.log_softmax_rows(x); },
                    {2, 4}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.logsumexp_rows(x); }, {3, 4},
                    rng);
  check_op_gradient([](Tape& t, Var x) { return t.mean_all(x); }, {3, 4}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.row_sum(x); }, {3, 4}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.col_sum(x); }, {3, 4}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.cumsum(x); }, {6}, rng);
  check_op_gradient([](Tape& t, Var x) { return t.repeat_row(x, 3); }, {4},
                    rng);
  check_op_gradient(
      [](Tape& t, Var x) { return t.slice_cols(x, 1, 3); }, {2, 4}, rng);
  check_op_gradient(
      [](Tape& t, Var x) { return t.reshape(x, {4, 2}); }, {2, 4}, rng);
  check_op_gradient(
      [](Tape& t, Var x) {
        return t.concat_cols({x, t.affine(x, 2.0, 0.0)});
      },
      {2, 3}, rng);
  check_op_gradient(
      [](Tape& t, Var x) { return t.broadcast_scalar(t.sum_all(x), 5); }, {3},
      rng);
}

TEST_CASE("two-input op gradients") {
  Rng rng(13);
  auto check_pair = [&](const std::function<Var(Tape&, Var, Var)>& op,
                        std::vector<int> sa, std::vector<int> sb, double lo,
                        double hi) {
    Tensor a0 = rng.uniform_tensor(sa, lo, hi);
    Tensor b0 = rng.uniform_tensor(sb, lo, hi);
    auto value_a = [&](const std::vector<double>& xs) {
      Tape t;
      return t.val(t.sum_all(op(t, t.constant(Tensor(sa, xs)),
                                t.constant(b0))))[0];
    };
    auto value_b = [&](const std::vector<double>& xs) {
      Tape t;
      return t.val(t.sum_all(op(t, t.constant(a0),
                                t.constant(Tensor(sb, xs)))))[0];
    };
    Tape t;
    Var a = t.leaf(a0);
    Var b = t.leaf(b0);
    t.backward(t.sum_all(op(t, a, b)));
    CHECK(oracles::max_rel_err(t.grad(a).data,
                               oracles::finite_diff(value_a, a0.data)) < 1e-4);
    CHECK(oracles::max_rel_err(t.grad(b).data,
                               oracles::finite_diff(value_b, b0.data)) < 1e-4);
  };
  check_pair([](Tape& t, Var a, Var b) { return t.matmul(a, b); }, {3, 4},
             {4, 2}, -1.0, 1.0);
  check_pair([](Tape& t, Var a, Var b) { return t.matvec(a, b); }, {3, 4}, {4},
             -1.0, 1.0);
  check_pair([](Tape& t, Var a, Var b) { return t.add(a, b); }, {3, 4}, {3, 4},
             -1.0, 1.0);
  check_pair([](Tape& t, Var a, Var b) { return t.sub(a, b); }, {5}, {5}, -1.0,
             1.0);
  check_pair([](Tape& t, Var a, Var b) { return t.mul(a, b); }, {5}, {5}, -1.0,
             1.0);
  check_pair([](Tape& t, Var a, Var b) { return t.div(a, b); }, {5}, {5}, 0.5,
             2.0);
  check_pair([](Tape& t, Var a, Var b) { return t.add_rowvec(a, b); }, {3, 4},
             {4}, -1.0, 1.0);
}
