#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "optdisc/nn.hpp"
#include "optdisc/rng.hpp"
#include "oracles.hpp"

using namespace optdisc;
using ad::Tape;
using ad::Var;

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
  Tensor p({3}, {1.0, -2.0, 0.5});
  Tensor before = p;
  ParamRefs refs{{"p", &p}};
  Adam adam;
  adam.step(refs, {Tensor({3}, 0.0)});
  CHECK(p.data == before.data);
}

TEST_CASE("first adam step with unit gradient moves by about lr") {
  // hand evaluation at t=1: m_hat = g, v_hat = g^2, step = lr * g/(|g|+eps)
  Tensor p({1}, {0.7});
  ParamRefs refs{{"p", &p}};
  AdamConfig cfg;
  cfg.lr = 0.005;
  cfg.clip_norm = 0.0;
  Adam adam(cfg);
  adam.step(refs, {Tensor({1}, {1.0})});
  CHECK(p[0] == doctest::Approx(0.7 - 0.005).epsilon(1e-6));
}

TEST_CASE("adam drives x^2 toward zero") {
  Tensor x({1}, {1.0});
  ParamRefs refs{{"x", &x}};
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam adam(cfg);
  for (int i = 0; i < 200; ++i) adam.step(refs, {Tensor({1}, {2.0 * x[0]})});
  CHECK(std::fabs(x[0]) < 0.05);
}

TEST_CASE("adam refuses non-finite gradients, naming the parameter") {
  Tensor p({2}, {0.0, 0.0});
  ParamRefs refs{{"weights.w", &p}};
  Adam adam;
  Tensor g({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_WITH_AS(adam.step(refs, {g}),
                       doctest::Contains("weights.w"), NumericError);
}

TEST_CASE("global norm clipping caps the effective step") {
  Tensor p({1}, {0.0});
  ParamRefs refs{{"p", &p}};
  AdamConfig cfg;
  cfg.lr = 1.0;
  cfg.clip_norm = 10.0;
  Adam adam(cfg);
  adam.step(refs, {Tensor({1}, {1e6})});
  // after clipping the gradient is 10, so |step| stays ~lr
  CHECK(std::fabs(p[0]) <= 1.0 + 1e-9);
}

TEST_CASE("lstm cell: zero weights give zero state") {
  Tape t;
  LstmCell cell;
  cell.wx = Tensor({3, 8}, 0.0);
  cell.wh = Tensor({2, 8}, 0.0);
  cell.b = Tensor({8}, 0.0);
  cell.hidden = 2;
  ad_ops::LstmVars p{t.constant(cell.wx), t.constant(cell.wh),
                     t.constant(cell.b)};
  ad_ops::LstmState st{t.constant(Tensor({1, 2}, 0.0)),
                       t.constant(Tensor({1, 2}, 0.0))};
  Var x = t.constant(Tensor({1, 3}, {0.3, -0.4, 2.0}));
  auto out = ad_ops::lstm_step(t, x, st, p, 2);
  for (double v : t.val(out.h).data) CHECK(v == 0.0);
  for (double v : t.val(out.c).data) CHECK(v == 0.0);
}

TEST_CASE("lstm output stays inside (-1, 1)") {
  Rng rng(21);
  LstmCell cell = make_lstm(4, 3, rng);
  for (int trial = 0; trial < 1000; ++trial) {
    Tape t;
    ad_ops::LstmVars p{t.constant(cell.wx), t.constant(cell.wh),
                       t.constant(cell.b)};
    ad_ops::LstmState st{t.constant(rng.uniform_tensor({2, 3}, -1.0, 1.0)),
                         t.constant(rng.uniform_tensor({2, 3}, -3.0, 3.0))};
    Var x = t.constant(rng.uniform_tensor({2, 4}, -5.0, 5.0));
    auto out = ad_ops::lstm_step(t, x, st, p, 3);
    for (double v : t.val(out.h).data) {
      CHECK(v > -1.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("lstm gradient matches finite differences") {
  Rng rng(22);
  LstmCell cell = make_lstm(3, 2, rng);
  Tensor x0 = rng.uniform_tensor({2, 3}, -1.0, 1.0);
  Tensor h0 = rng.uniform_tensor({2, 2}, -0.5, 0.5);
  Tensor c0 = rng.uniform_tensor({2, 2}, -0.5, 0.5);

  struct Flat {
    std::vector<double> wx, wh, b;
  };
  auto value = [&](const Tensor& wx, const Tensor& wh, const Tensor& b) {
    Tape t;
    ad_ops::LstmVars p{t.constant(wx), t.constant(wh), t.constant(b)};
    ad_ops::LstmState st{t.constant(h0), t.constant(c0)};
    auto out = ad_ops::lstm_step(t, t.constant(x0), st, p, 2);
    return t.val(t.sum_all(out.h))[0];
  };

  Tape t;
  Var wx = t.leaf(cell.wx), wh = t.leaf(cell.wh), b = t.leaf(cell.b);
  ad_ops::LstmVars p{wx, wh, b};
  ad_ops::LstmState st{t.constant(h0), t.constant(c0)};
  auto out = ad_ops::lstm_step(t, t.constant(x0), st, p, 2);
  t.backward(t.sum_all(out.h));

  auto fd_wx = oracles::finite_diff(
      [&](const std::vector<double>& v) {
        return value(Tensor(cell.wx.shape, v), cell.wh, cell.b);
      },
      cell.wx.data);
  auto fd_wh = oracles::finite_diff(
      [&](const std::vector<double>& v) {
        return value(cell.wx, Tensor(cell.wh.shape, v), cell.b);
      },
      cell.wh.data);
  auto fd_b = oracles::finite_diff(
      [&](const std::vector<double>& v) {
        return value(cell.wx, cell.wh, Tensor(cell.b.shape, v));
      },
      cell.b.data);
  CHECK(oracles::max_rel_err(t.grad(wx).data, fd_wx) < 1e-4);
  CHECK(oracles::max_rel_err(t.grad(wh).data, fd_wh) < 1e-4);
  CHECK(oracles::max_rel_err(t.grad(b).data, fd_b) < 1e-4);
}

TEST_CASE("mlp gradients match finite differences across random configs") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    int in = 2 + rng.uniform_int(3);
    int hid = 2 + rng.uniform_int(4);
    int out_dim = 1 + rng.uniform_int(3);
    Mlp mlp = make_mlp({in, hid, out_dim}, rng);
    Tensor x0 = rng.uniform_tensor({3, in}, -1.0, 1.0);

    auto value = [&](const Mlp& m) {
      Tape t;
      std::vector<Var> ws, bs;
      for (const Linear& l : m.layers) {
        ws.push_back(t.constant(l.w));
        bs.push_back(t.constant(l.b));
      }
      return t.val(
          t.sum_all(t.tanh(ad_ops::mlp_forward(t, t.constant(x0), ws, bs))))[0];
    };

    Tape t;
    std::vector<Var> ws, bs;
    for (const Linear& l : mlp.layers) {
      ws.push_back(t.leaf(l.w));
      bs.push_back(t.leaf(l.b));
    }
    t.backward(
        t.sum_all(t.tanh(ad_ops::mlp_forward(t, t.constant(x0), ws, bs))));

    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
      auto fd = oracles::finite_diff(
          [&](const std::vector<double>& v) {
            Mlp m = mlp;
            m.layers[li].w.data = v;
            return value(m);
          },
          mlp.layers[li].w.data);
      CHECK(oracles::max_rel_err(t.grad(ws[li]).data, fd) < 1e-4);
    }
  }
}

TEST_CASE("init scheme: weights bounded by 1/sqrt(fan_in), biases zero") {
  Rng rng(31);
  Linear l = make_linear(16, 4, rng);
  double bound = 1.0 / std::sqrt(16.0);
  for (double w : l.w.data) {
    CHECK(w <= bound);
    CHECK(w >= -bound);
  }
  for (double b : l.b.data) CHECK(b == 0.0);
}
