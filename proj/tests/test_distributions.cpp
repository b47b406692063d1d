#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "optdisc/distributions.hpp"
#include "optdisc/tape.hpp"
#include "oracles.hpp"

using namespace optdisc;
using ad::Tape;
using ad::Var;

TEST_CASE("gumbel-softmax with zero noise reproduces the weights") {
  std::vector<double> noise(3, 0.0);
  for (double tau : {0.3, 1.0, 4.0}) {
    auto x = dist::gumbel_softmax_sample(
        {std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3)}, tau, noise);
    for (double v : x) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  auto x = dist::gumbel_softmax_sample({std::log(0.9), std::log(0.1)}, 1.0,
                                       {0.0, 0.0});
  CHECK(x[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("gumbel-softmax rejects non-positive temperature") {
  CHECK_THROWS_AS(dist::gumbel_softmax_sample({0.0, 0.0}, 0.0, {0.0, 0.0}),
                  Error);
  CHECK_THROWS_AS(dist::gumbel_softmax_sample({0.0, 0.0}, -1.0, {0.0, 0.0}),
                  Error);
}

TEST_CASE("gumbel-softmax argmax law matches the categorical, any tau") {
  std::vector<double> weights = {0.5, 0.2, 0.2, 0.1};
  std::vector<double> logw;
  for (double w : weights) logw.push_back(std::log(w));
  const int n = 100000;
  for (double tau : {0.5, 2.0}) {
    Rng rng(042 + static_cast<int>(tau * 10));
    std::vector<int> counts(weights.size(), 0);
    std::vector<double> noise(weights.size());
    for (int i = 0; i < n; ++i) {
      for (double& g : noise) g = rng.gumbel();
      auto x = dist::gumbel_softmax_sample(logw, tau, noise);
      ++counts[static_cast<std::size_t>(
          std::max_element(x.begin(), x.end()) - x.begin())];
    }
    double tv = 0.0, chi2 = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      double freq = static_cast<double>(counts[k]) / n;
      tv += 0.5 * std::fabs(freq - weights[k]);
      double expect = weights[k] * n;
      chi2 += (counts[k] - expect) * (counts[k] - expect) / expect;
    }
    CHECK(tv < 0.01);
    CHECK(chi2 < 16.266);  // chi^2 critical value, 3 dof, p = 0.001
  }
}

TEST_CASE("kumaraswamy(1,1) inverse cdf is the identity") {
  CHECK(dist::kumaraswamy_sample(1.0, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(dist::kumaraswamy_sample(0.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(dist::kumaraswamy_sample(1.0, -2.0, 0.5), Error);
}

TEST_CASE("kumaraswamy(1,alpha) matches Beta(1,alpha): KS statistic") {
  const int n = 100000;
  for (double alpha : {0.7, 2.5}) {
    Rng rng(7);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i)
      xs[static_cast<std::size_t>(i)] =
          dist::kumaraswamy_sample(1.0, alpha, rng.uniform());
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      double cdf = 1.0 - std::pow(1.0 - xs[static_cast<std::size_t>(i)], alpha);
      d = std::max(d, std::fabs(cdf - (i + 1.0) / n));
      d = std::max(d, std::fabs(cdf - static_cast<double>(i) / n));
    }
    CHECK(d < 0.01);
  }
}

TEST_CASE("kumaraswamy density: analytic point and normalization") {
  // a1 a2 x^(a1-1) (1-x^a1)^(a2-1) at (2,2), x = .5: 2*2*.5*.75 = 1.5
  CHECK(std::exp(dist::kumaraswamy_log_pdf(0.5, 2.0, 2.0)) ==
        doctest::Approx(1.5).epsilon(1e-12));
  // bounded-density parameter sets; a < 1 puts an integrable singularity at
  // the boundary that trapezoid quadrature cannot resolve to 1e-4
  for (auto [a1, a2] : std::vector<std::pair<double, double>>{
           {2.0, 2.0}, {1.5, 3.0}, {4.0, 1.7}, {1.0, 1.0}}) {
    double mass = oracles::trapezoid(
        [&](double x) { return std::exp(dist::kumaraswamy_log_pdf(x, a1, a2)); },
        1e-9, 1.0 - 1e-9, 200000);
    CHECK(std::fabs(mass - 1.0) < 1e-4);
  }
}

TEST_CASE("stick break: halving fractions and degenerate stick") {
  auto beta = dist::stick_break({0.5, 0.5, 0.5});
  CHECK(beta[0] == doctest::Approx(0.5));
  CHECK(beta[1] == doctest::Approx(0.25));
  CHECK(beta[2] == doctest::Approx(0.125));
  CHECK(beta[3] == doctest::Approx(0.125));

  auto nearly = dist::stick_break({1.0 - 1e-9, 0.5});
  CHECK(nearly[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(nearly[1] < 1e-8);
  CHECK(nearly[2] < 1e-8);

  CHECK_THROWS_AS(dist::stick_break({0.5, 1.5}), Error);
}

TEST_CASE("stick break sums to one and stays positive") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + rng.uniform_int(12);
    std::vector<double> f(static_cast<std::size_t>(k));
    for (double& v : f) v = rng.uniform(1e-6, 1.0 - 1e-6);
    auto beta = dist::stick_break(f);
    double sum = 0.0;
    for (double b : beta) {
      CHECK(b > 0.0);
      sum += b;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);

    // tape version agrees
    Tape t;
    Var fv = t.constant(Tensor({k}, f));
    const Tensor& tb = t.val(dist_ops::stick_break(t, fv));
    for (std::size_t i = 0; i < beta.size(); ++i)
      CHECK(tb[i] == doctest::Approx(beta[i]).epsilon(1e-12));
  }
}

TEST_CASE("mc kl vanishes when q equals the prior") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    Rng rng(11);
    std::vector<double> a1(4, 1.0), a2(4, alpha);
    double kl = kl_sticks_mc(a1, a2, alpha, 10000, rng);
    CHECK(std::fabs(kl) < 0.02);
  }
}

TEST_CASE("mc kl matches trapezoidal quadrature for (2,2) vs Beta(1,1)") {
  double quad = oracles::trapezoid(
      [](double x) {
        double lq = dist::kumaraswamy_log_pdf(x, 2.0, 2.0);
        return std::exp(lq) * (lq - dist::gem_stick_log_pdf(x, 1.0));
      },
      1e-9, 1.0 - 1e-9, 10000);
  Rng rng(13);
  double mc = kl_sticks_mc({2.0}, {2.0}, 1.0, 10000, rng);
  CHECK(std::fabs(mc - quad) < 0.02);
}

TEST_CASE("mc kl respects non-negativity up to noise") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a1, a2;
    int k = 1 + rng.uniform_int(5);
    for (int i = 0; i < k; ++i) {
      a1.push_back(rng.uniform(0.3, 3.0));
      a2.push_back(rng.uniform(0.3, 3.0));
    }
    double alpha = rng.uniform(0.3, 3.0);
    const int n = 2000;
    std::vector<double> draws(n);
    for (int s = 0; s < n; ++s)
      draws[static_cast<std::size_t>(s)] = kl_sticks_mc(a1, a2, alpha, 1, rng);
    double m = oracles::mean(draws);
    double se = oracles::std_error(draws);
    CHECK(m >= -3.0 * se);
  }
}

TEST_CASE("gumbel-softmax density: normalization and tape agreement") {
  // direct evaluation with normalized probabilities
  auto plain_logpdf = [](const std::vector<double>& logits,
                         const std::vector<double>& x, double tau) {
    std::size_t k = x.size();
    double logz = 0.0;
    {
      double mx = *std::max_element(logits.begin(), logits.end());
      double s = 0.0;
      for (double l : logits) s += std::exp(l - mx);
      logz = mx + std::log(s);
    }
    double out = std::lgamma(static_cast<double>(k)) +
                 (static_cast<double>(k) - 1.0) * std::log(tau);
    double denom = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double pi = std::exp(logits[i] - logz);
      out += std::log(pi) - (tau + 1.0) * std::log(x[i]);
      denom += pi * std::pow(x[i], -tau);
    }
    return out - static_cast<double>(k) * std::log(denom);
  };

  // K = 2: integrate over the first coordinate
  {
    double tau = 0.8;
    std::vector<double> logits = {0.4, -0.3};
    double mass = oracles::trapezoid(
        [&](double b) {
          return std::exp(plain_logpdf(logits, {b, 1.0 - b}, tau));
        },
        1e-7, 1.0 - 1e-7, 200000);
    CHECK(std::fabs(mass - 1.0) < 1e-3);
  }
  // K = 3: grid over the 2-simplex interior
  {
    double tau = 1.3;
    std::vector<double> logits = {0.2, 0.0, -0.5};
    int n = 1500;
    double h = 1.0 / n, mass = 0.0;
    for (int i = 1; i < n; ++i)
      for (int j = 1; j < n - i; ++j) {
        double x0 = i * h, x1 = j * h, x2 = 1.0 - x0 - x1;
        mass += std::exp(plain_logpdf(logits, {x0, x1, x2}, tau)) * h * h;
      }
    CHECK(std::fabs(mass - 1.0) < 3e-3);
  }

  // the tape implementation (unnormalized logits) agrees pointwise
  Rng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    int k = 2 + rng.uniform_int(4);
    double tau = rng.uniform(0.2, 3.0);
    std::vector<double> logits(static_cast<std::size_t>(k)), noise(
        static_cast<std::size_t>(k));
    for (double& l : logits) l = rng.uniform(-2.0, 2.0);
    for (double& g : noise) g = rng.gumbel();
    auto x = dist::gumbel_softmax_sample(logits, tau, noise);
    Tape t;
    Var lv = t.constant(Tensor({k}, logits));
    Var xv = t.constant(Tensor({k}, x));
    Var lp = dist_ops::gumbel_softmax_log_pdf(t, lv, t.log(xv), tau);
    CHECK(t.val(lp)[0] ==
          doctest::Approx(plain_logpdf(logits, x, tau)).epsilon(1e-9));
  }
}

TEST_CASE("sampling op gradients match finite differences") {
  Rng rng(23);

  // gumbel-softmax wrt log weights (weighted sum of coordinates)
  {
    std::vector<double> logw0 = {0.3, -0.2, 0.9};
    std::vector<double> noise = {0.1, -0.4, 0.6};
    std::vector<double> cw = {1.0, 2.0, -0.5};
    double tau = 0.7;
    auto value = [&](const std::vector<double>& lw) {
      Tape t;
      auto gs = dist_ops::gumbel_softmax(t, t.constant(Tensor({3}, lw)),
                                         Tensor({3}, noise), tau);
      return t.val(t.sum_all(t.mul(gs.x, t.constant(Tensor({3}, cw)))))[0];
    };
    Tape t;
    Var lw = t.leaf(Tensor({3}, logw0));
    auto gs = dist_ops::gumbel_softmax(t, lw, Tensor({3}, noise), tau);
    t.backward(t.sum_all(t.mul(gs.x, t.constant(Tensor({3}, cw)))));
    CHECK(oracles::max_rel_err(t.grad(lw).data,
                               oracles::finite_diff(value, logw0)) < 1e-4);
  }

  // kumaraswamy wrt (a1, a2)
  {
    std::vector<double> a10 = {1.5, 0.8}, a20 = {2.0, 1.2};
    Tensor u({2}, {0.3, 0.7});
    auto value = [&](const std::vector<double>& a1,
                     const std::vector<double>& a2) {
      Tape t;
      Var x = dist_ops::kumaraswamy(t, t.constant(Tensor({2}, a1)),
                                    t.constant(Tensor({2}, a2)), u);
      return t.val(t.sum_all(x))[0];
    };
    Tape t;
    Var a1 = t.leaf(Tensor({2}, a10));
    Var a2 = t.leaf(Tensor({2}, a20));
    t.backward(t.sum_all(dist_ops::kumaraswamy(t, a1, a2, u)));
    CHECK(oracles::max_rel_err(
              t.grad(a1).data,
              oracles::finite_diff(
                  [&](const std::vector<double>& v) { return value(v, a20); },
                  a10)) < 1e-4);
    CHECK(oracles::max_rel_err(
              t.grad(a2).data,
              oracles::finite_diff(
                  [&](const std::vector<double>& v) { return value(a10, v); },
                  a20)) < 1e-4);
  }

  // stick break wrt fractions (weighted sum of the simplex vector)
  {
    std::vector<double> f0 = {0.3, 0.6, 0.2};
    std::vector<double> cw = {0.5, -1.0, 2.0, 0.7};
    auto value = [&](const std::vector<double>& f) {
      Tape t;
      Var beta = dist_ops::stick_break(t, t.constant(Tensor({3}, f)));
      return t.val(t.sum_all(t.mul(beta, t.constant(Tensor({4}, cw)))))[0];
    };
    Tape t;
    Var f = t.leaf(Tensor({3}, f0));
    Var beta = dist_ops::stick_break(t, f);
    t.backward(t.sum_all(t.mul(beta, t.constant(Tensor({4}, cw)))));
    CHECK(oracles::max_rel_err(t.grad(f).data,
                               oracles::finite_diff(value, f0)) < 1e-4);
  }

  // end to end: kl of sampled sticks wrt stick parameters and alpha
  {
    std::vector<double> a1r0 = {0.4, 0.9}, a2r0 = {0.2, 0.5};
    double ar0 = 0.3;
    Tensor u({2}, {0.45, 0.6});
    auto value = [&](const std::vector<double>& a1r,
                     const std::vector<double>& a2r, double ar) {
      Tape t;
      Var a1 = t.softplus(t.constant(Tensor({2}, a1r)));
      Var a2 = t.softplus(t.constant(Tensor({2}, a2r)));
      Var alpha = t.softplus(t.constant(Tensor({1}, {ar})));
      Var x = dist_ops::kumaraswamy(t, a1, a2, u);
      return t.val(dist_ops::kl_sticks_given(t, x, a1, a2, alpha))[0];
    };
    Tape t;
    Var a1r = t.leaf(Tensor({2}, a1r0));
    Var a2r = t.leaf(Tensor({2}, a2r0));
    Var ar = t.leaf(Tensor({1}, {ar0}));
    Var a1 = t.softplus(a1r);
    Var a2 = t.softplus(a2r);
    Var x = dist_ops::kumaraswamy(t, a1, a2, u);
    t.backward(dist_ops::kl_sticks_given(t, x, a1, a2, t.softplus(ar)));
    CHECK(oracles::max_rel_err(
              t.grad(a1r).data,
              oracles::finite_diff(
                  [&](const std::vector<double>& v) {
                    return value(v, a2r0, ar0);
                  },
                  a1r0)) < 1e-4);
    CHECK(oracles::max_rel_err(
              t.grad(a2r).data,
              oracles::finite_diff(
                  [&](const std::vector<double>& v) {
                    return value(a1r0, v, ar0);
                  },
                  a2r0)) < 1e-4);
    CHECK(oracles::max_rel_err(
              t.grad(ar).data,
              oracles::finite_diff(
                  [&](const std::vector<double>& v) {
                    return value(a1r0, a2r0, v[0]);
                  },
                  {ar0})) < 1e-4);
  }
}
