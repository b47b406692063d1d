#include "optdisc/distributions.hpp"

#include <algorithm>
#include <cmath>

namespace optdisc {

namespace dist {

std::vector<double> gumbel_softmax_sample(const std::vector<double>& log_weights,
                                          double tau,
                                          const std::vector<double>& noise) {
  if (tau <= 0.0) throw Error("gumbel_softmax: tau must be positive");
  if (noise.size() != log_weights.size())
    throw Error("gumbel_softmax: noise length mismatch");
  std::size_t k = log_weights.size();
  std::vector<double> z(k);
  double mx = -1e300;
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(log_weights[i]))
      throw Error("gumbel_softmax: non-finite log weight");
    z[i] = (log_weights[i] + noise[i]) / tau;
    mx = std::max(mx, z[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    z[i] = std::exp(z[i] - mx);
    sum += z[i];
  }
  for (double& v : z) v /= sum;
  return z;
}

double kumaraswamy_sample(double a1, double a2, double u) {
  if (a1 <= 0.0 || a2 <= 0.0)
    throw Error("kumaraswamy: parameters must be positive");
  if (u <= 0.0 || u >= 1.0) throw Error("kumaraswamy: u must be in (0,1)");
  double t = std::exp(std::log1p(-u) / a2);   // (1-u)^(1/a2)
  double x = std::exp(std::log1p(-t) / a1);   // (1-t)^(1/a1)
  return std::min(std::max(x, kStickClamp), 1.0 - kStickClamp);
}

double kumaraswamy_log_pdf(double x, double a1, double a2) {
  if (a1 <= 0.0 || a2 <= 0.0)
    throw Error("kumaraswamy: parameters must be positive");
  double xa1 = std::exp(a1 * std::log(x));
  double one_minus = std::max(1.0 - xa1, 1e-300);
  return std::log(a1) + std::log(a2) + (a1 - 1.0) * std::log(x) +
         (a2 - 1.0) * std::log(one_minus);
}

double gem_stick_log_pdf(double x, double alpha) {
  return std::log(alpha) + (alpha - 1.0) * std::log1p(-x);
}

std::vector<double> stick_break(const std::vector<double>& fractions) {
  for (double f : fractions)
    if (f <= 0.0 || f >= 1.0)
      throw Error("stick_break: fraction outside (0,1)");
  std::vector<double> beta(fractions.size() + 1);
  double rest = 1.0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    beta[k] = fractions[k] * rest;
    rest *= 1.0 - fractions[k];
  }
  beta.back() = rest;
  return beta;
}

}  // namespace dist

namespace dist_ops {

GsSample gumbel_softmax(Tape& t, Var logits, const Tensor& noise, double tau) {
  if (tau <= 0.0) throw Error("gumbel_softmax: tau must be positive");
  if (!t.val(logits).same_shape(noise))
    throw Error("gumbel_softmax: noise shape mismatch");
  Var z = t.affine(t.add(logits, t.constant(noise)), 1.0 / tau, 0.0);
  return {t.softmax_rows(z), t.log_softmax_rows(z)};
}

Var gumbel_softmax_log_pdf(Tape& t, Var logits, Var log_x, double tau) {
  const Tensor& l = t.val(logits);
  int k = l.rank() == 2 ? l.shape[1] : l.shape[0];
  Var a = t.sub(logits, t.affine(log_x, tau + 1.0, 0.0));  // l - (tau+1) log x
  Var b = t.sub(logits, t.affine(log_x, tau, 0.0));        // l - tau log x
  Var row = l.rank() == 2 ? t.row_sum(a) : t.sum_all(a);
  Var lse = t.logsumexp_rows(b);
  double c = std::lgamma(static_cast<double>(k)) + (k - 1) * std::log(tau);
  return t.affine(t.sub(row, t.affine(lse, static_cast<double>(k), 0.0)), 1.0,
                  c);
}

Var kumaraswamy(Tape& t, Var a1, Var a2, const Tensor& u) {
  for (double v : u.data)
    if (v <= 0.0 || v >= 1.0) throw Error("kumaraswamy: u must be in (0,1)");
  for (double v : t.val(a1).data)
    if (v <= 0.0) throw Error("kumaraswamy: a1 must be positive");
  for (double v : t.val(a2).data)
    if (v <= 0.0) throw Error("kumaraswamy: a2 must be positive");
  Tensor log1mu = u;
  for (double& v : log1mu.data) v = std::log1p(-v);
  // (1-u)^(1/a2)
  Var w = t.exp(t.div(t.constant(log1mu), a2));
  // (1-w)^(1/a1)
  Var log1mw = t.log(t.clamp(t.affine(w, -1.0, 1.0), 1e-300, 1.0));
  Var x = t.exp(t.div(log1mw, a1));
  return t.clamp(x, kStickClamp, 1.0 - kStickClamp);
}

Var kumaraswamy_log_pdf(Tape& t, Var x, Var a1, Var a2) {
  Var log_x = t.log(x);
  Var xa1 = t.exp(t.mul(a1, log_x));
  Var log_one_minus = t.log(t.clamp(t.affine(xa1, -1.0, 1.0), 1e-300, 1.0));
  Var one = t.constant(Tensor(t.val(x).shape, 1.0));
  return t.add(t.add(t.log(a1), t.log(a2)),
               t.add(t.mul(t.sub(a1, one), log_x),
                     t.mul(t.sub(a2, one), log_one_minus)));
}

Var gem_stick_log_pdf(Tape& t, Var x, Var alpha) {
  int n = static_cast<int>(t.val(x).size());
  Var a = t.broadcast_scalar(alpha, n);
  Var log1mx = t.log(t.clamp(t.affine(x, -1.0, 1.0), 1e-300, 1.0));
  Var one = t.constant(Tensor({n}, 1.0));
  return t.add(t.log(a), t.mul(t.sub(a, one), log1mx));
}

Var stick_break(Tape& t, Var fractions) {
  const Tensor& f = t.val(fractions);
  if (f.rank() != 1) throw Error("stick_break: expects rank-1 fractions");
  for (double v : f.data)
    if (v <= 0.0 || v >= 1.0)
      throw Error("stick_break: fraction outside (0,1)");
  int km1 = f.shape[0];
  Var log1mf = t.log(t.affine(fractions, -1.0, 1.0));
  Var cum = t.cumsum(log1mf);  // inclusive prefix sums of log(1-f)
  Var leftover = t.exp(t.slice_cols(cum, km1 - 1, km1));
  Var head;
  if (km1 == 1) {
    head = fractions;
  } else {
    // exclusive prefix: [0, cum_0, ..., cum_{K-3}]
    Var excl = t.concat_cols(
        {t.constant(Tensor({1}, 0.0)), t.slice_cols(cum, 0, km1 - 1)});
    head = t.mul(fractions, t.exp(excl));
  }
  return t.concat_cols({head, leftover});
}

Var kl_sticks_given(Tape& t, Var x, Var a1, Var a2, Var alpha) {
  Var lq = kumaraswamy_log_pdf(t, x, a1, a2);
  Var lp = gem_stick_log_pdf(t, x, alpha);
  return t.sum_all(t.sub(lq, lp));
}

}  // namespace dist_ops

double kl_sticks_mc(const std::vector<double>& a1, const std::vector<double>& a2,
                    double alpha, int n_samples, Rng& rng) {
  if (n_samples < 1) throw Error("kl_sticks_mc: n_samples must be >= 1");
  if (a1.size() != a2.size()) throw Error("kl_sticks_mc: parameter mismatch");
  double acc = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t k = 0; k < a1.size(); ++k) {
      double x = dist::kumaraswamy_sample(a1[k], a2[k], rng.uniform());
      acc += dist::kumaraswamy_log_pdf(x, a1[k], a2[k]) -
             dist::gem_stick_log_pdf(x, alpha);
    }
  }
  return acc / static_cast<double>(n_samples);
}

}  // namespace optdisc
