// Reparameterized distributions: Gumbel-Softmax (Concrete) on the simplex,
// Kumaraswamy sticks, the stick-breaking map, and the Monte-Carlo KL between
// a Kumaraswamy stick posterior and a truncated GEM(alpha) prior.
//
// Tape variants (namespace dist_ops) are differentiable; the plain-double
// variants mirror them for samplers and tests.
#ifndef OPTDISC_DISTRIBUTIONS_HPP
#define OPTDISC_DISTRIBUTIONS_HPP

#include <vector>

#include "optdisc/rng.hpp"
#include "optdisc/tape.hpp"
#include "optdisc/tensor.hpp"

namespace optdisc {

// Stick fractions are clamped to this range before any log; Kumaraswamy
// samples can saturate at 0/1 in double precision.
constexpr double kStickClamp = 1e-6;

// Floor applied to relaxed probabilities before logs in the joint.
constexpr double kLogFloor = 1e-10;

namespace dist {

// softmax((log_weights + noise)/tau); noise is iid Gumbel(0,1)
std::vector<double> gumbel_softmax_sample(const std::vector<double>& log_weights,
                                          double tau,
                                          const std::vector<double>& noise);

// inverse CDF: (1 - (1-u)^(1/a2))^(1/a1), clamped away from {0,1}
double kumaraswamy_sample(double a1, double a2, double u);

// a1*a2*x^(a1-1)*(1-x^a1)^(a2-1)
double kumaraswamy_log_pdf(double x, double a1, double a2);

// Beta(1,alpha): alpha*(1-x)^(alpha-1)
double gem_stick_log_pdf(double x, double alpha);

// K-1 fractions in (0,1) -> K-simplex; last entry is the leftover stick
std::vector<double> stick_break(const std::vector<double>& fractions);

}  // namespace dist

namespace dist_ops {

using ad::Tape;
using ad::Var;

struct GsSample {
  Var x;      // simplex sample, rows on the K-simplex
  Var log_x;  // log of the sample (computed stably from the logits)
};

// logits, noise: (B,K). Rows are independent samples.
GsSample gumbel_softmax(Tape& t, Var logits, const Tensor& noise, double tau);

// Concrete density of rows x given unnormalized logits, at temperature tau.
// log p(x) = lgamma(K) + (K-1) log tau
//          + sum_k [l_k - (tau+1) log x_k] - K logsumexp_k(l_k - tau log x_k)
Var gumbel_softmax_log_pdf(Tape& t, Var logits, Var log_x, double tau);

// u: (n) uniform draws; a1, a2: (n) positive. Returns samples in (0,1),
// clamped to [kStickClamp, 1-kStickClamp].
Var kumaraswamy(Tape& t, Var a1, Var a2, const Tensor& u);

Var kumaraswamy_log_pdf(Tape& t, Var x, Var a1, Var a2);

// elementwise Beta(1,alpha) log density; alpha is scalar
Var gem_stick_log_pdf(Tape& t, Var x, Var alpha);

// fractions: (K-1) in (0,1) -> (K) simplex
Var stick_break(Tape& t, Var fractions);

// sum_k KL(Kumaraswamy(a1_k,a2_k) || Beta(1,alpha)), MC over given stick
// samples (pathwise through x).
Var kl_sticks_given(Tape& t, Var x, Var a1, Var a2, Var alpha);

}  // namespace dist_ops

// Standalone MC estimate with fresh reparameterized samples. a1, a2 are the
// positive stick parameters (length K-1); differentiable callers should use
// kl_sticks_given on a tape instead.
double kl_sticks_mc(const std::vector<double>& a1, const std::vector<double>& a2,
                    double alpha, int n_samples, Rng& rng);

}  // namespace optdisc

#endif
