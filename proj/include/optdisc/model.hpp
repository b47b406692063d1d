// The generative option model and its amortized posterior.
//
// Generative side: a state-independent high-level weight vector eta with a
// truncated stick-breaking prior of Beta(1,alpha) sticks, K per-option
// policies sharing a trunk, and one termination network with K sigmoid
// outputs. Posterior side: non-amortized Kumaraswamy sticks for q(eta), and
// an autoregressive encoder for q(zeta | eta, xi) that parses each
// trajectory with a reversed LSTM so step t conditions only on the future.
//
// Log-joint of one trajectory, with environment terms dropped:
//   log b_0 + log(eta . h_0) + sum_t log(pi(a_t|s_t) . h_t)
//   + sum_{t>=1} log[ b_t psi_prev (eta . h_t)
//                     + (1-b_t)(1-psi_prev)(1 - |h_t - h_{t-1}|_1 / 2) ]
// where psi_prev = psi(s_t) . h_{t-1}. On binary b and one-hot h this equals
// the unrelaxed objective exactly; probabilities are floored at kLogFloor
// before logs because the transition factor vanishes at vertices.
#ifndef OPTDISC_MODEL_HPP
#define OPTDISC_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "optdisc/distributions.hpp"
#include "optdisc/nn.hpp"
#include "optdisc/rng.hpp"
#include "optdisc/tape.hpp"
#include "optdisc/trajectory.hpp"

namespace optdisc {

struct ModelConfig {
  int state_dim = 2;
  int n_actions = 2;
  int k_init = 1;
  int policy_hidden = 16;
  int encoder_hidden = 32;
  double alpha_init = 1.0;
  bool learn_alpha = true;
};

double softplus(double x);
double softplus_inv(double y);

struct OptionBank {
  Mlp policy_trunk;                  // state_dim -> h -> h, shared
  std::vector<Linear> policy_heads;  // h -> A, one per option
  Mlp term_trunk;                    // state_dim -> h -> h
  Linear term_head;                  // h -> K, sigmoid at use
  Tensor alpha_raw;                  // {1}; alpha = softplus(alpha_raw)

  int state_dim = 0, n_actions = 0, hidden = 0;
  int K() const { return static_cast<int>(policy_heads.size()); }
  double alpha() const { return softplus(alpha_raw[0]); }
};

struct Encoder {
  LstmCell lstm;  // input (state_dim + A)
  Mlp trunk;      // (H + 1 + K + K) -> h -> h; inputs [lstm, b_prev, eta, h_prev]
  Linear head_b;  // h -> 2
  Linear head_h;  // h -> K
  int state_dim = 0, n_actions = 0, hidden = 0, K = 0;
};

// q(eta): K-1 Kumaraswamy sticks, parameters softplus-mapped.
struct StickPosterior {
  Tensor a1_raw, a2_raw;  // {K-1}; absent fields for K == 1
  int n_sticks() const { return a1_raw.data.empty() ? 0 : a1_raw.shape[0]; }
  std::vector<double> a1() const;
  std::vector<double> a2() const;
};

OptionBank make_option_bank(const ModelConfig& cfg, Rng& rng);
Encoder make_encoder(const ModelConfig& cfg, Rng& rng);
StickPosterior make_stick_posterior(int K);

// Canonical parameter order shared by the optimizer and checkpoints.
ParamRefs model_params(OptionBank& bank, Encoder& enc, StickPosterior& sticks,
                       bool learn_alpha);

// A minibatch view over a dataset; all trajectories share T.
struct Batch {
  const Dataset* ds = nullptr;
  std::vector<int> idx;
  int B() const { return static_cast<int>(idx.size()); }
  int T() const { return ds->meta.T; }
  const Trajectory& item(int i) const { return ds->items[idx[i]]; }
  Tensor states_at(int t) const;      // (B, D)
  Tensor actions_onehot(int t) const; // (B, A)
  Tensor encoder_input(int t) const;  // (B, D + A)
};

Batch full_batch(const Dataset& ds);

// Tape leaves for every model parameter, in model_params order.
struct ModelVars {
  std::vector<ad::Var> pol_trunk_w, pol_trunk_b;
  std::vector<ad::Var> pol_head_w, pol_head_b;
  std::vector<ad::Var> term_trunk_w, term_trunk_b;
  ad::Var term_head_w, term_head_b;
  ad::Var alpha_raw;
  ad::Var lstm_wx, lstm_wh, lstm_b;
  std::vector<ad::Var> enc_trunk_w, enc_trunk_b;
  ad::Var head_b_w, head_b_b, head_h_w, head_h_b;
  ad::Var a1_raw, a2_raw;  // invalid when K == 1

  std::vector<ad::Var> flat;  // aligned with model_params(...)
  int K = 0, A = 0, D = 0;
};

ModelVars bind_model(ad::Tape& t, const OptionBank& bank, const Encoder& enc,
                     const StickPosterior& sticks, bool learn_alpha,
                     bool track);

// pi_k(a_t | s_t) for all options: (B, K)
ad::Var policy_prob_matrix(ad::Tape& t, const ModelVars& v, const Batch& batch,
                           int step);
// psi_k(s_t) for all options: (B, K)
ad::Var termination_matrix(ad::Tape& t, const ModelVars& v, const Batch& batch,
                           int step);

// b: T vars of (B) with b[0] == 1; h: T vars of (B, K). Returns (B).
ad::Var relaxed_log_joint(ad::Tape& t, const ModelVars& v, const Batch& batch,
                          ad::Var eta, const std::vector<ad::Var>& b,
                          const std::vector<ad::Var>& h);

struct PosteriorNoise {
  std::vector<Tensor> b_gumbel;  // T of (B,2); [0] unused
  std::vector<Tensor> h_gumbel;  // T of (B,K)
  std::vector<Tensor> b_unif;    // discrete mode: T of (B); [0] unused
  std::vector<Tensor> h_unif;    // T of (B)
};

PosteriorNoise draw_posterior_noise(int B, int T, int K, bool discrete,
                                    Rng& rng);

// Latents to evaluate instead of sampling (density re-evaluation).
struct GivenLatents {
  std::vector<Tensor> b_pair;  // T of (B,2); [0] ignored
  std::vector<Tensor> h;       // T of (B,K)
};

struct PosteriorSample {
  std::vector<ad::Var> b;       // (B); b[0] is constant ones
  std::vector<ad::Var> b_pair;  // (B,2); [0] invalid
  std::vector<ad::Var> h;       // (B,K)
  std::vector<ad::Var> logits_b, logits_h;  // head outputs per step
  ad::Var log_q;                // (B)
};

// Runs the reversed LSTM then samples b_t, h_t autoregressively. In
// relaxed mode samples are Gumbel-Softmax draws at temperature tau and
// log_q is their Concrete density; in discrete mode samples are binary /
// one-hot constants and log_q is the discrete log pmf.
PosteriorSample sample_posterior(ad::Tape& t, const ModelVars& v,
                                 const Batch& batch, ad::Var eta, double tau,
                                 const PosteriorNoise& noise, bool discrete,
                                 const GivenLatents* given = nullptr);

// Sum over the batch of the entropy of each trajectory's time-averaged
// option vector.
ad::Var entropy_bonus(ad::Tape& t, const std::vector<ad::Var>& h);

// Exact marginal log-likelihood of one trajectory under the bank and a
// fixed eta, by dynamic programming over the latent chain in log space.
double marginal_log_likelihood(const Trajectory& traj,
                               const std::vector<double>& eta,
                               const OptionBank& bank);

// Plain-value network evaluations.
std::vector<std::vector<double>> policy_probs(const OptionBank& bank,
                                              const std::vector<double>& state);
std::vector<double> termination_probs(const OptionBank& bank,
                                      const std::vector<double>& state);

// Batched variants over a matrix of states: K tensors of (M, A), and (M, K).
std::vector<Tensor> policy_prob_rows(const OptionBank& bank,
                                     const Tensor& states);
Tensor termination_prob_rows(const OptionBank& bank, const Tensor& states);

struct ElboResult {
  ad::Var objective;  // {1}: mean_i(joint_i - log q_i) - kl / n_total
  ad::Var joint;      // (B)
  ad::Var log_q;      // (B)
  ad::Var kl;         // {1}
  ad::Var eta;        // (K)
  PosteriorSample post;
};

// Single-sample relaxed ELBO for a minibatch: one shared eta draw, one
// zeta draw per trajectory. Raises NumericError naming the component
// (joint / entropy / kl) on non-finite values.
ElboResult batch_elbo(ad::Tape& t, const ModelVars& v, const Batch& batch,
                      double tau, long n_total,
                      const std::vector<double>& stick_u,
                      const PosteriorNoise& noise, bool discrete = false);

std::vector<double> draw_stick_noise(int K, Rng& rng);

// Convenience single-trajectory forms used by tests and evaluation.
double relaxed_joint_value(const Trajectory& traj,
                           const std::vector<double>& eta,
                           const OptionBank& bank, const Encoder& enc,
                           const std::vector<double>& b,
                           const std::vector<std::vector<double>>& h);

// Per-sample values of log p(zeta, xi | eta) - log q(zeta | eta, xi) with
// discrete zeta draws from the encoder.
std::vector<double> discrete_elbo_samples(const Trajectory& traj,
                                          const std::vector<double>& eta,
                                          const OptionBank& bank,
                                          const Encoder& enc, int n_samples,
                                          Rng& rng);

}  // namespace optdisc

#endif
