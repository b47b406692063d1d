#include "optdisc/model.hpp"

#include <algorithm>
#include <cmath>

namespace optdisc {

using ad::Tape;
using ad::Var;

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// softplus_inv(softplus(x)) == x up to rounding; y must be positive
double softplus_inv(double y) {
  if (y <= 0.0) throw Error("softplus_inv: argument must be positive");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

std::vector<double> StickPosterior::a1() const {
  std::vector<double> out;
  for (double v : a1_raw.data) out.push_back(softplus(v));
  return out;
}

std::vector<double> StickPosterior::a2() const {
  std::vector<double> out;
  for (double v : a2_raw.data) out.push_back(softplus(v));
  return out;
}

OptionBank make_option_bank(const ModelConfig& cfg, Rng& rng) {
  OptionBank bank;
  bank.state_dim = cfg.state_dim;
  bank.n_actions = cfg.n_actions;
  bank.hidden = cfg.policy_hidden;
  bank.policy_trunk =
      make_mlp({cfg.state_dim, cfg.policy_hidden, cfg.policy_hidden}, rng);
  for (int k = 0; k < cfg.k_init; ++k)
    bank.policy_heads.push_back(
        make_linear(cfg.policy_hidden, cfg.n_actions, rng));
  bank.term_trunk =
      make_mlp({cfg.state_dim, cfg.policy_hidden, cfg.policy_hidden}, rng);
  bank.term_head = make_linear(cfg.policy_hidden, cfg.k_init, rng);
  bank.alpha_raw = Tensor({1}, {softplus_inv(cfg.alpha_init)});
  return bank;
}

Encoder make_encoder(const ModelConfig& cfg, Rng& rng) {
  Encoder enc;
  enc.state_dim = cfg.state_dim;
  enc.n_actions = cfg.n_actions;
  enc.hidden = cfg.encoder_hidden;
  enc.K = cfg.k_init;
  enc.lstm = make_lstm(cfg.state_dim + cfg.n_actions, cfg.encoder_hidden, rng);
  int in = cfg.encoder_hidden + 1 + 2 * cfg.k_init;
  enc.trunk = make_mlp({in, cfg.encoder_hidden, cfg.encoder_hidden}, rng);
  enc.head_b = make_linear(cfg.encoder_hidden, 2, rng);
  enc.head_h = make_linear(cfg.encoder_hidden, cfg.k_init, rng);
  return enc;
}

StickPosterior make_stick_posterior(int K) {
  StickPosterior s;
  if (K > 1) {
    double raw = softplus_inv(1.0);  // Kumaraswamy(1,1): uniform sticks
    s.a1_raw = Tensor({K - 1}, raw);
    s.a2_raw = Tensor({K - 1}, raw);
  }
  return s;
}

ParamRefs model_params(OptionBank& bank, Encoder& enc, StickPosterior& sticks,
                       bool learn_alpha) {
  ParamRefs refs;
  auto add_mlp = [&](const std::string& prefix, Mlp& mlp) {
    for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
      refs.emplace_back(prefix + "." + std::to_string(i) + ".w",
                        &mlp.layers[i].w);
      refs.emplace_back(prefix + "." + std::to_string(i) + ".b",
                        &mlp.layers[i].b);
    }
  };
  add_mlp("policy_trunk", bank.policy_trunk);
  for (std::size_t k = 0; k < bank.policy_heads.size(); ++k) {
    refs.emplace_back("policy_head." + std::to_string(k) + ".w",
                      &bank.policy_heads[k].w);
    refs.emplace_back("policy_head." + std::to_string(k) + ".b",
                      &bank.policy_heads[k].b);
  }
  add_mlp("term_trunk", bank.term_trunk);
  refs.emplace_back("term_head.w", &bank.term_head.w);
  refs.emplace_back("term_head.b", &bank.term_head.b);
  if (learn_alpha) refs.emplace_back("alpha_raw", &bank.alpha_raw);
  refs.emplace_back("encoder_lstm.wx", &enc.lstm.wx);
  refs.emplace_back("encoder_lstm.wh", &enc.lstm.wh);
  refs.emplace_back("encoder_lstm.b", &enc.lstm.b);
  add_mlp("encoder_trunk", enc.trunk);
  refs.emplace_back("encoder_head_b.w", &enc.head_b.w);
  refs.emplace_back("encoder_head_b.b", &enc.head_b.b);
  refs.emplace_back("encoder_head_h.w", &enc.head_h.w);
  refs.emplace_back("encoder_head_h.b", &enc.head_h.b);
  if (sticks.n_sticks() > 0) {
    refs.emplace_back("sticks.a1_raw", &sticks.a1_raw);
    refs.emplace_back("sticks.a2_raw", &sticks.a2_raw);
  }
  return refs;
}

Tensor Batch::states_at(int t) const {
  Tensor out({B(), ds->meta.state_dim});
  for (int i = 0; i < B(); ++i)
    for (int d = 0; d < ds->meta.state_dim; ++d)
      out.at(i, d) = item(i).states[t][d];
  return out;
}

Tensor Batch::actions_onehot(int t) const {
  Tensor out({B(), ds->meta.n_actions});
  for (int i = 0; i < B(); ++i) out.at(i, item(i).actions[t]) = 1.0;
  return out;
}

Tensor Batch::encoder_input(int t) const {
  int d = ds->meta.state_dim, a = ds->meta.n_actions;
  Tensor out({B(), d + a});
  for (int i = 0; i < B(); ++i) {
    for (int j = 0; j < d; ++j) out.at(i, j) = item(i).states[t][j];
    out.at(i, d + item(i).actions[t]) = 1.0;
  }
  return out;
}

Batch full_batch(const Dataset& ds) {
  Batch b;
  b.ds = &ds;
  b.idx.resize(ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    b.idx[i] = static_cast<int>(i);
  return b;
}

ModelVars bind_model(Tape& t, const OptionBank& bank, const Encoder& enc,
                     const StickPosterior& sticks, bool learn_alpha,
                     bool track) {
  ModelVars v;
  v.K = bank.K();
  v.A = bank.n_actions;
  v.D = bank.state_dim;
  auto put = [&](const Tensor& tensor, bool tracked) {
    Var var = t.leaf(tensor, tracked);
    if (tracked) v.flat.push_back(var);
    return var;
  };
  for (const Linear& l : bank.policy_trunk.layers) {
    v.pol_trunk_w.push_back(put(l.w, track));
    v.pol_trunk_b.push_back(put(l.b, track));
  }
  for (const Linear& l : bank.policy_heads) {
    v.pol_head_w.push_back(put(l.w, track));
    v.pol_head_b.push_back(put(l.b, track));
  }
  for (const Linear& l : bank.term_trunk.layers) {
    v.term_trunk_w.push_back(put(l.w, track));
    v.term_trunk_b.push_back(put(l.b, track));
  }
  v.term_head_w = put(bank.term_head.w, track);
  v.term_head_b = put(bank.term_head.b, track);
  v.alpha_raw = put(bank.alpha_raw, track && learn_alpha);
  v.lstm_wx = put(enc.lstm.wx, track);
  v.lstm_wh = put(enc.lstm.wh, track);
  v.lstm_b = put(enc.lstm.b, track);
  for (const Linear& l : enc.trunk.layers) {
    v.enc_trunk_w.push_back(put(l.w, track));
    v.enc_trunk_b.push_back(put(l.b, track));
  }
  v.head_b_w = put(enc.head_b.w, track);
  v.head_b_b = put(enc.head_b.b, track);
  v.head_h_w = put(enc.head_h.w, track);
  v.head_h_b = put(enc.head_h.b, track);
  if (sticks.n_sticks() > 0) {
    v.a1_raw = put(sticks.a1_raw, track);
    v.a2_raw = put(sticks.a2_raw, track);
  }
  return v;
}

namespace {

Var trunk_forward(Tape& t, Var x, const std::vector<Var>& ws,
                  const std::vector<Var>& bs) {
  Var h = x;
  for (std::size_t i = 0; i < ws.size(); ++i)
    h = t.relu(ad_ops::linear(t, h, ws[i], bs[i]));
  return h;
}

}  // namespace

Var policy_prob_matrix(Tape& t, const ModelVars& v, const Batch& batch,
                       int step) {
  int B = batch.B();
  Var states = t.constant(batch.states_at(step));
  Var mask = t.constant(batch.actions_onehot(step));
  Var feat = trunk_forward(t, states, v.pol_trunk_w, v.pol_trunk_b);
  std::vector<Var> cols;
  for (int k = 0; k < v.K; ++k) {
    Var logits = ad_ops::linear(t, feat, v.pol_head_w[k], v.pol_head_b[k]);
    Var picked = t.row_sum(t.mul(t.log_softmax_rows(logits), mask));
    cols.push_back(t.reshape(t.exp(picked), {B, 1}));
  }
  return t.concat_cols(cols);
}

Var termination_matrix(Tape& t, const ModelVars& v, const Batch& batch,
                       int step) {
  Var states = t.constant(batch.states_at(step));
  Var feat = trunk_forward(t, states, v.term_trunk_w, v.term_trunk_b);
  return t.sigmoid(ad_ops::linear(t, feat, v.term_head_w, v.term_head_b));
}

Var relaxed_log_joint(Tape& t, const ModelVars& v, const Batch& batch,
                      Var eta, const std::vector<Var>& b,
                      const std::vector<Var>& h) {
  int T = batch.T();
  if (static_cast<int>(b.size()) != T || static_cast<int>(h.size()) != T)
    throw Error("relaxed_log_joint: latent length mismatch");
  auto safe_log = [&](Var x) { return t.log(t.clamp(x, kLogFloor, 2.0)); };

  Var total = safe_log(b[0]);  // zero when b_0 == 1
  total = t.add(total, safe_log(t.matvec(h[0], eta)));
  for (int step = 0; step < T; ++step) {
    Var mix = t.row_sum(t.mul(policy_prob_matrix(t, v, batch, step), h[step]));
    total = t.add(total, safe_log(mix));
  }
  for (int step = 1; step < T; ++step) {
    Var psi = t.row_sum(
        t.mul(termination_matrix(t, v, batch, step), h[step - 1]));
    Var eta_h = t.matvec(h[step], eta);
    Var l1 = t.row_sum(t.abs(t.sub(h[step], h[step - 1])));
    Var same = t.affine(l1, -0.5, 1.0);
    Var stay = t.mul(t.mul(t.affine(b[step], -1.0, 1.0),
                           t.affine(psi, -1.0, 1.0)),
                     same);
    Var leave = t.mul(t.mul(b[step], psi), eta_h);
    total = t.add(total, safe_log(t.add(leave, stay)));
  }
  for (double val : t.val(total).data)
    if (!std::isfinite(val))
      throw NumericError("relaxed_log_joint: non-finite value", "joint");
  return total;
}

PosteriorNoise draw_posterior_noise(int B, int T, int K, bool discrete,
                                    Rng& rng) {
  PosteriorNoise n;
  n.b_gumbel.resize(T);
  n.h_gumbel.resize(T);
  n.b_unif.resize(T);
  n.h_unif.resize(T);
  for (int step = 0; step < T; ++step) {
    if (discrete) {
      if (step >= 1) n.b_unif[step] = rng.uniform_tensor({B}, 0.0, 1.0);
      n.h_unif[step] = rng.uniform_tensor({B}, 0.0, 1.0);
    } else {
      if (step >= 1) n.b_gumbel[step] = rng.gumbel_tensor({B, 2});
      n.h_gumbel[step] = rng.gumbel_tensor({B, K});
    }
  }
  return n;
}

namespace {

// one-hot rows sampled from softmax(logits) via per-row uniforms
Tensor sample_onehot_rows(const Tensor& logits, const Tensor& u) {
  int B = logits.shape[0], K = logits.shape[1];
  Tensor out({B, K});
  for (int i = 0; i < B; ++i) {
    double mx = -1e300;
    for (int k = 0; k < K; ++k) mx = std::max(mx, logits.at(i, k));
    double z = 0.0;
    std::vector<double> p(K);
    for (int k = 0; k < K; ++k) {
      p[k] = std::exp(logits.at(i, k) - mx);
      z += p[k];
    }
    double acc = 0.0;
    int pick = K - 1;
    for (int k = 0; k < K; ++k) {
      acc += p[k] / z;
      if (u[static_cast<std::size_t>(i)] < acc) {
        pick = k;
        break;
      }
    }
    out.at(i, pick) = 1.0;
  }
  return out;
}

}  // namespace

PosteriorSample sample_posterior(Tape& t, const ModelVars& v,
                                 const Batch& batch, Var eta, double tau,
                                 const PosteriorNoise& noise, bool discrete,
                                 const GivenLatents* given) {
  if (tau <= 0.0) throw Error("sample_posterior: tau must be positive");
  int B = batch.B(), T = batch.T(), K = v.K;
  int H = t.val(v.lstm_b).shape[0] / 4;

  std::vector<Var> lstm_h(T);
  ad_ops::LstmVars lstm{v.lstm_wx, v.lstm_wh, v.lstm_b};
  ad_ops::LstmState state{t.constant(Tensor({B, H}, 0.0)),
                          t.constant(Tensor({B, H}, 0.0))};
  for (int step = T - 1; step >= 0; --step) {
    Var x = t.constant(batch.encoder_input(step));
    state = ad_ops::lstm_step(t, x, state, lstm, H);
    lstm_h[step] = state.h;
  }

  PosteriorSample out;
  out.b.resize(T);
  out.b_pair.resize(T);
  out.h.resize(T);
  out.logits_b.resize(T);
  out.logits_h.resize(T);
  Var log_q = t.constant(Tensor({B}, 0.0));
  Var ones_col = t.constant(Tensor({B, 1}, 1.0));
  Var b_prev_col = t.constant(Tensor({B, 1}, 0.0));
  Var h_prev = t.constant(Tensor({B, K}, 0.0));
  Var eta_rep = t.repeat_row(eta, B);

  auto pick_log_pmf = [&](Var logits, const Tensor& onehot) {
    return t.row_sum(t.mul(t.log_softmax_rows(logits), t.constant(onehot)));
  };
  auto relaxed_log_pdf_at = [&](Var logits, Var x) {
    Var log_x = t.log(t.clamp(x, 1e-300, 1.0));
    return dist_ops::gumbel_softmax_log_pdf(t, logits, log_x, tau);
  };

  for (int step = 0; step < T; ++step) {
    Var in = t.concat_cols({lstm_h[step], b_prev_col, eta_rep, h_prev});
    Var feat = trunk_forward(t, in, v.enc_trunk_w, v.enc_trunk_b);
    out.logits_h[step] = ad_ops::linear(t, feat, v.head_h_w, v.head_h_b);
    if (step >= 1)
      out.logits_b[step] = ad_ops::linear(t, feat, v.head_b_w, v.head_b_b);

    if (step == 0) {
      out.b[0] = t.constant(Tensor({B}, 1.0));  // b_0 fixed to 1, not sampled
    } else {
      Var logits = out.logits_b[step];
      if (given != nullptr) {
        out.b_pair[step] = t.constant(given->b_pair[step]);
        log_q = t.add(log_q, discrete
                                 ? pick_log_pmf(logits, given->b_pair[step])
                                 : relaxed_log_pdf_at(logits,
                                                      out.b_pair[step]));
      } else if (discrete) {
        Tensor pair({B, 2});
        const Tensor& lv = t.val(logits);
        for (int i = 0; i < B; ++i) {
          double p1 = 1.0 / (1.0 + std::exp(lv.at(i, 1) - lv.at(i, 0)));
          pair.at(i, noise.b_unif[step][static_cast<std::size_t>(i)] < p1 ? 0
                                                                          : 1) =
              1.0;
        }
        out.b_pair[step] = t.constant(pair);
        log_q = t.add(log_q, pick_log_pmf(logits, pair));
      } else {
        auto gs = dist_ops::gumbel_softmax(t, logits, noise.b_gumbel[step], tau);
        out.b_pair[step] = gs.x;
        log_q = t.add(log_q,
                      dist_ops::gumbel_softmax_log_pdf(t, logits, gs.log_x, tau));
      }
      out.b[step] = t.reshape(t.slice_cols(out.b_pair[step], 0, 1), {B});
    }

    Var logits_h = out.logits_h[step];
    if (given != nullptr) {
      out.h[step] = t.constant(given->h[step]);
      log_q = t.add(log_q, discrete
                               ? pick_log_pmf(logits_h, given->h[step])
                               : relaxed_log_pdf_at(logits_h, out.h[step]));
    } else if (discrete) {
      Tensor onehot = sample_onehot_rows(t.val(logits_h), noise.h_unif[step]);
      out.h[step] = t.constant(onehot);
      log_q = t.add(log_q, pick_log_pmf(logits_h, onehot));
    } else {
      auto gs = dist_ops::gumbel_softmax(t, logits_h, noise.h_gumbel[step], tau);
      out.h[step] = gs.x;
      log_q = t.add(log_q,
                    dist_ops::gumbel_softmax_log_pdf(t, logits_h, gs.log_x, tau));
    }

    b_prev_col = step == 0 ? ones_col
                           : t.slice_cols(out.b_pair[step], 0, 1);
    h_prev = out.h[step];
  }
  out.log_q = log_q;
  return out;
}

Var entropy_bonus(Tape& t, const std::vector<ad::Var>& h) {
  if (h.empty()) throw Error("entropy_bonus: no samples");
  Var acc = h[0];
  for (std::size_t i = 1; i < h.size(); ++i) acc = t.add(acc, h[i]);
  Var hbar = t.affine(acc, 1.0 / static_cast<double>(h.size()), 0.0);
  Var plogp = t.mul(hbar, t.log(t.clamp(hbar, 1e-12, 1.0)));
  return t.affine(t.sum_all(plogp), -1.0, 0.0);
}

namespace {

double logsumexp_vec(const std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double z = 0.0;
  for (double x : v) z += std::exp(x - mx);
  return mx + std::log(z);
}

// pi[k](t,a) and psi(t,k) for rows s_0..s_{T-1}, evaluated off-tape
void eval_bank_rows(const OptionBank& bank, const Tensor& states,
                    std::vector<Tensor>& pi, Tensor& psi) {
  Tape t;
  Var s = t.constant(states);
  Var feat = s;
  for (const Linear& l : bank.policy_trunk.layers)
    feat = t.relu(t.add_rowvec(t.matmul(feat, t.constant(l.w)),
                               t.constant(l.b)));
  pi.clear();
  for (const Linear& head : bank.policy_heads) {
    Var logits = t.add_rowvec(t.matmul(feat, t.constant(head.w)),
                              t.constant(head.b));
    pi.push_back(t.val(t.softmax_rows(logits)));
  }
  Var tf = s;
  for (const Linear& l : bank.term_trunk.layers)
    tf = t.relu(t.add_rowvec(t.matmul(tf, t.constant(l.w)), t.constant(l.b)));
  psi = t.val(t.sigmoid(t.add_rowvec(t.matmul(tf, t.constant(bank.term_head.w)),
                                     t.constant(bank.term_head.b))));
}

}  // namespace

double marginal_log_likelihood(const Trajectory& traj,
                               const std::vector<double>& eta,
                               const OptionBank& bank) {
  int T = traj.length();
  int K = bank.K();
  if (static_cast<int>(eta.size()) != K)
    throw Error("marginal_log_likelihood: eta length mismatch");
  Tensor states({T, bank.state_dim});
  for (int t = 0; t < T; ++t)
    for (int d = 0; d < bank.state_dim; ++d)
      states.at(t, d) = traj.states[t][d];
  std::vector<Tensor> pi;
  Tensor psi;
  eval_bank_rows(bank, states, pi, psi);

  auto log_pi = [&](int t, int k) {
    return std::log(pi[static_cast<std::size_t>(k)].at(t, traj.actions[t]));
  };

  std::vector<double> la(K);
  for (int k = 0; k < K; ++k) la[k] = std::log(eta[k]) + log_pi(0, k);
  std::vector<double> nxt(K), terms(K);
  for (int t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      for (int kp = 0; kp < K; ++kp) {
        double p = psi.at(t, kp) * eta[k] +
                   (kp == k ? 1.0 - psi.at(t, kp) : 0.0);
        terms[kp] = la[kp] + std::log(p);
      }
      nxt[k] = logsumexp_vec(terms) + log_pi(t, k);
    }
    la = nxt;
  }
  return logsumexp_vec(la);
}

std::vector<std::vector<double>> policy_probs(const OptionBank& bank,
                                              const std::vector<double>& state) {
  if (static_cast<int>(state.size()) != bank.state_dim)
    throw Error("policy_probs: state dim mismatch");
  Tensor s({1, bank.state_dim}, state);
  std::vector<Tensor> pi;
  Tensor psi;
  eval_bank_rows(bank, s, pi, psi);
  std::vector<std::vector<double>> out;
  for (const Tensor& p : pi) out.push_back(p.data);
  return out;
}

std::vector<double> termination_probs(const OptionBank& bank,
                                      const std::vector<double>& state) {
  if (static_cast<int>(state.size()) != bank.state_dim)
    throw Error("termination_probs: state dim mismatch");
  Tensor s({1, bank.state_dim}, state);
  std::vector<Tensor> pi;
  Tensor psi;
  eval_bank_rows(bank, s, pi, psi);
  return psi.data;
}

std::vector<Tensor> policy_prob_rows(const OptionBank& bank,
                                     const Tensor& states) {
  std::vector<Tensor> pi;
  Tensor psi;
  eval_bank_rows(bank, states, pi, psi);
  return pi;
}

Tensor termination_prob_rows(const OptionBank& bank, const Tensor& states) {
  std::vector<Tensor> pi;
  Tensor psi;
  eval_bank_rows(bank, states, pi, psi);
  return psi;
}

std::vector<double> draw_stick_noise(int K, Rng& rng) {
  std::vector<double> u;
  for (int k = 0; k + 1 < K; ++k) u.push_back(rng.uniform());
  return u;
}

ElboResult batch_elbo(Tape& t, const ModelVars& v, const Batch& batch,
                      double tau, long n_total,
                      const std::vector<double>& stick_u,
                      const PosteriorNoise& noise, bool discrete) {
  if (batch.B() < 1) throw Error("batch_elbo: empty batch");
  ElboResult r;
  if (v.K > 1) {
    if (static_cast<int>(stick_u.size()) != v.K - 1)
      throw Error("batch_elbo: stick noise length mismatch");
    Var a1 = t.softplus(v.a1_raw);
    Var a2 = t.softplus(v.a2_raw);
    Var x = dist_ops::kumaraswamy(t, a1, a2, Tensor({v.K - 1}, stick_u));
    r.eta = dist_ops::stick_break(t, x);
    Var alpha = t.softplus(v.alpha_raw);
    r.kl = dist_ops::kl_sticks_given(t, x, a1, a2, alpha);
  } else {
    r.eta = t.constant(Tensor({1}, {1.0}));
    r.kl = t.constant(Tensor({1}, {0.0}));
  }
  r.post = sample_posterior(t, v, batch, r.eta, tau, noise, discrete);
  r.joint = relaxed_log_joint(t, v, batch, r.eta, r.post.b, r.post.h);
  r.log_q = r.post.log_q;
  for (double val : t.val(r.log_q).data)
    if (!std::isfinite(val))
      throw NumericError("batch_elbo: non-finite log q", "entropy");
  if (!std::isfinite(t.val(r.kl)[0]))
    throw NumericError("batch_elbo: non-finite kl", "kl");
  r.objective = t.sub(t.mean_all(t.sub(r.joint, r.log_q)),
                      t.affine(r.kl, 1.0 / static_cast<double>(n_total), 0.0));
  return r;
}

double relaxed_joint_value(const Trajectory& traj,
                           const std::vector<double>& eta,
                           const OptionBank& bank, const Encoder& enc,
                           const std::vector<double>& b,
                           const std::vector<std::vector<double>>& h) {
  Dataset ds;
  ds.meta = {1, bank.state_dim, bank.n_actions, traj.length()};
  ds.items.push_back(traj);
  Batch batch = full_batch(ds);
  Tape t;
  StickPosterior sticks = make_stick_posterior(bank.K());
  ModelVars v = bind_model(t, bank, enc, sticks, false, false);
  Var eta_v = t.constant(Tensor({bank.K()}, eta));
  std::vector<Var> bv, hv;
  for (int step = 0; step < traj.length(); ++step) {
    bv.push_back(t.constant(Tensor({1}, {b[step]})));
    hv.push_back(t.constant(Tensor({1, bank.K()}, h[step])));
  }
  return t.val(relaxed_log_joint(t, v, batch, eta_v, bv, hv))[0];
}

std::vector<double> discrete_elbo_samples(const Trajectory& traj,
                                          const std::vector<double>& eta,
                                          const OptionBank& bank,
                                          const Encoder& enc, int n_samples,
                                          Rng& rng) {
  Dataset ds;
  ds.meta = {1, bank.state_dim, bank.n_actions, traj.length()};
  ds.items.push_back(traj);
  Batch batch = full_batch(ds);
  std::vector<double> out;
  for (int s = 0; s < n_samples; ++s) {
    Tape t;
    StickPosterior sticks = make_stick_posterior(bank.K());
    ModelVars v = bind_model(t, bank, enc, sticks, false, false);
    Var eta_v = t.constant(Tensor({bank.K()}, eta));
    PosteriorNoise noise =
        draw_posterior_noise(1, traj.length(), bank.K(), true, rng);
    PosteriorSample post =
        sample_posterior(t, v, batch, eta_v, 1.0, noise, true);
    Var joint = relaxed_log_joint(t, v, batch, eta_v, post.b, post.h);
    out.push_back(t.val(joint)[0] - t.val(post.log_q)[0]);
  }
  return out;
}

}  // namespace optdisc
