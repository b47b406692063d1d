#include "optdisc/growth.hpp"

#include <algorithm>

namespace optdisc {

std::vector<double> option_usage(const Dataset& ds, const OptionBank& bank,
                                 int subsample) {
  int n = ds.size();
  if (subsample > 0) n = std::min(n, subsample);
  if (n == 0) throw Error("option_usage: empty dataset");
  int T = ds.meta.T;
  int K = bank.K();
  Tensor states({n * T, ds.meta.state_dim});
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < ds.meta.state_dim; ++d)
        states.at(i * T + t, d) = ds.items[i].states[t][d];
  std::vector<Tensor> pi = policy_prob_rows(bank, states);

  std::vector<long> counts(K, 0);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) {
      int row = i * T + t;
      int a = ds.items[i].actions[t];
      int best = 0;
      double best_p = pi[0].at(row, a);
      for (int k = 1; k < K; ++k) {
        double p = pi[static_cast<std::size_t>(k)].at(row, a);
        if (p > best_p) {  // ties stay with the lowest index
          best_p = p;
          best = k;
        }
      }
      ++counts[static_cast<std::size_t>(best)];
    }
  std::vector<double> usage(K);
  for (int k = 0; k < K; ++k)
    usage[k] = static_cast<double>(counts[k]) / static_cast<double>(n * T);
  return usage;
}

bool should_grow(const std::vector<double>& usage, double delta) {
  double k = static_cast<double>(usage.size());
  for (double u : usage)
    if (u < delta / k) return false;
  return true;
}

namespace {

// (in, out) -> (in, out+1)
void append_col(Tensor& t, const Tensor& col) {
  int in = t.shape[0], out = t.shape[1];
  Tensor next({in, out + 1});
  for (int i = 0; i < in; ++i) {
    for (int j = 0; j < out; ++j) next.at(i, j) = t.at(i, j);
    next.at(i, out) = col[static_cast<std::size_t>(i)];
  }
  t = std::move(next);
}

// (in, out) -> (in+1, out), new row at index `at`
void insert_row(Tensor& t, int at, const Tensor& row) {
  int in = t.shape[0], out = t.shape[1];
  Tensor next({in + 1, out});
  for (int i = 0; i < in + 1; ++i) {
    for (int j = 0; j < out; ++j) {
      if (i < at)
        next.at(i, j) = t.at(i, j);
      else if (i == at)
        next.at(i, j) = row[static_cast<std::size_t>(j)];
      else
        next.at(i, j) = t.at(i - 1, j);
    }
  }
  t = std::move(next);
}

void append_entry(Tensor& t, double v) {
  Tensor next({t.shape[0] + 1});
  for (std::size_t i = 0; i < t.size(); ++i) next[i] = t[i];
  next[t.size()] = v;
  t = std::move(next);
}

}  // namespace

bool expand_model(OptionBank& bank, Encoder& enc, StickPosterior& sticks,
                  Adam& adam, int max_k, Rng& rng) {
  int K = bank.K();
  if (K >= max_k) return false;
  int hp = bank.hidden;
  int he = enc.hidden;

  // new low-level policy
  bank.policy_heads.push_back(make_linear(hp, bank.n_actions, rng));

  // one more termination output
  append_col(bank.term_head.w, init_weight(hp, {hp}, rng));
  append_entry(bank.term_head.b, 0.0);
  adam.edit_moments("term_head.w",
                    [&](Tensor& m) { append_col(m, Tensor({hp}, 0.0)); });
  adam.edit_moments("term_head.b", [&](Tensor& m) { append_entry(m, 0.0); });

  // encoder trunk first layer: input rows for the lengthened eta and h_prev
  Tensor& w0 = enc.trunk.layers[0].w;
  int in_new = w0.shape[0] + 2;
  int eta_row = he + 1 + K;          // end of the eta block
  int h_row = w0.shape[0] + 1;       // end of everything, after eta insert
  insert_row(w0, eta_row, init_weight(in_new, {he}, rng));
  insert_row(w0, h_row, init_weight(in_new, {he}, rng));
  adam.edit_moments("encoder_trunk.0.w", [&](Tensor& m) {
    insert_row(m, eta_row, Tensor({he}, 0.0));
    insert_row(m, h_row, Tensor({he}, 0.0));
  });

  // option head: one more output
  append_col(enc.head_h.w, init_weight(he, {he}, rng));
  append_entry(enc.head_h.b, 0.0);
  adam.edit_moments("encoder_head_h.w",
                    [&](Tensor& m) { append_col(m, Tensor({he}, 0.0)); });
  adam.edit_moments("encoder_head_h.b",
                    [&](Tensor& m) { append_entry(m, 0.0); });

  // one more Kumaraswamy stick
  double raw = softplus_inv(1.0);
  if (sticks.n_sticks() == 0) {
    sticks.a1_raw = Tensor({1}, raw);
    sticks.a2_raw = Tensor({1}, raw);
  } else {
    append_entry(sticks.a1_raw, raw);
    append_entry(sticks.a2_raw, raw);
    adam.edit_moments("sticks.a1_raw",
                      [&](Tensor& m) { append_entry(m, 0.0); });
    adam.edit_moments("sticks.a2_raw",
                      [&](Tensor& m) { append_entry(m, 0.0); });
  }

  enc.K = K + 1;
  return true;
}

}  // namespace optdisc
