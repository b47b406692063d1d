#include "optdisc/nn.hpp"

#include <cmath>
#include <functional>

namespace optdisc {

Tensor init_weight(int fan_in, std::vector<int> shape, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return rng.uniform_tensor(std::move(shape), -bound, bound);
}

Linear make_linear(int in, int out, Rng& rng) {
  Linear l;
  l.w = init_weight(in, {in, out}, rng);
  l.b = Tensor({out}, 0.0);
  return l;
}

Mlp make_mlp(const std::vector<int>& widths, Rng& rng) {
  Mlp m;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    m.layers.push_back(make_linear(widths[i], widths[i + 1], rng));
  return m;
}

LstmCell make_lstm(int in, int hidden, Rng& rng) {
  LstmCell c;
  c.wx = init_weight(in, {in, 4 * hidden}, rng);
  c.wh = init_weight(hidden, {hidden, 4 * hidden}, rng);
  c.b = Tensor({4 * hidden}, 0.0);
  c.hidden = hidden;
  return c;
}

namespace ad_ops {

ad::Var linear(ad::Tape& t, ad::Var x, ad::Var w, ad::Var b) {
  return t.add_rowvec(t.matmul(x, w), b);
}

ad::Var mlp_forward(ad::Tape& t, ad::Var x, const std::vector<ad::Var>& ws,
                    const std::vector<ad::Var>& bs) {
  ad::Var h = x;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    h = linear(t, h, ws[i], bs[i]);
    if (i + 1 < ws.size()) h = t.relu(h);
  }
  return h;
}

LstmState lstm_step(ad::Tape& t, ad::Var x, LstmState prev, const LstmVars& p,
                    int hidden) {
  ad::Var gates =
      t.add_rowvec(t.add(t.matmul(x, p.wx), t.matmul(prev.h, p.wh)), p.b);
  ad::Var i = t.sigmoid(t.slice_cols(gates, 0, hidden));
  ad::Var f = t.sigmoid(t.slice_cols(gates, hidden, 2 * hidden));
  ad::Var g = t.tanh(t.slice_cols(gates, 2 * hidden, 3 * hidden));
  ad::Var o = t.sigmoid(t.slice_cols(gates, 3 * hidden, 4 * hidden));
  ad::Var c = t.add(t.mul(f, prev.c), t.mul(i, g));
  ad::Var h = t.mul(o, t.tanh(c));
  return {h, c};
}

}  // namespace ad_ops

std::vector<ad::Var> insert_params(ad::Tape& t, const ParamRefs& refs) {
  std::vector<ad::Var> out;
  out.reserve(refs.size());
  for (const auto& [name, tensor] : refs) out.push_back(t.leaf(*tensor, true));
  return out;
}

double global_norm(const std::vector<Tensor>& grads) {
  double sq = 0.0;
  for (const Tensor& g : grads)
    for (double v : g.data) sq += v * v;
  return std::sqrt(sq);
}

void Adam::ensure_slot(const std::string& name, const std::vector<int>& shape) {
  auto it = m_.find(name);
  if (it == m_.end())
    m_.emplace(name, std::make_pair(Tensor(shape, 0.0), Tensor(shape, 0.0)));
}

void Adam::edit_moments(const std::string& name,
                        const std::function<void(Tensor&)>& edit) {
  auto it = m_.find(name);
  if (it == m_.end()) return;
  edit(it->second.first);
  edit(it->second.second);
}

void Adam::step(const ParamRefs& refs, const std::vector<Tensor>& grads) {
  if (refs.size() != grads.size())
    throw Error("adam: gradient count mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (double v : grads[i].data)
      if (!std::isfinite(v))
        throw NumericError("adam: non-finite gradient for " + refs[i].first,
                           refs[i].first);
    if (!grads[i].same_shape(*refs[i].second))
      throw Error("adam: gradient shape mismatch for " + refs[i].first);
  }

  double scale = 1.0;
  if (cfg_.clip_norm > 0.0) {
    double norm = global_norm(grads);
    if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
  }

  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    Tensor& p = *refs[i].second;
    ensure_slot(refs[i].first, p.shape);
    auto& [m, v] = m_[refs[i].first];
    if (!m.same_shape(p))
      throw Error("adam: stale moment shape for " + refs[i].first);
    for (std::size_t j = 0; j < p.size(); ++j) {
      double g = grads[i][j] * scale;
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      p[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace optdisc
