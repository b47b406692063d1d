// Network building blocks on top of the tape, plus the Adam optimizer.
//
// Parameters live as plain Tensors inside the model structs; each training
// step inserts them as tracked leaves into a fresh tape. Weight matrices
// are stored (in x out) so a batched forward pass is x(row) * W.
#ifndef OPTDISC_NN_HPP
#define OPTDISC_NN_HPP

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "optdisc/rng.hpp"
#include "optdisc/tape.hpp"
#include "optdisc/tensor.hpp"

namespace optdisc {

struct Linear {
  Tensor w;  // (in, out)
  Tensor b;  // (out)
};

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], zero biases.
Linear make_linear(int in, int out, Rng& rng);
Tensor init_weight(int fan_in, std::vector<int> shape, Rng& rng);

struct Mlp {
  std::vector<Linear> layers;  // ReLU between layers, none after the last
};

Mlp make_mlp(const std::vector<int>& widths, Rng& rng);

struct LstmCell {
  // gate order along the 4H axis: input, forget, cell candidate, output
  Tensor wx;  // (in, 4H)
  Tensor wh;  // (H, 4H)
  Tensor b;   // (4H)
  int hidden = 0;
};

LstmCell make_lstm(int in, int hidden, Rng& rng);

// References into a model's parameters; the order defines the Adam and
// serialization order.
using ParamRefs = std::vector<std::pair<std::string, Tensor*>>;

namespace ad_ops {

// x: (batch, in) -> (batch, out)
ad::Var linear(ad::Tape& t, ad::Var x, ad::Var w, ad::Var b);
ad::Var mlp_forward(ad::Tape& t, ad::Var x, const std::vector<ad::Var>& ws,
                    const std::vector<ad::Var>& bs);

struct LstmVars {
  ad::Var wx, wh, b;
};

struct LstmState {
  ad::Var h, c;  // each (batch, H)
};

LstmState lstm_step(ad::Tape& t, ad::Var x, LstmState prev, const LstmVars& p,
                    int hidden);

}  // namespace ad_ops

// Inserts params as tracked leaves, in registry order.
std::vector<ad::Var> insert_params(ad::Tape& t, const ParamRefs& refs);

struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 10.0;  // global norm; <=0 disables
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update in place. Gradients must align with refs; throws
  // NumericError naming the parameter on a non-finite gradient.
  void step(const ParamRefs& refs, const std::vector<Tensor>& grads);

  // Keeps moment tensors aligned when a parameter's shape changes; `edit`
  // must apply the same structural transform it applied to the parameter,
  // with zeros for new entries.
  void edit_moments(const std::string& name,
                    const std::function<void(Tensor&)>& edit);
  void ensure_slot(const std::string& name, const std::vector<int>& shape);

  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  std::map<std::string, std::pair<Tensor, Tensor>>& moments() { return m_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> m_;  // name -> (m, v)
};

double global_norm(const std::vector<Tensor>& grads);

}  // namespace optdisc

#endif
