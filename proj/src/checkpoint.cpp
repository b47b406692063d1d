#include "optdisc/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace optdisc {

using nlohmann::json;

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["K"] = ck.bank.K();
  j["alpha"] = ck.bank.alpha();
  json sticks = json::array();
  std::vector<double> a1 = ck.sticks.a1(), a2 = ck.sticks.a2();
  for (std::size_t i = 0; i < a1.size(); ++i)
    sticks.push_back(json::array({a1[i], a2[i]}));
  j["stick_params"] = sticks;

  json nets = json::object();
  auto& bank = const_cast<OptionBank&>(ck.bank);
  auto& enc = const_cast<Encoder&>(ck.encoder);
  auto& st = const_cast<StickPosterior&>(ck.sticks);
  for (const auto& [name, tensor] : model_params(bank, enc, st, false)) {
    if (name.rfind("sticks.", 0) == 0) continue;
    nets[name] = {{"shape", tensor->shape}, {"values", tensor->data}};
  }
  j["networks"] = nets;

  j["schedules"] = {
      {"tau",
       {{"value", ck.tau.value}, {"decay", ck.tau.decay}, {"floor", ck.tau.floor}}},
      {"lambda_ent",
       {{"value", ck.lambda_ent.value},
        {"decay", ck.lambda_ent.decay},
        {"floor", ck.lambda_ent.floor}}},
      {"epoch", ck.epoch},
      {"step", ck.step}};

  std::ofstream out(path);
  if (!out) throw IoError("checkpoint: cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

namespace {

Tensor read_tensor(const json& nets, const std::string& name) {
  if (!nets.contains(name))
    throw IoError("checkpoint: missing network " + name);
  const json& jt = nets.at(name);
  return Tensor(jt.at("shape").get<std::vector<int>>(),
                jt.at("values").get<std::vector<double>>());
}

}  // namespace

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("checkpoint: parse error in " + path + ": " + e.what());
  }
  if (j.at("format_version").get<int>() != 1)
    throw IoError("checkpoint: unsupported format_version");

  Checkpoint ck;
  int K = j.at("K").get<int>();
  const json& nets = j.at("networks");

  OptionBank& bank = ck.bank;
  bank.policy_trunk.layers.resize(2);
  for (int i = 0; i < 2; ++i) {
    bank.policy_trunk.layers[i].w =
        read_tensor(nets, "policy_trunk." + std::to_string(i) + ".w");
    bank.policy_trunk.layers[i].b =
        read_tensor(nets, "policy_trunk." + std::to_string(i) + ".b");
  }
  bank.state_dim = bank.policy_trunk.layers[0].w.shape[0];
  bank.hidden = bank.policy_trunk.layers[0].w.shape[1];
  for (int k = 0; k < K; ++k) {
    Linear head;
    head.w = read_tensor(nets, "policy_head." + std::to_string(k) + ".w");
    head.b = read_tensor(nets, "policy_head." + std::to_string(k) + ".b");
    bank.policy_heads.push_back(std::move(head));
  }
  bank.n_actions = bank.policy_heads[0].w.shape[1];
  bank.term_trunk.layers.resize(2);
  for (int i = 0; i < 2; ++i) {
    bank.term_trunk.layers[i].w =
        read_tensor(nets, "term_trunk." + std::to_string(i) + ".w");
    bank.term_trunk.layers[i].b =
        read_tensor(nets, "term_trunk." + std::to_string(i) + ".b");
  }
  bank.term_head.w = read_tensor(nets, "term_head.w");
  bank.term_head.b = read_tensor(nets, "term_head.b");
  bank.alpha_raw = Tensor({1}, {softplus_inv(j.at("alpha").get<double>())});

  Encoder& enc = ck.encoder;
  enc.lstm.wx = read_tensor(nets, "encoder_lstm.wx");
  enc.lstm.wh = read_tensor(nets, "encoder_lstm.wh");
  enc.lstm.b = read_tensor(nets, "encoder_lstm.b");
  enc.lstm.hidden = enc.lstm.wh.shape[0];
  enc.hidden = enc.lstm.hidden;
  enc.state_dim = bank.state_dim;
  enc.n_actions = bank.n_actions;
  enc.K = K;
  enc.trunk.layers.resize(2);
  for (int i = 0; i < 2; ++i) {
    enc.trunk.layers[i].w =
        read_tensor(nets, "encoder_trunk." + std::to_string(i) + ".w");
    enc.trunk.layers[i].b =
        read_tensor(nets, "encoder_trunk." + std::to_string(i) + ".b");
  }
  enc.head_b.w = read_tensor(nets, "encoder_head_b.w");
  enc.head_b.b = read_tensor(nets, "encoder_head_b.b");
  enc.head_h.w = read_tensor(nets, "encoder_head_h.w");
  enc.head_h.b = read_tensor(nets, "encoder_head_h.b");

  const json& sp = j.at("stick_params");
  if (static_cast<int>(sp.size()) != std::max(K - 1, 0))
    throw IoError("checkpoint: stick_params length does not match K");
  if (K > 1) {
    ck.sticks.a1_raw = Tensor({K - 1});
    ck.sticks.a2_raw = Tensor({K - 1});
    for (int i = 0; i < K - 1; ++i) {
      ck.sticks.a1_raw[static_cast<std::size_t>(i)] =
          softplus_inv(sp.at(i).at(0).get<double>());
      ck.sticks.a2_raw[static_cast<std::size_t>(i)] =
          softplus_inv(sp.at(i).at(1).get<double>());
    }
  }

  const json& sch = j.at("schedules");
  auto read_schedule = [&](const char* name, ScheduleState& s) {
    const json& js = sch.at(name);
    s.value = js.at("value").get<double>();
    s.decay = js.at("decay").get<double>();
    s.floor = js.at("floor").get<double>();
  };
  read_schedule("tau", ck.tau);
  read_schedule("lambda_ent", ck.lambda_ent);
  ck.epoch = sch.at("epoch").get<int>();
  ck.step = sch.at("step").get<long>();
  return ck;
}

}  // namespace optdisc
