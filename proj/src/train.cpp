#include "optdisc/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace optdisc {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
}

}  // namespace

std::string metrics_header(int usage_cols) {
  std::string h = "epoch,elbo,joint,logq,kl,ent_reg,K";
  for (int i = 0; i < usage_cols; ++i) h += ",usage_" + std::to_string(i);
  return h + ",event";
}

std::string metrics_row(const EpochRow& row, int usage_cols) {
  std::string s = std::to_string(row.epoch) + "," + fmt(row.elbo) + "," +
                  fmt(row.joint) + "," + fmt(row.logq) + "," + fmt(row.kl) +
                  "," + fmt(row.ent_reg) + "," + std::to_string(row.K);
  for (int i = 0; i < usage_cols; ++i) {
    s += ",";
    if (i < static_cast<int>(row.usage.size())) s += fmt(row.usage[i]);
  }
  return s + "," + row.event;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  if (ds.size() == 0) throw Error("train: empty dataset");
  cfg.growth.validate();
  Rng rng(cfg.seed);

  ModelConfig mc = cfg.model;
  mc.state_dim = ds.meta.state_dim;
  mc.n_actions = ds.meta.n_actions;

  TrainResult res;
  res.ck.bank = make_option_bank(mc, rng);
  res.ck.encoder = make_encoder(mc, rng);
  res.ck.sticks = make_stick_posterior(mc.k_init);
  res.ck.tau = cfg.tau;
  res.ck.lambda_ent = cfg.lambda_ent;

  AdamConfig ac;
  ac.lr = cfg.lr;
  Adam adam(ac);

  int usage_cols = cfg.growth.enabled ? cfg.growth.max_k : mc.k_init;
  std::ofstream metrics;
  if (!cfg.out_dir.empty()) {
    // fresh file per run; rows are appended and flushed as the run goes
    metrics.open(cfg.out_dir + "/metrics.csv");
    if (!metrics)
      throw IoError("train: cannot open metrics.csv in " + cfg.out_dir);
    metrics << metrics_header(usage_cols) << "\n" << std::flush;
  }
  auto emit = [&](const EpochRow& row) {
    res.history.push_back(row);
    if (metrics.is_open())
      metrics << metrics_row(row, usage_cols) << "\n" << std::flush;
  };

  Checkpoint last_good = res.ck;
  long n_total = ds.size();
  std::vector<int> order(ds.items.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);

  auto growth_check = [&](int epoch) {
    std::vector<double> usage =
        option_usage(ds, res.ck.bank, cfg.growth.subsample);
    if (!should_grow(usage, cfg.growth.delta)) return;
    bool grown = expand_model(res.ck.bank, res.ck.encoder, res.ck.sticks, adam,
                              cfg.growth.max_k, rng);
    EpochRow row;
    row.epoch = epoch;
    row.K = res.ck.bank.K();
    row.usage = usage;
    row.event = grown ? "grow" : "cap";
    emit(row);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double sum_elbo = 0, sum_joint = 0, sum_logq = 0, sum_kl = 0, sum_ent = 0;
    int n_steps = 0;
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(cfg.batch_size)) {
      Batch batch;
      batch.ds = &ds;
      for (std::size_t i = off;
           i < std::min(order.size(),
                        off + static_cast<std::size_t>(cfg.batch_size));
           ++i)
        batch.idx.push_back(order[i]);

      int K = res.ck.bank.K();
      std::vector<double> stick_u = draw_stick_noise(K, rng);
      PosteriorNoise noise =
          draw_posterior_noise(batch.B(), batch.T(), K, false, rng);

      try {
        ad::Tape t;
        ModelVars v = bind_model(t, res.ck.bank, res.ck.encoder, res.ck.sticks,
                                 mc.learn_alpha, true);
        ElboResult e = batch_elbo(t, v, batch, res.ck.tau.value, n_total,
                                  stick_u, noise);
        ad::Var ent = entropy_bonus(t, e.post.h);
        ad::Var obj = t.add(
            e.objective,
            t.affine(ent, res.ck.lambda_ent.value / batch.B(), 0.0));
        ad::Var loss = t.affine(obj, -1.0, 0.0);
        if (!std::isfinite(t.val(loss)[0]))
          throw NumericError("train: non-finite objective", "objective");
        t.backward(loss);

        ParamRefs refs = model_params(res.ck.bank, res.ck.encoder,
                                      res.ck.sticks, mc.learn_alpha);
        std::vector<Tensor> grads;
        grads.reserve(refs.size());
        for (std::size_t i = 0; i < refs.size(); ++i) {
          ad::Var var = v.flat[i];
          grads.push_back(t.has_grad(var) ? t.grad(var)
                                          : Tensor(refs[i].second->shape, 0.0));
        }
        adam.step(refs, grads);

        sum_elbo += t.val(e.objective)[0];
        double bj = 0, bq = 0;
        for (double x : t.val(e.joint).data) bj += x;
        for (double x : t.val(e.log_q).data) bq += x;
        sum_joint += bj / batch.B();
        sum_logq += bq / batch.B();
        sum_kl += t.val(e.kl)[0];
        sum_ent += t.val(ent)[0] / batch.B();
        ++n_steps;
        ++res.ck.step;
      } catch (const NumericError& err) {
        res.aborted = true;
        res.abort_component =
            err.component.empty() ? "objective" : err.component;
        res.ck = last_good;
        if (!cfg.out_dir.empty())
          save_checkpoint(res.ck, cfg.out_dir + "/checkpoint.json");
        return res;
      }

      if (cfg.growth.enabled && cfg.growth.check_steps > 0 &&
          res.ck.step % cfg.growth.check_steps == 0)
        growth_check(epoch);
    }

    EpochRow row;
    row.epoch = epoch;
    row.elbo = sum_elbo / n_steps;
    row.joint = sum_joint / n_steps;
    row.logq = sum_logq / n_steps;
    row.kl = sum_kl / n_steps;
    row.ent_reg = sum_ent / n_steps;
    row.K = res.ck.bank.K();
    row.usage = option_usage(ds, res.ck.bank, cfg.growth.subsample);
    emit(row);

    res.ck.tau.value = res.ck.tau.decayed();
    res.ck.lambda_ent.value = res.ck.lambda_ent.decayed();
    ++res.ck.epoch;
    last_good = res.ck;

    if (cfg.growth.enabled && cfg.growth.check_steps == 0 &&
        (epoch + 1) % cfg.growth.check_epochs == 0)
      growth_check(epoch);
  }

  if (!cfg.out_dir.empty())
    save_checkpoint(res.ck, cfg.out_dir + "/checkpoint.json");
  return res;
}

}  // namespace optdisc
