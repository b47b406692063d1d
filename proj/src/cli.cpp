#include "optdisc/cli.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include "json.hpp"
#include "optdisc/envs.hpp"
#include "optdisc/smdp.hpp"

namespace optdisc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.train.epochs = 500;
  cfg.train.batch_size = 128;
  cfg.train.lr = 0.005;
  cfg.train.model.k_init = 1;
  cfg.train.model.policy_hidden = 16;
  cfg.train.model.encoder_hidden = 32;
  cfg.train.model.alpha_init = 1.0;
  cfg.train.model.learn_alpha = true;
  cfg.train.tau = {1.0, 0.995, 0.1};
  cfg.train.lambda_ent = {5.0, 0.995, 0.0};
  cfg.train.growth.enabled = true;
  cfg.train.growth.check_epochs = 10;
  cfg.train.growth.delta = 0.5;
  cfg.train.growth.max_k = 64;
  return cfg;
}

RunConfig reduced_run_config() {
  RunConfig cfg = default_run_config();
  // same schedules and rule; fewer trajectories per epoch, smaller batches
  // so the optimizer-step budget stays comparable
  cfg.train.epochs = 300;
  cfg.train.batch_size = 16;
  cfg.train.growth.max_k = 16;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("config: parse error in " + path + ": " + e.what());
  }
  RunConfig cfg = default_run_config();
  try {
    cfg.dataset = j.value("dataset", cfg.dataset);
    TrainConfig& t = cfg.train;
    t.seed = j.value("seed", t.seed);
    t.epochs = j.value("epochs", t.epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.lr = j.value("learning_rate", t.lr);
    t.out_dir = j.value("out_dir", t.out_dir);
    t.model.k_init = j.value("k_init", t.model.k_init);
    t.model.policy_hidden = j.value("policy_hidden", t.model.policy_hidden);
    t.model.encoder_hidden = j.value("encoder_hidden", t.model.encoder_hidden);
    t.model.alpha_init = j.value("alpha_init", t.model.alpha_init);
    t.model.learn_alpha = j.value("learn_alpha", t.model.learn_alpha);
    if (j.contains("schedules")) {
      const json& s = j.at("schedules");
      t.tau.value = s.value("tau_init", t.tau.value);
      t.tau.decay = s.value("tau_decay", t.tau.decay);
      t.tau.floor = s.value("tau_floor", t.tau.floor);
      t.lambda_ent.value = s.value("lambda_ent_init", t.lambda_ent.value);
      t.lambda_ent.decay = s.value("lambda_ent_decay", t.lambda_ent.decay);
      t.lambda_ent.floor = s.value("lambda_ent_floor", t.lambda_ent.floor);
    }
    t.growth.enabled = j.value("growth_enabled", t.growth.enabled);
    t.growth.check_epochs = j.value("growth_check_epochs", t.growth.check_epochs);
    t.growth.check_steps =
        j.value("growth_check_steps", t.growth.check_steps);
    t.growth.delta = j.value("growth_delta", t.growth.delta);
    t.growth.max_k = j.value("growth_max_k", t.growth.max_k);
    t.growth.subsample = j.value("growth_subsample", t.growth.subsample);
  } catch (const json::exception& e) {
    throw Error("config: bad field in " + path + ": " + e.what());
  }
  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  if (t.epochs < 1) throw Error("config: epochs must be >= 1");
  if (t.batch_size < 1) throw Error("config: batch_size must be >= 1");
  if (t.lr <= 0.0) throw Error("config: learning_rate must be positive");
  if (t.model.k_init < 1) throw Error("config: k_init must be >= 1");
  if (t.tau.value <= 0.0 || t.tau.floor < 0.0 || t.tau.decay <= 0.0 ||
      t.tau.decay > 1.0)
    throw Error("config: bad tau schedule");
  if (t.lambda_ent.value < 0.0 || t.lambda_ent.decay <= 0.0 ||
      t.lambda_ent.decay > 1.0)
    throw Error("config: bad lambda_ent schedule");
  t.growth.validate();
}

std::string resolved_config_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json j = {
      {"dataset", cfg.dataset},
      {"out_dir", t.out_dir},
      {"seed", t.seed},
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"learning_rate", t.lr},
      {"k_init", t.model.k_init},
      {"policy_hidden", t.model.policy_hidden},
      {"encoder_hidden", t.model.encoder_hidden},
      {"alpha_init", t.model.alpha_init},
      {"learn_alpha", t.model.learn_alpha},
      {"schedules",
       {{"tau_init", t.tau.value},
        {"tau_decay", t.tau.decay},
        {"tau_floor", t.tau.floor},
        {"lambda_ent_init", t.lambda_ent.value},
        {"lambda_ent_decay", t.lambda_ent.decay},
        {"lambda_ent_floor", t.lambda_ent.floor}}},
      {"growth_enabled", t.growth.enabled},
      {"growth_check_epochs", t.growth.check_epochs},
      {"growth_check_steps", t.growth.check_steps},
      {"growth_delta", t.growth.delta},
      {"growth_max_k", t.growth.max_k},
      {"growth_subsample", t.growth.subsample}};
  return j.dump(2);
}

namespace {

int guard(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_gen_data(const GenDataArgs& args) {
  return guard([&] {
    if (args.out.empty()) throw Error("gen-data: --out is required");
    if (args.n_traj < 1) throw Error("gen-data: --n-traj must be >= 1");
    Rng rng(args.seed);
    Dataset ds;
    if (args.env == "message") {
      if (args.T != MessageEnvConfig::kSteps)
        throw Error("gen-data: the message environment has a fixed horizon of " +
                    std::to_string(MessageEnvConfig::kSteps) + " actions");
      MessageEnvConfig cfg;
      cfg.n_vocab = args.n_vocab;
      ds = make_message_expert_dataset(cfg, args.n_traj, rng);
    } else if (args.env == "options-synthetic") {
      RingEnv env{args.n_positions};
      ds = make_options_synthetic_dataset(env, args.k, args.T, args.n_traj, rng);
    } else if (args.env == "compile-synthetic") {
      RingEnv env{args.n_positions};
      ds = make_segments_synthetic_dataset(env, args.k, args.lambda, args.T,
                                           args.n_traj, rng);
    } else {
      throw Error("gen-data: unknown --env " + args.env);
    }
    write_dataset(ds, args.out);
    std::cout << "wrote " << ds.size() << " trajectories (T=" << ds.meta.T
              << ", state_dim=" << ds.meta.state_dim
              << ", n_actions=" << ds.meta.n_actions << ") to " << args.out
              << "\n";
  });
}

int cmd_train(const TrainArgs& args) {
  return guard([&] {
    RunConfig cfg =
        args.config.empty() ? default_run_config() : load_run_config(args.config);
    if (!args.dataset.empty()) cfg.dataset = args.dataset;
    if (!args.out_dir.empty()) cfg.train.out_dir = args.out_dir;
    if (args.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(args.seed);
    if (args.epochs > 0) cfg.train.epochs = args.epochs;
    if (args.lambda_ent >= 0.0) cfg.train.lambda_ent.value = args.lambda_ent;
    if (args.no_growth) cfg.train.growth.enabled = false;
    if (cfg.dataset.empty())
      throw Error("train: no dataset (set it in the config or via --dataset)");
    validate_run_config(cfg);

    Dataset ds = read_dataset(cfg.dataset);
    if (ds.size() == 0) throw Error("train: dataset is empty");
    if (!cfg.train.out_dir.empty()) {
      fs::create_directories(cfg.train.out_dir);
      std::ofstream rc(cfg.train.out_dir + "/resolved_config.json");
      if (!rc) throw IoError("train: cannot write resolved config");
      rc << resolved_config_json(cfg) << "\n";
    }
    TrainResult res = train(ds, cfg.train);
    if (res.aborted)
      throw NumericError("train: aborted on non-finite " + res.abort_component +
                             "; last good checkpoint kept",
                         res.abort_component);
    const EpochRow& last = res.history.back();
    std::cout << "trained " << cfg.train.epochs << " epochs: K=" << last.K
              << " elbo=" << last.elbo << "\n";
  });
}

namespace {

// Factorized posterior mode of one Kumaraswamy stick, clamped into (0,1).
double kumaraswamy_mode(double a1, double a2) {
  if (a1 >= 1.0 && a2 >= 1.0 && a1 * a2 > 1.0)
    return std::pow((a1 - 1.0) / (a1 * a2 - 1.0), 1.0 / a1);
  if (a1 == 1.0 && a2 == 1.0) return 0.5;  // uniform: no unique mode
  if (a1 < 1.0 && a2 >= 1.0) return kStickClamp;
  if (a1 >= 1.0 && a2 < 1.0) return 1.0 - kStickClamp;
  // density unbounded at both ends; pick the heavier boundary
  double lo = dist::kumaraswamy_log_pdf(kStickClamp, a1, a2);
  double hi = dist::kumaraswamy_log_pdf(1.0 - kStickClamp, a1, a2);
  return lo >= hi ? kStickClamp : 1.0 - kStickClamp;
}

}  // namespace

EvalReport evaluate_checkpoint(const Checkpoint& ck, const Dataset& ds,
                               double threshold) {
  if (ck.bank.state_dim != ds.meta.state_dim ||
      ck.bank.n_actions != ds.meta.n_actions)
    throw Error("eval: checkpoint dims (" + std::to_string(ck.bank.state_dim) +
                "," + std::to_string(ck.bank.n_actions) +
                ") do not match dataset (" + std::to_string(ds.meta.state_dim) +
                "," + std::to_string(ds.meta.n_actions) + ")");
  EvalReport rep;
  rep.K = ck.bank.K();
  rep.usage = option_usage(ds, ck.bank);

  // success per message: some option emits it at the final decision state
  std::vector<double> probe = {static_cast<double>(ds.meta.T - 1), -1.0};
  if (ds.meta.state_dim != 2) probe.assign(ds.meta.state_dim, 0.0);
  auto probs = policy_probs(ck.bank, probe);
  rep.success = true;
  for (int m = 0; m < ck.bank.n_actions; ++m) {
    int best = 0;
    for (int k = 1; k < rep.K; ++k)
      if (probs[k][m] > probs[best][m]) best = k;
    rep.message_best_option.push_back(best);
    rep.message_best_prob.push_back(probs[best][m]);
    bool ok = probs[best][m] >= threshold;
    rep.message_success.push_back(ok);
    rep.success = rep.success && ok;
  }

  if (rep.K == 1) {
    rep.map_eta = {1.0};
  } else {
    std::vector<double> a1 = ck.sticks.a1(), a2 = ck.sticks.a2();
    std::vector<double> fractions;
    for (std::size_t i = 0; i < a1.size(); ++i)
      fractions.push_back(kumaraswamy_mode(a1[i], a2[i]));
    rep.map_eta = dist::stick_break(fractions);
  }
  rep.oracle_loglik = 0.0;
  for (const Trajectory& traj : ds.items)
    rep.oracle_loglik += marginal_log_likelihood(traj, rep.map_eta, ck.bank);
  return rep;
}

namespace {

json report_json(const EvalReport& rep) {
  json messages = json::array();
  for (std::size_t m = 0; m < rep.message_success.size(); ++m)
    messages.push_back({{"message", m},
                        {"success", static_cast<bool>(rep.message_success[m])},
                        {"best_option", rep.message_best_option[m]},
                        {"best_prob", rep.message_best_prob[m]}});
  return json{{"k", rep.K},
              {"usage", rep.usage},
              {"messages", messages},
              {"success", rep.success},
              {"map_eta", rep.map_eta},
              {"oracle_loglik", rep.oracle_loglik}};
}

}  // namespace

int cmd_eval(const EvalArgs& args) {
  return guard([&] {
    Checkpoint ck = load_checkpoint(args.checkpoint);
    Dataset ds = read_dataset(args.dataset);
    if (ds.size() == 0) throw Error("eval: dataset is empty");
    EvalReport rep = evaluate_checkpoint(ck, ds, args.threshold);
    std::string text = report_json(rep).dump(2);
    std::cout << text << "\n";
    if (!args.out.empty()) {
      std::ofstream out(args.out);
      if (!out) throw IoError("eval: cannot write " + args.out);
      out << text << "\n";
    }
  });
}

SweepOutcome run_sweep(const SweepArgs& args) {
  RunConfig base =
      args.config.empty() ? reduced_run_config() : load_run_config(args.config);
  if (args.seeds < 1) throw Error("sweep: --seeds must be >= 1");
  if (args.n_traj < 1) throw Error("sweep: --n-traj must be >= 1");

  struct CellSpec {
    int n_vocab;
    int seed;
    bool noent;
  };
  std::vector<CellSpec> specs;
  for (int v : args.n_vocab)
    for (int s = 0; s < args.seeds; ++s) specs.push_back({v, s, false});
  if (args.ablate_nv > 0)
    for (int s = 0; s < args.seeds; ++s)
      specs.push_back({args.ablate_nv, s, true});

  SweepOutcome out;
  out.cells.resize(specs.size());
  if (!args.out_dir.empty()) fs::create_directories(args.out_dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      const CellSpec& spec = specs[i];
      SweepCell cell;
      cell.n_vocab = spec.n_vocab;
      cell.seed = spec.seed;
      cell.arm = spec.noent ? "noent" : "sched";
      try {
        Rng data_rng(static_cast<std::uint64_t>(spec.seed));
        MessageEnvConfig mec;
        mec.n_vocab = spec.n_vocab;
        Dataset ds = make_message_expert_dataset(mec, args.n_traj, data_rng);
        RunConfig cfg = base;
        cfg.train.seed = static_cast<std::uint64_t>(spec.seed);
        if (spec.noent) cfg.train.lambda_ent.value = 0.0;
        if (!args.out_dir.empty()) {
          cfg.train.out_dir = args.out_dir + "/cell_nv" +
                              std::to_string(spec.n_vocab) + "_seed" +
                              std::to_string(spec.seed) +
                              (spec.noent ? "_noent" : "");
          fs::create_directories(cfg.train.out_dir);
          std::ofstream rc(cfg.train.out_dir + "/resolved_config.json");
          rc << resolved_config_json(cfg) << "\n";
        }
        TrainResult res = train(ds, cfg.train);
        if (res.aborted) {
          cell.error = "numerical abort (" + res.abort_component + ")";
        } else {
          EvalReport rep = evaluate_checkpoint(res.ck, ds, 0.95);
          cell.success = rep.success;
          cell.K = rep.K;
        }
      } catch (const std::exception& e) {
        cell.error = e.what();  // partial failure: record and continue
      }
      out.cells[i] = cell;
    }
  };
  int jobs = std::max(1, args.jobs);
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  // per-vocab aggregates over the scheduled arm; mean K over successful seeds
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n_pts = 0;
  for (int v : args.n_vocab) {
    int succ = 0, total = 0;
    double ksum = 0;
    for (const SweepCell& c : out.cells) {
      if (c.n_vocab != v || c.arm != "sched") continue;
      ++total;
      if (c.success) {
        ++succ;
        ksum += c.K;
      }
    }
    double rate = total > 0 ? static_cast<double>(succ) / total : 0.0;
    double mean_k = succ > 0 ? ksum / succ : 0.0;
    out.success_rate.push_back(rate);
    out.mean_k.push_back(mean_k);
    if (succ > 0) {
      sx += v;
      sy += mean_k;
      sxx += static_cast<double>(v) * v;
      sxy += static_cast<double>(v) * mean_k;
      ++n_pts;
    }
  }
  out.slope = n_pts >= 2 ? (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx)
                         : 0.0;

  if (args.ablate_nv > 0) {
    int s_ok = 0, s_n = 0, z_ok = 0, z_n = 0;
    for (const SweepCell& c : out.cells) {
      if (c.n_vocab != args.ablate_nv) continue;
      if (c.arm == "sched") {
        ++s_n;
        if (c.success) ++s_ok;
      } else {
        ++z_n;
        if (c.success) ++z_ok;
      }
    }
    out.ablate_sched_rate = s_n > 0 ? static_cast<double>(s_ok) / s_n : 0.0;
    out.ablate_zero_rate = z_n > 0 ? static_cast<double>(z_ok) / z_n : 0.0;
  }
  return out;
}

int cmd_sweep(const SweepArgs& args) {
  return guard([&] {
    SweepOutcome out = run_sweep(args);
    std::string cells_csv = "n_vocab,seed,arm,success,recovered_k,error\n";
    for (const SweepCell& c : out.cells)
      cells_csv += std::to_string(c.n_vocab) + "," + std::to_string(c.seed) +
                   "," + c.arm + "," + (c.success ? "1" : "0") + "," +
                   std::to_string(c.K) + "," + c.error + "\n";
    std::string summary_csv = "n_vocab,mean_recovered_k,success_rate\n";
    for (std::size_t i = 0; i < args.n_vocab.size(); ++i)
      summary_csv += std::to_string(args.n_vocab[i]) + "," +
                     std::to_string(out.mean_k[i]) + "," +
                     std::to_string(out.success_rate[i]) + "\n";
    std::cout << summary_csv << "slope=" << out.slope << "\n";
    if (out.ablate_sched_rate >= 0.0)
      std::cout << "ablation@nv" << args.ablate_nv
                << ": sched=" << out.ablate_sched_rate
                << " zero=" << out.ablate_zero_rate
                << (out.ablate_sched_rate >= out.ablate_zero_rate
                        ? " (ok)"
                        : " (flagged: zero arm outperformed)")
                << "\n";
    if (!args.out_dir.empty()) {
      fs::create_directories(args.out_dir);
      std::ofstream(args.out_dir + "/cells.csv") << cells_csv;
      std::ofstream(args.out_dir + "/summary.csv") << summary_csv;
      json extra = {{"slope", out.slope},
                    {"ablate_sched_rate", out.ablate_sched_rate},
                    {"ablate_zero_rate", out.ablate_zero_rate}};
      std::ofstream(args.out_dir + "/sweep_summary.json") << extra.dump(2)
                                                          << "\n";
    }
  });
}

int cmd_augmented(const AugmentedArgs& args) {
  return guard([&] {
    std::ifstream probe(args.env_path);
    if (!probe) throw IoError("augmented: cannot open " + args.env_path);
    probe.close();
    AugmentedEnv env = load_env_json(args.env_path);
    if (args.no_skills) env.skills.clear();
    if (!args.checkpoint.empty()) {
      // per-state feature vectors must come with the env spec
      std::ifstream in(args.env_path);
      json j;
      in >> j;
      if (!j.contains("state_features"))
        throw Error("augmented: checkpoint skills need state_features in the env spec");
      auto features =
          j.at("state_features").get<std::vector<std::vector<double>>>();
      Checkpoint ck = load_checkpoint(args.checkpoint);
      for (Skill& sk : skills_from_checkpoint(ck, features))
        env.skills.push_back(std::move(sk));
    }
    QTable oracle = smdp_value_iteration(env);
    QLearnConfig qc;
    qc.steps = args.steps;
    qc.lr = args.lr;
    qc.naive = args.naive;
    Rng rng(args.seed);
    QLearnResult res = run_q_learning(env, qc, rng, &oracle, args.log_every);
    std::string csv = "step,mean_return,q_gap\n";
    for (const QLearnPoint& p : res.curve)
      csv += std::to_string(p.step) + "," + std::to_string(p.mean_return) +
             "," + std::to_string(p.q_gap) + "\n";
    if (!args.out.empty()) {
      std::ofstream out(args.out);
      if (!out) throw IoError("augmented: cannot write " + args.out);
      out << csv;
    } else {
      std::cout << csv;
    }
    std::cout << "final q_gap=" << res.curve.back().q_gap << "\n";
  });
}

}  // namespace optdisc::cli
