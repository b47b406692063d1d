// optdisc: offline option discovery and SMDP learning tools.
#include <iostream>

#include "CLI11.hpp"
#include "optdisc/cli.hpp"

using namespace optdisc;

int main(int argc, char** argv) {
  CLI::App app{"offline option discovery with a growing option set"};
  app.require_subcommand(1);

  cli::GenDataArgs gen;
  CLI::App* c_gen = app.add_subcommand("gen-data", "generate expert datasets");
  c_gen->add_option("--env", gen.env,
                    "message | options-synthetic | compile-synthetic");
  c_gen->add_option("--n-vocab", gen.n_vocab, "message vocabulary size");
  c_gen->add_option("--n-traj", gen.n_traj, "number of trajectories");
  c_gen->add_option("--T", gen.T, "trajectory length (synthetic envs)");
  c_gen->add_option("--k", gen.k, "number of generating options (synthetic)");
  c_gen->add_option("--n-positions", gen.n_positions, "ring size (synthetic)");
  c_gen->add_option("--lambda", gen.lambda, "segment length rate (compile)");
  c_gen->add_option("--seed", gen.seed, "rng seed");
  c_gen->add_option("--out", gen.out, "output dataset path")->required();

  cli::TrainArgs tr;
  CLI::App* c_train = app.add_subcommand("train", "train a model on a dataset");
  c_train->add_option("--config", tr.config, "run config JSON");
  c_train->add_option("--dataset", tr.dataset, "dataset path (overrides config)");
  c_train->add_option("--out", tr.out_dir, "run directory (overrides config)");
  c_train->add_option("--seed", tr.seed, "seed (overrides config)");
  c_train->add_option("--epochs", tr.epochs, "epochs (overrides config)");
  c_train->add_option("--lambda-ent", tr.lambda_ent,
                      "entropy weight init (overrides config; 0 disables)");
  c_train->add_flag("--no-growth", tr.no_growth, "fixed-K mode");

  cli::EvalArgs ev;
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  c_eval->add_option("--checkpoint", ev.checkpoint, "checkpoint path")
      ->required();
  c_eval->add_option("--dataset", ev.dataset, "dataset path")->required();
  c_eval->add_option("--out", ev.out, "report file (also printed)");
  c_eval->add_option("--threshold", ev.threshold, "per-message success bar");

  cli::SweepArgs sw;
  CLI::App* c_sweep = app.add_subcommand("sweep", "train/eval over a grid");
  c_sweep->add_option("--n-vocab", sw.n_vocab, "vocabulary sizes");
  c_sweep->add_option("--seeds", sw.seeds, "seeds per cell");
  c_sweep->add_option("--n-traj", sw.n_traj, "trajectories per cell");
  c_sweep->add_option("--config", sw.config, "base run config JSON");
  c_sweep->add_option("--out", sw.out_dir, "sweep output directory");
  c_sweep->add_option("--jobs", sw.jobs, "parallel cells");
  c_sweep->add_option("--ablate-nv", sw.ablate_nv,
                      "also run a lambda_ent=0 arm at this vocab size");

  cli::AugmentedArgs au;
  CLI::App* c_aug =
      app.add_subcommand("augmented", "SMDP q-learning on an augmented env");
  c_aug->add_option("--env", au.env_path, "env spec JSON")->required();
  c_aug->add_option("--checkpoint", au.checkpoint,
                    "wrap learned options as skills");
  c_aug->add_option("--out", au.out, "learning-curve CSV");
  c_aug->add_option("--steps", au.steps, "environment steps");
  c_aug->add_option("--lr", au.lr, "q-learning rate");
  c_aug->add_option("--seed", au.seed, "rng seed");
  c_aug->add_flag("--no-skills", au.no_skills, "primitive-only control");
  c_aug->add_flag("--naive", au.naive,
                  "use a gamma^1 bootstrap regardless of duration");
  c_aug->add_option("--log-every", au.log_every, "curve resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  if (c_gen->parsed()) return cli::cmd_gen_data(gen);
  if (c_train->parsed()) return cli::cmd_train(tr);
  if (c_eval->parsed()) return cli::cmd_eval(ev);
  if (c_sweep->parsed()) return cli::cmd_sweep(sw);
  if (c_aug->parsed()) return cli::cmd_augmented(au);
  return cli::kExitUsage;
}
