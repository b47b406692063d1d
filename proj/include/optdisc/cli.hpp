// Command implementations behind the CLI binary; kept callable from tests.
// Exit codes: 0 success, 2 usage error, 3 numerical abort, 4 I/O error.
#ifndef OPTDISC_CLI_HPP
#define OPTDISC_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "optdisc/train.hpp"

namespace optdisc::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

// Run configuration file: flat JSON with one nested "schedules" object.
struct RunConfig {
  std::string dataset;
  TrainConfig train;
};

RunConfig default_run_config();   // full-scale profile
RunConfig reduced_run_config();   // quick profile used by sweeps and tests
RunConfig load_run_config(const std::string& path);
void validate_run_config(const RunConfig& cfg);
std::string resolved_config_json(const RunConfig& cfg);

struct GenDataArgs {
  std::string env = "message";
  int n_vocab = 2;
  int n_traj = 1000;
  int T = 5;
  int k = 3;
  int n_positions = 8;
  double lambda = 5.0;
  std::uint64_t seed = 0;
  std::string out;
};
int cmd_gen_data(const GenDataArgs& args);

struct TrainArgs {
  std::string config;
  std::string dataset;  // override
  std::string out_dir;  // override
  long long seed = -1;
  int epochs = -1;
  double lambda_ent = -1.0;  // >= 0 overrides the schedule's initial value
  bool no_growth = false;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string out;  // optional report file; report always on stdout
  double threshold = 0.95;
};
int cmd_eval(const EvalArgs& args);

struct EvalReport {
  int K = 0;
  std::vector<double> usage;
  std::vector<bool> message_success;
  std::vector<double> message_best_prob;
  std::vector<int> message_best_option;
  bool success = false;
  double oracle_loglik = 0.0;
  std::vector<double> map_eta;
};

EvalReport evaluate_checkpoint(const Checkpoint& ck, const Dataset& ds,
                               double threshold);

struct SweepArgs {
  std::vector<int> n_vocab = {2, 4, 6};
  int seeds = 10;
  int n_traj = 200;
  std::string config;   // base run config; built-in reduced profile if empty
  std::string out_dir;
  int jobs = 2;
  int ablate_nv = -1;  // also run a lambda_ent = 0 arm at this vocab size
};
int cmd_sweep(const SweepArgs& args);

struct SweepCell {
  int n_vocab = 0;
  int seed = 0;
  std::string arm;  // "sched" or "noent"
  bool success = false;
  int K = 0;
  std::string error;
};

struct SweepOutcome {
  std::vector<SweepCell> cells;
  double slope = 0.0;
  std::vector<double> mean_k;       // per n_vocab, sched arm
  std::vector<double> success_rate; // per n_vocab, sched arm
  double ablate_sched_rate = -1.0;
  double ablate_zero_rate = -1.0;
};

SweepOutcome run_sweep(const SweepArgs& args);

struct AugmentedArgs {
  std::string env_path;
  std::string checkpoint;
  std::string out;
  long steps = 50000;
  double lr = 0.2;
  std::uint64_t seed = 0;
  bool no_skills = false;
  bool naive = false;
  int log_every = 1000;
};
int cmd_augmented(const AugmentedArgs& args);

}  // namespace optdisc::cli

#endif
