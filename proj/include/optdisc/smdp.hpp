// Tabular environments augmented with skills as enhanced actions, the
// duration-aware replay entry, SMDP Q-learning with the gamma^tau target,
// and an exact value-iteration oracle for the augmented Bellman operator.
#ifndef OPTDISC_SMDP_HPP
#define OPTDISC_SMDP_HPP

#include <functional>
#include <string>
#include <vector>

#include "optdisc/checkpoint.hpp"
#include "optdisc/rng.hpp"

namespace optdisc {

struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  // transitions[s][a] is a distribution over next states
  std::vector<std::vector<std::vector<double>>> transitions;
  std::vector<std::vector<double>> rewards;  // r(s, a)
  std::vector<bool> terminal;
  double gamma = 0.9;
  int start_state = 0;

  void validate() const;
};

struct Skill {
  std::function<int(int)> policy;          // state -> primitive action
  std::function<double(int)> termination;  // state -> stop probability
  int max_steps = 15;
};

struct AugmentedEnv {
  TabularMdp mdp;
  std::vector<Skill> skills;
  int n_aug_actions() const {
    return mdp.n_actions + static_cast<int>(skills.size());
  }
};

// One transition in the augmented action space.
struct ReplayEntry {
  int state = 0;
  int action = 0;  // augmented index; >= n_actions means skill
  int next_state = 0;
  double reward = 0.0;  // sum_{t=1..tau} gamma^{t-1} r_t
  int tau = 1;
};

struct QTable {
  int n_states = 0, n_actions = 0;
  std::vector<double> q;
  double& at(int s, int a) {
    return q[static_cast<std::size_t>(s) * n_actions + a];
  }
  double at(int s, int a) const {
    return q[static_cast<std::size_t>(s) * n_actions + a];
  }
  double max_at(int s) const;
};

QTable make_q_table(const AugmentedEnv& env);

// Primitive actions take one base step (tau = 1); a skill acts until its
// termination fires, its step cap is hit, or the episode ends.
ReplayEntry augmented_step(const AugmentedEnv& env, int state, int aug_action,
                           Rng& rng);

// Q(s,a) += lr * (R + gamma^tau max_a' Q(s',a') - Q(s,a)); terminal
// successors bootstrap zero. `naive` forces gamma^1 regardless of tau.
void q_update(QTable& q, const ReplayEntry& e, const AugmentedEnv& env,
              double lr, bool naive = false);

// Exact Q* for the augmented Bellman operator; expectations over skill
// durations are computed by dynamic programming over execution steps.
QTable smdp_value_iteration(const AugmentedEnv& env, double tol = 1e-10);

double bellman_residual(const AugmentedEnv& env, const QTable& q);

struct QLearnConfig {
  long steps = 50000;
  double lr = 0.2;
  double eps_start = 0.1;
  double eps_end = 0.01;  // linear decay over the run
  bool naive = false;
};

struct QLearnPoint {
  long step;
  double mean_return;
  double q_gap;  // sup-norm distance to the oracle, when provided
};

struct QLearnResult {
  QTable q;
  std::vector<QLearnPoint> curve;
};

QLearnResult run_q_learning(const AugmentedEnv& env, const QLearnConfig& cfg,
                            Rng& rng, const QTable* oracle = nullptr,
                            int log_every = 1000);

// Wraps each learned option as a skill: greedy action of its policy and the
// termination network's sigmoid output, over the given per-state features.
std::vector<Skill> skills_from_checkpoint(
    const Checkpoint& ck, const std::vector<std::vector<double>>& features,
    int max_steps = 15);

// {states, actions, transitions, rewards, gamma, terminal?, start_state?,
//  max_skill_steps?, skills:[{policy:[...], termination:[...]|
//  termination_const:p, max_steps?}]}
AugmentedEnv load_env_json(const std::string& path);

}  // namespace optdisc

#endif
