// Environments and generative samplers for expert data.
//
// The message environment: the agent observes (0, m) at t=0, then (t, -1),
// and must emit m at t=4. Five actions per episode; the closing state
// (5, -1) completes the record. Non-Markovian by construction: every
// post-t=0 state is message-independent.
#ifndef OPTDISC_ENVS_HPP
#define OPTDISC_ENVS_HPP

#include <functional>
#include <vector>

#include "optdisc/rng.hpp"
#include "optdisc/trajectory.hpp"

namespace optdisc {

struct MessageEnvConfig {
  int n_vocab = 2;
  static constexpr int kSteps = 5;  // actions at t = 0..4
};

// Expert: filler action 0 at t<4, then a_4 = m; messages uniform.
Dataset make_message_expert_dataset(const MessageEnvConfig& cfg,
                                    int n_trajectories, Rng& rng);

// A small deterministic MDP for the synthetic samplers: position on a ring,
// actions step left/right, state vector is (t, position).
struct RingEnv {
  int n_positions = 8;
  int n_actions() const { return 2; }
  int state_dim() const { return 2; }
  std::vector<double> reset(Rng& rng) const;
  std::vector<double> step(const std::vector<double>& s, int action) const;
};

struct HierarchicalPolicy {
  std::vector<double> eta;  // high-level weights, length K
  // option, state -> distribution over actions
  std::function<std::vector<double>(int, const std::vector<double>&)> policy;
  // option, state -> termination probability
  std::function<double(int, const std::vector<double>&)> termination;
  int K() const { return static_cast<int>(eta.size()); }
};

struct LatentPath {
  std::vector<int> b;  // length T, b[0] = 1
  std::vector<int> h;  // length T
};

// Draws one episode from the two-level generative process: an option is
// redrawn from eta whenever the previous one terminated, actions come from
// the active option's policy, and termination is sampled at each new state.
std::pair<Trajectory, LatentPath> sample_hierarchical_trajectory(
    const HierarchicalPolicy& policy, const RingEnv& env, int T, Rng& rng);

struct SegmentedSample {
  Trajectory traj;
  std::vector<int> boundaries;  // cumulative segment ends; last >= T
  std::vector<int> skills;      // skill index per effective segment
};

// Segment-structured sampler: each new skill stays active for a
// Poisson(lambda)-distributed number of steps. Skills are drawn from eta,
// or uniformly over K when eta is empty.
SegmentedSample sample_segmented_trajectory(
    const std::function<std::vector<double>(int, const std::vector<double>&)>&
        skill_policy,
    const std::vector<double>& eta, double lambda, int K, int T,
    const RingEnv& env, Rng& rng);

// Random tabular options on a ring, used by the synthetic dataset commands.
HierarchicalPolicy make_random_ring_policy(const RingEnv& env, int K, Rng& rng);

Dataset make_options_synthetic_dataset(const RingEnv& env, int K, int T,
                                       int n_trajectories, Rng& rng);
Dataset make_segments_synthetic_dataset(const RingEnv& env, int K, double lambda,
                                        int T, int n_trajectories, Rng& rng);

}  // namespace optdisc

#endif
