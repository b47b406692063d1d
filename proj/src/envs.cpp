#include "optdisc/envs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace optdisc {

Dataset make_message_expert_dataset(const MessageEnvConfig& cfg,
                                    int n_trajectories, Rng& rng) {
  if (cfg.n_vocab < 2) throw Error("message env: n_vocab must be >= 2");
  if (n_trajectories < 1)
    throw Error("message env: n_trajectories must be >= 1");
  Dataset ds;
  ds.meta.state_dim = 2;
  ds.meta.n_actions = cfg.n_vocab;
  ds.meta.T = MessageEnvConfig::kSteps;
  for (int i = 0; i < n_trajectories; ++i) {
    int m = rng.uniform_int(cfg.n_vocab);
    Trajectory traj;
    traj.states.push_back({0.0, static_cast<double>(m)});
    for (int t = 1; t <= MessageEnvConfig::kSteps; ++t)
      traj.states.push_back({static_cast<double>(t), -1.0});
    traj.actions.assign(MessageEnvConfig::kSteps, 0);
    traj.actions.back() = m;
    ds.items.push_back(std::move(traj));
  }
  return ds;
}

std::vector<double> RingEnv::reset(Rng& rng) const {
  return {0.0, static_cast<double>(rng.uniform_int(n_positions))};
}

std::vector<double> RingEnv::step(const std::vector<double>& s,
                                  int action) const {
  int pos = static_cast<int>(s[1]);
  int next = action == 0 ? pos - 1 : pos + 1;
  next = ((next % n_positions) + n_positions) % n_positions;
  return {s[0] + 1.0, static_cast<double>(next)};
}

std::pair<Trajectory, LatentPath> sample_hierarchical_trajectory(
    const HierarchicalPolicy& policy, const RingEnv& env, int T, Rng& rng) {
  if (T < 1) throw Error("sampler: T must be >= 1");
  Trajectory traj;
  LatentPath latent;
  traj.states.push_back(env.reset(rng));
  int b = 1, h = -1;
  for (int t = 0; t < T; ++t) {
    if (b == 1) h = rng.categorical(policy.eta);
    latent.b.push_back(b);
    latent.h.push_back(h);
    int a = rng.categorical(policy.policy(h, traj.states.back()));
    traj.actions.push_back(a);
    traj.states.push_back(env.step(traj.states[traj.states.size() - 1], a));
    b = rng.bernoulli(policy.termination(h, traj.states.back())) ? 1 : 0;
  }
  return {std::move(traj), std::move(latent)};
}

SegmentedSample sample_segmented_trajectory(
    const std::function<std::vector<double>(int, const std::vector<double>&)>&
        skill_policy,
    const std::vector<double>& eta, double lambda, int K, int T,
    const RingEnv& env, Rng& rng) {
  if (lambda <= 0.0) throw Error("sampler: lambda must be positive");
  if (T < 1) throw Error("sampler: T must be >= 1");
  SegmentedSample out;
  out.traj.states.push_back(env.reset(rng));
  int boundary = 0;  // end of the current segment
  int skill = -1;
  for (int t = 0; t < T; ++t) {
    while (t == boundary) {
      skill = eta.empty() ? rng.uniform_int(K) : rng.categorical(eta);
      int len = rng.poisson(lambda);
      boundary += len;
      if (len > 0) {
        out.boundaries.push_back(boundary);
        out.skills.push_back(skill);
      }
    }
    int a = rng.categorical(skill_policy(skill, out.traj.states.back()));
    out.traj.actions.push_back(a);
    out.traj.states.push_back(env.step(out.traj.states.back(), a));
  }
  return out;
}

HierarchicalPolicy make_random_ring_policy(const RingEnv& env, int K,
                                           Rng& rng) {
  HierarchicalPolicy hp;
  hp.eta.assign(K, 1.0 / K);
  // per-option tables over ring positions
  auto probs = std::make_shared<std::vector<std::vector<std::vector<double>>>>();
  auto terms = std::make_shared<std::vector<double>>();
  probs->resize(K);
  for (int k = 0; k < K; ++k) {
    (*probs)[k].resize(env.n_positions);
    for (int p = 0; p < env.n_positions; ++p) {
      std::vector<double> logits(env.n_actions());
      for (double& v : logits) v = rng.uniform(-2.0, 2.0);
      double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double& v : logits) {
        v = std::exp(v - mx);
        z += v;
      }
      for (double& v : logits) v /= z;
      (*probs)[k][p] = logits;
    }
    terms->push_back(rng.uniform(0.1, 0.5));
  }
  hp.policy = [probs](int k, const std::vector<double>& s) {
    return (*probs)[k][static_cast<int>(s[1])];
  };
  hp.termination = [terms](int k, const std::vector<double>&) {
    return (*terms)[k];
  };
  return hp;
}

Dataset make_options_synthetic_dataset(const RingEnv& env, int K, int T,
                                       int n_trajectories, Rng& rng) {
  if (n_trajectories < 1) throw Error("sampler: n_trajectories must be >= 1");
  HierarchicalPolicy hp = make_random_ring_policy(env, K, rng);
  Dataset ds;
  ds.meta.state_dim = env.state_dim();
  ds.meta.n_actions = env.n_actions();
  ds.meta.T = T;
  for (int i = 0; i < n_trajectories; ++i)
    ds.items.push_back(sample_hierarchical_trajectory(hp, env, T, rng).first);
  return ds;
}

Dataset make_segments_synthetic_dataset(const RingEnv& env, int K, double lambda,
                                        int T, int n_trajectories, Rng& rng) {
  if (n_trajectories < 1) throw Error("sampler: n_trajectories must be >= 1");
  HierarchicalPolicy hp = make_random_ring_policy(env, K, rng);
  Dataset ds;
  ds.meta.state_dim = env.state_dim();
  ds.meta.n_actions = env.n_actions();
  ds.meta.T = T;
  for (int i = 0; i < n_trajectories; ++i)
    ds.items.push_back(
        sample_segmented_trajectory(hp.policy, {}, lambda, K, T, env, rng).traj);
  return ds;
}

}  // namespace optdisc
