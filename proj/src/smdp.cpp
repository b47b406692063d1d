#include "optdisc/smdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "json.hpp"

namespace optdisc {

using nlohmann::json;

void TabularMdp::validate() const {
  if (n_states < 1 || n_actions < 1)
    throw Error("mdp: needs at least one state and action");
  if (gamma <= 0.0 || gamma >= 1.0) throw Error("mdp: gamma must be in (0,1)");
  if (static_cast<int>(transitions.size()) != n_states ||
      static_cast<int>(rewards.size()) != n_states)
    throw Error("mdp: table sizes do not match n_states");
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(transitions[s].size()) != n_actions ||
        static_cast<int>(rewards[s].size()) != n_actions)
      throw Error("mdp: row " + std::to_string(s) + " has wrong action count");
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (double p : transitions[s][a]) sum += p;
      if (std::fabs(sum - 1.0) > 1e-9)
        throw Error("mdp: transition row (" + std::to_string(s) + "," +
                    std::to_string(a) + ") sums to " + std::to_string(sum));
    }
  }
}

double QTable::max_at(int s) const {
  double best = at(s, 0);
  for (int a = 1; a < n_actions; ++a) best = std::max(best, at(s, a));
  return best;
}

QTable make_q_table(const AugmentedEnv& env) {
  QTable q;
  q.n_states = env.mdp.n_states;
  q.n_actions = env.n_aug_actions();
  q.q.assign(static_cast<std::size_t>(q.n_states) * q.n_actions, 0.0);
  return q;
}

namespace {

int sample_next(const std::vector<double>& probs, Rng& rng) {
  return rng.categorical(probs);
}

}  // namespace

ReplayEntry augmented_step(const AugmentedEnv& env, int state, int aug_action,
                           Rng& rng) {
  const TabularMdp& mdp = env.mdp;
  if (state < 0 || state >= mdp.n_states)
    throw Error("augmented_step: bad state");
  if (aug_action < 0 || aug_action >= env.n_aug_actions())
    throw Error("augmented_step: bad action");

  ReplayEntry e;
  e.state = state;
  e.action = aug_action;
  if (aug_action < mdp.n_actions) {
    e.reward = mdp.rewards[state][aug_action];
    e.next_state = sample_next(mdp.transitions[state][aug_action], rng);
    e.tau = 1;
    return e;
  }

  const Skill& skill = env.skills[aug_action - mdp.n_actions];
  int s = state;
  double discount = 1.0;
  e.reward = 0.0;
  e.tau = 0;
  while (true) {
    int a = skill.policy(s);
    e.reward += discount * mdp.rewards[s][a];
    s = sample_next(mdp.transitions[s][a], rng);
    discount *= mdp.gamma;
    ++e.tau;
    // a skill execution is cut at episode termination
    if (mdp.terminal[s] || e.tau >= skill.max_steps) break;
    if (rng.bernoulli(skill.termination(s))) break;
  }
  e.next_state = s;
  return e;
}

void q_update(QTable& q, const ReplayEntry& e, const AugmentedEnv& env,
              double lr, bool naive) {
  double bootstrap =
      env.mdp.terminal[e.next_state] ? 0.0 : q.max_at(e.next_state);
  double disc = naive ? env.mdp.gamma
                      : std::pow(env.mdp.gamma, static_cast<double>(e.tau));
  double target = e.reward + disc * bootstrap;
  q.at(e.state, e.action) += lr * (target - q.at(e.state, e.action));
}

namespace {

// G(c, s) = expected discounted return of executing the skill from state s
// with c steps still permitted, bootstrapping into v once it stops. Exact
// dynamic programming over remaining steps; expectations over transitions
// and stochastic termination are taken per step.
std::vector<double> skill_backup(const TabularMdp& mdp, const Skill& skill,
                                 const std::vector<double>& v) {
  std::size_t n = static_cast<std::size_t>(mdp.n_states);
  std::vector<double> g(n, 0.0), g_next(n, 0.0);
  for (int c = 1; c <= skill.max_steps; ++c) {
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s]) continue;
      int a = skill.policy(s);
      double out = mdp.rewards[s][a];
      for (int sn = 0; sn < mdp.n_states; ++sn) {
        double p = mdp.transitions[s][a][sn];
        if (p == 0.0 || mdp.terminal[sn]) continue;
        double cont;
        if (c == 1) {
          cont = v[static_cast<std::size_t>(sn)];
        } else {
          double stop = skill.termination(sn);
          cont = stop * v[static_cast<std::size_t>(sn)] +
                 (1.0 - stop) * g[static_cast<std::size_t>(sn)];
        }
        out += p * mdp.gamma * cont;
      }
      g_next[static_cast<std::size_t>(s)] = out;
    }
    std::swap(g, g_next);
  }
  return g;
}

// One application of the augmented Bellman operator to the value implied
// by q (v = max_a q, zero at terminals).
QTable backup_once(const AugmentedEnv& env, const QTable& q) {
  const TabularMdp& mdp = env.mdp;
  std::vector<double> v(static_cast<std::size_t>(mdp.n_states), 0.0);
  for (int s = 0; s < mdp.n_states; ++s)
    if (!mdp.terminal[s]) v[static_cast<std::size_t>(s)] = q.max_at(s);
  QTable next = make_q_table(env);
  std::vector<std::vector<double>> skill_vals;
  for (const Skill& sk : env.skills)
    skill_vals.push_back(skill_backup(mdp, sk, v));
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal[s]) continue;
    for (int a = 0; a < mdp.n_actions; ++a) {
      double val = mdp.rewards[s][a];
      for (int sn = 0; sn < mdp.n_states; ++sn)
        if (!mdp.terminal[sn])
          val += mdp.gamma * mdp.transitions[s][a][sn] *
                 v[static_cast<std::size_t>(sn)];
      next.at(s, a) = val;
    }
    for (std::size_t k = 0; k < env.skills.size(); ++k)
      next.at(s, mdp.n_actions + static_cast<int>(k)) =
          skill_vals[k][static_cast<std::size_t>(s)];
  }
  return next;
}

}  // namespace

QTable smdp_value_iteration(const AugmentedEnv& env, double tol) {
  env.mdp.validate();
  QTable q = make_q_table(env);
  for (int iter = 0; iter < 1000000; ++iter) {
    QTable next = backup_once(env, q);
    double delta = 0.0;
    for (std::size_t i = 0; i < q.q.size(); ++i)
      delta = std::max(delta, std::fabs(next.q[i] - q.q[i]));
    q = std::move(next);
    if (delta < tol) break;
  }
  return q;
}

double bellman_residual(const AugmentedEnv& env, const QTable& q) {
  QTable next = backup_once(env, q);
  double r = 0.0;
  for (std::size_t i = 0; i < q.q.size(); ++i)
    r = std::max(r, std::fabs(next.q[i] - q.q[i]));
  return r;
}

QLearnResult run_q_learning(const AugmentedEnv& env, const QLearnConfig& cfg,
                            Rng& rng, const QTable* oracle, int log_every) {
  QLearnResult res;
  res.q = make_q_table(env);
  int s = env.mdp.start_state;
  double ep_return = 0.0, ep_discount = 1.0;
  double return_acc = 0.0;
  int episodes = 0;
  for (long step = 1; step <= cfg.steps; ++step) {
    double frac = static_cast<double>(step) / static_cast<double>(cfg.steps);
    double eps = cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
    int a;
    if (rng.uniform() < eps) {
      a = rng.uniform_int(env.n_aug_actions());
    } else {
      a = 0;
      for (int cand = 1; cand < env.n_aug_actions(); ++cand)
        if (res.q.at(s, cand) > res.q.at(s, a)) a = cand;
    }
    ReplayEntry e = augmented_step(env, s, a, rng);
    q_update(res.q, e, env, cfg.lr, cfg.naive);
    ep_return += ep_discount * e.reward;
    ep_discount *= std::pow(env.mdp.gamma, static_cast<double>(e.tau));
    s = e.next_state;
    if (env.mdp.terminal[s]) {
      return_acc += ep_return;
      ++episodes;
      ep_return = 0.0;
      ep_discount = 1.0;
      s = env.mdp.start_state;
    }
    if (step % log_every == 0 || step == cfg.steps) {
      QLearnPoint pt;
      pt.step = step;
      pt.mean_return = episodes > 0 ? return_acc / episodes : 0.0;
      pt.q_gap = 0.0;
      if (oracle != nullptr)
        for (std::size_t i = 0; i < res.q.q.size(); ++i)
          pt.q_gap = std::max(pt.q_gap,
                              std::fabs(res.q.q[i] - oracle->q[i]));
      res.curve.push_back(pt);
      return_acc = 0.0;
      episodes = 0;
    }
  }
  return res;
}

std::vector<Skill> skills_from_checkpoint(
    const Checkpoint& ck, const std::vector<std::vector<double>>& features,
    int max_steps) {
  for (const auto& f : features)
    if (static_cast<int>(f.size()) != ck.bank.state_dim)
      throw Error("skills_from_checkpoint: feature dim " +
                  std::to_string(f.size()) + " does not match state_dim " +
                  std::to_string(ck.bank.state_dim));
  int n_states = static_cast<int>(features.size());
  int K = ck.bank.K();

  auto actions = std::make_shared<std::vector<std::vector<int>>>();
  auto stops = std::make_shared<std::vector<std::vector<double>>>();
  actions->assign(K, std::vector<int>(n_states, 0));
  stops->assign(K, std::vector<double>(n_states, 0.0));
  for (int s = 0; s < n_states; ++s) {
    auto probs = policy_probs(ck.bank, features[s]);
    auto term = termination_probs(ck.bank, features[s]);
    for (int k = 0; k < K; ++k) {
      int best = 0;
      for (int a = 1; a < ck.bank.n_actions; ++a)
        if (probs[k][a] > probs[k][best]) best = a;
      (*actions)[k][s] = best;
      (*stops)[k][s] = term[static_cast<std::size_t>(k)];
    }
  }

  std::vector<Skill> skills;
  for (int k = 0; k < K; ++k) {
    Skill sk;
    sk.policy = [actions, k](int s) { return (*actions)[k][s]; };
    sk.termination = [stops, k](int s) { return (*stops)[k][s]; };
    sk.max_steps = max_steps;
    skills.push_back(std::move(sk));
  }
  return skills;
}

AugmentedEnv load_env_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("env: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("env: parse error in " + path + ": " + e.what());
  }

  AugmentedEnv env;
  TabularMdp& mdp = env.mdp;
  mdp.n_states = j.at("states").get<int>();
  mdp.n_actions = j.at("actions").get<int>();
  mdp.transitions =
      j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
  mdp.rewards = j.at("rewards").get<std::vector<std::vector<double>>>();
  mdp.gamma = j.at("gamma").get<double>();
  mdp.terminal.assign(static_cast<std::size_t>(mdp.n_states), false);
  if (j.contains("terminal"))
    mdp.terminal = j.at("terminal").get<std::vector<bool>>();
  if (j.contains("start_state")) mdp.start_state = j.at("start_state").get<int>();
  int default_cap = j.value("max_skill_steps", 15);
  mdp.validate();

  if (j.contains("skills")) {
    for (const json& js : j.at("skills")) {
      Skill sk;
      sk.max_steps = js.value("max_steps", default_cap);
      auto policy =
          std::make_shared<std::vector<int>>(js.at("policy").get<std::vector<int>>());
      if (static_cast<int>(policy->size()) != mdp.n_states)
        throw IoError("env: skill policy table has wrong length");
      sk.policy = [policy](int s) { return (*policy)[static_cast<std::size_t>(s)]; };
      if (js.contains("termination")) {
        auto term = std::make_shared<std::vector<double>>(
            js.at("termination").get<std::vector<double>>());
        if (static_cast<int>(term->size()) != mdp.n_states)
          throw IoError("env: skill termination table has wrong length");
        sk.termination = [term](int s) {
          return (*term)[static_cast<std::size_t>(s)];
        };
      } else {
        double p = js.value("termination_const", 0.0);
        sk.termination = [p](int) { return p; };
      }
      env.skills.push_back(std::move(sk));
    }
  }
  return env;
}

}  // namespace optdisc
