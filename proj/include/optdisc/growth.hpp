// Truncation growth: usage statistic, the grow decision, and structural
// expansion of every K-indexed parameter (policies, termination head,
// encoder inputs and option head, sticks, Adam moments).
#ifndef OPTDISC_GROWTH_HPP
#define OPTDISC_GROWTH_HPP

#include <vector>

#include "optdisc/model.hpp"

namespace optdisc {

struct GrowthConfig {
  bool enabled = true;
  int check_epochs = 10;  // used when check_steps == 0
  long check_steps = 0;   // optimizer-step trigger; 0 = use epochs
  double delta = 0.5;
  int max_k = 64;
  int subsample = 0;  // 0 = full dataset pass

  void validate() const {
    if (check_epochs < 1 && check_steps < 1)
      throw Error("growth: check interval must be >= 1");
    if (delta <= 0.0 || delta >= 1.0)
      throw Error("growth: delta must be in (0,1)");
    if (max_k < 1) throw Error("growth: max_k must be >= 1");
  }
};

// U(k) = fraction of dataset steps (i,t) whose action is best explained by
// option k: argmax_k pi_k(a_t|s_t), ties to the lowest index. Sums to 1
// exactly. subsample > 0 restricts to the first `subsample` trajectories.
std::vector<double> option_usage(const Dataset& ds, const OptionBank& bank,
                                 int subsample = 0);

// Grow exactly when no option is used less than delta / K of the time.
bool should_grow(const std::vector<double>& usage, double delta);

// Adds option K: a fresh policy head, one termination output, two encoder
// input columns (eta and h_prev blocks), one option-head output, and one
// stick pair. Existing parameter values are preserved bitwise; new Adam
// moments start at zero. Returns false (no-op) when max_k is reached.
bool expand_model(OptionBank& bank, Encoder& enc, StickPosterior& sticks,
                  Adam& adam, int max_k, Rng& rng);

}  // namespace optdisc

#endif
