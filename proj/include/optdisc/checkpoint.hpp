// Model checkpoints: one JSON object holding K, alpha, the stick posterior,
// every network tensor by name, and the schedule state.
#ifndef OPTDISC_CHECKPOINT_HPP
#define OPTDISC_CHECKPOINT_HPP

#include <string>

#include "optdisc/model.hpp"

namespace optdisc {

struct ScheduleState {
  double value = 1.0;
  double decay = 0.995;
  double floor = 0.0;

  double decayed() const { return std::max(value * decay, floor); }
};

struct Checkpoint {
  OptionBank bank;
  Encoder encoder;
  StickPosterior sticks;
  ScheduleState tau{1.0, 0.995, 0.1};
  ScheduleState lambda_ent{5.0, 0.995, 0.0};
  long step = 0;
  int epoch = 0;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace optdisc

#endif
