// Minibatch training of the relaxed objective with per-epoch annealing of
// the Gumbel-Softmax temperature and the entropy weight, periodic
// usage-based growth checks, and a NaN abort that keeps the last good
// checkpoint.
#ifndef OPTDISC_TRAIN_HPP
#define OPTDISC_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "optdisc/checkpoint.hpp"
#include "optdisc/growth.hpp"
#include "optdisc/model.hpp"

namespace optdisc {

struct TrainConfig {
  std::uint64_t seed = 0;
  int epochs = 500;
  int batch_size = 128;
  double lr = 0.005;
  ModelConfig model;
  ScheduleState tau{1.0, 0.995, 0.1};
  ScheduleState lambda_ent{5.0, 0.995, 0.0};
  GrowthConfig growth;
  std::string out_dir;  // when non-empty, metrics.csv and checkpoint.json
};

struct EpochRow {
  int epoch = 0;
  double elbo = 0.0, joint = 0.0, logq = 0.0, kl = 0.0, ent_reg = 0.0;
  int K = 0;
  std::vector<double> usage;
  std::string event;  // "", "grow", or "cap"
};

struct TrainResult {
  Checkpoint ck;
  std::vector<EpochRow> history;
  bool aborted = false;
  std::string abort_component;
};

std::string metrics_header(int usage_cols);
std::string metrics_row(const EpochRow& row, int usage_cols);

TrainResult train(const Dataset& ds, const TrainConfig& cfg);

}  // namespace optdisc

#endif
