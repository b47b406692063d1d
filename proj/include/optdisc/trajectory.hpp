// Expert trajectory records and the JSON-Lines dataset format.
//
// File layout: one metadata header line
//   {"format_version":1,"state_dim":D,"n_actions":A,"T":T}
// followed by one record per line:
//   {"states":[[..],..],"actions":[..]}
#ifndef OPTDISC_TRAJECTORY_HPP
#define OPTDISC_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "optdisc/tensor.hpp"

namespace optdisc {

struct Trajectory {
  std::vector<std::vector<double>> states;  // length T+1
  std::vector<int> actions;                 // length T
  int length() const { return static_cast<int>(actions.size()); }
};

struct DatasetMeta {
  int format_version = 1;
  int state_dim = 0;
  int n_actions = 0;
  int T = 0;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Trajectory> items;
  int size() const { return static_cast<int>(items.size()); }
};

// Throws Error naming the record index on an invariant violation.
void validate_trajectory(const Trajectory& traj, const DatasetMeta& meta,
                         int index);

void write_dataset(const Dataset& ds, const std::string& path);

// Empty file -> empty dataset. Malformed lines raise IoError with the line
// number; structurally invalid records raise Error with the record index.
Dataset read_dataset(const std::string& path);

}  // namespace optdisc

#endif
