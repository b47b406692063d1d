#include "optdisc/trajectory.hpp"

#include <fstream>

#include "json.hpp"

namespace optdisc {

using nlohmann::json;

void validate_trajectory(const Trajectory& traj, const DatasetMeta& meta,
                         int index) {
  std::string where = "dataset: record " + std::to_string(index);
  if (traj.states.size() != traj.actions.size() + 1)
    throw Error(where + ": " + std::to_string(traj.states.size()) +
                " states for " + std::to_string(traj.actions.size()) +
                " actions");
  if (meta.T > 0 && traj.length() != meta.T)
    throw Error(where + ": length " + std::to_string(traj.length()) +
                " does not match header T=" + std::to_string(meta.T));
  for (const auto& s : traj.states)
    if (static_cast<int>(s.size()) != meta.state_dim)
      throw Error(where + ": state dim " + std::to_string(s.size()) +
                  " does not match header " + std::to_string(meta.state_dim));
  for (int a : traj.actions)
    if (a < 0 || a >= meta.n_actions)
      throw Error(where + ": action " + std::to_string(a) + " outside [0," +
                  std::to_string(meta.n_actions) + ")");
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("dataset: cannot open " + path + " for writing");
  json header = {{"format_version", ds.meta.format_version},
                 {"state_dim", ds.meta.state_dim},
                 {"n_actions", ds.meta.n_actions},
                 {"T", ds.meta.T}};
  out << header.dump() << "\n";
  for (const Trajectory& traj : ds.items) {
    json rec = {{"states", traj.states}, {"actions", traj.actions}};
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("dataset: write failed for " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset: cannot open " + path);
  Dataset ds;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("dataset: malformed record at line " +
                    std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      try {
        ds.meta.format_version = j.at("format_version").get<int>();
        ds.meta.state_dim = j.at("state_dim").get<int>();
        ds.meta.n_actions = j.at("n_actions").get<int>();
        ds.meta.T = j.at("T").get<int>();
      } catch (const json::exception& e) {
        throw IoError("dataset: bad header at line " +
                      std::to_string(line_no) + ": " + e.what());
      }
      have_header = true;
      continue;
    }
    Trajectory traj;
    try {
      traj.states = j.at("states").get<std::vector<std::vector<double>>>();
      traj.actions = j.at("actions").get<std::vector<int>>();
    } catch (const json::exception& e) {
      throw IoError("dataset: malformed record at line " +
                    std::to_string(line_no) + ": " + e.what());
    }
    validate_trajectory(traj, ds.meta, ds.size());
    ds.items.push_back(std::move(traj));
  }
  return ds;
}

}  // namespace optdisc
