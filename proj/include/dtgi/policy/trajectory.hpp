#pragma once

#include <span>
#include <string>
#include <vector>

#include "dtgi/arcade/dataset.hpp"
#include "dtgi/numerics/params.hpp"

namespace dtgi::policy {

// rtg[t] = sum_{k>=t} gamma^(k-t) r[k], one backward pass. Throws
// ConfigError for gamma outside [0, 1].
std::vector<double> compute_rtg(std::span<const double> rewards, double gamma = 1.0);

struct Trajectory {
  std::string game_id;
  std::vector<std::vector<float>> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> rtgs;
  std::vector<int> timesteps;

  std::size_t size() const { return actions.size(); }
};

// One trajectory per dataset episode, timesteps counted from 0.
std::vector<Trajectory> split_episodes(const arcade::OfflineDataset& ds, double gamma = 1.0);

// A batch of right-padded context windows. Rows are window-major:
// row w*len + t holds step t of window w. Padded steps have target -1.
template <typename T>
struct WindowBatch {
  int batch = 0;
  int len = 0;
  num::Mat<T> states;
  std::vector<T> rtgs;
  std::vector<int> actions;
  std::vector<int> timesteps;
  std::vector<int> targets;
};

// Samples a start transition uniformly over all steps of the given
// trajectories and takes up to `len` steps from it, padding the tail.
template <typename T>
WindowBatch<T> sample_windows(std::span<const Trajectory> trajs, int batch, int len, num::Rng& rng);

// Window holding steps [start, start + len) of one trajectory (clipped).
template <typename T>
WindowBatch<T> window_at(const Trajectory& traj, std::size_t start, int len);

}  // namespace dtgi::policy
