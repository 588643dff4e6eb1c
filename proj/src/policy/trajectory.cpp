#include "dtgi/policy/trajectory.hpp"

#include <algorithm>

#include "dtgi/common/error.hpp"

namespace dtgi::policy {

std::vector<double> compute_rtg(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("compute_rtg: gamma must lie in [0, 1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

std::vector<Trajectory> split_episodes(const arcade::OfflineDataset& ds, double gamma) {
  std::vector<Trajectory> out;
  for (const auto& [begin, end] : ds.episodes()) {
    Trajectory t;
    t.game_id = ds.game_id;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& tr = ds.transitions[i];
      t.states.push_back(tr.obs);
      t.actions.push_back(tr.action);
      t.rewards.push_back(tr.reward);
      t.timesteps.push_back(static_cast<int>(i - begin));
    }
    t.rtgs = compute_rtg(t.rewards, gamma);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

template <typename T>
void fill(WindowBatch<T>& b, int w, const Trajectory& traj, std::size_t start) {
  const std::size_t avail = std::min<std::size_t>(static_cast<std::size_t>(b.len), traj.size() - start);
  for (std::size_t t = 0; t < avail; ++t) {
    const std::size_t row = static_cast<std::size_t>(w) * b.len + t;
    const auto& s = traj.states[start + t];
    for (std::size_t j = 0; j < s.size(); ++j) b.states(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = s[j];
    b.rtgs[row] = static_cast<T>(traj.rtgs[start + t]);
    b.actions[row] = traj.actions[start + t];
    b.timesteps[row] = traj.timesteps[start + t];
    b.targets[row] = traj.actions[start + t];
  }
}

template <typename T>
WindowBatch<T> empty_batch(int batch, int len, std::size_t state_dim) {
  WindowBatch<T> b;
  b.batch = batch;
  b.len = len;
  const std::size_t rows = static_cast<std::size_t>(batch) * len;
  b.states = num::Mat<T>::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(state_dim));
  b.rtgs.assign(rows, T(0));
  b.actions.assign(rows, 0);
  b.timesteps.assign(rows, 0);
  b.targets.assign(rows, -1);
  return b;
}

}  // namespace

template <typename T>
WindowBatch<T> sample_windows(std::span<const Trajectory> trajs, int batch, int len, num::Rng& rng) {
  if (trajs.empty() || batch < 1 || len < 1) throw ConfigError("sample_windows: need trajectories, batch, len");
  std::vector<std::size_t> cumulative;
  std::size_t total = 0;
  for (const auto& t : trajs) {
    total += t.size();
    cumulative.push_back(total);
  }
  if (total == 0) throw ConfigError("sample_windows: trajectories are empty");
  WindowBatch<T> b = empty_batch<T>(batch, len, trajs.front().states.front().size());
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  for (int w = 0; w < batch; ++w) {
    const std::size_t flat = pick(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), flat);
    const std::size_t ti = static_cast<std::size_t>(it - cumulative.begin());
    const std::size_t start = flat - (ti == 0 ? 0 : cumulative[ti - 1]);
    fill(b, w, trajs[ti], start);
  }
  return b;
}

template <typename T>
WindowBatch<T> window_at(const Trajectory& traj, std::size_t start, int len) {
  if (start >= traj.size()) throw ContractError("window_at: start beyond trajectory end");
  WindowBatch<T> b = empty_batch<T>(1, len, traj.states.front().size());
  fill(b, 0, traj, start);
  return b;
}

template WindowBatch<float> sample_windows<float>(std::span<const Trajectory>, int, int, num::Rng&);
template WindowBatch<double> sample_windows<double>(std::span<const Trajectory>, int, int, num::Rng&);
template WindowBatch<float> window_at<float>(const Trajectory&, std::size_t, int);
template WindowBatch<double> window_at<double>(const Trajectory&, std::size_t, int);

}  // namespace dtgi::policy
