#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dtgi/bench/model.hpp"

namespace dtgi::bench {

struct TrainGameData {
  std::string game_id;
  std::vector<policy::Trajectory> trajectories;
  std::optional<GameConditioning<float>> cond;
};

struct LogRow {
  long step = 0;
  int epoch = 0;
  std::string game_id;
  double loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

struct TrainResult {
  ParamStore<float> params;
  std::vector<LogRow> log;
  int start_epoch = 0;  // > 0 when resumed
  std::string checkpoint_hash;
};

struct TrainHooks {
  std::string run_dir;  // empty: nothing is written
  bool resume = false;
  std::function<void(const LogRow&)> on_step;
  int stop_after_epochs = 0;  // > 0: return early after this many epochs (interruption testing)
};

// Mean valid window length when windows start uniformly over all steps.
double expected_window_len(const std::vector<TrainGameData>& games, int context_len);

int resolve_steps_per_epoch(const TrainConfig& cfg, const std::vector<TrainGameData>& games);

// Linear warmup over warmup_tokens, then cosine decay to lr_floor * lr at
// final_tokens.
double lr_at(const TrainConfig& cfg, double tokens, double final_tokens);

// Round-robin over games (one game per batch), AdamW, gradient clipping.
// Throws NumericDomainError naming the step when the loss goes non-finite.
// With a run_dir, writes state.ckpt after every epoch, model.ckpt and
// loss.csv at the end; resume restarts from the last completed epoch.
TrainResult train(const Model<float>& model, const std::vector<TrainGameData>& games, const TrainConfig& cfg,
                  std::uint64_t seed, const TrainHooks& hooks = {});

void write_log_csv(const std::string& path, const std::vector<LogRow>& log);
std::vector<LogRow> read_log_csv(const std::string& path);

}  // namespace dtgi::bench
