#include "dtgi/bench/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"
#include "dtgi/numerics/checkpoint.hpp"

namespace dtgi::bench {

double expected_window_len(const std::vector<TrainGameData>& games, int context_len) {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& g : games) {
    for (const auto& t : g.trajectories) {
      const auto n = static_cast<long>(t.size());
      for (long s = 0; s < n; ++s) sum += static_cast<double>(std::min<long>(context_len, n - s));
      count += static_cast<double>(n);
    }
  }
  return count > 0 ? sum / count : 0.0;
}

int resolve_steps_per_epoch(const TrainConfig& cfg, const std::vector<TrainGameData>& games) {
  if (cfg.steps_per_epoch > 0) return cfg.steps_per_epoch;
  std::size_t total = 0;
  for (const auto& g : games) {
    for (const auto& t : g.trajectories) total += t.size();
  }
  return std::max(1, static_cast<int>(total / static_cast<std::size_t>(cfg.batch_size)));
}

double lr_at(const TrainConfig& cfg, double tokens, double final_tokens) {
  if (tokens < cfg.warmup_tokens) return cfg.lr * tokens / std::max(1.0, cfg.warmup_tokens);
  const double span = std::max(1.0, final_tokens - cfg.warmup_tokens);
  const double progress = std::min(1.0, (tokens - cfg.warmup_tokens) / span);
  return cfg.lr * std::max(cfg.lr_floor, 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void write_log_csv(const std::string& path, const std::vector<LogRow>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "step,epoch,game_id,loss,lr,grad_norm\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%ld,%d,%s,%.9g,%.9g,%.9g\n", r.step, r.epoch, r.game_id.c_str(), r.loss, r.lr,
                  r.grad_norm);
    out << buf;
  }
}

std::vector<LogRow> read_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<LogRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_list(line);
    if (f.size() != 6) throw FormatError(path + ": bad log row");
    out.push_back({std::stol(f[0]), std::stoi(f[1]), f[2], std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
  }
  return out;
}

namespace {

constexpr const char* kEpochKey = "train.epoch";
constexpr const char* kStepKey = "train.step";
constexpr const char* kTokensKey = "train.tokens";

void scalar(ParamStore<float>& ps, const std::string& name, double v) {
  num::Mat<float> m(1, 2);
  // split into high and low parts so large counters survive f32
  const double hi = std::floor(v / 65536.0);
  m(0, 0) = static_cast<float>(hi);
  m(0, 1) = static_cast<float>(v - hi * 65536.0);
  ps.add_frozen(name, m);
}

double scalar(const ParamStore<float>& ps, const std::string& name) {
  const auto& m = ps.value(name);
  return static_cast<double>(m(0, 0)) * 65536.0 + static_cast<double>(m(0, 1));
}

}  // namespace

TrainResult train(const Model<float>& model, const std::vector<TrainGameData>& games, const TrainConfig& cfg,
                  std::uint64_t seed, const TrainHooks& hooks) {
  if (games.empty()) throw ConfigError("train: no training games");
  for (const auto& g : games) {
    if (g.trajectories.empty()) throw ConfigError("train: game " + g.game_id + " has no trajectories");
    if (is_conditioned(model.method()) && !g.cond) {
      throw ConfigError(std::string("train: ") + method_name(model.method()) + " needs instructions for " + g.game_id);
    }
  }
  const int context = model.dt().config().context_len;
  const int steps_per_epoch = resolve_steps_per_epoch(cfg, games);
  const long total_steps = static_cast<long>(steps_per_epoch) * cfg.max_epochs;
  const double final_tokens =
      static_cast<double>(total_steps) * cfg.batch_size * expected_window_len(games, context);

  TrainResult result;
  ParamStore<float>& ps = result.params;
  model.init(ps, seed);
  num::AdamW<float> opt(cfg.adam);
  long step = 0;
  double tokens = 0.0;
  int start_epoch = 0;

  namespace fs = std::filesystem;
  const std::string state_path = hooks.run_dir.empty() ? "" : hooks.run_dir + "/state.ckpt";
  const std::string log_path = hooks.run_dir.empty() ? "" : hooks.run_dir + "/loss.csv";
  if (hooks.resume && !state_path.empty() && fs::exists(state_path)) {
    const auto bytes = num::read_file(state_path);
    ParamStore<float> state = num::decode_checkpoint<float>(bytes);
    for (auto& [name, p] : ps) {
      if (!state.contains(name)) throw FormatError(state_path + ": missing " + name);
      const auto& v = state.value(name);
      if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
        throw FormatError(state_path + ": shape mismatch for " + name);
      }
      p.value = v;
    }
    opt.import_state(state);
    start_epoch = static_cast<int>(scalar(state, kEpochKey));
    step = static_cast<long>(scalar(state, kStepKey));
    tokens = scalar(state, kTokensKey);
    if (fs::exists(log_path)) {
      for (const auto& r : read_log_csv(log_path)) {
        if (r.epoch < start_epoch) result.log.push_back(r);
      }
    }
  }
  result.start_epoch = start_epoch;

  int epochs_done = 0;
  for (int epoch = start_epoch; epoch < cfg.max_epochs; ++epoch) {
    num::Rng rng(mix_seed(seed, 0x10000ULL + static_cast<std::uint64_t>(epoch)));
    const num::ForwardContext ctx{true, &rng};
    for (int s = 0; s < steps_per_epoch; ++s, ++step) {
      const auto& game = games[static_cast<std::size_t>(step % static_cast<long>(games.size()))];
      const auto batch = policy::sample_windows<float>(game.trajectories, cfg.batch_size, context, rng);
      ps.zero_grad();
      const float loss = model.loss(ps, batch, game.cond ? &*game.cond : nullptr, ctx, true);
      if (!std::isfinite(loss)) {
        throw NumericDomainError("training diverged: non-finite loss at step " + std::to_string(step) +
                                 " (epoch " + std::to_string(epoch) + ", game " + game.game_id + ")");
      }
      double norm = 0.0;
      try {
        norm = num::clip_grad_norm(ps, cfg.grad_clip);
      } catch (const NumericDomainError&) {
        throw NumericDomainError("training diverged: non-finite gradient at step " + std::to_string(step) +
                                 " (game " + game.game_id + ")");
      }
      for (int t : batch.targets) tokens += t >= 0 ? 1.0 : 0.0;
      const double lr = lr_at(cfg, tokens, final_tokens);
      opt.step(ps, lr);
      LogRow row{step, epoch, game.game_id, loss, lr, norm};
      result.log.push_back(row);
      if (hooks.on_step) hooks.on_step(row);
    }
    if (!state_path.empty()) {
      ParamStore<float> state;
      for (const auto& [name, p] : ps) state.add_frozen(name, p.value);
      opt.export_state(state);
      scalar(state, kEpochKey, epoch + 1);
      scalar(state, kStepKey, static_cast<double>(step));
      scalar(state, kTokensKey, tokens);
      num::save_checkpoint(state_path, state);
      write_log_csv(log_path, result.log);
    }
    ++epochs_done;
    if (hooks.stop_after_epochs > 0 && epochs_done >= hooks.stop_after_epochs) break;
  }
  const auto bytes = num::encode_checkpoint(ps);
  result.checkpoint_hash = sha256_hex(std::span<const std::uint8_t>(bytes));
  if (!hooks.run_dir.empty()) {
    num::write_file(hooks.run_dir + "/model.ckpt", bytes);
    write_log_csv(log_path, result.log);
  }
  return result;
}

}  // namespace dtgi::bench
