#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dtgi/bench/evaluate.hpp"
#include "dtgi/bench/train.hpp"

namespace dtgi::bench {

std::unique_ptr<mgi::EmbeddingProvider> make_provider(const RunConfig& cfg);

// Frozen conditioning for every game of the split under one method (empty
// vectors for DT).
struct SplitConditioning {
  std::vector<GameConditioning<float>> train;
  std::vector<GameConditioning<float>> test;
};

SplitConditioning condition_split(const arcade::TaskSplit& split, Method method,
                                  const mgi::EmbeddingProvider& provider, int dim);

std::vector<TrainGameData> training_data(const arcade::TaskSplit& split, const SplitConditioning& conds,
                                         double gamma);

// ID games (train specs) then OOD games (unseen specs); the pointers refer
// into conds, which must outlive the result.
std::vector<EvalGame> eval_games(const arcade::TaskSplit& split, const SplitConditioning& conds,
                                 const RunConfig& cfg);

struct MethodRun {
  Method method = Method::kDT;
  std::uint64_t seed = 0;
  std::vector<GameScore> scores;
  std::string checkpoint_hash;
};

// Trains one (method, seed) run on the split's training games, then
// evaluates it on ID and OOD games. run_dir as in TrainHooks.
MethodRun train_and_evaluate(const arcade::TaskSplit& split, const RunConfig& cfg, Method method, std::uint64_t seed,
                             const mgi::EmbeddingProvider& provider, const TrainHooks& hooks = {});

struct Report {
  std::vector<std::string> methods;
  ScoreTable id_raw, ood_raw;
  ScoreTable id_norm, ood_norm;
};

// Pools every run's episode returns per (method, game) across training
// seeds, then normalises each split separately.
Report build_report(const std::vector<MethodRun>& runs);

// Long CSV: split,game_id,method,raw_mean,raw_std,norm_mean,norm_std with a
// trailing "O" row per (split, method) carrying the normalised column mean.
void write_report_csv(const std::string& path, const Report& report);

}  // namespace dtgi::bench
