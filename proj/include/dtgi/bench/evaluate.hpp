#pragma once

#include <string>
#include <vector>

#include "dtgi/bench/model.hpp"
#include "dtgi/bench/scores.hpp"

namespace dtgi::bench {

struct EvalGame {
  arcade::GameSpec spec;
  std::string split;  // "ID" or "OOD"
  const GameConditioning<float>* cond = nullptr;
  double target_rtg = 0.0;
  std::uint64_t seed = 0;  // the game's own seed
};

struct GameScore {
  std::string game_id;
  std::string split;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> returns;
};

// Scripted-expert mean return, the default desk-scale target return.
double expert_target(const arcade::GameSpec& spec, int episodes, std::uint64_t seed);

// Greedy rollouts: cfg.episodes episodes for every seed in cfg.seeds, no
// parameter updates. Adapters are generated once per game.
std::vector<GameScore> evaluate(const Model<float>& model, const ParamStore<float>& ps,
                                const std::vector<EvalGame>& games, const EvalConfig& cfg);

double mean_of(const std::vector<double>& v);
double std_of(const std::vector<double>& v);  // population std

}  // namespace dtgi::bench
