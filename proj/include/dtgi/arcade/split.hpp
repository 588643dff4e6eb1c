#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtgi/arcade/dataset.hpp"
#include "dtgi/arcade/game.hpp"
#include "dtgi/mgi/instruction.hpp"

namespace dtgi::arcade {

struct TrainGame {
  GameSpec spec;
  OfflineDataset data;
  mgi::InstructionSet instructions;
};

// Unseen games never carry a dataset.
struct TestGame {
  GameSpec spec;
  mgi::InstructionSet instructions;
};

struct TaskSplit {
  std::vector<TrainGame> train;
  std::vector<TestGame> test;
};

struct SplitParams {
  int n_train = 6;
  int n_test = 2;
  std::uint64_t master_seed = 0;
  std::size_t budget = 10000;
  PolicyMix mix;
  int instr_n = 50;
  int instr_m = 20;
};

struct SplitSpecs {
  std::vector<GameSpec> train;
  std::vector<GameSpec> test;
};

// Chooses game specs so that no unseen game's flag set is contained in any
// training game's flag set; training games cover both gem colours and every
// flag used by the unseen games. Throws ConfigError when the procedural
// space cannot supply the requested counts.
SplitSpecs make_split_specs(int n_train, int n_test, std::uint64_t master_seed);

// Seed owned by game `index` (train games first, then unseen games).
inline std::uint64_t game_seed(std::uint64_t master_seed, std::size_t index) { return master_seed ^ index; }

// Specs plus offline datasets for training games and instruction sets for all.
TaskSplit make_split(const SplitParams& params);

// On-disk split layout:
//   specs.json                    {"train": [spec...], "test": [spec...]}
//   data/<game_id>.bin            offline dataset, training games only
//   instructions/<game_id>.json   instruction set, every game
// save_split returns the written paths relative to dir, sorted.
std::vector<std::string> save_split(const std::string& dir, const TaskSplit& split);
TaskSplit load_split(const std::string& dir);

}  // namespace dtgi::arcade
