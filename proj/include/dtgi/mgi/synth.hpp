#pragma once

#include <cstdint>
#include <string>

#include "dtgi/arcade/game.hpp"
#include "dtgi/mgi/instruction.hpp"

namespace dtgi::mgi {

// Game description rendered from the spec's flags, colours and rewards.
std::string describe_game(const arcade::GameSpec& spec);

// n instructions, each an m-step scripted-expert segment with templated
// guidance and key-element boxes. Deterministic per seed. Throws
// GenerationError naming the game when no m-step segment can be rolled.
InstructionSet synth_instructions(const arcade::GameSpec& spec, int n = 50, int m = 20, std::uint64_t seed = 0);

}  // namespace dtgi::mgi
