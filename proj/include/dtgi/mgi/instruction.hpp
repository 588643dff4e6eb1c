#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dtgi::mgi {

// Axis-aligned box over grid cells: (a, b) lower-left, (c, d) upper-right,
// both inclusive.
struct KeyElementBox {
  int a = 0;
  int b = 0;
  int c = 0;
  int d = 0;
  std::string label;
  friend bool operator==(const KeyElementBox&, const KeyElementBox&) = default;
};

struct GuidanceStep {
  int action_id = 0;
  std::string text;
  std::vector<KeyElementBox> boxes;
  friend bool operator==(const GuidanceStep&, const GuidanceStep&) = default;
};

// One observation. Toy-suite frames carry their tensor inline; external data
// may instead reference a raw-tensor file by relative path.
struct Frame {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;
  std::string path;
  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Instruction {
  std::string description;
  std::vector<Frame> frames;
  std::vector<GuidanceStep> guidance;
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct InstructionSet {
  std::string game_id;
  std::vector<Instruction> instructions;
  friend bool operator==(const InstructionSet&, const InstructionSet&) = default;
};

// Contiguous non-overlapping windows of segment_len frames; the trailing
// remainder is dropped. Throws ConfigError when segment_len < 1.
template <typename F>
std::vector<std::vector<F>> segment_video(const std::vector<F>& frames, int segment_len);

struct SchemaLimits {
  int grid = 7;          // box coordinates must lie in [0, grid)
  int action_count = 6;  // action ids must lie in [0, action_count)
  int steps = 0;         // required m, or 0 to only require consistency
};

// Returns one human-readable diagnostic per violation; empty means valid.
std::vector<std::string> validate(const InstructionSet& set, const SchemaLimits& limits);

std::string to_json(const InstructionSet& set);
InstructionSet from_json(const std::string& text);

void save_instruction_set(const std::string& path, const InstructionSet& set);
InstructionSet load_instruction_set(const std::string& path);

}  // namespace dtgi::mgi
