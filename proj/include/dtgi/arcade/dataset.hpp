#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtgi/arcade/game.hpp"

namespace dtgi::arcade {

struct Transition {
  std::vector<float> obs;
  int action = 0;
  float reward = 0.0f;
  bool done = false;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// Episode-level policy weights; each episode draws one policy from the mix.
struct PolicyMix {
  double expert = 0.5;
  double noisy = 0.3;
  double random = 0.2;
  double noisy_epsilon = 0.2;

  std::string label() const;
};

struct OfflineDataset {
  std::string game_id;
  std::vector<std::uint32_t> obs_shape;
  int action_count = kActionCount;
  std::uint64_t seed = 0;
  std::string policy_label;
  std::vector<Transition> transitions;

  // [begin, end) transition index ranges, one per episode.
  std::vector<std::pair<std::size_t, std::size_t>> episodes() const;
  friend bool operator==(const OfflineDataset&, const OfflineDataset&) = default;
};

// Rolls whole episodes until the next one would overflow `budget`; the
// overflowing episode is discarded. Deterministic per seed.
OfflineDataset gen_offline(const GameSpec& spec, std::size_t budget, const PolicyMix& mix, std::uint64_t seed);

// Binary dataset file, little-endian:
//   "DTGD" | version u32 | game_id (u16 len + bytes) | obs rank u8 | extents u32[rank] |
//   action_count u32 | seed u64 | policy label (u16 len + bytes) | episode_count u32 |
//   per episode: length u32, then length x (obs f32[prod extents] | action u32 | reward f32 | done u8)
// Every episode's last record has done = 1 and no other record does.
std::vector<std::uint8_t> encode_dataset(const OfflineDataset& ds);
OfflineDataset decode_dataset(std::span<const std::uint8_t> bytes);

}  // namespace dtgi::arcade
