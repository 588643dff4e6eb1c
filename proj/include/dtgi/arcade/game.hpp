#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dtgi::arcade {

using Rng = std::mt19937_64;

// Shared across every game so one policy head serves the whole suite.
inline constexpr int kActionCount = 6;
enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kInteract = 4, kNoop = 5 };
const char* action_name(int action);

// Dynamics flags; a game mixes any subset that contains a rewarding one.
enum Flag : unsigned {
  kCollect = 1u << 0,  // static gems of the game's good colour, +reward each
  kAvoid = 1u << 1,    // static hazards of the other colour, -reward each
  kChase = 1u << 2,    // wandering prey, caught with `interact` when adjacent
  kPush = 1u << 3,     // a box to push onto a goal cell
};
inline constexpr unsigned kAllFlags = kCollect | kAvoid | kChase | kPush;
std::string flags_name(unsigned flags);  // e.g. "collect+chase"

enum class Color : int { kRed = 0, kBlue = 1 };
const char* color_name(Color c);

// Observation planes, each grid x grid, in this order.
enum Plane : int { kAgentPlane = 0, kRedPlane, kBluePlane, kPreyPlane, kBoxPlane, kGoalPlane, kPlaneCount };

struct RewardTable {
  int gem = 1;
  int hazard = -1;
  int prey = 2;
  int box_on_goal = 3;
  friend bool operator==(const RewardTable&, const RewardTable&) = default;
};

struct GameSpec {
  std::string game_id;
  int grid = 7;
  unsigned flags = kCollect;
  Color good_color = Color::kRed;
  int gems = 0;
  int hazards = 0;
  RewardTable rewards;
  int episode_cap = 50;

  bool has(Flag f) const { return (flags & f) != 0; }
  std::vector<std::uint32_t> obs_shape() const {
    return {static_cast<std::uint32_t>(kPlaneCount), static_cast<std::uint32_t>(grid),
            static_cast<std::uint32_t>(grid)};
  }
  std::size_t obs_size() const { return static_cast<std::size_t>(kPlaneCount) * grid * grid; }
  Color bad_color() const { return good_color == Color::kRed ? Color::kBlue : Color::kRed; }
  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

// Throws ConfigError if the spec has no rewarding interaction or bad sizes.
void validate(const GameSpec& spec);

// (x, y) with x to the right and y upward; (0, 0) is the lower-left cell.
struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GameState {
  Cell agent;
  std::vector<Cell> gems;
  std::vector<Cell> hazards;
  std::optional<Cell> prey;
  std::optional<Cell> box;
  std::optional<Cell> goal;
  int steps = 0;
  bool done = false;
};

GameState reset(const GameSpec& spec, Rng& rng);

struct StepResult {
  GameState next;
  int reward = 0;
  bool done = false;
};

// Throws ContractError on an out-of-range action or a malformed state.
StepResult step(const GameSpec& spec, const GameState& state, int action, Rng& rng);

// Binary occupancy planes, flattened plane-major then row (y) then column (x).
std::vector<float> observe(const GameSpec& spec, const GameState& state);

enum class TargetKind { kNone, kGem, kPrey, kBox };

// What the scripted expert intends this step: the action and the entity it
// is acting on (used to render instruction guidance).
struct ExpertPlan {
  int action = kNoop;
  TargetKind target = TargetKind::kNone;
  Cell target_cell;
  Cell goal_cell;  // box plans only
};

// Scripted expert: shortest-path pursuit of the nearest objective, never
// stepping on hazards.
ExpertPlan expert_plan(const GameSpec& spec, const GameState& state);
int expert_action(const GameSpec& spec, const GameState& state);

enum class PolicyKind { kExpert, kNoisyExpert, kRandom };
const char* policy_name(PolicyKind k);

int policy_action(PolicyKind kind, const GameSpec& spec, const GameState& state, Rng& rng,
                  double noisy_epsilon = 0.2);

struct EpisodeStats {
  double mean_return = 0.0;
  double std_return = 0.0;
};

// Rolls `episodes` episodes with the given policy.
EpisodeStats rollout_returns(const GameSpec& spec, PolicyKind kind, int episodes, std::uint64_t seed,
                             double noisy_epsilon = 0.2);

}  // namespace dtgi::arcade
