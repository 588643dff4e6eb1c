#include "dtgi/arcade/game.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "dtgi/common/error.hpp"

namespace dtgi::arcade {

namespace {

constexpr std::array<Cell, 4> kMoves = {Cell{0, 1}, Cell{0, -1}, Cell{-1, 0}, Cell{1, 0}};

bool in_bounds(const GameSpec& spec, Cell c) { return c.x >= 0 && c.y >= 0 && c.x < spec.grid && c.y < spec.grid; }

Cell add(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

bool contains(const std::vector<Cell>& v, Cell c) { return std::find(v.begin(), v.end(), c) != v.end(); }

bool occupied(const GameState& s, Cell c) {
  return s.agent == c || contains(s.gems, c) || contains(s.hazards, c) || (s.prey && *s.prey == c) ||
         (s.box && *s.box == c) || (s.goal && *s.goal == c);
}

// Uniform over free cells inside [lo, hi] on both axes.
std::optional<Cell> sample_free(const GameSpec& spec, const GameState& s, Rng& rng, int lo, int hi) {
  std::vector<Cell> free;
  for (int y = lo; y <= hi; ++y) {
    for (int x = lo; x <= hi; ++x) {
      if (!occupied(s, {x, y})) free.push_back({x, y});
    }
  }
  if (free.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  (void)spec;
  return free[pick(rng)];
}

Cell must_sample(const GameSpec& spec, const GameState& s, Rng& rng, int lo, int hi) {
  auto c = sample_free(spec, s, rng, lo, hi);
  if (!c) throw ConfigError(spec.game_id + ": grid too small for its entities");
  return *c;
}

void check_state(const GameSpec& spec, const GameState& s) {
  auto bad = [&](const char* what) { throw ContractError(spec.game_id + ": malformed state (" + what + ")"); };
  if (!in_bounds(spec, s.agent)) bad("agent out of bounds");
  for (const auto& g : s.gems) {
    if (!in_bounds(spec, g)) bad("gem out of bounds");
  }
  for (const auto& h : s.hazards) {
    if (!in_bounds(spec, h)) bad("hazard out of bounds");
  }
  if (s.prey && !in_bounds(spec, *s.prey)) bad("prey out of bounds");
  if (s.box && !in_bounds(spec, *s.box)) bad("box out of bounds");
  if (s.goal && !in_bounds(spec, *s.goal)) bad("goal out of bounds");
  if (spec.has(kChase) != s.prey.has_value()) bad("prey presence does not match flags");
  if (spec.has(kPush) != (s.box.has_value() && s.goal.has_value())) bad("box/goal presence does not match flags");
  if (s.steps < 0) bad("negative step count");
}

}  // namespace

const char* action_name(int action) {
  static constexpr const char* kNames[] = {"up", "down", "left", "right", "interact", "noop"};
  if (action < 0 || action >= kActionCount) return "invalid";
  return kNames[action];
}

std::string flags_name(unsigned flags) {
  std::string out;
  auto add_name = [&](unsigned f, const char* n) {
    if (flags & f) out += (out.empty() ? "" : "+") + std::string(n);
  };
  add_name(kCollect, "collect");
  add_name(kAvoid, "avoid");
  add_name(kChase, "chase");
  add_name(kPush, "push");
  return out.empty() ? "none" : out;
}

const char* color_name(Color c) { return c == Color::kRed ? "red" : "blue"; }

const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::kExpert:
      return "expert";
    case PolicyKind::kNoisyExpert:
      return "noisy-expert";
    case PolicyKind::kRandom:
      return "random";
  }
  return "unknown";
}

void validate(const GameSpec& spec) {
  if (spec.grid < 4) throw ConfigError(spec.game_id + ": grid must be at least 4");
  if ((spec.flags & (kCollect | kChase | kPush)) == 0) {
    throw ConfigError(spec.game_id + ": no rewarding interaction (flags " + flags_name(spec.flags) + ")");
  }
  if (spec.has(kCollect) && spec.gems <= 0) throw ConfigError(spec.game_id + ": collect game without gems");
  if (spec.has(kAvoid) && spec.hazards <= 0) throw ConfigError(spec.game_id + ": avoid game without hazards");
  if (spec.episode_cap <= 0) throw ConfigError(spec.game_id + ": episode cap must be positive");
}

GameState reset(const GameSpec& spec, Rng& rng) {
  validate(spec);
  GameState s;
  s.agent = {-1, -1};
  if (spec.has(kPush)) {
    s.box = must_sample(spec, s, rng, 1, spec.grid - 2);
    s.goal = must_sample(spec, s, rng, 1, spec.grid - 2);
  }
  s.agent = must_sample(spec, s, rng, 0, spec.grid - 1);
  if (spec.has(kCollect)) {
    for (int i = 0; i < spec.gems; ++i) s.gems.push_back(must_sample(spec, s, rng, 0, spec.grid - 1));
  }
  if (spec.has(kAvoid)) {
    for (int i = 0; i < spec.hazards; ++i) s.hazards.push_back(must_sample(spec, s, rng, 0, spec.grid - 1));
  }
  if (spec.has(kChase)) s.prey = must_sample(spec, s, rng, 0, spec.grid - 1);
  return s;
}

StepResult step(const GameSpec& spec, const GameState& state, int action, Rng& rng) {
  if (action < 0 || action >= kActionCount) {
    throw ContractError(spec.game_id + ": action " + std::to_string(action) + " out of range");
  }
  check_state(spec, state);
  if (state.done) throw ContractError(spec.game_id + ": step called on a finished episode");

  StepResult r;
  GameState& s = r.next;
  s = state;
  if (action <= kRight) {
    const Cell dir = kMoves[static_cast<std::size_t>(action)];
    const Cell target = add(s.agent, dir);
    if (in_bounds(spec, target) && !(s.prey && *s.prey == target)) {
      if (s.box && *s.box == target) {
        const Cell beyond = add(target, dir);
        const bool free = in_bounds(spec, beyond) && !contains(s.gems, beyond) && !contains(s.hazards, beyond) &&
                          !(s.prey && *s.prey == beyond);
        if (free) {
          s.box = beyond;
          s.agent = target;
          if (*s.box == *s.goal) {
            r.reward += spec.rewards.box_on_goal;
            s.box.reset();
            s.box = must_sample(spec, s, rng, 1, spec.grid - 2);
          }
        }
      } else {
        s.agent = target;
      }
    }
    if (auto it = std::find(s.gems.begin(), s.gems.end(), s.agent); it != s.gems.end()) {
      r.reward += spec.rewards.gem;
      s.gems.erase(it);
    }
    if (auto it = std::find(s.hazards.begin(), s.hazards.end(), s.agent); it != s.hazards.end()) {
      r.reward += spec.rewards.hazard;
      s.hazards.erase(it);
    }
  } else if (action == kInteract && s.prey && manhattan(s.agent, *s.prey) == 1) {
    r.reward += spec.rewards.prey;
    s.prey.reset();
    s.prey = must_sample(spec, s, rng, 0, spec.grid - 1);
  }

  if (s.prey) {
    std::bernoulli_distribution moves(0.5);
    if (moves(rng)) {
      std::vector<Cell> options;
      for (const Cell& d : kMoves) {
        const Cell c = add(*s.prey, d);
        if (in_bounds(spec, c) && !occupied(s, c)) options.push_back(c);
      }
      if (!options.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        s.prey = options[pick(rng)];
      }
    }
  }

  ++s.steps;
  s.done = s.steps >= spec.episode_cap || (spec.has(kCollect) && s.gems.empty());
  r.done = s.done;
  return r;
}

std::vector<float> observe(const GameSpec& spec, const GameState& s) {
  const int g = spec.grid;
  std::vector<float> obs(spec.obs_size(), 0.0f);
  auto mark = [&](int plane, Cell c) {
    obs[static_cast<std::size_t>(plane) * g * g + static_cast<std::size_t>(c.y) * g + c.x] = 1.0f;
  };
  mark(kAgentPlane, s.agent);
  const int gem_plane = spec.good_color == Color::kRed ? kRedPlane : kBluePlane;
  const int hazard_plane = gem_plane == kRedPlane ? kBluePlane : kRedPlane;
  for (const auto& c : s.gems) mark(gem_plane, c);
  for (const auto& c : s.hazards) mark(hazard_plane, c);
  if (s.prey) mark(kPreyPlane, *s.prey);
  if (s.box) mark(kBoxPlane, *s.box);
  if (s.goal) mark(kGoalPlane, *s.goal);
  return obs;
}

namespace {

struct Objective {
  Cell cell;         // where the agent must stand
  int final_action;  // action taken on arrival
  TargetKind kind;
  Cell entity;
};

}  // namespace

int expert_action(const GameSpec& spec, const GameState& state) { return expert_plan(spec, state).action; }

ExpertPlan expert_plan(const GameSpec& spec, const GameState& s) {
  if (s.prey && manhattan(s.agent, *s.prey) == 1) return {kInteract, TargetKind::kPrey, *s.prey, {}};

  auto blocked = [&](Cell c) {
    return !in_bounds(spec, c) || contains(s.hazards, c) || (s.prey && *s.prey == c) || (s.box && *s.box == c);
  };

  std::vector<Objective> objectives;
  for (const auto& gcell : s.gems) objectives.push_back({gcell, -1, TargetKind::kGem, gcell});
  if (s.prey) {
    for (const Cell& d : kMoves) {
      const Cell c = add(*s.prey, d);
      if (!blocked(c)) objectives.push_back({c, kInteract, TargetKind::kPrey, *s.prey});
    }
  }
  if (s.box && s.goal) {
    const int dx = s.goal->x - s.box->x;
    const int dy = s.goal->y - s.box->y;
    std::vector<int> dirs;
    if (dx != 0) dirs.push_back(dx > 0 ? kRight : kLeft);
    if (dy != 0) dirs.push_back(dy > 0 ? kUp : kDown);
    for (int a : dirs) {
      const Cell d = kMoves[static_cast<std::size_t>(a)];
      const Cell dest = add(*s.box, d);
      const Cell stand = {s.box->x - d.x, s.box->y - d.y};
      const bool dest_ok = in_bounds(spec, dest) && !contains(s.gems, dest) && !contains(s.hazards, dest) &&
                           !(s.prey && *s.prey == dest);
      if (dest_ok && !blocked(stand)) {
        objectives.push_back({stand, a, TargetKind::kBox, *s.box});
        break;
      }
    }
  }
  if (objectives.empty()) return {};

  // BFS from the agent over passable cells.
  const int g = spec.grid;
  std::vector<int> dist(static_cast<std::size_t>(g * g), -1);
  std::vector<int> first(static_cast<std::size_t>(g * g), kNoop);
  auto idx = [g](Cell c) { return static_cast<std::size_t>(c.y * g + c.x); };
  std::deque<Cell> queue{s.agent};
  dist[idx(s.agent)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int a = 0; a < 4; ++a) {
      const Cell n = add(c, kMoves[static_cast<std::size_t>(a)]);
      if (blocked(n) || dist[idx(n)] >= 0) continue;
      dist[idx(n)] = dist[idx(c)] + 1;
      first[idx(n)] = c == s.agent ? a : first[idx(c)];
      queue.push_back(n);
    }
  }

  int best = -1;
  int best_dist = 1 << 30;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    const int d = dist[idx(objectives[i].cell)];
    if (d >= 0 && d < best_dist) {
      best = static_cast<int>(i);
      best_dist = d;
    }
  }
  if (best < 0) return {};
  const Objective& o = objectives[static_cast<std::size_t>(best)];
  ExpertPlan plan{kNoop, o.kind, o.entity, s.goal.value_or(Cell{})};
  if (best_dist == 0) {
    plan.action = o.final_action >= 0 ? o.final_action : kNoop;
  } else {
    plan.action = first[idx(o.cell)];
  }
  return plan;
}

int policy_action(PolicyKind kind, const GameSpec& spec, const GameState& state, Rng& rng, double noisy_epsilon) {
  std::uniform_int_distribution<int> any(0, kActionCount - 1);
  switch (kind) {
    case PolicyKind::kExpert:
      return expert_action(spec, state);
    case PolicyKind::kNoisyExpert: {
      std::bernoulli_distribution explore(noisy_epsilon);
      if (explore(rng)) return any(rng);
      return expert_action(spec, state);
    }
    case PolicyKind::kRandom:
      return any(rng);
  }
  return kNoop;
}

EpisodeStats rollout_returns(const GameSpec& spec, PolicyKind kind, int episodes, std::uint64_t seed,
                             double noisy_epsilon) {
  Rng rng(seed);
  std::vector<double> returns;
  for (int e = 0; e < episodes; ++e) {
    GameState s = reset(spec, rng);
    double total = 0;
    while (!s.done) {
      const int a = policy_action(kind, spec, s, rng, noisy_epsilon);
      StepResult r = step(spec, s, a, rng);
      total += r.reward;
      s = std::move(r.next);
    }
    returns.push_back(total);
  }
  EpisodeStats st;
  if (returns.empty()) return st;
  for (double r : returns) st.mean_return += r;
  st.mean_return /= static_cast<double>(returns.size());
  for (double r : returns) st.std_return += (r - st.mean_return) * (r - st.mean_return);
  st.std_return = std::sqrt(st.std_return / static_cast<double>(returns.size()));
  return st;
}

}  // namespace dtgi::arcade
