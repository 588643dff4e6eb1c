#include "dtgi/mgi/synth.hpp"

#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"

namespace dtgi::mgi {

using arcade::Cell;
using arcade::GameSpec;
using arcade::TargetKind;

namespace {

constexpr int kAttempts = 64;

std::string at(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

std::string direction(int action) {
  switch (action) {
    case arcade::kUp: return "up";
    case arcade::kDown: return "down";
    case arcade::kLeft: return "left";
    case arcade::kRight: return "right";
    default: return "nowhere";
  }
}

KeyElementBox cell_box(Cell c, std::string label) { return {c.x, c.y, c.x, c.y, std::move(label)}; }

GuidanceStep render_step(const GameSpec& spec, const arcade::GameState& s, const arcade::ExpertPlan& plan) {
  GuidanceStep g;
  g.action_id = plan.action;
  g.boxes.push_back(cell_box(s.agent, "agent"));
  const std::string gem = std::string(arcade::color_name(spec.good_color)) + " gem";
  switch (plan.target) {
    case TargetKind::kGem:
      g.text = "move " + direction(plan.action) + " toward the " + gem + " at " + at(plan.target_cell);
      g.boxes.push_back(cell_box(plan.target_cell, gem));
      break;
    case TargetKind::kPrey:
      g.text = plan.action == arcade::kInteract ? "catch the prey at " + at(plan.target_cell)
                                                : "move " + direction(plan.action) + " to reach the prey at " +
                                                      at(plan.target_cell);
      g.boxes.push_back(cell_box(plan.target_cell, "prey"));
      break;
    case TargetKind::kBox: {
      const Cell d = plan.action == arcade::kUp     ? Cell{0, 1}
                     : plan.action == arcade::kDown ? Cell{0, -1}
                     : plan.action == arcade::kLeft ? Cell{-1, 0}
                                                    : Cell{1, 0};
      const bool pushing = Cell{s.agent.x + d.x, s.agent.y + d.y} == plan.target_cell;
      g.text = pushing ? "push the box " + direction(plan.action) + " toward the goal at " + at(plan.goal_cell)
                       : "move " + direction(plan.action) + " to get behind the box at " + at(plan.target_cell);
      g.boxes.push_back(cell_box(plan.target_cell, "box"));
      g.boxes.push_back(cell_box(plan.goal_cell, "goal"));
      break;
    }
    case TargetKind::kNone:
      g.text = "wait, nothing is reachable";
      break;
  }
  return g;
}

}  // namespace

std::string describe_game(const GameSpec& spec) {
  const std::string good = arcade::color_name(spec.good_color);
  const std::string bad = arcade::color_name(spec.bad_color());
  std::string d = "A " + std::to_string(spec.grid) + " by " + std::to_string(spec.grid) + " grid game.";
  if (spec.has(arcade::kCollect)) {
    d += " Walk onto the " + good + " gems to collect them for " + std::to_string(spec.rewards.gem) +
         " point each; the episode ends when all gems are gone.";
  }
  if (spec.has(arcade::kAvoid)) {
    d += " Never touch the " + bad + " hazards, each costs " + std::to_string(-spec.rewards.hazard) + " point.";
  }
  if (spec.has(arcade::kChase)) {
    d += " A prey wanders the grid; stand next to it and interact to catch it for " +
         std::to_string(spec.rewards.prey) + " points.";
  }
  if (spec.has(arcade::kPush)) {
    d += " Push the box onto the goal square for " + std::to_string(spec.rewards.box_on_goal) + " points.";
  }
  return d;
}

InstructionSet synth_instructions(const GameSpec& spec, int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw ConfigError("synth_instructions: n and m must be at least 1");
  arcade::validate(spec);
  InstructionSet set;
  set.game_id = spec.game_id;
  const std::string description = describe_game(spec);
  for (int i = 0; i < n; ++i) {
    arcade::Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    bool ok = false;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
      Instruction ins;
      arcade::GameState s = arcade::reset(spec, rng);
      ins.description = description;
      for (int t = 0; t < m; ++t) {
        if (s.done) break;
        Frame f;
        f.shape = spec.obs_shape();
        f.data = arcade::observe(spec, s);
        const arcade::ExpertPlan plan = arcade::expert_plan(spec, s);
        ins.frames.push_back(std::move(f));
        ins.guidance.push_back(render_step(spec, s, plan));
        s = arcade::step(spec, s, plan.action, rng).next;
      }
      if (static_cast<int>(ins.frames.size()) == m) {
        set.instructions.push_back(std::move(ins));
        ok = true;
      }
    }
    if (!ok) {
      throw GenerationError(spec.game_id + ": expert could not produce " + std::to_string(m) +
                            " consecutive steps");
    }
  }
  return set;
}

}  // namespace dtgi::mgi
