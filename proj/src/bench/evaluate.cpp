#include "dtgi/bench/evaluate.hpp"

#include <cmath>

#include "dtgi/common/hash.hpp"

namespace dtgi::bench {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double expert_target(const arcade::GameSpec& spec, int episodes, std::uint64_t seed) {
  return arcade::rollout_returns(spec, arcade::PolicyKind::kExpert, episodes, mix_seed(seed, 0xe4e7ULL)).mean_return;
}

std::vector<GameScore> evaluate(const Model<float>& model, const ParamStore<float>& ps,
                                const std::vector<EvalGame>& games, const EvalConfig& cfg) {
  std::vector<GameScore> out;
  for (const auto& g : games) {
    const auto adapters = model.adapters(ps, g.cond, num::ForwardContext{}, nullptr);
    GameScore score{g.spec.game_id, g.split, 0.0, 0.0, {}};
    for (std::uint64_t eval_seed : cfg.seeds) {
      for (int e = 0; e < cfg.episodes; ++e) {
        arcade::Rng rng(mix_seed(mix_seed(g.seed, eval_seed), static_cast<std::uint64_t>(e)));
        arcade::GameState s = arcade::reset(g.spec, rng);
        policy::History h;
        h.states.push_back(arcade::observe(g.spec, s));
        double total = 0.0;
        for (int t = 0; t < cfg.max_steps && !s.done; ++t) {
          const int a = model.act(ps, h, g.target_rtg, adapters);
          auto r = arcade::step(g.spec, s, a, rng);
          total += r.reward;
          s = std::move(r.next);
          h.actions.push_back(a);
          h.rewards.push_back(r.reward);
          h.states.push_back(arcade::observe(g.spec, s));
        }
        score.returns.push_back(total);
      }
    }
    score.mean = mean_of(score.returns);
    score.std = std_of(score.returns);
    out.push_back(std::move(score));
  }
  return out;
}

}  // namespace dtgi::bench
