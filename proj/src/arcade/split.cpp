#include "dtgi/arcade/split.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <set>

#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"
#include "dtgi/mgi/synth.hpp"

namespace dtgi::arcade {

namespace {

bool valid_flags(unsigned f) { return (f & (kCollect | kChase | kPush)) != 0; }
bool subset(unsigned a, unsigned b) { return (a & b) == a; }

struct Candidate {
  unsigned flags;
  Color color;
  int variant;
};

GameSpec build_spec(const Candidate& c, int index) {
  GameSpec s;
  char id[16];
  std::snprintf(id, sizeof id, "game%02d", index + 1);
  s.game_id = id;
  s.flags = c.flags;
  s.good_color = c.color;
  // enough gems that an expert segment of 20 steps fits before they run out
  s.gems = s.has(kCollect) ? 10 + 2 * c.variant : 0;
  s.hazards = s.has(kAvoid) ? 4 + c.variant : 0;
  validate(s);
  return s;
}

}  // namespace

SplitSpecs make_split_specs(int n_train, int n_test, std::uint64_t master_seed) {
  if (n_train < 1 || n_test < 0) throw ConfigError("make_split: need n_train >= 1 and n_test >= 0");
  Rng rng(mix_seed(master_seed, 0x5b1175ULL));

  std::vector<unsigned> pairs;
  for (unsigned f = 1; f <= kAllFlags; ++f) {
    if (valid_flags(f) && std::popcount(f) == 2) pairs.push_back(f);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const std::size_t test_sets = static_cast<std::size_t>((n_test + 1) / 2);
  if (test_sets > pairs.size()) throw ConfigError("make_split: parameter space exhausted for unseen games");
  std::vector<unsigned> test_flags(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(test_sets));

  std::vector<Candidate> test;
  for (int i = 0; i < n_test; ++i) {
    const unsigned f = test_flags[static_cast<std::size_t>(i / 2)];
    Color c = (rng() & 1U) != 0 ? Color::kRed : Color::kBlue;
    if (i % 2 == 1) c = test.back().color == Color::kRed ? Color::kBlue : Color::kRed;
    test.push_back({f, c, 0});
  }

  std::vector<Candidate> pool;
  for (int variant = 0; variant < 2; ++variant) {
    for (unsigned f = 1; f <= kAllFlags; ++f) {
      if (!valid_flags(f)) continue;
      const bool covers_test = std::any_of(test_flags.begin(), test_flags.end(), [&](unsigned t) { return subset(t, f); });
      if (covers_test) continue;
      for (Color c : {Color::kRed, Color::kBlue}) pool.push_back({f, c, variant});
    }
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  if (pool.size() < static_cast<std::size_t>(n_train)) {
    throw ConfigError("make_split: parameter space exhausted (" + std::to_string(pool.size()) +
                      " admissible training games, " + std::to_string(n_train) + " requested)");
  }

  // Greedy coverage: every flag used by unseen games, and collect games of
  // both colours, should appear in training before anything else.
  std::set<std::pair<unsigned, int>> wanted;
  for (unsigned t : test_flags) {
    for (unsigned bit = 1; bit <= kPush; bit <<= 1) {
      if ((t & bit) != 0) wanted.insert({bit, -1});
    }
  }
  wanted.insert({kCollect, static_cast<int>(Color::kRed)});
  wanted.insert({kCollect, static_cast<int>(Color::kBlue)});
  auto gain = [&](const Candidate& c) {
    int g = 0;
    for (const auto& [bit, color] : wanted) {
      if ((c.flags & bit) != 0 && (color < 0 || color == static_cast<int>(c.color))) ++g;
    }
    return g;
  };
  std::vector<Candidate> train;
  while (static_cast<int>(train.size()) < n_train) {
    auto best = std::max_element(pool.begin(), pool.end(),
                                 [&](const Candidate& a, const Candidate& b) { return gain(a) < gain(b); });
    const Candidate chosen = *best;
    pool.erase(best);
    for (auto it = wanted.begin(); it != wanted.end();) {
      const bool hit = (chosen.flags & it->first) != 0 && (it->second < 0 || it->second == static_cast<int>(chosen.color));
      it = hit ? wanted.erase(it) : std::next(it);
    }
    train.push_back(chosen);
  }

  SplitSpecs out;
  int index = 0;
  for (const auto& c : train) out.train.push_back(build_spec(c, index++));
  for (const auto& c : test) out.test.push_back(build_spec(c, index++));
  return out;
}

TaskSplit make_split(const SplitParams& p) {
  if (p.budget == 0) throw ConfigError("make_split: dataset budget must be at least 1");
  const SplitSpecs specs = make_split_specs(p.n_train, p.n_test, p.master_seed);
  TaskSplit split;
  std::size_t index = 0;
  for (const auto& spec : specs.train) {
    const std::uint64_t seed = game_seed(p.master_seed, index++);
    TrainGame g;
    g.spec = spec;
    g.data = gen_offline(spec, p.budget, p.mix, seed);
    g.instructions = mgi::synth_instructions(spec, p.instr_n, p.instr_m, mix_seed(seed, 1));
    split.train.push_back(std::move(g));
  }
  for (const auto& spec : specs.test) {
    const std::uint64_t seed = game_seed(p.master_seed, index++);
    split.test.push_back({spec, mgi::synth_instructions(spec, p.instr_n, p.instr_m, mix_seed(seed, 1))});
  }
  return split;
}

}  // namespace dtgi::arcade
