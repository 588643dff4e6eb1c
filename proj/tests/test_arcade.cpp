#include <doctest.h>

#include <filesystem>
#include <set>

#include "dtgi/arcade/split.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"

using namespace dtgi;
using namespace dtgi::arcade;

namespace {

GameSpec collector() {
  GameSpec s;
  s.game_id = "collector";
  s.flags = kCollect;
  s.gems = 1;
  s.episode_cap = 10;
  return s;
}

}  // namespace

TEST_SUITE("arcade") {
  TEST_CASE("noop in an empty cell changes only the step count") {
    const auto spec = collector();
    Rng rng(1);
    GameState s;
    s.agent = {3, 3};
    s.gems = {{0, 0}};
    const auto r = step(spec, s, kNoop, rng);
    CHECK(r.reward == 0);
    CHECK_FALSE(r.done);
    CHECK(r.next.agent == s.agent);
    CHECK(r.next.gems == s.gems);
    CHECK(r.next.steps == 1);
  }

  TEST_CASE("collecting the last gem ends the episode") {
    const auto spec = collector();
    Rng rng(1);
    GameState s;
    s.agent = {2, 2};
    s.gems = {{3, 2}};
    const auto r = step(spec, s, kRight, rng);
    CHECK(r.reward == spec.rewards.gem);
    CHECK(r.done);
    CHECK(r.next.gems.empty());
  }

  TEST_CASE("episode cap forces done") {
    const auto spec = collector();
    Rng rng(1);
    GameState s;
    s.agent = {3, 3};
    s.gems = {{0, 0}};
    s.steps = spec.episode_cap - 1;
    CHECK(step(spec, s, kNoop, rng).done);
  }

  TEST_CASE("contract errors") {
    const auto spec = collector();
    Rng rng(1);
    GameState s;
    s.agent = {3, 3};
    s.gems = {{0, 0}};
    CHECK_THROWS_AS(step(spec, s, 6, rng), ContractError);
    s.agent = {9, 0};
    CHECK_THROWS_AS(step(spec, s, kNoop, rng), ContractError);
    GameSpec none;
    none.flags = 0;
    CHECK_THROWS_AS(validate(none), ConfigError);
  }

  TEST_CASE("observation planes") {
    const auto spec = collector();
    GameState s;
    s.agent = {1, 2};
    s.gems = {{4, 0}};
    const auto obs = observe(spec, s);
    REQUIRE(obs.size() == spec.obs_size());
    const int g = spec.grid;
    CHECK(obs[static_cast<std::size_t>(kAgentPlane * g * g + 2 * g + 1)] == 1.0f);
    CHECK(obs[static_cast<std::size_t>(kRedPlane * g * g + 0 * g + 4)] == 1.0f);
    double total = 0;
    for (float v : obs) total += v;
    CHECK(total == 2.0);
  }

  TEST_CASE("offline data respects the budget and is deterministic") {
    const auto specs = make_split_specs(6, 2, 0);
    const auto& spec = specs.train.front();
    const auto ds = gen_offline(spec, 10000, {}, 3);
    CHECK(ds.transitions.size() <= 10000);
    CHECK(ds.transitions.size() >= 9500);
    CHECK(ds.transitions.back().done);
    const auto again = gen_offline(spec, 10000, {}, 3);
    CHECK(sha256_hex(encode_dataset(ds)) == sha256_hex(encode_dataset(again)));
    CHECK(decode_dataset(encode_dataset(ds)) == ds);
    CHECK_THROWS_AS(gen_offline(spec, 0, {}, 3), ConfigError);
    CHECK_THROWS_AS(gen_offline(spec, 100, {0, 0, 0, 0.2}, 3), ConfigError);
  }

  TEST_CASE("expert beats random on every spec") {
    const auto specs = make_split_specs(6, 2, 0);
    std::vector<GameSpec> all = specs.train;
    all.insert(all.end(), specs.test.begin(), specs.test.end());
    for (const auto& spec : all) {
      const auto expert = rollout_returns(spec, PolicyKind::kExpert, 10, 1);
      const auto random = rollout_returns(spec, PolicyKind::kRandom, 10, 1);
      CAPTURE(spec.game_id);
      CHECK(expert.mean_return > random.mean_return);
    }
  }

  TEST_CASE("split keeps unseen flag combinations out of training") {
    const auto specs = make_split_specs(6, 2, 0);
    CHECK(specs.train.size() == 6);
    CHECK(specs.test.size() == 2);
    std::set<std::string> train_ids;
    for (const auto& s : specs.train) train_ids.insert(s.game_id);
    for (const auto& t : specs.test) {
      CHECK(train_ids.count(t.game_id) == 0);
      for (const auto& s : specs.train) CHECK((t.flags & s.flags) != t.flags);
    }
    CHECK_THROWS_AS(make_split_specs(0, 2, 0), ConfigError);
    CHECK_THROWS_AS(make_split_specs(6, 500, 0), ConfigError);
  }

  TEST_CASE("split save and load") {
    SplitParams p;
    p.budget = 300;
    p.instr_n = 2;
    p.instr_m = 4;
    const auto split = make_split(p);
    const auto dir = std::filesystem::path(DTGI_SCRATCH_DIR) / "arcade-split";
    std::filesystem::remove_all(dir);
    const auto files = save_split(dir.string(), split);
    CHECK(files.size() == 1 + 6 + 8);
    const auto back = load_split(dir.string());
    REQUIRE(back.train.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(back.train[i].spec == split.train[i].spec);
      CHECK(back.train[i].data == split.train[i].data);
      CHECK(back.train[i].instructions == split.train[i].instructions);
    }
    CHECK(back.test[1].spec == split.test[1].spec);
    CHECK_THROWS_AS(load_split((dir / "nowhere").string()), LookupError);
  }
}
