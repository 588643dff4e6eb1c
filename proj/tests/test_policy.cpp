#include <doctest.h>

#include "dtgi/common/error.hpp"
#include "dtgi/hyper/hyperadapter.hpp"
#include "dtgi/numerics/optim.hpp"
#include "dtgi/policy/decision_transformer.hpp"

using namespace dtgi;
using namespace dtgi::policy;
using MD = Mat<double>;

namespace {

// Suffix sums with an explicit inner loop.
std::vector<double> rtg_oracle(const std::vector<double>& r, double gamma) {
  std::vector<double> out(r.size(), 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double g = 1.0;
    for (std::size_t k = t; k < r.size(); ++k, g *= gamma) out[t] += g * r[k];
  }
  return out;
}

DTConfig tiny() {
  DTConfig c;
  c.context_len = 4;
  c.layers = 2;
  c.heads = 2;
  c.embed_dim = 16;
  c.state_dim = 5;
  c.max_timestep = 16;
  c.dropout = 0.0;
  c.rtg_scale = 5.0;
  return c;
}

Trajectory random_traj(num::Rng& rng, int len, int state_dim) {
  Trajectory t;
  t.game_id = "toy";
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::uniform_int_distribution<int> a(0, 5);
  for (int i = 0; i < len; ++i) {
    std::vector<float> s(static_cast<std::size_t>(state_dim));
    for (auto& v : s) v = n(rng);
    t.states.push_back(s);
    t.actions.push_back(a(rng));
    t.rewards.push_back(i % 2);
    t.timesteps.push_back(i);
  }
  t.rtgs = compute_rtg(t.rewards);
  return t;
}

}  // namespace

TEST_SUITE("policy") {
  TEST_CASE("returns to go") {
    const std::vector<double> r{1, 2, 3};
    CHECK(compute_rtg(r, 1.0) == std::vector<double>{6, 5, 3});
    const auto half = compute_rtg(r, 0.5);
    const auto want = rtg_oracle(r, 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(half[i] == doctest::Approx(want[i]).epsilon(1e-15));
    CHECK(half == std::vector<double>{2.75, 3.5, 3.0});
    CHECK(compute_rtg(std::vector<double>(4, 0.0), 0.9) == std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(compute_rtg(r, 1.5), ConfigError);
    CHECK_THROWS_AS(compute_rtg(r, -0.1), ConfigError);
  }

  TEST_CASE("windows pad the tail") {
    num::Rng rng(0);
    const auto t = random_traj(rng, 6, 5);
    const auto w = window_at<double>(t, 4, 4);
    CHECK(w.batch == 1);
    CHECK(w.len == 4);
    CHECK(w.targets == std::vector<int>{t.actions[4], t.actions[5], -1, -1});
    CHECK(w.timesteps[1] == 5);
    CHECK(w.states(0, 2) == doctest::Approx(t.states[4][2]));
    const std::vector<Trajectory> trajs{t};
    const auto b = sample_windows<double>(trajs, 8, 4, rng);
    CHECK(b.states.rows() == 32);
  }

  TEST_CASE("causal logits and zero adapter") {
    const DecisionTransformer dt(tiny());
    ParamStore<double> ps;
    num::Rng rng(1);
    dt.init(ps, rng, 0.2);
    const auto t = random_traj(rng, 4, 5);
    auto w = window_at<double>(t, 0, 4);
    const MD base = dt.forward<double>(ps, w, {}, {}, nullptr);

    auto zero = hyper::AdapterParams<double>::zeros(16, 3);
    hyper::AdapterBranch<double> branch(&zero);
    num::FfnBranch<double>* one[] = {&branch};
    CHECK(dt.forward<double>(ps, w, {}, one, nullptr) == base);

    w.states.row(3).setConstant(4.0);
    w.rtgs[3] += 7.0;
    w.actions[2] = (w.actions[2] + 1) % 6;
    const MD after = dt.forward<double>(ps, w, {}, {}, nullptr);
    CHECK(after.topRows(2) == base.topRows(2));
    CHECK(after.row(3) != base.row(3));

    auto longer = window_at<double>(random_traj(rng, 6, 5), 0, 6);
    CHECK_THROWS_AS(dt.forward<double>(ps, longer, {}, {}, nullptr), ContractError);
  }

  TEST_CASE("act is deterministic and overfits a fixed action") {
    const DecisionTransformer dt(tiny());
    ParamStore<float> ps;
    num::Rng rng(2);
    dt.init(ps, rng, 0.02);
    auto t = random_traj(rng, 12, 5);
    for (auto& a : t.actions) a = 2;
    const std::vector<Trajectory> trajs{t};

    History h;
    h.states.push_back(t.states[0]);
    const int before = act<float>(dt, ps, h, 3.0, {});
    CHECK(act<float>(dt, ps, h, 3.0, {}) == before);

    num::AdamW<float> opt({0.9, 0.95, 1e-8, 0.0});
    for (int s = 0; s < 150; ++s) {
      const auto b = sample_windows<float>(trajs, 8, 4, rng);
      ps.zero_grad();
      DTCache<float> cache;
      const Mat<float> logits = dt.forward<float>(ps, b, {}, {}, &cache);
      Mat<float> d;
      num::cross_entropy<float>(logits, b.targets, &d);
      dt.backward<float>(ps, b, cache, d, {});
      opt.step(ps, 3e-3);
    }
    CHECK(act<float>(dt, ps, h, 3.0, {}) == 2);
    h.actions.push_back(2);
    h.rewards.push_back(1.0);
    h.states.push_back(t.states[1]);
    CHECK(act<float>(dt, ps, h, 3.0, {}) == 2);
  }
}
