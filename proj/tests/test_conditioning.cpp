#include <doctest.h>

#include <cmath>

#include "dtgi/common/error.hpp"
#include "dtgi/conditioning/conditioning.hpp"
#include "dtgi/numerics/grad_check.hpp"

using namespace dtgi;
using namespace dtgi::cond;
using MD = Mat<double>;

namespace {

MD random_mat(num::Rng& rng, Eigen::Index r, Eigen::Index c) {
  MD m(r, c);
  num::init_normal(m, rng, 1.0);
  return m;
}

ConditioningConfig small() {
  ConditioningConfig c;
  c.dim = 8;
  c.steps = 5;
  c.heads = 2;
  c.ffn_hidden = 12;
  c.fusion_hidden = 10;
  c.dropout = 0.0;
  return c;
}

// Pairwise dot sums written out as a double loop.
std::vector<double> raw_oracle(const MD& c) {
  std::vector<double> out(static_cast<std::size_t>(c.rows()), 0.0);
  for (Eigen::Index t = 0; t < c.rows(); ++t) {
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
      if (k == t) continue;
      for (Eigen::Index j = 0; j < c.cols(); ++j) out[static_cast<std::size_t>(t)] += c(t, j) * c(k, j);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("conditioning") {
  TEST_CASE("importance of the worked three-feature example") {
    MD c(3, 2);
    c << 1, 0, 1, 0, 0, 1;
    const auto raw = importance_raw(c);
    CHECK(raw == std::vector<double>{1, 1, 0});
    const auto s = importance(c);
    const double z = 2 * std::exp(1.0) + 1;
    CHECK(s[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.4223).epsilon(1e-4));
    CHECK(s[2] == doctest::Approx(0.1554).epsilon(1e-3));
  }

  TEST_CASE("importance matches the pairwise oracle") {
    num::Rng rng(9);
    const MD c = random_mat(rng, 7, 5);
    const auto raw = importance_raw(c);
    const auto want = raw_oracle(c);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(raw[i] == doctest::Approx(want[i]).epsilon(1e-12));
    double sum = 0;
    for (double v : importance(c)) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("degenerate importance cases") {
    MD same = MD::Constant(4, 3, 0.7);
    const auto u = importance(same);
    const auto ref = uniform_importance(4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(ref[i]).epsilon(1e-15));
    CHECK(ref == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(importance(MD(MD::Identity(3, 3)))[1] == doctest::Approx(1.0 / 3));
    CHECK(importance(MD(MD::Ones(1, 3))) == std::vector<double>{1.0});
    CHECK(uniform_importance(1) == std::vector<double>{1.0});
    CHECK_THROWS_AS(uniform_importance(0), ConfigError);
  }

  TEST_CASE("fusion shapes and zero weights") {
    const auto cfg = small();
    const Conditioning cd(cfg);
    num::Rng rng(1);
    ParamStore<double> ps;
    cd.init(ps, rng, 0.0);
    const MD x = random_mat(rng, 3, cfg.dim);
    const MD y = cd.fuse<double>(ps, x, x, x, nullptr);
    CHECK(y.rows() == 3);
    CHECK(y.cols() == cfg.dim);
    CHECK(y.isZero(0.0));
  }

  TEST_CASE("temporal encoder is permutation invariant without positions") {
    auto cfg = small();
    cfg.positional = false;
    const Conditioning cd(cfg);
    num::Rng rng(2);
    ParamStore<double> ps;
    cd.init(ps, rng, 0.3);
    const MD seq = random_mat(rng, cfg.steps, cfg.dim);
    MD perm = seq;
    perm.row(0) = seq.row(3);
    perm.row(3) = seq.row(0);
    perm.row(1) = seq.row(4);
    perm.row(4) = seq.row(1);
    const MD a = cd.encode_temporal<double>(ps, seq, cfg.steps, Stream::kFrames, {}, nullptr);
    const MD b = cd.encode_temporal<double>(ps, perm, cfg.steps, Stream::kFrames, {}, nullptr);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.rows() == 1);
    CHECK_THROWS_AS(cd.encode_temporal<double>(ps, MD(MD::Zero(5, 4)), 5, Stream::kFrames, {}, nullptr), ShapeError);
  }

  TEST_CASE("features gradient end to end") {
    const auto cfg = small();
    const Conditioning cd(cfg);
    num::Rng rng(3);
    ParamStore<double> ps;
    cd.init(ps, rng, 0.3);
    InstructionBatch<double> batch;
    batch.m = cfg.steps;
    batch.desc = random_mat(rng, 2, cfg.dim);
    batch.frames = random_mat(rng, 2 * cfg.steps, cfg.dim);
    batch.guidance = random_mat(rng, 2 * cfg.steps, cfg.dim);
    const MD w = random_mat(rng, 2, cfg.dim);
    const num::LossFn f = [&](ParamStore<double>& p, bool grad) {
      FeatureCache<double> c;
      const MD y = cd.features(p, batch, {}, {}, &c);
      if (grad) cd.features_backward(p, c, w);
      return y.cwiseProduct(w).sum();
    };
    CHECK(num::grad_check(f, ps).max_rel_error < 1e-4);
  }
}
