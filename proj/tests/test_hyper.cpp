#include <doctest.h>

#include "dtgi/common/error.hpp"
#include "dtgi/hyper/hyperadapter.hpp"

using namespace dtgi;
using namespace dtgi::hyper;
using MD = Mat<double>;

namespace {

MD random_mat(num::Rng& rng, Eigen::Index r, Eigen::Index c) {
  MD m(r, c);
  num::init_normal(m, rng, 1.0);
  return m;
}

}  // namespace

TEST_SUITE("hyper") {
  TEST_CASE("candidate shapes at the default widths") {
    const HyperConfig cfg;
    const HyperNet down("hyper.down", Role::kDown, cfg.feature_dim, cfg.hidden, cfg.model_dim * cfg.bottleneck);
    const HyperNet up("hyper.up", Role::kUp, cfg.feature_dim, cfg.hidden, cfg.model_dim * cfg.bottleneck);
    ParamStore<float> ps;
    num::Rng rng(0);
    down.init(ps, rng, 0.0, 0.0);
    up.init(ps, rng, 0.0, 0.0);
    const Mat<float> feat = Mat<float>::Ones(2, cfg.feature_dim);
    const auto c = generate_candidates(ps, feat, down, up, cfg, static_cast<CandidateCache<float>*>(nullptr));
    const auto a = c.candidate(1);
    CHECK(a.d_hat.rows() == 128);
    CHECK(a.d_hat.cols() == 32);
    CHECK(a.u_hat.rows() == 32);
    CHECK(a.u_hat.cols() == 128);
    CHECK(a.d_hat.isZero(0.0f));
    CHECK(a.u_hat.isZero(0.0f));

    std::string msg;
    try {
      generate_candidates(ps, Mat<float>(Mat<float>::Ones(2, 7)), down, up, cfg,
                          static_cast<CandidateCache<float>*>(nullptr));
    } catch (const ConfigError& e) {
      msg = e.what();
    }
    CHECK(msg.find("512") != std::string::npos);
    CHECK(msg.find("64") != std::string::npos);
  }

  TEST_CASE("identical features give identical candidates") {
    HyperConfig cfg;
    cfg.feature_dim = 6;
    cfg.hidden = 4;
    cfg.bottleneck = 2;
    cfg.model_dim = 5;
    const HyperGenerator gen(cfg);
    ParamStore<double> ps;
    num::Rng rng(1);
    gen.init(ps, rng, 0.3);
    const HyperNet down("hyper.down", Role::kDown, 6, 4, 10);
    const HyperNet up("hyper.up", Role::kUp, 6, 4, 10);
    MD feat = random_mat(rng, 3, 6);
    feat.row(2) = feat.row(0);
    const auto c = generate_candidates(ps, feat, down, up, cfg, static_cast<CandidateCache<double>*>(nullptr));
    CHECK(c.candidate(0).d_hat == c.candidate(2).d_hat);
    CHECK(c.candidate(0).u_hat == c.candidate(2).u_hat);
    CHECK(gen.param_count() == HyperGenerator::expected_param_count(cfg));
    // freshly initialised generator emits a zero up-projection
    const std::vector<double> s{0.2, 0.3, 0.5};
    CHECK(gen.generate<double>(ps, feat, s, nullptr).front().u_hat.isZero(0.0));
  }

  TEST_CASE("candidate fusion") {
    num::Rng rng(2);
    Candidates<double> c{random_mat(rng, 2, 6), random_mat(rng, 2, 6), 3, 2};
    const std::vector<double> w{0.25, 0.75};
    const auto f = fuse_candidates<double>(c, w);
    const auto a = c.candidate(0), b = c.candidate(1);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(f.d_hat(i, j) == doctest::Approx(0.25 * a.d_hat(i, j) + 0.75 * b.d_hat(i, j)).epsilon(1e-15));
        CHECK(f.u_hat(j, i) == doctest::Approx(0.25 * a.u_hat(j, i) + 0.75 * b.u_hat(j, i)).epsilon(1e-15));
      }
    }
    const std::vector<double> one_hot{0.0, 1.0};
    const auto sel = fuse_candidates<double>(c, one_hot);
    CHECK(sel.d_hat == b.d_hat);
    CHECK(sel.u_hat == b.u_hat);

    Candidates<double> same{MD(MD::Ones(4, 6)), MD(MD::Ones(4, 6)), 3, 2};
    const std::vector<double> uniform(4, 0.25);
    CHECK(fuse_candidates<double>(same, uniform).d_hat == MD::Ones(3, 2));
    CHECK_THROWS_AS(fuse_candidates<double>(c, uniform), ContractError);
  }

  TEST_CASE("adapter forward") {
    const auto zero = AdapterParams<double>::zeros(4, 2);
    num::Rng rng(3);
    CHECK(adapter_forward(random_mat(rng, 3, 4), zero).isZero(0.0));

    AdapterParams<double> p = zero;
    p.d_hat(0, 0) = 1.0;
    p.u_hat(0, 0) = 1.0;
    MD z = MD::Zero(1, 4);
    z(0, 0) = 1.0;
    CHECK(adapter_forward(z, p) == z);
    z(0, 0) = -1.0;
    CHECK(adapter_forward(z, p).isZero(0.0));
  }
}
