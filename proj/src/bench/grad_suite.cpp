#include "dtgi/bench/grad_suite.hpp"

#include <chrono>
#include <functional>

#include "dtgi/bench/model.hpp"
#include "dtgi/common/hash.hpp"

namespace dtgi::bench {

namespace {

using M = num::Mat<double>;
using PS = ParamStore<double>;

M random(num::Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  M m(r, c);
  num::init_normal(m, rng, sd);
  return m;
}

// Larger-than-training weights keep gradients well above round-off.
void spread(PS& ps, num::Rng& rng, double sd) {
  for (auto& [_, p] : ps) {
    M noise = random(rng, p.value.rows(), p.value.cols(), sd);
    p.value += noise;
  }
}

cond::ConditioningConfig small_cond() {
  cond::ConditioningConfig c;
  c.dim = 8;
  c.steps = 4;
  c.heads = 2;
  c.ffn_hidden = 12;
  c.fusion_hidden = 10;
  c.dropout = 0.0;
  return c;
}

hyper::HyperConfig small_hyper(int feature_dim, int model_dim) {
  hyper::HyperConfig h;
  h.feature_dim = feature_dim;
  h.hidden = 6;
  h.bottleneck = 3;
  h.model_dim = model_dim;
  return h;
}

policy::DTConfig small_dt() {
  policy::DTConfig d;
  d.context_len = 4;
  d.layers = 2;
  d.heads = 2;
  d.embed_dim = 16;
  d.state_dim = 10;
  d.action_count = 6;
  d.max_timestep = 64;
  d.dropout = 0.0;
  d.rtg_scale = 5.0;
  return d;
}

policy::WindowBatch<double> small_batch(num::Rng& rng, const policy::DTConfig& d) {
  policy::WindowBatch<double> b;
  b.batch = 2;
  b.len = d.context_len;
  const int rows = b.batch * b.len;
  b.states = random(rng, rows, d.state_dim);
  std::uniform_int_distribution<int> action(0, d.action_count - 1);
  for (int i = 0; i < rows; ++i) {
    b.rtgs.push_back(std::normal_distribution<double>(3.0, 2.0)(rng));
    b.actions.push_back(action(rng));
    b.timesteps.push_back(i % b.len + 1);
    b.targets.push_back(b.actions.back());
  }
  b.targets[static_cast<std::size_t>(rows - 1)] = -1;  // one padded step
  return b;
}

double weighted_sum(const M& x, const M& w) { return x.cwiseProduct(w).sum(); }

}  // namespace

ModelConfig test_scale_model(int state_dim) {
  ModelConfig mc;
  mc.dt = small_dt();
  mc.dt.state_dim = state_dim;
  mc.cond = small_cond();
  mc.hyper = small_hyper(mc.cond.dim, mc.dt.embed_dim);
  return mc;
}

std::vector<GradCase> run_grad_suite(std::uint64_t seed, const num::GradCheckOptions& base_opts) {
  std::vector<GradCase> cases;
  auto run = [&](const std::string& name, PS& ps, const num::LossFn& f, const std::string& prefix = "") {
    num::GradCheckOptions opts = base_opts;
    opts.prefix = prefix;
    opts.seed = mix_seed(seed, cases.size());
    const auto t0 = std::chrono::steady_clock::now();
    GradCase c{name, num::grad_check(f, ps, opts), 0.0};
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cases.push_back(std::move(c));
  };
  num::Rng rng(seed);

  // Conditioning pieces.
  {
    const auto cfg = small_cond();
    const cond::Conditioning cd(cfg);
    PS ps;
    cd.init(ps, rng, 0.3);
    spread(ps, rng, 0.1);
    const M desc = random(rng, 3, cfg.dim), f = random(rng, 3, cfg.dim), g = random(rng, 3, cfg.dim);
    const M w_out = random(rng, 3, cfg.dim);
    run("fusion_mlp", ps, [&](PS& p, bool grad) {
      cond::FuseCache<double> c;
      const M y = cd.fuse(p, desc, f, g, &c);
      if (grad) cd.fuse_backward(p, c, w_out);
      return weighted_sum(y, w_out);
    }, "cond.fuse");
    const M seq = random(rng, 3 * cfg.steps, cfg.dim);
    for (auto [name, stream, prefix] : {std::tuple{"encoder_f", cond::Stream::kFrames, "cond.enc_f"},
                                        std::tuple{"encoder_g", cond::Stream::kGuidance, "cond.enc_g"}}) {
      run(name, ps, [&, stream](PS& p, bool grad) {
        cond::TemporalCache<double> c;
        const M y = cd.encode_temporal(p, seq, cfg.steps, stream, num::ForwardContext{}, &c);
        if (grad) cd.encode_temporal_backward(p, c, w_out, stream);
        return weighted_sum(y, w_out);
      }, prefix);
    }
  }

  // Importance softmax path, differentiated with respect to the features.
  {
    PS ps;
    ps.add("features", {5, 6}).value = random(rng, 5, 6, 0.5);
    const M r = random(rng, 1, 5);
    run("importance", ps, [&](PS& p, bool grad) {
      const M& feat = p.value("features");
      const auto s = cond::importance(feat);
      double loss = 0;
      for (std::size_t i = 0; i < s.size(); ++i) loss += r(0, static_cast<Eigen::Index>(i)) * s[i];
      if (grad) {
        std::vector<double> ds(r.data(), r.data() + r.size());
        p.grad("features") += cond::importance_backward<double>(feat, s, ds);
      }
      return loss;
    });
  }

  // Hypernetworks, candidate fusion, adapter.
  {
    const auto hc = small_hyper(8, 5);
    const hyper::HyperGenerator gen(hc);
    const hyper::HyperNet down("hyper.down", hyper::Role::kDown, hc.feature_dim, hc.hidden, hc.model_dim * hc.bottleneck);
    const hyper::HyperNet up("hyper.up", hyper::Role::kUp, hc.feature_dim, hc.hidden, hc.model_dim * hc.bottleneck);
    PS ps;
    gen.init(ps, rng, 0.3);
    spread(ps, rng, 0.3);
    const M feat = random(rng, 4, hc.feature_dim);
    const M wd = random(rng, 4, hc.model_dim * hc.bottleneck), wu = random(rng, 4, hc.model_dim * hc.bottleneck);
    auto hyper_loss = [&](PS& p, bool grad) {
      hyper::CandidateCache<double> c;
      const auto cands = hyper::generate_candidates(p, feat, down, up, hc, &c);
      if (grad) hyper::generate_candidates_backward(p, c, down, up, wd, wu);
      return weighted_sum(cands.down, wd) + weighted_sum(cands.up, wu);
    };
    run("hypernet_down", ps, hyper_loss, "hyper.down");
    run("hypernet_up", ps, hyper_loss, "hyper.up");

    PS cp;
    cp.add("cands.down", {4, 15}).value = random(rng, 4, 15);
    cp.add("cands.up", {4, 15}).value = random(rng, 4, 15);
    cp.add("scores", {4}).value = random(rng, 1, 4);
    const M gd = random(rng, 5, 3), gu = random(rng, 3, 5);
    run("candidate_fusion", cp, [&](PS& p, bool grad) {
      hyper::Candidates<double> c{p.value("cands.down"), p.value("cands.up"), 5, 3};
      const M& s = p.value("scores");
      const std::vector<double> sv(s.data(), s.data() + s.size());
      const auto a = hyper::fuse_candidates<double>(c, sv);
      if (grad) {
        M dd, du;
        std::vector<double> ds;
        hyper::fuse_candidates_backward<double>(c, sv, {gd, gu}, dd, du, ds);
        p.grad("cands.down") += dd;
        p.grad("cands.up") += du;
        for (std::size_t i = 0; i < ds.size(); ++i) p.grad("scores")(0, static_cast<Eigen::Index>(i)) += ds[i];
      }
      return weighted_sum(a.d_hat, gd) + weighted_sum(a.u_hat, gu);
    });

    PS ap;
    ap.add("z", {6, 5}).value = random(rng, 6, 5);
    ap.add("d_hat", {5, 3}).value = random(rng, 5, 3);
    ap.add("u_hat", {3, 5}).value = random(rng, 3, 5);
    const M wy = random(rng, 6, 5);
    run("adapter", ap, [&](PS& p, bool grad) {
      const hyper::AdapterParams<double> a{p.value("d_hat"), p.value("u_hat")};
      const M y = hyper::adapter_forward(p.value("z"), a);
      if (grad) {
        auto g = hyper::AdapterParams<double>::zeros(5, 3);
        p.grad("z") += hyper::adapter_backward(p.value("z"), a, wy, g);
        p.grad("d_hat") += g.d_hat;
        p.grad("u_hat") += g.u_hat;
      }
      return weighted_sum(y, wy);
    });

    // generate -> importance-weighted fusion -> adapter, end to end.
    ps.add("features", {4, static_cast<std::uint32_t>(hc.feature_dim)}).value = random(rng, 4, hc.feature_dim, 0.3);
    const M z = random(rng, 6, hc.model_dim);
    const M wz = random(rng, 6, hc.model_dim);
    run("generator_adapter_chain", ps, [&](PS& p, bool grad) {
      const M& feat2 = p.value("features");
      const auto s = cond::importance(feat2);
      hyper::GeneratorCache<double> gcache;
      const auto adapters = gen.generate<double>(p, feat2, s, &gcache);
      const M y = hyper::adapter_forward(z, adapters.front());
      if (grad) {
        auto g = hyper::AdapterParams<double>::zeros(hc.model_dim, hc.bottleneck);
        hyper::adapter_backward(z, adapters.front(), wz, g);
        M dfeat;
        std::vector<double> ds;
        gen.backward<double>(p, gcache, {g}, dfeat, ds);
        dfeat += cond::importance_backward<double>(feat2, s, ds);
        p.grad("features") += dfeat;
      }
      return weighted_sum(y, wz);
    });
  }

  // Plain 2-layer DT, cross-entropy with one padded step.
  {
    const ModelConfig mc = test_scale_model();
    const auto& dcfg = mc.dt;
    const Model<double> dt_model(mc, Method::kDT);
    PS ps;
    dt_model.init(ps, seed);
    spread(ps, rng, 0.2);
    const auto batch = small_batch(rng, dcfg);
    run("dt_end_to_end", ps, [&](PS& p, bool grad) { return dt_model.loss(p, batch, nullptr, {}, grad); });

    // Full DTGI: encoders, fusion, importance, hypernetworks, adapters, DT.
    const Model<double> full(mc, Method::kDTGI);
    PS fp;
    full.init(fp, seed);
    spread(fp, rng, 0.2);
    GameConditioning<double> gc;
    gc.game_id = "grad";
    gc.learned = true;
    gc.batch.m = mc.cond.steps;
    gc.batch.desc = random(rng, 3, mc.cond.dim);
    gc.batch.frames = random(rng, 3 * mc.cond.steps, mc.cond.dim);
    gc.batch.guidance = random(rng, 3 * mc.cond.steps, mc.cond.dim);
    run("dtgi_end_to_end", fp, [&](PS& p, bool grad) { return full.loss(p, batch, &gc, {}, grad); });
  }
  return cases;
}

}  // namespace dtgi::bench
