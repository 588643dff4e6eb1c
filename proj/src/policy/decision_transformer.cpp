#include "dtgi/policy/decision_transformer.hpp"

#include <algorithm>
#include <cmath>

#include "dtgi/common/error.hpp"

namespace dtgi::policy {

namespace {

num::AttentionConfig block_config(const DTConfig& c) {
  num::AttentionConfig a;
  a.dim = c.embed_dim;
  a.heads = c.heads;
  a.ffn_hidden = 4 * c.embed_dim;
  a.activation = num::Activation::kGelu;
  a.causal = true;
  a.dropout = c.dropout;
  return a;
}

template <typename T>
Mat<T> tanh_of(const Mat<T>& x) {
  return x.array().tanh().matrix();
}

template <typename T>
Mat<T> tanh_backward(const Mat<T>& y, const Mat<T>& dy) {
  return dy.cwiseProduct((T(1) - y.array().square()).matrix());
}

}  // namespace

DecisionTransformer::DecisionTransformer(const DTConfig& cfg)
    : cfg_(cfg),
      state_enc_("dt.state_enc", cfg.state_dim, cfg.embed_dim),
      rtg_enc_("dt.rtg_enc", 1, cfg.embed_dim),
      action_emb_("dt.action_emb", cfg.action_count, cfg.embed_dim),
      time_emb_("dt.time_emb", cfg.max_timestep, cfg.embed_dim),
      ln_f_("dt.ln_f", cfg.embed_dim),
      head_("dt.head", cfg.embed_dim, cfg.action_count, false) {
  if (cfg.context_len < 1 || cfg.layers < 1 || cfg.max_timestep < 1) {
    throw ConfigError("decision transformer: context_len, layers and max_timestep must be positive");
  }
  for (int l = 0; l < cfg.layers; ++l) blocks_.emplace_back("dt.block" + std::to_string(l), block_config(cfg));
}

template <typename T>
void DecisionTransformer::init(ParamStore<T>& ps, num::Rng& rng, double stddev) const {
  state_enc_.init(ps, rng, stddev);
  rtg_enc_.init(ps, rng, stddev);
  action_emb_.init(ps, rng, stddev);
  time_emb_.init(ps, rng, stddev);
  for (const auto& b : blocks_) b.init(ps, rng, stddev);
  ln_f_.init(ps);
  head_.init(ps, rng, stddev);
}

std::size_t DecisionTransformer::param_count() const {
  std::size_t n = state_enc_.param_count() + rtg_enc_.param_count() + action_emb_.param_count() +
                  time_emb_.param_count() + ln_f_.param_count() + head_.param_count();
  for (const auto& b : blocks_) n += b.param_count();
  return n;
}

template <typename T>
num::FfnBranch<T>* DecisionTransformer::branch_for(Branches<T> branches, int layer) const {
  if (branches.empty()) return nullptr;
  if (branches.size() == 1) return branches[0];
  if (branches.size() != static_cast<std::size_t>(cfg_.layers)) {
    throw ContractError("decision transformer: " + std::to_string(branches.size()) + " branches for " +
                        std::to_string(cfg_.layers) + " layers");
  }
  return branches[static_cast<std::size_t>(layer)];
}

template <typename T>
Mat<T> DecisionTransformer::forward(const ParamStore<T>& ps, const WindowBatch<T>& b, const num::ForwardContext& ctx,
                                    Branches<T> branches, DTCache<T>* cache) const {
  if (b.len > cfg_.context_len) {
    throw ContractError("decision transformer: window of " + std::to_string(b.len) + " steps exceeds context " +
                        std::to_string(cfg_.context_len));
  }
  const Eigen::Index steps = static_cast<Eigen::Index>(b.batch) * b.len;
  if (b.len < 1 || b.states.rows() != steps || b.states.cols() != cfg_.state_dim) {
    throw ShapeError("decision transformer: state batch does not match batch x len x state_dim");
  }
  for (int ts : b.timesteps) {
    if (ts < 0 || ts >= cfg_.max_timestep) {
      throw ContractError("decision transformer: timestep " + std::to_string(ts) + " outside [0, " +
                          std::to_string(cfg_.max_timestep) + ")");
    }
  }
  DTCache<T> local;
  DTCache<T>& c = cache ? *cache : local;
  c.batch = b.batch;
  c.len = b.len;

  c.state_pre = state_enc_.forward(ps, b.states);
  c.state_tok = tanh_of(c.state_pre);
  c.rtg_in.resize(steps, 1);
  for (Eigen::Index i = 0; i < steps; ++i) c.rtg_in(i, 0) = b.rtgs[static_cast<std::size_t>(i)] / static_cast<T>(cfg_.rtg_scale);
  c.rtg_pre = rtg_enc_.forward(ps, c.rtg_in);
  c.rtg_tok = tanh_of(c.rtg_pre);
  c.act_pre = action_emb_.forward(ps, std::span<const int>(b.actions));
  c.act_tok = tanh_of(c.act_pre);
  const Mat<T> time = time_emb_.forward(ps, std::span<const int>(b.timesteps));

  Mat<T> x(3 * steps, cfg_.embed_dim);
  for (Eigen::Index i = 0; i < steps; ++i) {
    x.row(3 * i) = c.rtg_tok.row(i) + time.row(i);
    x.row(3 * i + 1) = c.state_tok.row(i) + time.row(i);
    x.row(3 * i + 2) = c.act_tok.row(i) + time.row(i);
  }
  x = num::dropout(x, cfg_.dropout, ctx, c.embed_drop);

  c.blocks.resize(blocks_.size());
  const int seq = 3 * b.len;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    x = blocks_[l].forward(ps, x, seq, ctx, &c.blocks[l], branch_for(branches, static_cast<int>(l)));
  }
  c.final_state.resize(steps, cfg_.embed_dim);
  for (Eigen::Index i = 0; i < steps; ++i) c.final_state.row(i) = x.row(3 * i + 1);
  c.normed = ln_f_.forward(ps, c.final_state, &c.ln_f);
  Mat<T> logits = head_.forward(ps, c.normed);
  num::require_finite(logits, "decision transformer logits");
  return logits;
}

template <typename T>
void DecisionTransformer::backward(ParamStore<T>& ps, const WindowBatch<T>& b, const DTCache<T>& c,
                                   const Mat<T>& dlogits, Branches<T> branches) const {
  const Eigen::Index steps = static_cast<Eigen::Index>(c.batch) * c.len;
  Mat<T> dnormed = head_.backward(ps, c.normed, dlogits);
  Mat<T> dstate_out = ln_f_.backward(ps, c.ln_f, dnormed);
  Mat<T> dx = Mat<T>::Zero(3 * steps, cfg_.embed_dim);
  for (Eigen::Index i = 0; i < steps; ++i) dx.row(3 * i + 1) = dstate_out.row(i);
  const int seq = 3 * c.len;
  for (std::size_t l = blocks_.size(); l-- > 0;) {
    dx = blocks_[l].backward(ps, c.blocks[l], dx, seq, branch_for(branches, static_cast<int>(l)));
  }
  dx = num::dropout_backward(dx, c.embed_drop);

  Mat<T> d_rtg(steps, cfg_.embed_dim), d_state(steps, cfg_.embed_dim), d_act(steps, cfg_.embed_dim),
      d_time(steps, cfg_.embed_dim);
  for (Eigen::Index i = 0; i < steps; ++i) {
    d_rtg.row(i) = dx.row(3 * i);
    d_state.row(i) = dx.row(3 * i + 1);
    d_act.row(i) = dx.row(3 * i + 2);
    d_time.row(i) = d_rtg.row(i) + d_state.row(i) + d_act.row(i);
  }
  time_emb_.backward(ps, std::span<const int>(b.timesteps), d_time);
  action_emb_.backward(ps, std::span<const int>(b.actions), tanh_backward(c.act_tok, d_act));
  rtg_enc_.backward(ps, c.rtg_in, tanh_backward(c.rtg_tok, d_rtg));
  state_enc_.backward(ps, b.states, tanh_backward(c.state_tok, d_state));
}

template <typename T>
int act(const DecisionTransformer& dt, const ParamStore<T>& ps, const History& h, double target_rtg,
        Branches<T> branches, const ActOptions& opts) {
  const auto& cfg = dt.config();
  const std::size_t n = h.states.size();
  if (n == 0) throw ContractError("act: history holds no current state");
  if (h.actions.size() + 1 != n || h.rewards.size() + 1 != n) {
    throw ContractError("act: history needs one action and reward per completed step");
  }
  const std::size_t len = std::min<std::size_t>(n, static_cast<std::size_t>(cfg.context_len));
  const std::size_t start = n - len;
  WindowBatch<T> b;
  b.batch = 1;
  b.len = static_cast<int>(len);
  b.states.resize(static_cast<Eigen::Index>(len), cfg.state_dim);
  double accrued = 0.0;
  for (std::size_t t = 0; t < start; ++t) accrued += h.rewards[t];
  for (std::size_t t = start; t < n; ++t) {
    const auto& s = h.states[t];
    if (static_cast<int>(s.size()) != cfg.state_dim) throw ShapeError("act: state width mismatch");
    for (std::size_t j = 0; j < s.size(); ++j) b.states(static_cast<Eigen::Index>(t - start), static_cast<Eigen::Index>(j)) = s[j];
    b.rtgs.push_back(static_cast<T>(target_rtg - accrued));
    b.actions.push_back(t < h.actions.size() ? h.actions[t] : 0);
    b.timesteps.push_back(std::min(static_cast<int>(t), cfg.max_timestep - 1));
    b.targets.push_back(-1);
    if (t < h.rewards.size()) accrued += h.rewards[t];
  }
  const Mat<T> logits = dt.forward<T>(ps, b, num::ForwardContext{}, branches, nullptr);
  const auto last = logits.row(logits.rows() - 1);
  if (!opts.sample) {
    int best = 0;
    for (int a = 1; a < cfg.action_count; ++a) {
      if (last(a) > last(best)) best = a;
    }
    return best;
  }
  std::vector<double> w(static_cast<std::size_t>(cfg.action_count));
  const double mx = static_cast<double>(last.maxCoeff());
  for (int a = 0; a < cfg.action_count; ++a) {
    w[static_cast<std::size_t>(a)] = std::exp((static_cast<double>(last(a)) - mx) / opts.temperature);
  }
  num::Rng rng(opts.seed);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  return pick(rng);
}

#define DTGI_INSTANTIATE(T)                                                                                 \
  template void DecisionTransformer::init<T>(ParamStore<T>&, num::Rng&, double) const;                     \
  template Mat<T> DecisionTransformer::forward<T>(const ParamStore<T>&, const WindowBatch<T>&,             \
                                                  const num::ForwardContext&, Branches<T>, DTCache<T>*)     \
      const;                                                                                                \
  template void DecisionTransformer::backward<T>(ParamStore<T>&, const WindowBatch<T>&, const DTCache<T>&, \
                                                 const Mat<T>&, Branches<T>) const;                         \
  template num::FfnBranch<T>* DecisionTransformer::branch_for<T>(Branches<T>, int) const;                  \
  template int act<T>(const DecisionTransformer&, const ParamStore<T>&, const History&, double, Branches<T>, \
                      const ActOptions&);

DTGI_INSTANTIATE(float)
DTGI_INSTANTIATE(double)
#undef DTGI_INSTANTIATE

}  // namespace dtgi::policy
