#include "dtgi/bench/model.hpp"

#include <memory>

#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"

namespace dtgi::bench {

std::optional<GameConditioning<float>> build_conditioning(Method method, const std::string& game_id,
                                                          const mgi::InstructionSet* set,
                                                          const mgi::EmbeddingProvider& provider, int dim) {
  if (!is_conditioned(method)) return std::nullopt;
  if (set == nullptr || set->instructions.empty()) {
    throw ConfigError(std::string(method_name(method)) + " needs an instruction set for game " + game_id);
  }
  GameConditioning<float> gc;
  gc.game_id = game_id;
  gc.learned = has_learned_importance(method);
  const int m = static_cast<int>(set->instructions.front().frames.size());
  gc.batch.m = m;
  if (method == Method::kDTL || method == Method::kDTV) {
    const auto e = mgi::embed_instruction(set->instructions.front(), provider, dim);
    gc.batch.desc = Mat<float>::Zero(1, dim);
    gc.batch.frames = Mat<float>::Zero(m, dim);
    gc.batch.guidance = Mat<float>::Zero(m, dim);
    if (method == Method::kDTL) {
      gc.batch.desc = e.desc;
      gc.use = {true, false, false};
    } else {
      gc.batch.frames = e.frames;
      gc.use = {false, true, false};
    }
    return gc;
  }
  const auto n = static_cast<Eigen::Index>(set->instructions.size());
  gc.batch.desc.resize(n, dim);
  gc.batch.frames.resize(n * m, dim);
  gc.batch.guidance.resize(n * m, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ins = set->instructions[static_cast<std::size_t>(i)];
    if (static_cast<int>(ins.frames.size()) != m) {
      throw ConfigError(game_id + ": instructions have different lengths");
    }
    const auto e = mgi::embed_instruction(ins, provider, dim);
    gc.batch.desc.row(i) = e.desc.row(0);
    gc.batch.frames.middleRows(i * m, m) = e.frames;
    gc.batch.guidance.middleRows(i * m, m) = e.guidance;
  }
  return gc;
}

ParamStore<float> frozen_store(const std::vector<GameConditioning<float>>& games) {
  ParamStore<float> ps;
  for (const auto& g : games) {
    ps.add_frozen("frozen/" + g.game_id + "/desc", g.batch.desc);
    ps.add_frozen("frozen/" + g.game_id + "/frames", g.batch.frames);
    ps.add_frozen("frozen/" + g.game_id + "/guidance", g.batch.guidance);
  }
  return ps;
}

template <typename T>
Model<T>::Model(const ModelConfig& cfg, Method method)
    : cfg_(cfg), method_(method), dt_(cfg.dt), cond_(cfg.cond), hyper_(cfg.hyper) {
  if (cfg.hyper.model_dim != cfg.dt.embed_dim || cfg.hyper.feature_dim != cfg.cond.dim) {
    throw ConfigError("model: hypernetwork dims must match DT embed_dim and feature dim");
  }
  if (is_conditioned(method) && hyper_.param_count() != hyper::HyperGenerator::expected_param_count(cfg.hyper)) {
    throw ContractError("model: hypernetwork parameter budget mismatch");
  }
}

template <typename T>
void Model<T>::init(ParamStore<T>& ps, std::uint64_t seed) const {
  num::Rng dt_rng(mix_seed(seed, 1));
  dt_.init(ps, dt_rng, cfg_.init_std);
  if (!is_conditioned(method_)) return;
  num::Rng cond_rng(mix_seed(seed, 2));
  cond_.init(ps, cond_rng, cfg_.init_std);
  num::Rng hyper_rng(mix_seed(seed, 3));
  hyper_.init(ps, hyper_rng, cfg_.init_std);
}

template <typename T>
std::size_t Model<T>::conditioning_param_count() const {
  return is_conditioned(method_) ? cond_.param_count() + hyper_.param_count() : 0;
}

template <typename T>
std::vector<T> Model<T>::scores(const ParamStore<T>& ps, const GameConditioning<T>& gc, const num::ForwardContext& ctx,
                                StepCache<T>* cache) const {
  StepCache<T> local;
  StepCache<T>& c = cache ? *cache : local;
  c.features = cond_.features(ps, gc.batch, gc.use, ctx, &c.features_cache);
  if (gc.learned) {
    c.scores = cond::importance(c.features);
  } else {
    const auto u = cond::uniform_importance(static_cast<int>(c.features.rows()));
    c.scores.assign(u.begin(), u.end());
  }
  return c.scores;
}

template <typename T>
std::vector<hyper::AdapterParams<T>> Model<T>::adapters(const ParamStore<T>& ps, const GameConditioning<T>* gc,
                                                        const num::ForwardContext& ctx, StepCache<T>* cache) const {
  if (!is_conditioned(method_)) return {};
  if (gc == nullptr) throw ConfigError(std::string(method_name(method_)) + ": missing conditioning");
  StepCache<T> local;
  StepCache<T>& c = cache ? *cache : local;
  scores(ps, *gc, ctx, &c);
  return hyper_.generate<T>(ps, c.features, c.scores, &c.generator_cache);
}

namespace {

template <typename T>
struct BranchSet {
  std::vector<std::unique_ptr<hyper::AdapterBranch<T>>> owned;
  std::vector<num::FfnBranch<T>*> ptrs;

  explicit BranchSet(const std::vector<hyper::AdapterParams<T>>& adapters) {
    for (const auto& a : adapters) {
      owned.push_back(std::make_unique<hyper::AdapterBranch<T>>(&a));
      ptrs.push_back(owned.back().get());
    }
  }
  policy::Branches<T> span() const { return {ptrs.data(), ptrs.size()}; }
};

}  // namespace

template <typename T>
T Model<T>::loss(ParamStore<T>& ps, const policy::WindowBatch<T>& batch, const GameConditioning<T>* gc,
                 const num::ForwardContext& ctx, bool with_grad) const {
  StepCache<T> sc;
  const auto adapters_ = adapters(ps, gc, ctx, &sc);
  BranchSet<T> branches(adapters_);
  policy::DTCache<T> cache;
  const Mat<T> logits = dt_.forward<T>(ps, batch, ctx, branches.span(), &cache);
  Mat<T> dlogits;
  const T l = num::cross_entropy<T>(logits, batch.targets, with_grad ? &dlogits : nullptr);
  if (!with_grad) return l;
  dt_.backward<T>(ps, batch, cache, dlogits, branches.span());
  if (adapters_.empty()) return l;
  std::vector<hyper::AdapterParams<T>> dadapters;
  for (const auto& b : branches.owned) dadapters.push_back(b->grad());
  Mat<T> dfeatures;
  std::vector<T> dscores;
  hyper_.backward<T>(ps, sc.generator_cache, dadapters, dfeatures, dscores);
  if (gc->learned) dfeatures += cond::importance_backward<T>(sc.features, sc.scores, dscores);
  cond_.features_backward<T>(ps, sc.features_cache, dfeatures);
  return l;
}

template <typename T>
Mat<T> Model<T>::logits(const ParamStore<T>& ps, const policy::WindowBatch<T>& batch,
                        const std::vector<hyper::AdapterParams<T>>& adapters) const {
  BranchSet<T> branches(adapters);
  return dt_.forward<T>(ps, batch, num::ForwardContext{}, branches.span(), nullptr);
}

template <typename T>
int Model<T>::act(const ParamStore<T>& ps, const policy::History& h, double target_rtg,
                  const std::vector<hyper::AdapterParams<T>>& adapters) const {
  BranchSet<T> branches(adapters);
  return policy::act<T>(dt_, ps, h, target_rtg, branches.span());
}

template class Model<float>;
template class Model<double>;

}  // namespace dtgi::bench
