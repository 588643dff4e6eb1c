#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtgi/bench/run_config.hpp"
#include "dtgi/mgi/embedding.hpp"

namespace dtgi::bench {

using num::Mat;
using num::ParamStore;

// Frozen provider embeddings of the (pseudo-)instruction set a method
// conditions on for one game.
template <typename T>
struct GameConditioning {
  std::string game_id;
  cond::InstructionBatch<T> batch;
  cond::Modalities use;
  bool learned = false;  // learned importance (DTGI) vs uniform

  template <typename U>
  GameConditioning<U> cast() const {
    GameConditioning<U> g;
    g.game_id = game_id;
    g.batch.desc = batch.desc.template cast<U>();
    g.batch.frames = batch.frames.template cast<U>();
    g.batch.guidance = batch.guidance.template cast<U>();
    g.batch.m = batch.m;
    g.use = use;
    g.learned = learned;
    return g;
  }
};

// DT: nullopt. DTL: one pseudo-instruction holding only the description.
// DTV: one pseudo-instruction holding only the first instruction's frames.
// DTGI-a / DTGI: the full set. Throws ConfigError when a conditioned method
// has no instruction set.
std::optional<GameConditioning<float>> build_conditioning(Method method, const std::string& game_id,
                                                          const mgi::InstructionSet* set,
                                                          const mgi::EmbeddingProvider& provider, int dim);

// Frozen tensors "frozen/<game>/{desc,frames,guidance}" for hashing.
ParamStore<float> frozen_store(const std::vector<GameConditioning<float>>& games);

template <typename T>
struct StepCache {
  cond::FeatureCache<T> features_cache;
  hyper::GeneratorCache<T> generator_cache;
  Mat<T> features;
  std::vector<T> scores;
};

// The method-independent DT backbone plus, for conditioned methods, the
// conditioning stack (temporal encoders, fusion MLP, hypernetworks).
template <typename T>
class Model {
 public:
  Model(const ModelConfig& cfg, Method method);

  // DT weights depend only on seed, never on the method.
  void init(ParamStore<T>& ps, std::uint64_t seed) const;

  Method method() const { return method_; }
  const policy::DecisionTransformer& dt() const { return dt_; }
  std::size_t backbone_param_count() const { return dt_.param_count(); }
  std::size_t conditioning_param_count() const;

  // Importance scores the adapter fusion uses for this game.
  std::vector<T> scores(const ParamStore<T>& ps, const GameConditioning<T>& gc, const num::ForwardContext& ctx,
                        StepCache<T>* cache = nullptr) const;

  // Empty for DT.
  std::vector<hyper::AdapterParams<T>> adapters(const ParamStore<T>& ps, const GameConditioning<T>* gc,
                                                const num::ForwardContext& ctx, StepCache<T>* cache) const;

  // Mean action cross-entropy over non-padded steps; with_grad accumulates
  // gradients for every trainable tensor.
  T loss(ParamStore<T>& ps, const policy::WindowBatch<T>& batch, const GameConditioning<T>* gc,
         const num::ForwardContext& ctx, bool with_grad) const;

  Mat<T> logits(const ParamStore<T>& ps, const policy::WindowBatch<T>& batch,
                const std::vector<hyper::AdapterParams<T>>& adapters) const;

  int act(const ParamStore<T>& ps, const policy::History& h, double target_rtg,
          const std::vector<hyper::AdapterParams<T>>& adapters) const;

 private:
  ModelConfig cfg_;
  Method method_;
  policy::DecisionTransformer dt_;
  cond::Conditioning cond_;
  hyper::HyperGenerator hyper_;
};

}  // namespace dtgi::bench
