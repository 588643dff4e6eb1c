#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dtgi/numerics/attention.hpp"
#include "dtgi/policy/trajectory.hpp"

namespace dtgi::policy {

using num::Mat;
using num::ParamStore;

struct DTConfig {
  int context_len = 20;
  int layers = 6;
  int heads = 8;
  int embed_dim = 128;
  int state_dim = 294;
  int action_count = 6;
  int max_timestep = 64;
  double dropout = 0.1;
  double rtg_scale = 10.0;  // rtg channel input is rtg / rtg_scale
};

template <typename T>
struct DTCache {
  int batch = 0;
  int len = 0;
  Mat<T> state_pre, state_tok;
  Mat<T> rtg_in, rtg_pre, rtg_tok;
  Mat<T> act_pre, act_tok;
  Mat<T> embed_drop;
  std::vector<num::BlockCache<T>> blocks;
  Mat<T> final_state;  // block output gathered at state tokens
  num::LayerNormCache<T> ln_f;
  Mat<T> normed;
};

// Per-layer FFN branches: empty for none, one entry shared by every layer,
// or exactly one per layer.
template <typename T>
using Branches = std::span<num::FfnBranch<T>* const>;

// GPT-style decision transformer over (rtg, state, action) tokens with a
// learned timestep embedding, causal attention and GeLU FFNs. Action logits
// are read from the state tokens.
class DecisionTransformer {
 public:
  explicit DecisionTransformer(const DTConfig& cfg);
  const DTConfig& config() const { return cfg_; }

  template <typename T>
  void init(ParamStore<T>& ps, num::Rng& rng, double stddev = 0.02) const;

  // Returns (batch*len) x action_count logits. Throws ContractError when the
  // window is longer than the context.
  template <typename T>
  Mat<T> forward(const ParamStore<T>& ps, const WindowBatch<T>& batch, const num::ForwardContext& ctx,
                 Branches<T> branches, DTCache<T>* cache) const;

  template <typename T>
  void backward(ParamStore<T>& ps, const WindowBatch<T>& batch, const DTCache<T>& cache, const Mat<T>& dlogits,
                Branches<T> branches) const;

  std::size_t param_count() const;

 private:
  template <typename T>
  num::FfnBranch<T>* branch_for(Branches<T> branches, int layer) const;

  DTConfig cfg_;
  num::Linear state_enc_;
  num::Linear rtg_enc_;
  num::Embedding action_emb_;
  num::Embedding time_emb_;
  std::vector<num::AttentionBlock> blocks_;
  num::LayerNorm ln_f_;
  num::Linear head_;
};

struct ActOptions {
  bool sample = false;  // diagnostics only; evaluation is greedy
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

// Running episode seen by act(): states up to and including the current
// one, actions and rewards for every completed step.
struct History {
  std::vector<std::vector<float>> states;
  std::vector<int> actions;
  std::vector<double> rewards;
};

// Builds the last context window (rtg = target minus accrued reward) and
// returns the argmax action of the final step, ties to the lowest id.
template <typename T>
int act(const DecisionTransformer& dt, const ParamStore<T>& ps, const History& history, double target_rtg,
        Branches<T> branches, const ActOptions& opts = {});

}  // namespace dtgi::policy
