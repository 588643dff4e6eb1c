#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtgi/arcade/split.hpp"
#include "dtgi/common/config.hpp"
#include "dtgi/conditioning/conditioning.hpp"
#include "dtgi/hyper/hyperadapter.hpp"
#include "dtgi/numerics/optim.hpp"
#include "dtgi/policy/decision_transformer.hpp"

namespace dtgi::bench {

enum class Method { kDT, kDTL, kDTV, kDTGIa, kDTGI };

inline constexpr Method kAllMethods[] = {Method::kDT, Method::kDTL, Method::kDTV, Method::kDTGIa, Method::kDTGI};

const char* method_name(Method m);
Method parse_method(const std::string& name);  // ConfigError on unknown names
std::vector<Method> parse_methods(const std::vector<std::string>& names);
bool is_conditioned(Method m);
bool has_learned_importance(Method m);

// Every key the tools accept, with its default.
Config default_config();

struct ModelConfig {
  policy::DTConfig dt;
  cond::ConditioningConfig cond;
  hyper::HyperConfig hyper;
  double init_std = 0.02;
};

struct TrainConfig {
  double lr = 6e-4;
  num::AdamWConfig adam;
  double grad_clip = 1.0;
  double warmup_tokens = 512.0 * 20.0;
  double lr_floor = 0.1;
  int max_epochs = 30;
  int batch_size = 200;
  int steps_per_epoch = 0;  // 0: one pass worth of windows over all training transitions
  double gamma = 1.0;
  int log_every = 1;
};

struct EvalConfig {
  int episodes = 3;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int max_steps = 5120;
  std::string target_rtg = "expert";  // "expert" or a number
  int expert_episodes = 100;
};

struct EmbedConfig {
  std::string provider = "synthetic";
  std::string cache_path;
  std::uint64_t seed = 0;
};

struct RunConfig {
  arcade::SplitParams split;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  EmbedConfig embed;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
};

RunConfig run_config(const Config& c);

}  // namespace dtgi::bench
