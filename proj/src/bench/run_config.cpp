#include "dtgi/bench/run_config.hpp"

#include "dtgi/common/error.hpp"

namespace dtgi::bench {

const char* method_name(Method m) {
  switch (m) {
    case Method::kDT: return "DT";
    case Method::kDTL: return "DTL";
    case Method::kDTV: return "DTV";
    case Method::kDTGIa: return "DTGI-a";
    case Method::kDTGI: return "DTGI";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : kAllMethods) {
    if (name == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + name + "' (valid: DT, DTL, DTV, DTGI-a, DTGI)");
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

bool is_conditioned(Method m) { return m != Method::kDT; }
bool has_learned_importance(Method m) { return m == Method::kDTGI; }

Config default_config() {
  return Config({
      {"split.n_train", "6"},
      {"split.n_test", "2"},
      {"split.seed", "7"},
      {"data.budget", "10000"},
      {"data.mix_expert", "0.5"},
      {"data.mix_noisy", "0.3"},
      {"data.mix_random", "0.2"},
      {"data.noisy_epsilon", "0.2"},
      {"instr.n", "50"},
      {"instr.m", "20"},
      {"instr.provider", "synthetic"},
      {"instr.cache", ""},
      {"instr.embed_seed", "0"},
      {"model.context_len", "20"},
      {"model.layers", "6"},
      {"model.heads", "8"},
      {"model.embed_dim", "128"},
      {"model.dropout", "0.1"},
      {"model.max_timestep", "64"},
      {"model.rtg_scale", "10"},
      {"model.feature_dim", "512"},
      {"model.encoder_heads", "2"},
      {"model.encoder_ffn", "512"},
      {"model.fusion_hidden", "512"},
      {"model.positional", "true"},
      {"model.adapter_bottleneck", "32"},
      {"model.hyper_bottleneck", "64"},
      {"model.per_layer", "false"},
      {"model.layer_embed", "32"},
      {"model.init_std", "0.02"},
      {"train.methods", "DT,DTL,DTV,DTGI-a,DTGI"},
      {"train.seeds", "0,1,2"},
      {"train.lr", "6e-4"},
      {"train.beta1", "0.9"},
      {"train.beta2", "0.95"},
      {"train.weight_decay", "0.1"},
      {"train.grad_clip", "1.0"},
      {"train.warmup_tokens", "10240"},
      {"train.lr_floor", "0.1"},
      {"train.max_epochs", "30"},
      {"train.batch_size", "200"},
      {"train.steps_per_epoch", "0"},
      {"train.gamma", "1.0"},
      {"eval.episodes", "3"},
      {"eval.seeds", "0,1,2"},
      {"eval.max_steps", "5120"},
      {"eval.target_rtg", "expert"},
      {"eval.expert_episodes", "100"},
  });
}

namespace {

std::vector<std::uint64_t> seed_list(const Config& c, const std::string& key) {
  std::vector<std::uint64_t> out;
  for (const auto& s : c.list(key)) out.push_back(std::stoull(s));
  if (out.empty()) throw ConfigError(key + " is empty");
  return out;
}

}  // namespace

RunConfig run_config(const Config& c) {
  RunConfig r;
  r.split.n_train = static_cast<int>(c.integer("split.n_train"));
  r.split.n_test = static_cast<int>(c.integer("split.n_test"));
  r.split.master_seed = static_cast<std::uint64_t>(c.integer("split.seed"));
  const long budget = c.integer("data.budget");
  if (budget < 1) throw ConfigError("data.budget must be at least 1");
  r.split.budget = static_cast<std::size_t>(budget);
  r.split.mix.expert = c.real("data.mix_expert");
  r.split.mix.noisy = c.real("data.mix_noisy");
  r.split.mix.random = c.real("data.mix_random");
  r.split.mix.noisy_epsilon = c.real("data.noisy_epsilon");
  r.split.instr_n = static_cast<int>(c.integer("instr.n"));
  r.split.instr_m = static_cast<int>(c.integer("instr.m"));

  r.embed.provider = c.str("instr.provider");
  r.embed.cache_path = c.str("instr.cache");
  r.embed.seed = static_cast<std::uint64_t>(c.integer("instr.embed_seed"));
  if (r.embed.provider != "synthetic" && r.embed.provider != "file") {
    throw ConfigError("instr.provider must be 'synthetic' or 'file'");
  }

  auto& dt = r.model.dt;
  dt.context_len = static_cast<int>(c.integer("model.context_len"));
  dt.layers = static_cast<int>(c.integer("model.layers"));
  dt.heads = static_cast<int>(c.integer("model.heads"));
  dt.embed_dim = static_cast<int>(c.integer("model.embed_dim"));
  dt.dropout = c.real("model.dropout");
  dt.max_timestep = static_cast<int>(c.integer("model.max_timestep"));
  dt.rtg_scale = c.real("model.rtg_scale");
  if (dt.embed_dim % dt.heads != 0) throw ConfigError("model.embed_dim must be divisible by model.heads");

  auto& cd = r.model.cond;
  cd.dim = static_cast<int>(c.integer("model.feature_dim"));
  cd.steps = r.split.instr_m;
  cd.heads = static_cast<int>(c.integer("model.encoder_heads"));
  cd.ffn_hidden = static_cast<int>(c.integer("model.encoder_ffn"));
  cd.fusion_hidden = static_cast<int>(c.integer("model.fusion_hidden"));
  cd.positional = c.boolean("model.positional");
  cd.dropout = dt.dropout;

  auto& hy = r.model.hyper;
  hy.feature_dim = cd.dim;
  hy.hidden = static_cast<int>(c.integer("model.hyper_bottleneck"));
  hy.bottleneck = static_cast<int>(c.integer("model.adapter_bottleneck"));
  hy.model_dim = dt.embed_dim;
  hy.per_layer = c.boolean("model.per_layer");
  hy.layers = dt.layers;
  hy.layer_embed = static_cast<int>(c.integer("model.layer_embed"));
  r.model.init_std = c.real("model.init_std");

  auto& t = r.train;
  t.lr = c.real("train.lr");
  t.adam.beta1 = c.real("train.beta1");
  t.adam.beta2 = c.real("train.beta2");
  t.adam.weight_decay = c.real("train.weight_decay");
  t.grad_clip = c.real("train.grad_clip");
  t.warmup_tokens = c.real("train.warmup_tokens");
  t.lr_floor = c.real("train.lr_floor");
  t.max_epochs = static_cast<int>(c.integer("train.max_epochs"));
  t.batch_size = static_cast<int>(c.integer("train.batch_size"));
  t.steps_per_epoch = static_cast<int>(c.integer("train.steps_per_epoch"));
  t.gamma = c.real("train.gamma");
  if (t.max_epochs < 1 || t.batch_size < 1 || t.steps_per_epoch < 0) {
    throw ConfigError("train.max_epochs and train.batch_size must be positive, train.steps_per_epoch >= 0");
  }

  auto& e = r.eval;
  e.episodes = static_cast<int>(c.integer("eval.episodes"));
  e.seeds = seed_list(c, "eval.seeds");
  e.max_steps = static_cast<int>(c.integer("eval.max_steps"));
  e.target_rtg = c.str("eval.target_rtg");
  e.expert_episodes = static_cast<int>(c.integer("eval.expert_episodes"));

  r.methods = parse_methods(c.list("train.methods"));
  r.seeds = seed_list(c, "train.seeds");
  return r;
}

}  // namespace dtgi::bench
