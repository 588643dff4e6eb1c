#include "dtgi/bench/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "dtgi/common/error.hpp"

namespace dtgi::bench {

std::unique_ptr<mgi::EmbeddingProvider> make_provider(const RunConfig& cfg) {
  if (cfg.embed.provider == "file") {
    if (cfg.embed.cache_path.empty()) throw ConfigError("instr.provider=file needs instr.cache");
    return std::make_unique<mgi::FileProvider>(cfg.embed.cache_path);
  }
  return std::make_unique<mgi::SyntheticProvider>(cfg.model.cond.dim, cfg.embed.seed);
}

SplitConditioning condition_split(const arcade::TaskSplit& split, Method method,
                                  const mgi::EmbeddingProvider& provider, int dim) {
  SplitConditioning out;
  if (!is_conditioned(method)) return out;
  for (const auto& g : split.train) {
    out.train.push_back(*build_conditioning(method, g.spec.game_id, &g.instructions, provider, dim));
  }
  for (const auto& g : split.test) {
    out.test.push_back(*build_conditioning(method, g.spec.game_id, &g.instructions, provider, dim));
  }
  return out;
}

std::vector<TrainGameData> training_data(const arcade::TaskSplit& split, const SplitConditioning& conds,
                                         double gamma) {
  std::vector<TrainGameData> out;
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    TrainGameData d;
    d.game_id = split.train[i].spec.game_id;
    d.trajectories = policy::split_episodes(split.train[i].data, gamma);
    if (!conds.train.empty()) d.cond = conds.train[i];
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<EvalGame> eval_games(const arcade::TaskSplit& split, const SplitConditioning& conds,
                                 const RunConfig& cfg) {
  std::vector<EvalGame> out;
  auto target = [&](const arcade::GameSpec& spec, std::uint64_t seed) {
    if (cfg.eval.target_rtg == "expert") return expert_target(spec, cfg.eval.expert_episodes, seed);
    return std::stod(cfg.eval.target_rtg);
  };
  std::size_t index = 0;
  for (std::size_t i = 0; i < split.train.size(); ++i, ++index) {
    const std::uint64_t seed = arcade::game_seed(cfg.split.master_seed, index);
    out.push_back({split.train[i].spec, "ID", conds.train.empty() ? nullptr : &conds.train[i],
                   target(split.train[i].spec, seed), seed});
  }
  for (std::size_t i = 0; i < split.test.size(); ++i, ++index) {
    const std::uint64_t seed = arcade::game_seed(cfg.split.master_seed, index);
    out.push_back({split.test[i].spec, "OOD", conds.test.empty() ? nullptr : &conds.test[i],
                   target(split.test[i].spec, seed), seed});
  }
  return out;
}

MethodRun train_and_evaluate(const arcade::TaskSplit& split, const RunConfig& cfg, Method method, std::uint64_t seed,
                             const mgi::EmbeddingProvider& provider, const TrainHooks& hooks) {
  const auto conds = condition_split(split, method, provider, cfg.model.cond.dim);
  const Model<float> model(cfg.model, method);
  const TrainResult trained = train(model, training_data(split, conds, cfg.train.gamma), cfg.train, seed, hooks);
  MethodRun run;
  run.method = method;
  run.seed = seed;
  run.scores = evaluate(model, trained.params, eval_games(split, conds, cfg), cfg.eval);
  run.checkpoint_hash = trained.checkpoint_hash;
  return run;
}

Report build_report(const std::vector<MethodRun>& runs) {
  Report r;
  std::map<std::string, std::map<std::string, std::vector<double>>> pooled;  // method -> game -> returns
  std::vector<std::pair<std::string, std::string>> game_order;                // (split, game)
  for (const auto& run : runs) {
    const std::string m = method_name(run.method);
    if (std::find(r.methods.begin(), r.methods.end(), m) == r.methods.end()) r.methods.push_back(m);
    for (const auto& s : run.scores) {
      auto& v = pooled[m][s.game_id];
      v.insert(v.end(), s.returns.begin(), s.returns.end());
      const std::pair<std::string, std::string> key{s.split, s.game_id};
      if (std::find(game_order.begin(), game_order.end(), key) == game_order.end()) game_order.push_back(key);
    }
  }
  r.id_raw.methods = r.methods;
  r.ood_raw.methods = r.methods;
  for (const auto& [split, game] : game_order) {
    std::vector<Cell> row;
    for (const auto& m : r.methods) {
      const auto it = pooled[m].find(game);
      if (it == pooled[m].end()) throw ContractError("report: method " + m + " has no score for game " + game);
      row.push_back({mean_of(it->second), std_of(it->second)});
    }
    (split == "ID" ? r.id_raw : r.ood_raw).add_row(game, std::move(row));
  }
  r.id_norm = normalize_scores(r.id_raw);
  r.ood_norm = normalize_scores(r.ood_raw);
  return r;
}

void write_report_csv(const std::string& path, const Report& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "split,game_id,method,raw_mean,raw_std,norm_mean,norm_std\n";
  char buf[256];
  auto section = [&](const char* split, const ScoreTable& raw, const ScoreTable& norm) {
    for (std::size_t g = 0; g < raw.games.size(); ++g) {
      for (std::size_t m = 0; m < raw.methods.size(); ++m) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6f,%.6f,%.6f,%.6f\n", split, raw.games[g].c_str(),
                      raw.methods[m].c_str(), raw.cells[g][m].mean, raw.cells[g][m].std, norm.cells[g][m].mean,
                      norm.cells[g][m].std);
        out << buf;
      }
    }
    const auto o = overall_row(norm);
    for (std::size_t m = 0; m < raw.methods.size(); ++m) {
      std::snprintf(buf, sizeof buf, "%s,O,%s,,,%.6f,%.6f\n", split, raw.methods[m].c_str(), o[m].mean, o[m].std);
      out << buf;
    }
  };
  section("ID", report.id_raw, report.id_norm);
  section("OOD", report.ood_raw, report.ood_norm);
}

}  // namespace dtgi::bench
