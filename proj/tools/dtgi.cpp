#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "dtgi/bench/experiment.hpp"
#include "dtgi/bench/grad_suite.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"
#include "dtgi/numerics/checkpoint.hpp"
#include "importance_svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dtgi;
using namespace dtgi::bench;

namespace {

struct Globals {
  std::string config_path;
  std::string out = "dtgi-out";
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::vector<std::string> sets;
};

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool non_empty_dir(const fs::path& p) { return fs::exists(p) && fs::is_directory(p) && !fs::is_empty(p); }

fs::path split_dir(const Globals& g) { return fs::path(g.out) / "split"; }
fs::path run_dir(const Globals& g, Method m, std::uint64_t seed) {
  return fs::path(g.out) / "runs" / method_name(m) / ("seed" + std::to_string(seed));
}
fs::path score_path(const Globals& g, Method m, std::uint64_t seed) {
  return fs::path(g.out) / "scores" / (std::string(method_name(m)) + "-seed" + std::to_string(seed) + ".json");
}

// defaults <- <out>/config.toml (written by gen-data) <- --config <- --set <- command flags
Config base_config(const Globals& g, bool use_split_config) {
  Config c = default_config();
  const fs::path echoed = fs::path(g.out) / "config.toml";
  if (use_split_config && fs::exists(echoed)) c.load_file(echoed.string());
  if (!g.config_path.empty()) c.load_file(g.config_path);
  for (const auto& s : g.sets) c.set_override(s);
  return c;
}

std::vector<std::uint64_t> seeds_of(const Globals& g, const RunConfig& rc) {
  if (g.seed) return {*g.seed};
  return rc.seeds;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string store_hash(const num::ParamStore<float>& ps) {
  const auto bytes = num::encode_checkpoint(ps);
  return sha256_hex(std::span<const std::uint8_t>(bytes));
}

// ---- gen-data ----

int cmd_gen_data(const Globals& g, std::optional<int> games, std::optional<long> budget, bool embed_cache) {
  Config c = base_config(g, false);
  if (g.seed) c.set("split.seed", std::to_string(*g.seed));
  if (budget) c.set("data.budget", std::to_string(*budget));
  if (games) {
    const long n_test = c.integer("split.n_test");
    if (*games <= n_test) {
      throw ConfigError("--games " + std::to_string(*games) + " leaves no training games with split.n_test=" +
                        std::to_string(n_test));
    }
    c.set("split.n_train", std::to_string(*games - n_test));
  }
  const RunConfig rc = run_config(c);
  const fs::path out(g.out);
  if (non_empty_dir(out) && !g.force) {
    throw ConfigError("output directory " + out.string() + " is not empty (use --force to overwrite)");
  }
  if (g.force) {
    for (const char* stale : {"split", "runs", "scores", "manifest.json", "config.toml", "embeddings.ckpt"}) {
      fs::remove_all(out / stale);
    }
  }
  fs::create_directories(out);

  const arcade::TaskSplit split = arcade::make_split(rc.split);
  const auto files = arcade::save_split(split_dir(g).string(), split);
  write_text(out / "config.toml", c.to_text());

  json content;
  content["config_sha256"] = sha256_hex(c.to_text());
  content["files"] = json::object();
  for (const auto& f : files) content["files"]["split/" + f] = sha256_file((split_dir(g) / f).string());
  if (embed_cache) {
    std::vector<mgi::InstructionSet> sets;
    for (const auto& t : split.train) sets.push_back(t.instructions);
    for (const auto& t : split.test) sets.push_back(t.instructions);
    const fs::path cache = out / "embeddings.ckpt";
    mgi::write_embedding_cache(cache.string(), sets, *make_provider(rc));
    content["files"]["embeddings.ckpt"] = sha256_file(cache.string());
  }
  content["train_games"] = json::array();
  for (const auto& t : split.train) content["train_games"].push_back(t.spec.game_id);
  content["test_games"] = json::array();
  for (const auto& t : split.test) content["test_games"].push_back(t.spec.game_id);
  content["sha256"] = sha256_hex(content.dump());
  const json manifest{{"content", content}, {"created", timestamp()}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::printf("wrote %zu training datasets, %zu instruction sets to %s\n", split.train.size(),
              split.train.size() + split.test.size(), split_dir(g).string().c_str());
  std::printf("manifest %s\n", content["sha256"].get<std::string>().c_str());
  return 0;
}

// ---- train ----

int cmd_train(const Globals& g, const std::string& methods_flag, bool resume, bool quiet) {
  Config c = base_config(g, true);
  if (!methods_flag.empty()) c.set("train.methods", methods_flag);
  const RunConfig rc = run_config(c);
  if (!fs::exists(fs::path(g.out) / "manifest.json")) {
    throw LookupError("no manifest in " + g.out + " (run gen-data first)");
  }
  const arcade::TaskSplit split = arcade::load_split(split_dir(g).string());
  const auto provider = make_provider(rc);
  for (Method m : rc.methods) {
    for (std::uint64_t seed : seeds_of(g, rc)) {
      const fs::path dir = run_dir(g, m, seed);
      if (non_empty_dir(dir) && !resume) {
        if (!g.force) {
          throw ConfigError("run directory " + dir.string() + " is not empty (use --resume or --force)");
        }
        fs::remove_all(dir);
      }
      fs::create_directories(dir);
      Config run_cfg = c;
      run_cfg.set("train.methods", method_name(m));
      run_cfg.set("train.seeds", std::to_string(seed));
      write_text(dir / "config.toml", run_cfg.to_text());

      const auto conds = condition_split(split, m, *provider, rc.model.cond.dim);
      std::vector<GameConditioning<float>> all = conds.train;
      all.insert(all.end(), conds.test.begin(), conds.test.end());
      const std::string frozen_before = store_hash(frozen_store(all));

      const Model<float> model(rc.model, m);
      TrainHooks hooks;
      hooks.run_dir = dir.string();
      hooks.resume = resume;
      if (!quiet) {
        hooks.on_step = [&](const LogRow& r) {
          if (r.step % 50 == 0) {
            std::fprintf(stderr, "[%s seed %llu] step %ld epoch %d loss %.4f\n", method_name(m),
                         static_cast<unsigned long long>(seed), r.step, r.epoch, r.loss);
          }
        };
      }
      const TrainResult result = train(model, training_data(split, conds, rc.train.gamma), rc.train, seed, hooks);
      const std::string frozen_after = store_hash(frozen_store(all));
      if (frozen_after != frozen_before) throw ContractError("frozen embeddings changed during training");
      const json hashes{{"checkpoint_sha256", result.checkpoint_hash},
                        {"frozen_sha256", frozen_after},
                        {"backbone_params", model.backbone_param_count()},
                        {"conditioning_params", model.conditioning_param_count()},
                        {"steps", result.log.size()}};
      write_text(dir / "hashes.json", hashes.dump(2) + "\n");
      std::printf("%s seed %llu checkpoint %s\n", method_name(m), static_cast<unsigned long long>(seed),
                  result.checkpoint_hash.c_str());
    }
  }
  return 0;
}

// ---- eval / report ----

struct LoadedRun {
  RunConfig cfg;
  num::ParamStore<float> params;
};

LoadedRun load_run(const Globals& g, Method m, std::uint64_t seed) {
  const fs::path dir = run_dir(g, m, seed);
  const fs::path ckpt = dir / "model.ckpt";
  if (!fs::exists(ckpt)) {
    throw LookupError(std::string("missing checkpoint for method ") + method_name(m) + " seed " +
                      std::to_string(seed) + " (" + ckpt.string() + ")");
  }
  Config c = default_config();
  c.load_file((dir / "config.toml").string());
  LoadedRun r;
  r.cfg = run_config(c);
  const Model<float> model(r.cfg.model, m);
  model.init(r.params, seed);
  num::load_checkpoint_into(r.params, num::read_file(ckpt.string()));
  return r;
}

json score_json(const MethodRun& run) {
  json j{{"method", method_name(run.method)}, {"seed", run.seed}, {"checkpoint_sha256", run.checkpoint_hash}};
  j["games"] = json::array();
  for (const auto& s : run.scores) {
    j["games"].push_back({{"game_id", s.game_id}, {"split", s.split}, {"mean", s.mean}, {"std", s.std},
                          {"returns", s.returns}});
  }
  return j;
}

MethodRun score_from_json(const json& j) {
  MethodRun run;
  run.method = parse_method(j.at("method").get<std::string>());
  run.seed = j.at("seed").get<std::uint64_t>();
  run.checkpoint_hash = j.at("checkpoint_sha256").get<std::string>();
  for (const auto& s : j.at("games")) {
    run.scores.push_back({s.at("game_id").get<std::string>(), s.at("split").get<std::string>(),
                          s.at("mean").get<double>(), s.at("std").get<double>(),
                          s.at("returns").get<std::vector<double>>()});
  }
  return run;
}

MethodRun evaluate_run(const Globals& g, const arcade::TaskSplit& split, Method m, std::uint64_t seed) {
  const LoadedRun loaded = load_run(g, m, seed);
  const auto provider = make_provider(loaded.cfg);
  const auto conds = condition_split(split, m, *provider, loaded.cfg.model.cond.dim);
  const Model<float> model(loaded.cfg.model, m);
  MethodRun run;
  run.method = m;
  run.seed = seed;
  run.scores = evaluate(model, loaded.params, eval_games(split, conds, loaded.cfg), loaded.cfg.eval);
  run.checkpoint_hash = store_hash(loaded.params);
  write_text(score_path(g, m, seed), score_json(run).dump(2) + "\n");
  return run;
}

int cmd_eval(const Globals& g, const std::string& methods_flag) {
  Config c = base_config(g, true);
  if (!methods_flag.empty()) c.set("train.methods", methods_flag);
  const RunConfig rc = run_config(c);
  const arcade::TaskSplit split = arcade::load_split(split_dir(g).string());
  for (Method m : rc.methods) {
    for (std::uint64_t seed : seeds_of(g, rc)) {
      const MethodRun run = evaluate_run(g, split, m, seed);
      for (const auto& s : run.scores) {
        std::printf("%s seed %llu %s %s mean %.3f std %.3f\n", method_name(m), static_cast<unsigned long long>(seed),
                    s.split.c_str(), s.game_id.c_str(), s.mean, s.std);
      }
    }
  }
  return 0;
}

int print_fixture_oracle(const std::string& dir) {
  bool ok = true;
  for (const auto& chk : run_fixture_oracle(dir)) {
    std::printf("%s %s (%zu cells, %zu mismatches; O row soft check %s)\n", chk.passed() ? "PASS" : "FAIL",
                chk.name.c_str(), chk.cells, chk.mismatches.size(),
                chk.overall_mismatches.empty() ? "ok" : "off");
    for (const auto& mm : chk.mismatches) {
      std::printf("  %s %s expected %.2f got %.4f\n", mm.game.c_str(), mm.column.c_str(), mm.expected, mm.actual);
    }
    for (const auto& mm : chk.overall_mismatches) {
      std::printf("  O %s expected %.2f got %.4f (soft)\n", mm.column.c_str(), mm.expected, mm.actual);
    }
    ok = ok && chk.passed();
  }
  return ok ? 0 : 1;
}

void print_overall(const char* split, const ScoreTable& norm) {
  const auto o = overall_row(norm);
  std::printf("%-4s O:", split);
  for (std::size_t m = 0; m < norm.methods.size(); ++m) {
    std::printf("  %s %.3f±%.3f", norm.methods[m].c_str(), o[m].mean, o[m].std);
  }
  std::printf("\n");
}

int cmd_report(const Globals& g, const std::string& methods_flag, bool fixtures, const std::string& fixture_dir) {
  if (fixtures) return print_fixture_oracle(fixture_dir);
  Config c = base_config(g, true);
  if (!methods_flag.empty()) c.set("train.methods", methods_flag);
  const RunConfig rc = run_config(c);
  const arcade::TaskSplit split = arcade::load_split(split_dir(g).string());
  std::vector<MethodRun> runs;
  for (Method m : rc.methods) {
    for (std::uint64_t seed : seeds_of(g, rc)) {
      const fs::path cached = score_path(g, m, seed);
      const fs::path ckpt = run_dir(g, m, seed) / "model.ckpt";
      if (!fs::exists(ckpt)) {
        throw LookupError(std::string("missing checkpoint for method ") + method_name(m) + " seed " +
                          std::to_string(seed) + " (" + ckpt.string() + ")");
      }
      bool fresh = false;
      if (fs::exists(cached)) {
        MethodRun run = score_from_json(json::parse(read_text(cached)));
        fresh = run.checkpoint_hash == sha256_file(ckpt.string());
        if (fresh) runs.push_back(std::move(run));
      }
      if (!fresh) runs.push_back(evaluate_run(g, split, m, seed));
    }
  }
  const Report report = build_report(runs);
  const fs::path csv = fs::path(g.out) / "report.csv";
  write_report_csv(csv.string(), report);
  write_text(fs::path(g.out) / "report.config.toml", c.to_text());
  std::printf("wrote %s\n", csv.string().c_str());
  print_overall("ID", report.id_norm);
  print_overall("OOD", report.ood_norm);
  return 0;
}

// ---- importance-dump ----

int cmd_importance(const Globals& g, const std::string& method_flag) {
  const Method m = parse_method(method_flag);
  if (m == Method::kDT || m == Method::kDTL || m == Method::kDTV) {
    throw ConfigError(std::string("importance-dump: ") + method_name(m) +
                      " has no instruction importance (DT has no instructions; DTL and DTV condition on a single "
                      "pseudo-instruction). Use DTGI, or DTGI-a for uniform reference rows.");
  }
  Config c = base_config(g, true);
  const RunConfig rc = run_config(c);
  const std::uint64_t seed = seeds_of(g, rc).front();
  const arcade::TaskSplit split = arcade::load_split(split_dir(g).string());
  const LoadedRun loaded = load_run(g, m, seed);
  const auto provider = make_provider(loaded.cfg);
  const auto conds = condition_split(split, m, *provider, loaded.cfg.model.cond.dim);
  const Model<float> model(loaded.cfg.model, m);

  ImportanceGrid grid;
  std::ostringstream csv;
  csv << "game_id,instruction_index,score\n";
  auto dump = [&](const std::vector<GameConditioning<float>>& games) {
    for (const auto& gc : games) {
      const auto scores = model.scores(loaded.params, gc, num::ForwardContext{});
      std::vector<double> row(scores.begin(), scores.end());
      for (std::size_t i = 0; i < row.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s,%zu,%.9f\n", gc.game_id.c_str(), i, row[i]);
        csv << buf;
      }
      grid.games.push_back(gc.game_id);
      grid.scores.push_back(std::move(row));
    }
  };
  dump(conds.train);
  dump(conds.test);
  const std::string stem = std::string("importance-") + method_name(m) + "-seed" + std::to_string(seed);
  write_text(fs::path(g.out) / (stem + ".csv"), csv.str());
  write_text(fs::path(g.out) / (stem + ".svg"), importance_svg(grid));
  std::printf("wrote %s.csv and %s.svg (%zu games x %zu instructions)\n", (fs::path(g.out) / stem).string().c_str(),
              stem.c_str(), grid.games.size(), grid.scores.empty() ? 0 : grid.scores.front().size());
  return 0;
}

// ---- grad-check ----

int cmd_grad_check(const Globals& g, double tol) {
  num::GradCheckOptions opts;
  if (g.seed) opts.seed = *g.seed;
  bool ok = true;
  for (const auto& gc : run_grad_suite(opts.seed, opts)) {
    const bool pass = gc.report.max_rel_error <= tol;
    ok = ok && pass;
    std::printf("%s %-24s max_rel_err %.3e at %s[%zu] (%zu coords, %.2fs)\n", pass ? "PASS" : "FAIL",
                gc.name.c_str(), gc.report.max_rel_error, gc.report.worst_param.c_str(), gc.report.worst_index,
                gc.report.coords_checked, gc.seconds);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision Transformer with game instructions: data, training, evaluation and reports"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_path, "TOML-style config file (section.key = value)");
    sub->add_option("--out", g.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Split seed for gen-data, training seed otherwise");
    sub->add_flag("--force", g.force, "Overwrite existing outputs");
    sub->add_option("--set", g.sets, "Override a config key, key=value (repeatable)");
  };

  std::optional<int> games;
  std::optional<long> budget;
  bool embed_cache = false;
  auto* gen = app.add_subcommand("gen-data", "Generate the task split, datasets and instruction sets");
  add_globals(gen);
  gen->add_option("--games", games, "Total number of games (training + unseen)");
  gen->add_option("--budget", budget, "Transitions per training game");
  gen->add_flag("--embed-cache", embed_cache, "Also write the frozen embeddings as embeddings.ckpt");

  std::string methods;
  bool resume = false;
  bool quiet = false;
  auto* tr = app.add_subcommand("train", "Train one checkpoint per method and seed");
  add_globals(tr);
  tr->add_option("--methods", methods, "Comma-separated methods (DT,DTL,DTV,DTGI-a,DTGI)");
  tr->add_flag("--resume", resume, "Continue from the last completed epoch");
  tr->add_flag("--quiet", quiet, "No per-step progress on stderr");

  auto* ev = app.add_subcommand("eval", "Evaluate checkpoints on ID and OOD games");
  add_globals(ev);
  ev->add_option("--methods", methods, "Comma-separated methods");

  bool fixtures = false;
  std::string fixture_dir = DTGI_FIXTURE_DIR;
  auto* rep = app.add_subcommand("report", "Score CSV with raw and normalized tables and O rows");
  add_globals(rep);
  rep->add_option("--methods", methods, "Comma-separated methods");
  rep->add_flag("--fixtures", fixtures, "Run the published-table normalization oracle instead");
  rep->add_option("--fixture-dir", fixture_dir, "Directory with the transcribed tables")->capture_default_str();

  std::string imp_method = "DTGI";
  auto* imp = app.add_subcommand("importance-dump", "Per-game instruction importance CSV and SVG heatmap");
  add_globals(imp);
  imp->add_option("--method", imp_method, "DTGI or DTGI-a")->capture_default_str();

  double tol = 1e-4;
  auto* gcmd = app.add_subcommand("grad-check", "Finite-difference gradient verification suite");
  add_globals(gcmd);
  gcmd->add_option("--tol", tol, "Maximum relative error")->capture_default_str();

  auto* orc = app.add_subcommand("oracle", "Published-table normalization fixture check");
  add_globals(orc);
  orc->add_option("--fixture-dir", fixture_dir, "Directory with the transcribed tables")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) g.seed = seed;
  }

  try {
    if (*gen) return cmd_gen_data(g, games, budget, embed_cache);
    if (*tr) return cmd_train(g, methods, resume, quiet);
    if (*ev) return cmd_eval(g, methods);
    if (*rep) return cmd_report(g, methods, fixtures, fixture_dir);
    if (*imp) return cmd_importance(g, imp_method);
    if (*gcmd) return cmd_grad_check(g, tol);
    if (*orc) return print_fixture_oracle(fixture_dir);
  } catch (const dtgi::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
