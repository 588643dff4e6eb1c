// One PASS/FAIL line per acceptance criterion; --criterion N runs one.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dtgi/arcade/split.hpp"
#include "dtgi/bench/experiment.hpp"
#include "dtgi/bench/grad_suite.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"
#include "dtgi/mgi/synth.hpp"
#include "dtgi/numerics/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dtgi;
using namespace dtgi::bench;

namespace {

using clk = std::chrono::steady_clock;
double since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

using MD = num::Mat<double>;

MD random_mat(num::Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  MD m(r, c);
  num::init_normal(m, rng, sd);
  return m;
}

double max_abs_diff(const MD& a, const MD& b) { return (a - b).cwiseAbs().maxCoeff(); }

// ---- 1: normalization oracle ----

Outcome criterion_oracle() {
  const auto t0 = clk::now();
  std::ostringstream detail;
  bool ok = true;
  for (const auto& chk : run_fixture_oracle(DTGI_FIXTURE_DIR)) {
    detail << chk.name << " " << chk.cells - chk.mismatches.size() << "/" << chk.cells << "; ";
    for (const auto& mm : chk.mismatches) {
      detail << "[" << chk.name << " " << mm.game << " " << mm.column << " printed " << mm.expected << " computed "
             << fmt("%.4f", mm.actual) << "] ";
    }
    ok = ok && chk.passed();
  }
  struct Spot {
    const char* name;
    std::vector<double> raw;
    std::vector<double> expected;
  };
  const std::vector<Spot> spots{
      {"ood row 5", {320, 100, 33.33, 106.67, 166.67}, {1.00, 0.31, 0.10, 0.33, 0.52}},
      {"id row 16", {-4, -8, -6.67, -4, -15.33}, {-0.26, -0.52, -0.43, -0.26, -1.00}},
      {"ood row 1", {-766.67, -368.33, -289.00, 100.00, -533.33}, {-1.00, -0.48, -0.38, 1.00, -0.70}},
  };
  for (const auto& s : spots) {
    ScoreTable t;
    t.methods = {"DT", "DTL", "DTV", "DTGI-a", "DTGI"};
    std::vector<Cell> row;
    for (double v : s.raw) row.push_back({v, 0.0});
    t.add_row("g", row);
    const auto n = normalize_scores(t);
    bool spot_ok = true;
    for (std::size_t i = 0; i < s.expected.size(); ++i) spot_ok = spot_ok && std::abs(n.cells[0][i].mean - s.expected[i]) <= 0.01;
    detail << "spot " << s.name << (spot_ok ? " ok; " : " MISMATCH; ");
    ok = ok && spot_ok;
  }
  const double secs = since(t0);
  detail << fmt("%.3fs", secs);
  return {ok && secs < 1.0, detail.str()};
}

// ---- 2: gradient suite ----

Outcome criterion_grad() {
  const auto t0 = clk::now();
  std::ostringstream detail;
  bool ok = true;
  double worst = 0.0;
  for (const auto& gc : run_grad_suite(0)) {
    const bool pass = gc.report.max_rel_error <= 1e-4;
    ok = ok && pass;
    worst = std::max(worst, gc.report.max_rel_error);
    if (!pass) detail << gc.name << " " << fmt("%.2e", gc.report.max_rel_error) << " at " << gc.report.worst_param << "; ";
  }
  const double secs = since(t0);
  detail << "worst " << fmt("%.2e", worst) << ", " << fmt("%.1fs", secs);
  return {ok && secs < 120.0, detail.str()};
}

// ---- 3: algebraic invariants ----

GameConditioning<double> random_conditioning(num::Rng& rng, const ModelConfig& mc, int n, bool learned) {
  GameConditioning<double> gc;
  gc.game_id = "g";
  gc.learned = learned;
  gc.batch.m = mc.cond.steps;
  gc.batch.desc = random_mat(rng, n, mc.cond.dim);
  gc.batch.frames = random_mat(rng, static_cast<Eigen::Index>(n) * mc.cond.steps, mc.cond.dim);
  gc.batch.guidance = random_mat(rng, static_cast<Eigen::Index>(n) * mc.cond.steps, mc.cond.dim);
  return gc;
}

GameConditioning<double> permuted(const GameConditioning<double>& gc, const std::vector<int>& perm) {
  GameConditioning<double> out = gc;
  const int m = gc.batch.m;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(perm[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.batch.desc.row(dst) = gc.batch.desc.row(src);
    out.batch.frames.middleRows(dst * m, m) = gc.batch.frames.middleRows(src * m, m);
    out.batch.guidance.middleRows(dst * m, m) = gc.batch.guidance.middleRows(src * m, m);
  }
  return out;
}

policy::WindowBatch<double> random_batch(num::Rng& rng, const policy::DTConfig& d, int batch) {
  policy::WindowBatch<double> b;
  b.batch = batch;
  b.len = d.context_len;
  const int rows = batch * b.len;
  b.states = random_mat(rng, rows, d.state_dim);
  std::uniform_int_distribution<int> action(0, d.action_count - 1);
  for (int i = 0; i < rows; ++i) {
    b.rtgs.push_back(std::normal_distribution<double>(3.0, 2.0)(rng));
    b.actions.push_back(action(rng));
    b.timesteps.push_back(i % b.len);
    b.targets.push_back(b.actions.back());
  }
  return b;
}

void spread(ParamStore<double>& ps, num::Rng& rng, double sd) {
  for (auto& [_, p] : ps) p.value += random_mat(rng, p.value.rows(), p.value.cols(), sd);
}

Outcome criterion_invariants() {
  std::ostringstream detail;
  bool ok = true;
  auto note = [&](const std::string& name, bool pass, const std::string& value) {
    detail << name << (pass ? " ok" : " FAIL") << " (" << value << "); ";
    ok = ok && pass;
  };
  num::Rng rng(31);
  const ModelConfig mc = test_scale_model();
  const hyper::HyperGenerator gen(mc.hyper);

  // one-hot importance selects one candidate exactly
  {
    ParamStore<double> ps;
    gen.init(ps, rng, 0.02);
    spread(ps, rng, 0.3);
    hyper::HyperNet down("hyper.down", hyper::Role::kDown, mc.hyper.feature_dim, mc.hyper.hidden,
                         mc.hyper.model_dim * mc.hyper.bottleneck);
    hyper::HyperNet up("hyper.up", hyper::Role::kUp, mc.hyper.feature_dim, mc.hyper.hidden,
                       mc.hyper.model_dim * mc.hyper.bottleneck);
    const MD feats = random_mat(rng, 5, mc.hyper.feature_dim);
    const auto cands = hyper::generate_candidates<double>(ps, feats, down, up, mc.hyper, nullptr);
    bool exact = true;
    for (int j = 0; j < cands.count(); ++j) {
      std::vector<double> s(static_cast<std::size_t>(cands.count()), 0.0);
      s[static_cast<std::size_t>(j)] = 1.0;
      const auto fused = hyper::fuse_candidates<double>(cands, s);
      const auto want = cands.candidate(j);
      exact = exact && fused.d_hat == want.d_hat && fused.u_hat == want.u_hat;
    }
    note("one-hot selection", exact, "bitwise");
  }

  // permutation of the instruction set
  {
    const Model<double> model(mc, Method::kDTGI);
    ParamStore<double> ps;
    model.init(ps, 5);
    spread(ps, rng, 0.2);
    const auto gc = random_conditioning(rng, mc, 5, true);
    const auto gp = permuted(gc, {3, 0, 4, 1, 2});
    const auto a = model.adapters(ps, &gc, {}, nullptr);
    const auto b = model.adapters(ps, &gp, {}, nullptr);
    const auto batch = random_batch(rng, mc.dt, 3);
    const double dparams = std::max(max_abs_diff(a[0].d_hat, b[0].d_hat), max_abs_diff(a[0].u_hat, b[0].u_hat));
    const double dlogits = max_abs_diff(model.logits(ps, batch, a), model.logits(ps, batch, b));
    note("permutation", dparams <= 1e-6 && dlogits <= 1e-6,
         "adapter " + fmt("%.1e", dparams) + ", logits " + fmt("%.1e", dlogits));
  }

  // zero adapter == plain DT, bitwise
  {
    const Model<double> model(mc, Method::kDTGI);
    ParamStore<double> ps;
    model.init(ps, 6);
    spread(ps, rng, 0.2);
    const auto batch = random_batch(rng, mc.dt, 3);
    const auto zero = std::vector<hyper::AdapterParams<double>>{
        hyper::AdapterParams<double>::zeros(mc.dt.embed_dim, mc.hyper.bottleneck)};
    const MD with = model.logits(ps, batch, zero);
    const MD without = model.logits(ps, batch, {});
    note("zero adapter", with == without, "bitwise");
  }

  // importance sums to one
  {
    double worst = 0.0;
    for (int n : {1, 2, 7, 50}) {
      const auto s = cond::importance<double>(random_mat(rng, n, 16, 0.5));
      double sum = 0.0;
      for (double v : s) sum += v;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    note("importance sum", worst <= 1e-6, fmt("%.1e", worst));
  }

  // DTGI-a == DTGI on identical instructions
  {
    const Model<double> learned(mc, Method::kDTGI);
    const Model<double> uniform(mc, Method::kDTGIa);
    ParamStore<double> ps;
    learned.init(ps, 7);
    spread(ps, rng, 0.2);
    auto one = random_conditioning(rng, mc, 1, true);
    GameConditioning<double> same = one;
    const int n = 6;
    same.batch.desc = one.batch.desc.replicate(n, 1);
    same.batch.frames = one.batch.frames.replicate(n, 1);
    same.batch.guidance = one.batch.guidance.replicate(n, 1);
    GameConditioning<double> same_u = same;
    same_u.learned = false;
    const auto a = learned.adapters(ps, &same, {}, nullptr);
    const auto b = uniform.adapters(ps, &same_u, {}, nullptr);
    const double diff = std::max(max_abs_diff(a[0].d_hat, b[0].d_hat), max_abs_diff(a[0].u_hat, b[0].u_hat));
    note("DTGI-a vs DTGI", diff <= 1e-9, fmt("%.1e", diff));
  }

  // normalize_scores idempotent and row-scale invariant
  {
    ScoreTable t;
    t.methods = {"a", "b", "c", "d", "e"};
    std::normal_distribution<double> val(0.0, 50.0);
    std::uniform_real_distribution<double> sd(0.0, 20.0);
    for (int g = 0; g < 40; ++g) {
      std::vector<Cell> row;
      for (int m = 0; m < 5; ++m) row.push_back({g % 7 == 0 ? std::abs(val(rng)) : val(rng), sd(rng)});
      if (g % 11 == 0) row[2].mean = 0.0;
      t.add_row("g" + std::to_string(g), row);
    }
    const auto n1 = normalize_scores(t);
    const auto n2 = normalize_scores(n1);
    ScoreTable scaled = t;
    for (std::size_t g = 0; g < scaled.cells.size(); ++g) {
      const double c = 0.1 + 3.7 * static_cast<double>(g);
      for (auto& cell : scaled.cells[g]) {
        cell.mean *= c;
        cell.std *= c;
      }
    }
    const auto n3 = normalize_scores(scaled);
    double idem = 0.0, scale = 0.0;
    for (std::size_t g = 0; g < n1.cells.size(); ++g) {
      for (std::size_t m = 0; m < n1.cells[g].size(); ++m) {
        idem = std::max({idem, std::abs(n1.cells[g][m].mean - n2.cells[g][m].mean),
                         std::abs(n1.cells[g][m].std - n2.cells[g][m].std)});
        scale = std::max({scale, std::abs(n1.cells[g][m].mean - n3.cells[g][m].mean),
                          std::abs(n1.cells[g][m].std - n3.cells[g][m].std)});
      }
    }
    note("normalize idempotent", idem <= 1e-9, fmt("%.1e", idem));
    note("normalize scale-invariant", scale <= 1e-9, fmt("%.1e", scale));
  }
  return {ok, detail.str()};
}

// ---- 4: overfit ----

Outcome criterion_overfit() {
  const auto t0 = clk::now();
  arcade::SplitParams sp;
  sp.budget = 2000;
  const auto specs = arcade::make_split_specs(sp.n_train, sp.n_test, sp.master_seed);
  const auto& spec = specs.train.front();
  const auto data = arcade::gen_offline(spec, sp.budget, sp.mix, arcade::game_seed(sp.master_seed, 0));
  const auto trajs = policy::split_episodes(data);

  ModelConfig mc = test_scale_model(static_cast<int>(spec.obs_size()));
  const auto set = mgi::synth_instructions(spec, 4, mc.cond.steps, 1);
  const mgi::SyntheticProvider provider(mc.cond.dim, 0);
  const auto gc = build_conditioning(Method::kDTGI, spec.game_id, &set, provider, mc.cond.dim);

  num::Rng rng(11);
  const auto batch = policy::sample_windows<float>(trajs, 64, mc.dt.context_len, rng);
  const Model<float> model(mc, Method::kDTGI);
  ParamStore<float> ps;
  model.init(ps, 0);
  num::AdamWConfig ac;
  ac.weight_decay = 0.0;
  num::AdamW<float> opt(ac);
  const num::ForwardContext ctx{};
  double first = 0.0, last = 0.0;
  int steps = 0;
  for (; steps < 2000; ++steps) {
    ps.zero_grad();
    last = model.loss(ps, batch, &*gc, ctx, true);
    if (steps == 0) first = last;
    if (last < 0.1 * first) break;
    num::clip_grad_norm(ps, 1.0);
    opt.step(ps, 3e-3);
  }
  const double secs = since(t0);
  const bool ok = last < 0.1 * first && secs < 300.0;
  return {ok, "CE " + fmt("%.4f", first) + " -> " + fmt("%.4f", last) + " after " + std::to_string(steps) +
                  " steps, " + fmt("%.1fs", secs)};
}

// ---- 5: desk-scale experiment ----

Outcome criterion_experiment(const std::string& config_path, const std::string& report_path) {
  const auto t0 = clk::now();
  Config c = default_config();
  c.load_file(config_path);
  const RunConfig rc = run_config(c);
  const arcade::TaskSplit split = arcade::make_split(rc.split);
  const auto provider = make_provider(rc);
  std::vector<MethodRun> runs;
  std::ostringstream loss_notes;
  int loss_drops = 0, loss_runs = 0;
  for (std::uint64_t seed : rc.seeds) {
    for (Method m : rc.methods) {
      const auto r0 = clk::now();
      std::vector<LogRow> log;
      TrainHooks hooks;
      hooks.on_step = [&](const LogRow& r) { log.push_back(r); };
      runs.push_back(train_and_evaluate(split, rc, m, seed, *provider, hooks));
      // mean loss over the first and last epoch
      const int last_epoch = log.back().epoch;
      double a = 0, b = 0;
      int na = 0, nb = 0;
      for (const auto& r : log) {
        if (r.epoch == 0) a += r.loss, ++na;
        if (r.epoch == last_epoch) b += r.loss, ++nb;
      }
      ++loss_runs;
      if (b / nb < a / na) ++loss_drops;
      std::fprintf(stderr, "  %s seed %llu: %.1fs, loss %.3f -> %.3f\n", method_name(m),
                   static_cast<unsigned long long>(seed), since(r0), a / na, b / nb);
    }
  }
  const Report report = build_report(runs);
  write_report_csv(report_path, report);
  const auto ood = overall_row(report.ood_norm);
  const auto id = overall_row(report.id_norm);
  std::ostringstream detail;
  double dt = 0.0, dtgi = 0.0;
  bool have_dt = false, have_dtgi = false;
  detail << "OOD O:";
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    detail << " " << report.methods[i] << " " << fmt("%.3f", ood[i].mean);
    if (report.methods[i] == "DT") dt = ood[i].mean, have_dt = true;
    if (report.methods[i] == "DTGI") dtgi = ood[i].mean, have_dtgi = true;
  }
  detail << "; ID O:";
  for (std::size_t i = 0; i < report.methods.size(); ++i) detail << " " << report.methods[i] << " " << fmt("%.3f", id[i].mean);
  const double secs = since(t0);
  detail << "; loss fell in " << loss_drops << "/" << loss_runs << " runs; " << fmt("%.0fs", secs);
  const bool ok = have_dt && have_dtgi && dtgi >= dt && secs <= 3600.0;
  return {ok, detail.str()};
}

// ---- 6: determinism and round-trips ----

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DTGI_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw LookupError("missing " + p.string());
  return json::parse(in);
}

Outcome criterion_determinism(const std::string& scratch) {
  std::ostringstream detail;
  bool ok = true;
  auto note = [&](const std::string& name, bool pass) {
    detail << name << (pass ? " ok" : " FAIL") << "; ";
    ok = ok && pass;
  };

  // CLI reruns
  const std::string small =
      " --games 8 --budget 600 --seed 7 --set instr.n=3 --set instr.m=5 --set model.feature_dim=16";
  const std::string train_args =
      " --methods DT,DTGI --seed 0 --quiet --set model.embed_dim=16 --set model.layers=1 --set model.heads=2"
      " --set model.encoder_ffn=16 --set model.fusion_hidden=16 --set model.hyper_bottleneck=8"
      " --set model.adapter_bottleneck=4 --set train.batch_size=8 --set train.steps_per_epoch=4"
      " --set train.max_epochs=2";
  std::vector<json> manifests;
  std::vector<std::string> ckpts;
  for (const char* run : {"a", "b"}) {
    const fs::path out = fs::path(scratch) / run;
    fs::remove_all(out);
    const int g = run_cli("gen-data --out \"" + out.string() + "\"" + small);
    const int t = run_cli("train --out \"" + out.string() + "\"" + train_args);
    if (g != 0 || t != 0) {
      note(std::string("cli run ") + run, false);
      return {false, detail.str()};
    }
    manifests.push_back(read_json(out / "manifest.json"));
    for (const char* m : {"DT", "DTGI"}) {
      ckpts.push_back(read_json(out / "runs" / m / "seed0" / "hashes.json").dump());
    }
  }
  note("gen-data manifest", manifests[0]["content"] == manifests[1]["content"]);
  note("train checkpoints", ckpts[0] == ckpts[2] && ckpts[1] == ckpts[3]);
  {
    // refusal without --force
    const fs::path out = fs::path(scratch) / "a";
    note("non-empty refusal", run_cli("gen-data --out \"" + out.string() + "\"" + small) != 0);
  }

  // serialization round-trips
  const fs::path split_dir = fs::path(scratch) / "a" / "split";
  const auto split = arcade::load_split(split_dir.string());
  {
    bool same = true;
    for (const auto& g : split.train) {
      const auto bytes = arcade::encode_dataset(g.data);
      same = same && arcade::decode_dataset(bytes) == g.data;
      same = same && arcade::encode_dataset(arcade::decode_dataset(bytes)) == bytes;
    }
    note("dataset round-trip", same);
  }
  {
    bool same = true;
    for (const auto& g : split.test) {
      const auto text = mgi::to_json(g.instructions);
      same = same && mgi::from_json(text) == g.instructions && mgi::to_json(mgi::from_json(text)) == text;
    }
    note("instruction round-trip", same);
  }
  {
    const fs::path again = fs::path(scratch) / "resaved";
    fs::remove_all(again);
    arcade::save_split(again.string(), split);
    bool same = true;
    for (const auto& f : fs::recursive_directory_iterator(split_dir)) {
      if (!f.is_regular_file()) continue;
      const auto rel = fs::relative(f.path(), split_dir);
      same = same && sha256_file(f.path().string()) == sha256_file((again / rel).string());
    }
    note("split round-trip", same);
  }
  {
    num::Rng rng(3);
    ParamStore<double> pd;
    pd.add("x", {3, 4}).value = random_mat(rng, 3, 4);
    pd.add("y", {5}).value = random_mat(rng, 1, 5);
    pd.add_frozen("z", random_mat(rng, 2, 2));
    const auto bytes = num::encode_checkpoint(pd);
    const auto back = num::decode_checkpoint<double>(bytes);
    bool same = num::encode_checkpoint(back) == bytes;
    for (const auto& [name, p] : pd) same = same && back.value(name) == p.value;
    ParamStore<float> pf = pd.cast<float>();
    const auto fbytes = num::encode_checkpoint(pf);
    same = same && num::encode_checkpoint(num::decode_checkpoint<float>(fbytes)) == fbytes;
    note("checkpoint round-trip", same);
  }
  {
    Config c = default_config();
    c.set("train.lr", "0.000123456789");
    c.set("train.methods", "DT,DTGI");
    Config d = default_config();
    d.load_text(c.to_text());
    note("config round-trip", d.to_text() == c.to_text());
  }

  // frozen embeddings untouched by training; resumed run == uninterrupted run
  {
    Config c = default_config();
    c.set_override("instr.n=3");
    c.set_override("instr.m=5");
    c.set_override("model.feature_dim=16");
    c.set_override("model.embed_dim=16");
    c.set_override("model.layers=1");
    c.set_override("model.heads=2");
    c.set_override("model.encoder_ffn=16");
    c.set_override("model.fusion_hidden=16");
    c.set_override("model.hyper_bottleneck=8");
    c.set_override("model.adapter_bottleneck=4");
    c.set_override("train.batch_size=8");
    c.set_override("train.steps_per_epoch=3");
    c.set_override("train.max_epochs=3");
    const RunConfig rc = run_config(c);
    const auto provider = make_provider(rc);
    const auto conds = condition_split(split, Method::kDTGI, *provider, rc.model.cond.dim);
    auto hash_of = [](const ParamStore<float>& ps) {
      const auto b = num::encode_checkpoint(ps);
      return sha256_hex(std::span<const std::uint8_t>(b));
    };
    std::vector<GameConditioning<float>> all = conds.train;
    all.insert(all.end(), conds.test.begin(), conds.test.end());
    const std::string before = hash_of(frozen_store(all));
    const auto games = training_data(split, conds, 1.0);
    const Model<float> model(rc.model, Method::kDTGI);
    const auto full = train(model, games, rc.train, 4);
    note("frozen hash", hash_of(frozen_store(all)) == before);
    const fs::path dir = fs::path(scratch) / "resume";
    fs::remove_all(dir);
    fs::create_directories(dir);
    TrainHooks h;
    h.run_dir = dir.string();
    h.stop_after_epochs = 1;
    train(model, games, rc.train, 4, h);
    h.stop_after_epochs = 0;
    h.resume = true;
    const auto resumed = train(model, games, rc.train, 4, h);
    note("resume", resumed.start_epoch == 1 && resumed.checkpoint_hash == full.checkpoint_hash &&
                       resumed.log.size() == full.log.size());
  }
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string config = DTGI_DESK_CONFIG;
  std::string scratch = DTGI_SCRATCH_DIR;
  std::string report = std::string(DTGI_SCRATCH_DIR) + "/desk_report.csv";
  app.add_option("--criterion", only, "Run only this criterion (1-6)");
  app.add_option("--desk-config", config, "Config for the desk-scale experiment")->capture_default_str();
  app.add_option("--scratch", scratch, "Scratch directory")->capture_default_str();
  app.add_option("--report", report, "Where the desk-scale report CSV goes")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(scratch);

  const std::vector<std::pair<int, std::string>> names{
      {1, "normalization oracle"}, {2, "gradient suite"}, {3, "algebraic invariants"},
      {4, "overfit check"},        {5, "desk-scale directional experiment"}, {6, "determinism and round-trips"}};
  bool all_ok = true;
  for (const auto& [id, name] : names) {
    if (only != 0 && only != id) continue;
    Outcome o;
    try {
      switch (id) {
        case 1: o = criterion_oracle(); break;
        case 2: o = criterion_grad(); break;
        case 3: o = criterion_invariants(); break;
        case 4: o = criterion_overfit(); break;
        case 5: o = criterion_experiment(config, report); break;
        case 6: o = criterion_determinism((fs::path(scratch) / "determinism").string()); break;
      }
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("CRITERION %d %s: %s | %s\n", id, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && o.pass;
  }
  return all_ok ? 0 : 1;
}
