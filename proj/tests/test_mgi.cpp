#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "dtgi/arcade/split.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/mgi/embedding.hpp"
#include "dtgi/mgi/synth.hpp"

using namespace dtgi;
using namespace dtgi::mgi;

namespace {

arcade::GameSpec first_spec() { return arcade::make_split_specs(6, 2, 0).train.front(); }

double norm(const std::vector<float>& v) {
  double s = 0;
  for (float x : v) s += double(x) * x;
  return std::sqrt(s);
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * b[i];
  return s / (norm(a) * norm(b));
}

}  // namespace

TEST_SUITE("mgi") {
  TEST_CASE("segment_video drops the remainder") {
    std::vector<int> frames(105);
    for (int i = 0; i < 105; ++i) frames[i] = i;
    const auto segs = segment_video(frames, 20);
    CHECK(segs.size() == 5);
    CHECK(segs.back().front() == 80);
    CHECK(segs.back().back() == 99);
    CHECK(segment_video(std::vector<int>(100), 20).size() == 5);
    CHECK(segment_video(std::vector<int>(19), 20).empty());
    CHECK_THROWS_AS(segment_video(frames, 0), ConfigError);
  }

  TEST_CASE("synthetic instructions are deterministic and valid") {
    const auto spec = first_spec();
    const auto a = synth_instructions(spec, 50, 20, 7);
    const auto b = synth_instructions(spec, 50, 20, 7);
    CHECK(to_json(a) == to_json(b));
    CHECK(a.instructions.size() == 50);
    CHECK(validate(a, {spec.grid, arcade::kActionCount, 20}).empty());
    for (const auto& ins : a.instructions) {
      CHECK(ins.frames.size() == 20);
      CHECK(ins.guidance.size() == 20);
      for (const auto& g : ins.guidance) {
        for (const auto& box : g.boxes) {
          CHECK(0 <= box.a);
          CHECK(box.a <= box.c);
          CHECK(box.c < spec.grid);
          CHECK(0 <= box.b);
          CHECK(box.b <= box.d);
          CHECK(box.d < spec.grid);
        }
      }
    }
    CHECK(to_json(synth_instructions(spec, 50, 20, 8)) != to_json(a));
    CHECK(synth_instructions(spec, 1, 20, 0).instructions.size() == 1);
  }

  TEST_CASE("json round trip and schema diagnostics") {
    auto set = synth_instructions(first_spec(), 3, 5, 1);
    CHECK(from_json(to_json(set)) == set);
    set.instructions[1].guidance[2].action_id = 9;
    set.instructions[2].guidance[0].boxes.push_back({5, 5, 2, 2, "bad"});
    set.instructions[0].frames.pop_back();
    const auto diags = validate(set, {7, 6, 5});
    CHECK(diags.size() >= 3);
    CHECK_THROWS(from_json("{\"game_id\": 3}"));
  }

  TEST_CASE("synthetic provider is frozen and unit norm") {
    const SyntheticProvider p(64, 3);
    const auto set = synth_instructions(first_spec(), 5, 6, 2);
    const auto& frame = set.instructions[0].frames[0];
    CHECK(p.embed_frame(frame) == p.embed_frame(frame));
    CHECK(norm(p.embed_frame(frame)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(norm(p.embed_text("move left")) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(SyntheticProvider(64, 4).embed_text("move left") != p.embed_text("move left"));
  }

  TEST_CASE("distinct guidance strings embed apart") {
    const SyntheticProvider p(512, 0);
    std::set<std::string> texts;
    for (const auto& spec : arcade::make_split_specs(6, 2, 0).train) {
      for (const auto& ins : synth_instructions(spec, 10, 20, 0).instructions) {
        for (const auto& g : ins.guidance) texts.insert(guidance_text(g));
      }
    }
    REQUIRE(texts.size() > 10);
    std::vector<std::vector<float>> vecs;
    for (const auto& t : texts) vecs.push_back(p.embed_text(t));
    double worst = -1.0;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      for (std::size_t j = i + 1; j < vecs.size(); ++j) worst = std::max(worst, cosine(vecs[i], vecs[j]));
    }
    CHECK(worst < 0.999);
  }

  TEST_CASE("embed_instruction shapes and file cache") {
    const SyntheticProvider p(32, 1);
    const auto set = synth_instructions(first_spec(), 2, 4, 3);
    const auto e = embed_instruction(set.instructions[0], p, 32);
    CHECK(e.desc.rows() == 1);
    CHECK(e.frames.rows() == 4);
    CHECK(e.guidance.cols() == 32);
    CHECK_THROWS_AS(embed_instruction(set.instructions[0], p, 512), ShapeError);

    const auto dir = std::filesystem::path(DTGI_SCRATCH_DIR) / "mgi";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "embed.ckpt").string();
    write_embedding_cache(path, {set}, p);
    const FileProvider fp(path);
    const auto f = embed_instruction(set.instructions[1], fp, 32);
    const auto s = embed_instruction(set.instructions[1], p, 32);
    CHECK(f.frames == s.frames);
    CHECK(f.guidance == s.guidance);
    std::string msg;
    try {
      fp.embed_text("never cached");
    } catch (const LookupError& err) {
      msg = err.what();
    }
    CHECK(msg.find(text_key("never cached")) != std::string::npos);
  }
}
