#include "dtgi/mgi/instruction.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dtgi/common/error.hpp"

namespace dtgi::mgi {

using nlohmann::json;

template <typename F>
std::vector<std::vector<F>> segment_video(const std::vector<F>& frames, int segment_len) {
  if (segment_len < 1) throw ConfigError("segment_video: segment length must be at least 1");
  std::vector<std::vector<F>> out;
  const std::size_t len = static_cast<std::size_t>(segment_len);
  for (std::size_t start = 0; start + len <= frames.size(); start += len) {
    out.emplace_back(frames.begin() + static_cast<std::ptrdiff_t>(start),
                     frames.begin() + static_cast<std::ptrdiff_t>(start + len));
  }
  return out;
}

template std::vector<std::vector<Frame>> segment_video<Frame>(const std::vector<Frame>&, int);
template std::vector<std::vector<int>> segment_video<int>(const std::vector<int>&, int);

std::vector<std::string> validate(const InstructionSet& set, const SchemaLimits& limits) {
  std::vector<std::string> diag;
  auto where = [&](std::size_t i) { return set.game_id + " instruction " + std::to_string(i) + ": "; };
  if (set.game_id.empty()) diag.push_back("game_id is empty");
  if (set.instructions.empty()) diag.push_back(set.game_id + ": instruction set is empty");
  std::size_t expected_m = limits.steps > 0 ? static_cast<std::size_t>(limits.steps) : 0;
  for (std::size_t i = 0; i < set.instructions.size(); ++i) {
    const Instruction& ins = set.instructions[i];
    if (ins.description.empty()) diag.push_back(where(i) + "empty description");
    if (ins.frames.size() != ins.guidance.size()) {
      diag.push_back(where(i) + "frame count " + std::to_string(ins.frames.size()) + " != guidance count " +
                     std::to_string(ins.guidance.size()));
    }
    if (ins.frames.empty()) diag.push_back(where(i) + "no frames");
    if (expected_m == 0) expected_m = ins.frames.size();
    if (ins.frames.size() != expected_m) {
      diag.push_back(where(i) + "has " + std::to_string(ins.frames.size()) + " steps, expected " +
                     std::to_string(expected_m));
    }
    for (std::size_t f = 0; f < ins.frames.size(); ++f) {
      const Frame& fr = ins.frames[f];
      if (fr.path.empty()) {
        std::size_t n = fr.shape.empty() ? 0 : 1;
        for (auto e : fr.shape) n *= e;
        if (n != fr.data.size()) diag.push_back(where(i) + "frame " + std::to_string(f) + " shape/data mismatch");
      }
    }
    for (std::size_t g = 0; g < ins.guidance.size(); ++g) {
      const GuidanceStep& step = ins.guidance[g];
      if (step.action_id < 0 || step.action_id >= limits.action_count) {
        diag.push_back(where(i) + "step " + std::to_string(g) + " action " + std::to_string(step.action_id) +
                       " outside action space");
      }
      for (const auto& box : step.boxes) {
        if (box.a > box.c || box.b > box.d) {
          diag.push_back(where(i) + "step " + std::to_string(g) + " box '" + box.label + "' is inverted");
        }
        if (box.a < 0 || box.b < 0 || box.c >= limits.grid || box.d >= limits.grid) {
          diag.push_back(where(i) + "step " + std::to_string(g) + " box '" + box.label + "' outside the frame");
        }
      }
    }
  }
  return diag;
}

namespace {

json frame_to_json(const Frame& f) {
  if (!f.path.empty()) return json{{"path", f.path}, {"shape", f.shape}};
  if (f.shape.size() != 3) return json{{"shape", f.shape}, {"data", f.data}};
  // nested planes -> rows -> columns
  json planes = json::array();
  std::size_t k = 0;
  for (std::uint32_t p = 0; p < f.shape[0]; ++p) {
    json rows = json::array();
    for (std::uint32_t r = 0; r < f.shape[1]; ++r) {
      json cols = json::array();
      for (std::uint32_t c = 0; c < f.shape[2]; ++c) cols.push_back(f.data[k++]);
      rows.push_back(std::move(cols));
    }
    planes.push_back(std::move(rows));
  }
  return planes;
}

void flatten(const json& j, std::vector<float>& out, std::vector<std::uint32_t>& shape, std::size_t depth) {
  if (j.is_number()) {
    out.push_back(j.get<float>());
    return;
  }
  if (!j.is_array()) throw FormatError("instruction frame: expected nested numeric arrays");
  if (shape.size() <= depth) {
    shape.push_back(static_cast<std::uint32_t>(j.size()));
  } else if (shape[depth] != j.size()) {
    throw FormatError("instruction frame: ragged nested array");
  }
  for (const auto& e : j) flatten(e, out, shape, depth + 1);
}

Frame frame_from_json(const json& j) {
  Frame f;
  if (j.is_object()) {
    if (j.contains("path")) {
      f.path = j.at("path").get<std::string>();
      if (j.contains("shape")) f.shape = j.at("shape").get<std::vector<std::uint32_t>>();
      return f;
    }
    f.shape = j.at("shape").get<std::vector<std::uint32_t>>();
    f.data = j.at("data").get<std::vector<float>>();
    return f;
  }
  flatten(j, f.data, f.shape, 0);
  return f;
}

}  // namespace

std::string to_json(const InstructionSet& set) {
  json j;
  j["game_id"] = set.game_id;
  json list = json::array();
  for (const auto& ins : set.instructions) {
    json ji;
    ji["description"] = ins.description;
    json frames = json::array();
    for (const auto& f : ins.frames) frames.push_back(frame_to_json(f));
    ji["frames"] = std::move(frames);
    json guidance = json::array();
    for (const auto& g : ins.guidance) {
      json boxes = json::array();
      for (const auto& b : g.boxes) boxes.push_back({{"a", b.a}, {"b", b.b}, {"c", b.c}, {"d", b.d}, {"label", b.label}});
      guidance.push_back({{"action", g.action_id}, {"text", g.text}, {"boxes", std::move(boxes)}});
    }
    ji["guidance"] = std::move(guidance);
    list.push_back(std::move(ji));
  }
  j["instructions"] = std::move(list);
  return j.dump();
}

InstructionSet from_json(const std::string& text) {
  InstructionSet set;
  try {
    const json j = json::parse(text);
    set.game_id = j.at("game_id").get<std::string>();
    for (const auto& ji : j.at("instructions")) {
      Instruction ins;
      ins.description = ji.at("description").get<std::string>();
      for (const auto& jf : ji.at("frames")) ins.frames.push_back(frame_from_json(jf));
      for (const auto& jg : ji.at("guidance")) {
        GuidanceStep g;
        g.action_id = jg.at("action").get<int>();
        g.text = jg.at("text").get<std::string>();
        for (const auto& jb : jg.at("boxes")) {
          g.boxes.push_back({jb.at("a").get<int>(), jb.at("b").get<int>(), jb.at("c").get<int>(),
                             jb.at("d").get<int>(), jb.value("label", std::string{})});
        }
        ins.guidance.push_back(std::move(g));
      }
      set.instructions.push_back(std::move(ins));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("instruction file: ") + e.what());
  }
  return set;
}

void save_instruction_set(const std::string& path, const InstructionSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << to_json(set);
}

InstructionSet load_instruction_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace dtgi::mgi
