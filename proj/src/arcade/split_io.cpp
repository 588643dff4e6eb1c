#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dtgi/arcade/split.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/numerics/checkpoint.hpp"

namespace dtgi::arcade {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json spec_json(const GameSpec& s) {
  return {{"game_id", s.game_id},
          {"grid", s.grid},
          {"flags", flags_name(s.flags)},
          {"good_color", color_name(s.good_color)},
          {"gems", s.gems},
          {"hazards", s.hazards},
          {"rewards",
           {{"gem", s.rewards.gem},
            {"hazard", s.rewards.hazard},
            {"prey", s.rewards.prey},
            {"box_on_goal", s.rewards.box_on_goal}}},
          {"episode_cap", s.episode_cap}};
}

unsigned parse_flags(const std::string& text) {
  unsigned f = 0;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, '+')) {
    if (part == "collect") f |= kCollect;
    else if (part == "avoid") f |= kAvoid;
    else if (part == "chase") f |= kChase;
    else if (part == "push") f |= kPush;
    else throw FormatError("specs.json: unknown flag '" + part + "'");
  }
  return f;
}

GameSpec spec_from(const json& j) {
  GameSpec s;
  s.game_id = j.at("game_id").get<std::string>();
  s.grid = j.at("grid").get<int>();
  s.flags = parse_flags(j.at("flags").get<std::string>());
  const auto color = j.at("good_color").get<std::string>();
  if (color == color_name(Color::kRed)) s.good_color = Color::kRed;
  else if (color == color_name(Color::kBlue)) s.good_color = Color::kBlue;
  else throw FormatError("specs.json: unknown colour '" + color + "'");
  s.gems = j.at("gems").get<int>();
  s.hazards = j.at("hazards").get<int>();
  const auto& r = j.at("rewards");
  s.rewards = {r.at("gem").get<int>(), r.at("hazard").get<int>(), r.at("prey").get<int>(),
               r.at("box_on_goal").get<int>()};
  s.episode_cap = j.at("episode_cap").get<int>();
  validate(s);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<std::string> save_split(const std::string& dir, const TaskSplit& split) {
  const fs::path root(dir);
  fs::create_directories(root / "data");
  fs::create_directories(root / "instructions");
  std::vector<std::string> written;
  json specs{{"train", json::array()}, {"test", json::array()}};
  for (const auto& g : split.train) {
    specs["train"].push_back(spec_json(g.spec));
    const std::string data = "data/" + g.spec.game_id + ".bin";
    num::write_file((root / data).string(), encode_dataset(g.data));
    written.push_back(data);
    const std::string ins = "instructions/" + g.spec.game_id + ".json";
    mgi::save_instruction_set((root / ins).string(), g.instructions);
    written.push_back(ins);
  }
  for (const auto& g : split.test) {
    specs["test"].push_back(spec_json(g.spec));
    const std::string ins = "instructions/" + g.spec.game_id + ".json";
    mgi::save_instruction_set((root / ins).string(), g.instructions);
    written.push_back(ins);
  }
  write_text(root / "specs.json", specs.dump(2) + "\n");
  written.push_back("specs.json");
  std::sort(written.begin(), written.end());
  return written;
}

TaskSplit load_split(const std::string& dir) {
  const fs::path root(dir);
  const fs::path specs_path = root / "specs.json";
  std::ifstream in(specs_path);
  if (!in) throw LookupError("no split at " + dir + " (missing specs.json; run gen-data first)");
  json specs;
  try {
    specs = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(specs_path.string() + ": " + e.what());
  }
  TaskSplit split;
  for (const auto& j : specs.at("train")) {
    TrainGame g;
    g.spec = spec_from(j);
    const auto bytes = num::read_file((root / "data" / (g.spec.game_id + ".bin")).string());
    g.data = decode_dataset(bytes);
    g.instructions = mgi::load_instruction_set((root / "instructions" / (g.spec.game_id + ".json")).string());
    split.train.push_back(std::move(g));
  }
  for (const auto& j : specs.at("test")) {
    TestGame g;
    g.spec = spec_from(j);
    g.instructions = mgi::load_instruction_set((root / "instructions" / (g.spec.game_id + ".json")).string());
    split.test.push_back(std::move(g));
  }
  return split;
}

}  // namespace dtgi::arcade
