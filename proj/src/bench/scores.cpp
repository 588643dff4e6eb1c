#include "dtgi/bench/scores.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dtgi/common/config.hpp"
#include "dtgi/common/error.hpp"

namespace dtgi::bench {

void ScoreTable::add_row(const std::string& game, std::vector<Cell> row) {
  if (row.size() != methods.size()) {
    throw ShapeError("score table row " + game + " has " + std::to_string(row.size()) + " cells for " +
                     std::to_string(methods.size()) + " methods");
  }
  games.push_back(game);
  cells.push_back(std::move(row));
}

const Cell& ScoreTable::at(const std::string& game, const std::string& method) const {
  for (std::size_t g = 0; g < games.size(); ++g) {
    if (games[g] != game) continue;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (methods[m] == method) return cells[g][m];
    }
  }
  throw LookupError("score table has no cell (" + game + ", " + method + ")");
}

ScoreTable normalize_scores(const ScoreTable& raw) {
  ScoreTable out = raw;
  out.normalized = true;
  for (auto& row : out.cells) {
    double pos = 0.0;
    double neg = 0.0;
    for (const auto& c : row) {
      pos = std::max(pos, c.mean);
      neg = std::min(neg, c.mean);
    }
    for (auto& c : row) {
      double factor = 0.0;
      if (c.mean > 0) {
        factor = pos;
      } else if (c.mean < 0) {
        factor = -neg;
      } else {
        factor = pos > 0 ? pos : -neg;
      }
      if (factor > 0) {
        c.mean /= factor;
        c.std /= factor;
      } else {
        c = Cell{};
      }
    }
  }
  return out;
}

std::vector<Cell> overall_row(const ScoreTable& t) {
  std::vector<Cell> o(t.methods.size());
  if (t.cells.empty()) return o;
  for (const auto& row : t.cells) {
    for (std::size_t m = 0; m < row.size(); ++m) {
      o[m].mean += row[m].mean;
      o[m].std += row[m].std;
    }
  }
  for (auto& c : o) {
    c.mean /= static_cast<double>(t.cells.size());
    c.std /= static_cast<double>(t.cells.size());
  }
  return o;
}

namespace {

struct CsvData {
  std::vector<std::string> methods;
  std::vector<std::pair<std::string, std::vector<Cell>>> rows;
};

CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open score table " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  const auto header = split_list(line);
  if (header.size() < 3 || (header.size() - 1) % 2 != 0) throw FormatError(path + ": bad header");
  CsvData d;
  for (std::size_t i = 1; i < header.size(); i += 2) {
    const std::string& h = header[i];
    const auto cut = h.rfind("_mean");
    if (cut == std::string::npos) throw FormatError(path + ": column " + h + " is not a _mean column");
    d.methods.push_back(h.substr(0, cut));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_list(line);
    if (f.size() != header.size()) throw FormatError(path + ": ragged row " + f.front());
    std::vector<Cell> row;
    for (std::size_t i = 1; i < f.size(); i += 2) row.push_back({std::stod(f[i]), std::stod(f[i + 1])});
    d.rows.emplace_back(f.front(), std::move(row));
  }
  return d;
}

}  // namespace

ScoreTable read_score_csv(const std::string& path) {
  CsvData d = read_csv(path);
  ScoreTable t;
  t.methods = d.methods;
  for (auto& [game, row] : d.rows) {
    if (game != "O") t.add_row(game, std::move(row));
  }
  return t;
}

std::vector<Cell> read_overall_row(const std::string& path) {
  for (auto& [game, row] : read_csv(path).rows) {
    if (game == "O") return row;
  }
  return {};
}

FixtureCheck check_fixture(const std::string& name, const ScoreTable& raw, const ScoreTable& published,
                           const std::vector<Cell>& published_overall, double mean_tol, double std_tol,
                           double overall_tol) {
  if (raw.methods != published.methods || raw.games != published.games) {
    throw FormatError(name + ": raw and published tables have different rows or columns");
  }
  FixtureCheck r;
  r.name = name;
  const ScoreTable norm = normalize_scores(raw);
  for (std::size_t g = 0; g < norm.games.size(); ++g) {
    for (std::size_t m = 0; m < norm.methods.size(); ++m) {
      const Cell& a = norm.cells[g][m];
      const Cell& e = published.cells[g][m];
      r.cells += 2;
      if (std::abs(a.mean - e.mean) > mean_tol + 1e-9) {
        r.mismatches.push_back({norm.games[g], norm.methods[m] + "_mean", e.mean, a.mean});
      }
      if (std::abs(a.std - e.std) > std_tol + 1e-9) {
        r.mismatches.push_back({norm.games[g], norm.methods[m] + "_std", e.std, a.std});
      }
    }
  }
  if (!published_overall.empty()) {
    const auto o = overall_row(norm);
    for (std::size_t m = 0; m < o.size(); ++m) {
      if (std::abs(o[m].mean - published_overall[m].mean) > overall_tol + 1e-9) {
        r.overall_mismatches.push_back({"O", norm.methods[m] + "_mean", published_overall[m].mean, o[m].mean});
      }
    }
  }
  return r;
}

std::vector<FixtureCheck> run_fixture_oracle(const std::string& dir) {
  std::vector<FixtureCheck> out;
  for (const std::string stem : {"id", "ood", "ood_by_games"}) {
    const std::string raw_path = dir + "/" + stem + "_raw.csv";
    const std::string norm_path = dir + "/" + stem + "_normalized.csv";
    out.push_back(check_fixture(stem, read_score_csv(raw_path), read_score_csv(norm_path),
                                read_overall_row(norm_path)));
  }
  return out;
}

}  // namespace dtgi::bench
