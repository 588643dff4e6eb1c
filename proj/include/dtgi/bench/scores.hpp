#pragma once

#include <map>
#include <string>
#include <vector>

namespace dtgi::bench {

struct Cell {
  double mean = 0.0;
  double std = 0.0;
};

// Game rows x method columns. Row order is insertion order.
struct ScoreTable {
  std::vector<std::string> methods;
  std::vector<std::string> games;
  std::vector<std::vector<Cell>> cells;  // [game][method]
  bool normalized = false;

  void add_row(const std::string& game, std::vector<Cell> row);
  const Cell& at(const std::string& game, const std::string& method) const;
};

// Per row: positive means divide by the row's largest positive mean, negative
// means by the magnitude of its most negative mean; zero means stay zero.
// Each std divides by its mean's factor (zero means use the positive factor
// if there is one, else the negative one, else the cell becomes zero).
ScoreTable normalize_scores(const ScoreTable& raw);

// Column means of every cell (the "O" row).
std::vector<Cell> overall_row(const ScoreTable& t);

// CSV with header "game,<m>_mean,<m>_std,...". Rows whose first field is
// "O" are skipped on read.
ScoreTable read_score_csv(const std::string& path);

struct CellMismatch {
  std::string game;
  std::string column;
  double expected = 0.0;
  double actual = 0.0;
};

struct FixtureCheck {
  std::string name;
  std::size_t cells = 0;
  std::vector<CellMismatch> mismatches;
  std::vector<CellMismatch> overall_mismatches;  // O row, soft tolerance
  bool passed() const { return mismatches.empty(); }
};

// Normalises raw and compares against the published table: means within
// mean_tol, stds within std_tol, O row within overall_tol.
FixtureCheck check_fixture(const std::string& name, const ScoreTable& raw, const ScoreTable& published,
                           const std::vector<Cell>& published_overall, double mean_tol = 0.01,
                           double std_tol = 0.02, double overall_tol = 0.02);

// Reads the O row of a published CSV (empty when absent).
std::vector<Cell> read_overall_row(const std::string& path);

// Runs check_fixture over every raw/normalized pair in dir.
std::vector<FixtureCheck> run_fixture_oracle(const std::string& dir);

}  // namespace dtgi::bench
