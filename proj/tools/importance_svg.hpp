#pragma once

#include <string>
#include <vector>

// Games x instructions heatmap; darker cells carry more importance.
struct ImportanceGrid {
  std::vector<std::string> games;
  std::vector<std::vector<double>> scores;  // [game][instruction]
};

std::string importance_svg(const ImportanceGrid& grid, int cell = 14);
