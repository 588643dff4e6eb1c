#include "importance_svg.hpp"

#include <algorithm>
#include <cstdio>

std::string importance_svg(const ImportanceGrid& grid, int cell) {
  std::size_t cols = 0;
  double top = 0.0;
  for (const auto& row : grid.scores) {
    cols = std::max(cols, row.size());
    for (double v : row) top = std::max(top, v);
  }
  const int label_w = 72;
  const int header_h = 18;
  const int width = label_w + static_cast<int>(cols) * cell + 4;
  const int height = header_h + static_cast<int>(grid.games.size()) * cell + 4;
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"monospace\" "
                "font-size=\"10\">\n",
                width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t c = 0; c < cols; c += 5) {
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"12\">%zu</text>\n", label_w + static_cast<int>(c) * cell, c);
    svg += buf;
  }
  for (std::size_t r = 0; r < grid.scores.size(); ++r) {
    const int y = header_h + static_cast<int>(r) * cell;
    std::snprintf(buf, sizeof buf, "<text x=\"2\" y=\"%d\">%s</text>\n", y + cell - 3, grid.games[r].c_str());
    svg += buf;
    for (std::size_t c = 0; c < grid.scores[r].size(); ++c) {
      const double v = grid.scores[r][c];
      const int shade = 255 - static_cast<int>(top > 0 ? 255.0 * v / top : 0.0);
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"rgb(%d,%d,%d)\" stroke=\"#ccc\">"
                    "<title>%s #%zu %.4f</title></rect>\n",
                    label_w + static_cast<int>(c) * cell, y, cell, cell, shade, shade, shade, grid.games[r].c_str(), c,
                    v);
      svg += buf;
    }
  }
  svg += "</svg>\n";
  return svg;
}
