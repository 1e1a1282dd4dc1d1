#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mosum {

// Integer lattice coordinates for each series.
struct SpatialLayout {
  int dim = 1;
  std::vector<std::vector<int>> coords;  // one entry per series, each of length dim
};

// Dense panel of n observations on p series (column = series). An optional
// leading CSV column named "time", "t", "date", or "" is kept as row labels.
struct Panel {
  Eigen::MatrixXd values;
  std::vector<std::string> series_ids;
  std::optional<std::vector<std::string>> time_labels;
  std::optional<SpatialLayout> layout;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
};

Panel load_panel_csv(const std::string& csv_path,
                     const std::optional<std::string>& layout_path = std::nullopt);
void write_panel_csv(const Panel& panel, const std::string& csv_path);

// Layout file: JSON object mapping series id -> [coord, ...].
SpatialLayout load_layout_json(const std::string& path, const std::vector<std::string>& series_ids);
SpatialLayout default_layout(int p);  // one dimension, positions 1..p

// Returns human-readable problems (empty = valid): shape, duplicate or empty
// ids, non-finite cells, layout arity/coverage mismatches.
std::vector<std::string> validate(const Panel& panel);
void validate_or_throw(const Panel& panel);

}  // namespace mosum
