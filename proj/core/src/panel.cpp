#include "mosum/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mosum/errors.hpp"

namespace mosum {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool is_time_column(const std::string& header) {
  std::string h = lower(header);
  return h.empty() || h == "time" || h == "t" || h == "date";
}

double parse_cell(const std::string& cell, int row, int col) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || cell.empty())
    fail(errc::validation, "panel csv: cell at data row " + std::to_string(row + 1) + ", column " +
                               std::to_string(col + 1) + " is not a finite number: '" + cell + "'");
  if (!std::isfinite(v))
    fail(errc::validation, "panel csv: non-finite value at data row " + std::to_string(row + 1) +
                               ", column " + std::to_string(col + 1));
  return v;
}

}  // namespace

Panel load_panel_csv(const std::string& csv_path, const std::optional<std::string>& layout_path) {
  std::ifstream in(csv_path);
  if (!in) fail(errc::io, "cannot open panel csv: " + csv_path);

  std::string line;
  if (!std::getline(in, line)) fail(errc::validation, "panel csv is empty: " + csv_path);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);

  std::vector<std::string> header = split_csv_line(line);
  bool has_time = !header.empty() && is_time_column(header.front());
  std::size_t first_series = has_time ? 1 : 0;
  if (header.size() <= first_series) fail(errc::validation, "panel csv has no series columns");

  Panel panel;
  panel.series_ids.assign(header.begin() + static_cast<long>(first_series), header.end());
  if (has_time) panel.time_labels.emplace();

  std::vector<double> data;
  int rows = 0;
  const std::size_t ncol = header.size();
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != ncol)
      fail(errc::validation, "panel csv: data row " + std::to_string(rows + 1) + " has " +
                                 std::to_string(cells.size()) + " fields, expected " +
                                 std::to_string(ncol));
    if (has_time) panel.time_labels->push_back(cells[0]);
    for (std::size_t c = first_series; c < cells.size(); ++c)
      data.push_back(parse_cell(cells[c], rows, static_cast<int>(c)));
    ++rows;
  }
  if (rows == 0) fail(errc::validation, "panel csv has no data rows: " + csv_path);

  const int p = static_cast<int>(panel.series_ids.size());
  panel.values.resize(rows, p);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < p; ++c) panel.values(r, c) = data[static_cast<std::size_t>(r) * p + c];

  if (layout_path) panel.layout = load_layout_json(*layout_path, panel.series_ids);

  validate_or_throw(panel);
  return panel;
}

void write_panel_csv(const Panel& panel, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) fail(errc::io, "cannot write panel csv: " + csv_path);
  if (panel.time_labels) out << "time";
  for (std::size_t j = 0; j < panel.series_ids.size(); ++j) {
    if (j > 0 || panel.time_labels) out << ',';
    out << panel.series_ids[j];
  }
  out << '\n';
  char buf[64];
  for (int i = 0; i < panel.n(); ++i) {
    if (panel.time_labels) out << (*panel.time_labels)[static_cast<std::size_t>(i)];
    for (int j = 0; j < panel.p(); ++j) {
      if (j > 0 || panel.time_labels) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", panel.values(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) fail(errc::io, "failed while writing panel csv: " + csv_path);
}

SpatialLayout load_layout_json(const std::string& path, const std::vector<std::string>& series_ids) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open layout json: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::validation, std::string("layout json parse error: ") + e.what());
  }
  if (!j.is_object()) fail(errc::validation, "layout json must be an object of id -> coordinates");

  SpatialLayout layout;
  layout.coords.assign(series_ids.size(), {});
  int dim = -1;
  for (std::size_t s = 0; s < series_ids.size(); ++s) {
    auto it = j.find(series_ids[s]);
    if (it == j.end())
      fail(errc::validation, "layout json: missing coordinates for series '" + series_ids[s] + "'");
    if (!it->is_array() || it->empty())
      fail(errc::validation, "layout json: coordinates for '" + series_ids[s] +
                                 "' must be a non-empty array");
    std::vector<int> c;
    for (const auto& v : *it) {
      if (!v.is_number_integer())
        fail(errc::validation, "layout json: coordinates for '" + series_ids[s] +
                                   "' must be integers");
      c.push_back(v.get<int>());
    }
    if (dim < 0) dim = static_cast<int>(c.size());
    if (static_cast<int>(c.size()) != dim)
      fail(errc::validation, "layout json: inconsistent coordinate dimension for '" +
                                 series_ids[s] + "'");
    layout.coords[s] = std::move(c);
  }
  layout.dim = std::max(dim, 1);
  return layout;
}

SpatialLayout default_layout(int p) {
  require(p >= 1, errc::config, "default_layout: p must be positive");
  SpatialLayout layout;
  layout.dim = 1;
  layout.coords.resize(static_cast<std::size_t>(p));
  for (int s = 0; s < p; ++s) layout.coords[static_cast<std::size_t>(s)] = {s + 1};
  return layout;
}

std::vector<std::string> validate(const Panel& panel) {
  std::vector<std::string> problems;
  if (panel.values.rows() < 1 || panel.values.cols() < 1)
    problems.push_back("panel has no data");
  if (static_cast<int>(panel.series_ids.size()) != panel.p())
    problems.push_back("series id count does not match column count");
  std::set<std::string> seen;
  for (const auto& id : panel.series_ids) {
    if (id.empty()) problems.push_back("empty series id");
    if (!seen.insert(id).second) problems.push_back("duplicate series id '" + id + "'");
  }
  if (panel.time_labels && static_cast<int>(panel.time_labels->size()) != panel.n())
    problems.push_back("time label count does not match row count");
  if (!panel.values.allFinite()) problems.push_back("panel contains non-finite values");
  if (panel.layout) {
    if (static_cast<int>(panel.layout->coords.size()) != panel.p())
      problems.push_back("layout does not cover every series");
    std::set<std::vector<int>> locs;
    for (const auto& c : panel.layout->coords) {
      if (static_cast<int>(c.size()) != panel.layout->dim)
        problems.push_back("layout coordinate arity mismatch");
      if (!locs.insert(c).second) problems.push_back("duplicate layout location");
    }
  }
  return problems;
}

void validate_or_throw(const Panel& panel) {
  std::vector<std::string> problems = validate(panel);
  if (problems.empty()) return;
  std::string msg = "invalid panel:";
  for (const auto& p : problems) msg += "\n  - " + p;
  fail(errc::validation, msg);
}

}  // namespace mosum
