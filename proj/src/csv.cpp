#include "panelfe/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace panelfe {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_value(const std::string& field, size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + column +
                     " value \"" + field + "\"");
  return v;
}

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = first + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

PanelData load_panel_csv(const std::string& path, int n_regressors) {
  if (n_regressors < 1) throw DomainError("panel needs at least one regressor");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file " + path);
  line = strip_cr(line);
  {
    std::string expected = "unit_id,time_id,y";
    for (int k = 1; k <= n_regressors; ++k) expected += ",x" + std::to_string(k);
    if (line != expected)
      throw ParseError("line 1: header must be \"" + expected + "\"");
  }
  const size_t n_fields = 3 + static_cast<size_t>(n_regressors);

  struct Row {
    int unit, time;
    std::vector<double> values; /* y, x1..xK */
  };
  std::vector<Row> rows;
  std::vector<std::string> unit_labels, time_labels;
  std::unordered_map<std::string, int> unit_index, time_index;

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != n_fields)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_fields) + " fields, got " +
                       std::to_string(fields.size()));
    Row row;
    auto uit = unit_index.find(fields[0]);
    if (uit == unit_index.end()) {
      uit = unit_index.emplace(fields[0], static_cast<int>(unit_labels.size())).first;
      unit_labels.push_back(fields[0]);
    }
    row.unit = uit->second;
    auto tit = time_index.find(fields[1]);
    if (tit == time_index.end()) {
      tit = time_index.emplace(fields[1], static_cast<int>(time_labels.size())).first;
      time_labels.push_back(fields[1]);
    }
    row.time = tit->second;
    row.values.reserve(n_fields - 2);
    row.values.push_back(parse_value(fields[2], line_no, "y"));
    for (int k = 1; k <= n_regressors; ++k)
      row.values.push_back(parse_value(fields[2 + k], line_no, "x" + std::to_string(k)));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows in " + path);

  /* Periods sort by label, numerically when every label is a number so
   * "10" lands after "2"; units keep first-appearance order. */
  const int n = static_cast<int>(unit_labels.size());
  const int t = static_cast<int>(time_labels.size());
  std::vector<int> time_order(t);
  for (int j = 0; j < t; ++j) time_order[j] = j;
  {
    std::vector<double> numeric(t);
    bool all_numeric = true;
    for (int j = 0; j < t && all_numeric; ++j)
      all_numeric = parse_number(time_labels[j], numeric[j]);
    std::sort(time_order.begin(), time_order.end(), [&](int a, int b) {
      if (all_numeric && numeric[a] != numeric[b]) return numeric[a] < numeric[b];
      return time_labels[a] < time_labels[b];
    });
  }
  std::vector<int> time_rank(t);
  for (int j = 0; j < t; ++j) time_rank[time_order[j]] = j;

  PanelData panel;
  panel.n_units = n;
  panel.n_periods = t;
  panel.unit_labels = unit_labels;
  panel.time_labels.resize(t);
  for (int j = 0; j < t; ++j) panel.time_labels[j] = time_labels[time_order[j]];
  panel.y.setZero(n, t);
  panel.x.assign(static_cast<size_t>(n_regressors), Eigen::MatrixXd::Zero(n, t));

  std::vector<char> seen(static_cast<size_t>(n) * t, 0);
  size_t data_line = 1;
  for (const auto& row : rows) {
    ++data_line; /* rows vector skips blank lines, close enough for messages */
    const int i = row.unit;
    const int j = time_rank[row.time];
    char& cell = seen[static_cast<size_t>(i) * t + j];
    if (cell)
      throw ParseError("duplicate cell (" + unit_labels[i] + ", " +
                       panel.time_labels[j] + ") near line " + std::to_string(data_line));
    cell = 1;
    panel.y(i, j) = row.values[0];
    for (int k = 0; k < n_regressors; ++k) panel.x[k](i, j) = row.values[k + 1];
  }

  std::vector<std::pair<int, int>> missing;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < t; ++j)
      if (!seen[static_cast<size_t>(i) * t + j]) missing.emplace_back(i, j);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "panel is unbalanced, " << missing.size() << " missing cell(s):";
    const size_t shown = std::min<size_t>(missing.size(), 20);
    for (size_t m = 0; m < shown; ++m)
      msg << " (" << unit_labels[missing[m].first] << ", "
          << panel.time_labels[missing[m].second] << ")";
    if (missing.size() > shown) msg << " ...";
    throw BalanceError(msg.str());
  }

  panel.validate();
  return panel;
}

void save_panel_csv(const PanelData& panel, const std::string& path) {
  panel.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const int k_count = panel.n_regressors();
  out << "unit_id,time_id,y";
  for (int k = 1; k <= k_count; ++k) out << ",x" << k;
  out << "\n";
  const auto unit_label = [&](int i) {
    return panel.unit_labels.empty() ? std::to_string(i + 1) : panel.unit_labels[i];
  };
  const auto time_label = [&](int j) {
    return panel.time_labels.empty() ? std::to_string(j + 1) : panel.time_labels[j];
  };
  for (int i = 0; i < panel.n_units; ++i)
    for (int j = 0; j < panel.n_periods; ++j) {
      out << unit_label(i) << ',' << time_label(j) << ',' << format_value(panel.y(i, j));
      for (int k = 0; k < k_count; ++k) out << ',' << format_value(panel.x[k](i, j));
      out << "\n";
    }
  if (!out) throw IoError("write failed for " + path);
}

void save_truth_csv(const PanelData& panel, const std::string& path) {
  panel.validate();
  if (!panel.gamma_true || !panel.beta_true)
    throw DomainError("panel carries no simulation truth to save");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "schema,1\n";
  for (int k = 0; k < panel.beta_true->size(); ++k)
    out << "beta0_" << (k + 1) << ',' << format_value((*panel.beta_true)[k]) << "\n";
  out << "unit_id,time_id,gamma\n";
  const auto unit_label = [&](int i) {
    return panel.unit_labels.empty() ? std::to_string(i + 1) : panel.unit_labels[i];
  };
  const auto time_label = [&](int j) {
    return panel.time_labels.empty() ? std::to_string(j + 1) : panel.time_labels[j];
  };
  for (int i = 0; i < panel.n_units; ++i)
    for (int j = 0; j < panel.n_periods; ++j)
      out << unit_label(i) << ',' << time_label(j) << ','
          << format_value((*panel.gamma_true)(i, j)) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace panelfe
