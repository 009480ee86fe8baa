#include "hoi/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hoi/error.hpp"

namespace hoi {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Column {
  std::string name;
  int component = 0;
};

Column parse_header_cell(const std::string& cell, const std::string& source, std::size_t col) {
  if (cell.empty()) throw DataError(source + ": empty header in column " + std::to_string(col + 1));
  const auto colon = cell.rfind(':');
  if (colon == std::string::npos) return {cell, 0};
  int comp = 0;
  const auto tail = std::string_view(cell).substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), comp);
  if (ec != std::errc{} || ptr != tail.data() + tail.size() || comp < 0) return {cell, 0};
  return {cell.substr(0, colon), comp};
}

}  // namespace

Dataset read_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty input");
  const auto header = split(line);

  std::vector<Column> columns;
  std::vector<std::string> order;  // variable names in first-seen order
  std::map<std::string, std::vector<std::pair<int, std::size_t>>> layout;
  for (std::size_t c = 0; c < header.size(); ++c) {
    Column col = parse_header_cell(header[c], source, c);
    if (!layout.contains(col.name)) order.push_back(col.name);
    layout[col.name].emplace_back(col.component, c);
    columns.push_back(std::move(col));
  }
  for (auto& [name, comps] : layout) {
    std::sort(comps.begin(), comps.end());
    for (std::size_t k = 0; k < comps.size(); ++k) {
      if (comps[k].first != static_cast<int>(k)) {
        throw DataError(source + ": variable '" + name + "' has non-contiguous or duplicate components");
      }
    }
  }

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError(source + ": row " + std::to_string(row_no) + ", column '" + header[c] +
                        "': cannot parse '" + cell + "' as a number");
      }
      if (!std::isfinite(v)) {
        throw DataError(source + ": row " + std::to_string(row_no) + ", column '" + header[c] + "': non-finite value");
      }
      values[c] = v;
    }
    rows.push_back(std::move(values));
  }

  std::vector<VariableSamples> vars;
  const auto n = static_cast<Eigen::Index>(rows.size());
  for (const auto& name : order) {
    const auto& comps = layout[name];
    VariableSamples v{Eigen::MatrixXd(n, static_cast<Eigen::Index>(comps.size())), name};
    for (Eigen::Index a = 0; a < n; ++a) {
      for (std::size_t k = 0; k < comps.size(); ++k) {
        v.values(a, static_cast<Eigen::Index>(k)) = rows[static_cast<std::size_t>(a)][comps[k].second];
      }
    }
    vars.push_back(std::move(v));
  }
  return Dataset(std::move(vars));
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, path);
}

void write_csv(std::ostream& out, const Dataset& data) {
  bool first = true;
  for (const auto& v : data.variables()) {
    for (Eigen::Index k = 0; k < v.dim(); ++k) {
      if (!first) out << ',';
      first = false;
      out << v.name;
      if (v.dim() > 1) out << ':' << k;
    }
  }
  out << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index a = 0; a < data.n(); ++a) {
    first = true;
    for (const auto& v : data.variables()) {
      for (Eigen::Index k = 0; k < v.dim(); ++k) {
        if (!first) out << ',';
        first = false;
        out << v.values(a, k);
      }
    }
    out << '\n';
  }
  out.precision(old_precision);
}

std::vector<int> resolve_variables(const Dataset& data, const std::string& selection) {
  std::vector<int> out;
  if (trim(selection).empty()) {
    for (int i = 0; i < data.d(); ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(selection);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int found = -1;
    for (int i = 0; i < data.d(); ++i) {
      if (data.variable(i).name == item) found = i;
    }
    if (found < 0) {
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), idx);
      if (ec == std::errc{} && ptr == item.data() + item.size() && idx >= 1 && idx <= data.d()) found = idx - 1;
    }
    if (found < 0) throw DataError("unknown variable '" + item + "'");
    out.push_back(found);
  }
  return out;
}

nlohmann::json to_json(const TestConfig& config) {
  nlohmann::json j;
  j["kind"] = to_string(config.kind.tag);
  j["statistic"] = to_string(config.resolved_statistic());
  j["alpha"] = config.alpha;
  j["permutations"] = config.permutations;
  j["seed"] = config.seed;
  j["early_exit"] = config.early_exit;
  j["correction"] = to_string(config.correction);
  j["workers"] = config.workers;
  return j;
}

nlohmann::json to_json(const SubTestResult& r) {
  return {{"partition", r.partition.to_string()},
          {"statistic", r.statistic},
          {"p_value", r.p_value},
          {"level", r.level},
          {"rejected", r.rejected},
          {"permuted_block", r.permuted_block},
          {"exceedances", r.exceedances}};
}

nlohmann::json to_json(const TestReport& report) {
  nlohmann::json j;
  j["composite_rejected"] = report.composite_rejected;
  j["observed_statistic"] = report.observed_statistic;
  j["completed"] = report.completed;
  j["sub_hypotheses"] = report.sub_hypotheses;
  j["n"] = report.n;
  j["d"] = report.d;
  j["sub_results"] = nlohmann::json::array();
  for (const auto& r : report.sub_results) j["sub_results"].push_back(to_json(r));
  j["surviving_partitions"] = nlohmann::json::array();
  for (const auto& p : report.surviving_partitions) j["surviving_partitions"].push_back(p.to_string());
  j["config"] = to_json(report.config);
  return j;
}

}  // namespace hoi
