#include "pairlasso/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pairlasso {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& cell, const std::string& where) {
  const std::string t = trim(cell);
  if (t.empty()) throw DataError("missing value " + where);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw DataError("non-numeric cell '" + t + "' " + where);
  if (!std::isfinite(v)) throw DataError("non-finite value '" + t + "' " + where);
  return v;
}

int parse_level(const std::string& cell, int levels, const std::string& where) {
  const std::string t = trim(cell);
  if (t.empty()) throw DataError("missing value " + where);
  int v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw DataError("categorical cell '" + t + "' is not an integer " + where);
  if (v < 1 || v > levels)
    throw DataError("categorical value " + std::to_string(v) + " outside [1, " +
                    std::to_string(levels) + "] " + where);
  return v;
}

}  // namespace

Schema parse_schema(const std::string& text) {
  std::string body = text;
  {
    std::ifstream f(text);
    if (f.good()) {
      std::ostringstream ss;
      ss << f.rdbuf();
      body = ss.str();
    }
  }
  for (char& c : body)
    if (c == '\n' || c == '\r') c = ',';

  Schema schema;
  std::unordered_set<std::string> seen;
  for (const std::string& raw : split(body, ',')) {
    const std::string entry = trim(raw);
    if (entry.empty()) continue;
    auto parts = split(entry, ':');
    for (auto& p : parts) p = trim(p);
    if (parts.size() < 2 || parts[0].empty())
      throw ConfigError("bad schema entry '" + entry + "' (want name:cat:L or name:cont)");
    ColumnSpec spec;
    spec.name = parts[0];
    if (parts[1] == "cont") {
      if (parts.size() != 2) throw ConfigError("bad schema entry '" + entry + "'");
      spec.kind = ColumnKind::continuous;
    } else if (parts[1] == "cat") {
      if (parts.size() != 3) throw ConfigError("bad schema entry '" + entry + "' (missing level count)");
      spec.kind = ColumnKind::categorical;
      int L = 0;
      auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), L);
      if (ec != std::errc{} || ptr != parts[2].data() + parts[2].size() || L < 2)
        throw ConfigError("bad level count in schema entry '" + entry + "' (need an integer >= 2)");
      spec.levels = L;
    } else {
      throw ConfigError("unknown column kind '" + parts[1] + "' in schema entry '" + entry + "'");
    }
    if (!seen.insert(spec.name).second)
      throw ConfigError("duplicate schema column '" + spec.name + "'");
    schema.columns.push_back(std::move(spec));
  }
  if (schema.columns.empty()) throw ConfigError("schema is empty");
  return schema;
}

std::string format_schema(const Schema& schema) {
  std::string out;
  for (const auto& c : schema.columns) {
    if (!out.empty()) out += ',';
    out += c.name;
    out += c.kind == ColumnKind::categorical ? ":cat:" + std::to_string(c.levels) : ":cont";
  }
  return out;
}

void Dataset::validate() const {
  const Eigen::Index rows = n();
  for (Eigen::Index r = 0; r < rows; ++r)
    if (!std::isfinite(y[r])) throw DataError("non-finite response at row " + std::to_string(r));
  if (family == Family::binomial)
    for (Eigen::Index r = 0; r < rows; ++r)
      if (y[r] != 0.0 && y[r] != 1.0)
        throw DataError("binomial response must be 0 or 1, got " + std::to_string(y[r]) +
                        " at row " + std::to_string(r));
  for (const auto& col : columns) {
    if (col.kind == ColumnKind::categorical) {
      if (col.levels < 2) throw DataError("column '" + col.name + "' has fewer than 2 levels");
      if (static_cast<Eigen::Index>(col.cat_values.size()) != rows)
        throw DataError("column '" + col.name + "' length mismatch");
      for (std::int32_t v : col.cat_values)
        if (v < 1 || v > col.levels)
          throw DataError("column '" + col.name + "' has level outside [1, " +
                          std::to_string(col.levels) + "]");
    } else {
      if (col.cont_values.size() != rows)
        throw DataError("column '" + col.name + "' length mismatch");
      for (Eigen::Index r = 0; r < rows; ++r)
        if (!std::isfinite(col.cont_values[r]))
          throw DataError("non-finite value in column '" + col.name + "'");
    }
  }
}

Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::string& response, Family family) {
  std::ifstream f(path);
  if (!f.good()) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(f, line)) throw DataError("'" + path + "' is empty");
  std::vector<std::string> header = split(line, ',');
  for (auto& h : header) h = trim(h);

  std::unordered_map<std::string, const ColumnSpec*> by_name;
  for (const auto& spec : schema.columns) by_name[spec.name] = &spec;
  if (!response.empty() && by_name.count(response))
    throw ConfigError("response column '" + response + "' must not appear in the schema");

  Dataset ds;
  ds.family = family;
  ds.response_name = response;

  int response_col = -1;
  std::vector<int> feature_col;        // file column -> dataset column, -1 for response
  std::unordered_set<std::string> used;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!response.empty() && header[c] == response) {
      if (response_col >= 0) throw DataError("duplicate response column '" + response + "'");
      response_col = static_cast<int>(c);
      feature_col.push_back(-1);
      continue;
    }
    auto it = by_name.find(header[c]);
    if (it == by_name.end())
      throw DataError("column '" + header[c] + "' in '" + path + "' is not in the schema");
    if (!used.insert(header[c]).second)
      throw DataError("duplicate column '" + header[c] + "' in '" + path + "'");
    Column col;
    col.name = it->second->name;
    col.kind = it->second->kind;
    col.levels = it->second->levels;
    feature_col.push_back(static_cast<int>(ds.columns.size()));
    ds.columns.push_back(std::move(col));
  }
  if (!response.empty() && response_col < 0)
    throw DataError("response column '" + response + "' not found in '" + path + "'");
  if (used.size() != by_name.size())
    for (const auto& spec : schema.columns)
      if (!used.count(spec.name))
        throw DataError("schema column '" + spec.name + "' not found in '" + path + "'");

  std::vector<double> yv;
  std::vector<std::vector<std::int32_t>> cat(ds.columns.size());
  std::vector<std::vector<double>> cont(ds.columns.size());

  std::size_t row = 0;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row + 1) + " of '" + path + "' has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    const std::string where = "at row " + std::to_string(row + 1) + " of '" + path + "'";
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == response_col) {
        yv.push_back(parse_double(cells[c], where));
        continue;
      }
      const int k = feature_col[c];
      const Column& col = ds.columns[static_cast<std::size_t>(k)];
      if (col.kind == ColumnKind::categorical)
        cat[static_cast<std::size_t>(k)].push_back(
            parse_level(cells[c], col.levels, "in column '" + col.name + "' " + where));
      else
        cont[static_cast<std::size_t>(k)].push_back(
            parse_double(cells[c], "in column '" + col.name + "' " + where));
    }
    ++row;
  }
  if (row == 0) throw DataError("'" + path + "' has no data rows");

  const Eigen::Index n = static_cast<Eigen::Index>(row);
  ds.y = response.empty() ? Eigen::VectorXd::Zero(n)
                          : Eigen::Map<Eigen::VectorXd>(yv.data(), n).eval();
  for (std::size_t k = 0; k < ds.columns.size(); ++k) {
    if (ds.columns[k].kind == ColumnKind::categorical)
      ds.columns[k].cat_values = std::move(cat[k]);
    else
      ds.columns[k].cont_values =
          Eigen::Map<Eigen::VectorXd>(cont[k].data(), n);
  }
  ds.validate();
  return ds;
}

std::pair<Dataset, Standardization> standardize(const Dataset& ds) {
  Dataset out = ds;
  Standardization st;
  const double n = static_cast<double>(ds.n());
  for (int k = 0; k < ds.p(); ++k) {
    const Column& col = ds.columns[static_cast<std::size_t>(k)];
    if (col.kind != ColumnKind::continuous) continue;
    const double center = col.cont_values.mean();
    Eigen::VectorXd v = col.cont_values.array() - center;
    const double scale = std::sqrt(v.squaredNorm() / n);
    if (!(scale > 0.0))
      throw DataError("continuous column '" + col.name + "' is constant; cannot standardize");
    out.columns[static_cast<std::size_t>(k)].cont_values = v / scale;
    st.entries.push_back({k, col.name, center, scale});
  }
  return {std::move(out), std::move(st)};
}

Dataset apply_standardization(const Dataset& ds, const Standardization& st) {
  Dataset out = ds;
  for (const auto& e : st.entries) {
    if (e.column < 0 || e.column >= ds.p())
      throw DataError("standardization entry for unknown column index " + std::to_string(e.column));
    Column& col = out.columns[static_cast<std::size_t>(e.column)];
    if (col.kind != ColumnKind::continuous || col.name != e.name)
      throw DataError("standardization entry does not match column '" + col.name + "'");
    if (!(e.scale > 0.0)) throw DataError("non-positive scale for column '" + col.name + "'");
    col.cont_values = (col.cont_values.array() - e.center) / e.scale;
  }
  return out;
}

Dataset unstandardize(const Dataset& ds, const Standardization& st) {
  Dataset out = ds;
  for (const auto& e : st.entries) {
    if (e.column < 0 || e.column >= ds.p())
      throw DataError("standardization entry for unknown column index " + std::to_string(e.column));
    Column& col = out.columns[static_cast<std::size_t>(e.column)];
    if (col.kind != ColumnKind::continuous || col.name != e.name)
      throw DataError("standardization entry does not match column '" + col.name + "'");
    col.cont_values = (col.cont_values.array() * e.scale) + e.center;
  }
  return out;
}

}  // namespace pairlasso
