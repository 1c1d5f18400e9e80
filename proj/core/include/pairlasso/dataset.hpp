#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "pairlasso/types.hpp"

namespace pairlasso {

enum class ColumnKind { categorical, continuous };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  int levels = 0;  // categorical only, >= 2
};

// Sidecar description of the feature columns. Entries are matched to the CSV
// header by name; file column order is preserved as the variable order.
struct Schema {
  std::vector<ColumnSpec> columns;
};

// Parses schema text: comma or newline separated entries of the form
// "name:cat:L" or "name:cont". If `text` names a readable file, its content
// is parsed instead.
Schema parse_schema(const std::string& text);
std::string format_schema(const Schema& schema);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  int levels = 0;                         // categorical: declared level count
  std::vector<std::int32_t> cat_values;   // categorical: 1-based codes, size n
  Eigen::VectorXd cont_values;            // continuous: size n
};

struct Dataset {
  Eigen::VectorXd y;
  std::vector<Column> columns;
  Family family = Family::gaussian;
  std::string response_name;

  Eigen::Index n() const { return y.size(); }
  int p() const { return static_cast<int>(columns.size()); }

  // Checks the representation invariants; throws DataError on violation.
  void validate() const;
};

// Per continuous column centering/scaling applied before fitting.
struct Standardization {
  struct Entry {
    int column = -1;  // index into Dataset::columns
    std::string name;
    double center = 0.0;
    double scale = 1.0;
  };
  std::vector<Entry> entries;
};

// Reads a CSV with a header row. Every non-response header column must appear
// in the schema and vice versa. Categorical cells must be integers in [1, L];
// all cells must be finite; empty cells are rejected. With `response` empty a
// feature-only file is read and y is set to zeros (prediction input).
Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::string& response, Family family = Family::gaussian);

// Centers and scales each continuous column to mean 0, unit norm^2/n = 1.
// Categorical columns and y pass through. A constant continuous column is an
// error. Idempotent up to rounding.
std::pair<Dataset, Standardization> standardize(const Dataset& ds);

// Applies a previously learned standardization to new data (prediction path).
Dataset apply_standardization(const Dataset& ds, const Standardization& st);

// Inverse transform; unstandardize(apply_standardization(ds, st), st) == ds
// up to rounding.
Dataset unstandardize(const Dataset& ds, const Standardization& st);

}  // namespace pairlasso
