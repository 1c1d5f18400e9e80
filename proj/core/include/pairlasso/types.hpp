#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pairlasso {

enum class Family { gaussian, binomial };

// Stable global identifier of a coefficient group (main effect or pair).
// Mains occupy [0, p); pairs follow in lexicographic (i, j) order, i < j.
using GroupId = std::int64_t;

// Bad or inconsistent input data (files, unseen levels, NaN cells, ...).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (flags, schema text, infeasible designs, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline const char* family_name(Family f) {
  return f == Family::gaussian ? "gaussian" : "binomial";
}

inline Family family_from_name(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "binomial") return Family::binomial;
  throw ConfigError("unknown family '" + s + "' (expected gaussian or binomial)");
}

}  // namespace pairlasso
