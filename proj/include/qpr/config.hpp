#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qpr/grid_solver.hpp"
#include "qpr/sweep.hpp"

namespace qpr::cfg {

/// One parsed value: number, string, boolean, or a flat array of these.
struct Value {
  enum class Kind { Number, String, Bool, Array };
  Kind kind = Kind::Number;
  double number = 0;
  bool is_integer = false;
  std::string str;
  bool boolean = false;
  std::vector<Value> array;
  int line = 0;

  double as_number() const;
  long as_integer() const;
  const std::string& as_string() const;
  bool as_bool() const;
  std::vector<double> as_number_array() const;
};

using Table = std::map<std::string, Value>;

/// Sectioned key = value file (a small TOML subset: [section] headers,
/// numbers, quoted strings, booleans, single-line arrays, # comments).
struct ParsedConfig {
  std::map<std::string, Table> sections;
  std::string source;

  bool has(const std::string& section, const std::string& key) const;
  const Value& at(const std::string& section, const std::string& key) const;
  const Value* find(const std::string& section, const std::string& key) const;
};

ParsedConfig parse_config(std::string_view text);
ParsedConfig load_config(const std::string& path);

/// Builds a validated SweepConfig. Sections: [drive], [integrator],
/// [sweep], [spectrum], [fit], [output], [matrices].
SweepConfig sweep_config(const ParsedConfig& parsed);

/// Grid-solver settings from [grid], with defaults.
GridSpecd grid_spec(const ParsedConfig& parsed);

}  // namespace qpr::cfg
