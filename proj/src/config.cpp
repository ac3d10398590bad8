#include "qpr/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qpr/errors.hpp"

namespace qpr::cfg {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace<char>(s.front(), std::locale::classic()))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace<char>(s.back(), std::locale::classic()))
    s.remove_suffix(1);
  return s;
}

// removes a trailing comment, respecting quoted strings
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Value parse_scalar(std::string_view tok, int line) {
  Value v;
  v.line = line;
  if (tok.empty()) fail(line, "empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      fail(line, "unterminated string");
    v.kind = Value::Kind::String;
    v.str = std::string(tok.substr(1, tok.size() - 2));
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::Bool;
    v.boolean = tok == "true";
    return v;
  }
  const std::string buf(tok);
  char* end = nullptr;
  const double num = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size())
    fail(line, "cannot parse value '" + buf + "'");
  v.kind = Value::Kind::Number;
  v.number = num;
  v.is_integer = buf.find_first_of(".eE") == std::string::npos;
  return v;
}

Value parse_value(std::string_view tok, int line) {
  tok = strip(tok);
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']') fail(line, "unterminated array (arrays are single-line)");
    Value v;
    v.kind = Value::Kind::Array;
    v.line = line;
    std::string_view body = tok.substr(1, tok.size() - 2);
    while (true) {
      body = strip(body);
      if (body.empty()) break;
      size_t comma = std::string_view::npos;
      bool quoted = false;
      for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '"') quoted = !quoted;
        if (body[i] == ',' && !quoted) {
          comma = i;
          break;
        }
      }
      const std::string_view item =
          comma == std::string_view::npos ? body : body.substr(0, comma);
      v.array.push_back(parse_scalar(strip(item), line));
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return v;
  }
  return parse_scalar(tok, line);
}

}  // namespace

double Value::as_number() const {
  if (kind != Kind::Number) fail(line, "expected a number");
  return number;
}

long Value::as_integer() const {
  if (kind != Kind::Number || !is_integer ||
      number != std::nearbyint(number))
    fail(line, "expected an integer");
  return long(number);
}

const std::string& Value::as_string() const {
  if (kind != Kind::String) fail(line, "expected a string");
  return str;
}

bool Value::as_bool() const {
  if (kind != Kind::Bool) fail(line, "expected true or false");
  return boolean;
}

std::vector<double> Value::as_number_array() const {
  if (kind != Kind::Array) fail(line, "expected an array");
  std::vector<double> out;
  out.reserve(array.size());
  for (const auto& v : array) out.push_back(v.as_number());
  return out;
}

bool ParsedConfig::has(const std::string& section,
                       const std::string& key) const {
  return find(section, key) != nullptr;
}

const Value* ParsedConfig::find(const std::string& section,
                                const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

const Value& ParsedConfig::at(const std::string& section,
                              const std::string& key) const {
  const Value* v = find(section, key);
  if (!v)
    throw ConfigError("config: missing key '" + key + "' in section [" +
                      section + "]");
  return *v;
}

ParsedConfig parse_config(std::string_view text) {
  ParsedConfig out;
  out.source = std::string(text);
  std::string section;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(strip(line.substr(1, line.size() - 2)));
      if (section.empty()) fail(line_no, "empty section name");
      out.sections[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(line_no, "expected key = value");
    const std::string key(strip(line.substr(0, eq)));
    if (key.empty()) fail(line_no, "empty key");
    if (section.empty()) fail(line_no, "key outside any [section]");
    if (out.sections[section].count(key))
      fail(line_no, "duplicate key '" + key + "'");
    out.sections[section].emplace(key,
                                  parse_value(line.substr(eq + 1), line_no));
  }
  return out;
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

IntegratorConfig<double> integrator_from(const ParsedConfig& p) {
  IntegratorConfig<double> cfg;
  if (const Value* m = p.find("integrator", "method")) {
    const std::string& name = m->as_string();
    if (name == "fixed-rk4")
      cfg.method = IntegratorMethod::FixedRk4;
    else if (name == "adaptive-rk45")
      cfg.method = IntegratorMethod::AdaptiveRk45;
    else
      fail(m->line, "unknown integrator method '" + name + "'");
  }
  if (const Value* v = p.find("integrator", "steps_per_cycle"))
    cfg.steps_per_cycle = int(v->as_integer());
  if (const Value* v = p.find("integrator", "rel_tol"))
    cfg.rel_tol = v->as_number();
  if (const Value* v = p.find("integrator", "abs_tol"))
    cfg.abs_tol = v->as_number();
  cfg.validate();
  return cfg;
}

CouplingMatricesd matrices_from(const ParsedConfig& p) {
  const long n = p.at("matrices", "n").as_integer();
  if (n < 1) throw ConfigError("matrices: n must be >= 1");
  auto read = [&](const char* key) {
    const std::vector<double> flat = p.at("matrices", key).as_number_array();
    if (long(flat.size()) != n * n)
      throw ConfigError(std::string("matrices: ") + key + " must hold n*n = " +
                        std::to_string(n * n) + " row-major entries");
    Eigen::MatrixXd m(n, n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) m(i, j) = flat[size_t(i * n + j)];
    return m;
  };
  CouplingMatricesd cm{read("k0"), read("k1")};
  cm.validate();
  return cm;
}

}  // namespace

SweepConfig sweep_config(const ParsedConfig& p) {
  SweepConfig cfg;
  cfg.source = p.source;

  cfg.base.beta0 = p.has("drive", "beta0") ? p.at("drive", "beta0").as_number() : 0.0;
  cfg.base.beta1 = p.has("drive", "beta1") ? p.at("drive", "beta1").as_number() : 0.0;
  cfg.base.detuning =
      p.has("drive", "detuning") ? p.at("drive", "detuning").as_number() : 0.0;
  cfg.base.cycles =
      p.has("drive", "cycles") ? int(p.at("drive", "cycles").as_integer()) : 1;

  cfg.integrator = integrator_from(p);

  if (p.sections.count("sweep")) {
    if (const Value* ax = p.find("sweep", "axis")) {
      const std::string& name = ax->as_string();
      if (name == "detuning")
        cfg.axis = SweepAxis::Detuning;
      else if (name == "cycles")
        cfg.axis = SweepAxis::Cycles;
      else
        fail(ax->line, "unknown sweep axis '" + name + "'");
    }
    if (const Value* vals = p.find("sweep", "values")) {
      cfg.values = vals->as_number_array();
    } else {
      const double lo = p.at("sweep", "min").as_number();
      const double hi = p.at("sweep", "max").as_number();
      const long count = p.has("sweep", "count")
                             ? p.at("sweep", "count").as_integer()
                             : 201;
      cfg.values = SweepConfig::linspace(lo, hi, int(count));
    }
  } else {
    // a single-point "sweep" at the base drive
    cfg.values = {cfg.axis == SweepAxis::Detuning ? cfg.base.detuning
                                                  : double(cfg.base.cycles)};
  }

  if (p.sections.count("spectrum")) {
    if (const Value* v = p.find("spectrum", "adaptive"))
      cfg.truncation.adaptive = v->as_bool();
    if (const Value* v = p.find("spectrum", "n_max"))
      cfg.truncation.n_max = int(v->as_integer());
    if (const Value* v = p.find("spectrum", "tail_tol"))
      cfg.truncation.tail_tol = v->as_number();
    if (const Value* v = p.find("spectrum", "cap"))
      cfg.truncation.cap = int(v->as_integer());
  }

  if (p.sections.count("fit")) {
    if (const Value* v = p.find("fit", "n_lo")) cfg.fit_range.n_lo = int(v->as_integer());
    if (const Value* v = p.find("fit", "n_hi")) cfg.fit_range.n_hi = int(v->as_integer());
    if (const Value* v = p.find("fit", "floor")) cfg.fit_range.floor = v->as_number();
  }

  if (const Value* tr = p.find("output", "track")) {
    const std::vector<double> flat = tr->as_number_array();
    if (flat.size() % 2 != 0)
      fail(tr->line, "track must hold flat (n_plus, n_minus) pairs");
    cfg.tracked.clear();
    for (size_t i = 0; i < flat.size(); i += 2)
      cfg.tracked.push_back({int(flat[i]), int(flat[i + 1])});
  }
  if (const Value* v = p.find("output", "fits")) cfg.with_fits = v->as_bool();

  if (p.sections.count("matrices")) {
    cfg.matrices = matrices_from(p);
    if (const Value* v = p.find("matrices", "tol"))
      cfg.reduce_tol = v->as_number();
  }

  cfg.validate();
  return cfg;
}

GridSpecd grid_spec(const ParsedConfig& p) {
  GridSpecd g;
  if (const Value* v = p.find("grid", "half_width")) g.half_width = v->as_number();
  if (const Value* v = p.find("grid", "points")) g.points = int(v->as_integer());
  if (const Value* v = p.find("grid", "dt")) g.dt = v->as_number();
  return g;
}

}  // namespace qpr::cfg
