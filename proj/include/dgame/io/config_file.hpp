#pragma once

// Flat, versioned key-value configuration:
//
//   # comment
//   schema_version: 1
//   N: 11, 101          # comma-separated lists are allowed for N, m, s, lambda, d
//   m: 3
//   s: 2
//   lambda: 1
//   d: 100
//   P_f: 100
//
// Optional keys: max_steps, burn_in (defaults 200*2^m and 2^m), R (200),
// fundamental, early_stop (on|off), trajectory_detail (summary|full),
// temperature_formula (standard|technical), heatmap_x, heatmap_y
// (N|m|s|lambda|d), gl_bins (20), gl_sampling (per_step|per_run).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dgame/config.hpp"
#include "dgame/ensemble.hpp"

namespace dgame::io {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
  ConfigError(int line, const std::string& message, const std::string& source = {})
      : std::runtime_error((source.empty() ? "" : source + ": ") +
                           (line > 0 ? "line " + std::to_string(line) + ": " : "") + message),
        line_(line),
        message_(message) {}
  int line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

private:
  int line_;
  std::string message_;
};

enum class SweepParam { agents, memory, strategies, liquidity, dividend };

inline std::string_view param_name(SweepParam p) noexcept {
  switch (p) {
    case SweepParam::agents: return "N";
    case SweepParam::memory: return "m";
    case SweepParam::strategies: return "s";
    case SweepParam::liquidity: return "lambda";
    case SweepParam::dividend: return "d";
  }
  return "N";
}

inline std::optional<SweepParam> parse_param(std::string_view name) noexcept {
  if (name == "N") return SweepParam::agents;
  if (name == "m") return SweepParam::memory;
  if (name == "s") return SweepParam::strategies;
  if (name == "lambda") return SweepParam::liquidity;
  if (name == "d") return SweepParam::dividend;
  return std::nullopt;
}

inline double param_value(const SimulationConfig& c, SweepParam p) noexcept {
  switch (p) {
    case SweepParam::agents: return c.agents;
    case SweepParam::memory: return c.memory;
    case SweepParam::strategies: return c.strategies;
    case SweepParam::liquidity: return c.liquidity;
    case SweepParam::dividend: return c.dividend;
  }
  return 0.0;
}

enum class OrderSampling { per_step, per_run };

struct HeatmapSpec {
  SweepParam x = SweepParam::dividend;
  SweepParam y = SweepParam::liquidity;
};

struct ConfigFile {
  SweepGrid grid;
  HeatmapSpec heatmap;
  int gl_bins = 20;
  OrderSampling gl_sampling = OrderSampling::per_step;
  std::map<std::string, int> lines;  // key -> line number, for diagnostics

  /// The single parameter cell; every list must hold exactly one value.
  SimulationConfig single() const {
    auto require_one = [&](const char* key, std::size_t n) {
      if (n != 1) {
        throw ConfigError(line_of(key), std::string("key '") + key + "' has " + std::to_string(n) +
                                            " values; lists are only allowed for sweeps");
      }
    };
    require_one("N", grid.agents.size());
    require_one("m", grid.memory.size());
    require_one("s", grid.strategies.size());
    require_one("lambda", grid.liquidity.size());
    require_one("d", grid.dividend.size());
    return grid.cells().front();
  }

  long realizations() const noexcept { return grid.realizations; }

  int line_of(const std::string& key) const {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline long parse_integer(std::string_view text, int line, std::string_view key) {
  long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(line, "key '" + std::string(key) + "': expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline double parse_real(std::string_view text, int line, std::string_view key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(v)) {
    throw ConfigError(line, "key '" + std::string(key) + "': expected a finite number, got '" + std::string(text) +
                                "'");
  }
  return v;
}

inline bool parse_switch(std::string_view text, int line, std::string_view key) {
  if (text == "on" || text == "true") return true;
  if (text == "off" || text == "false") return false;
  throw ConfigError(line, "key '" + std::string(key) + "': expected on or off, got '" + std::string(text) + "'");
}

}  // namespace detail

inline ConfigFile parse_config_text(std::string_view text) {
  using namespace detail;
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ConfigError(line_no, "expected 'key: value'");
    const std::string key(trim(line.substr(0, colon)));
    const std::string value(trim(line.substr(colon + 1)));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (value.empty()) throw ConfigError(line_no, "key '" + key + "' has no value");
    if (entries.contains(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    entries.emplace(key, Entry{value, line_no});
  }

  static const char* const known[] = {"schema_version", "N", "m", "s", "lambda", "d", "P_f", "max_steps",
                                      "burn_in", "R", "fundamental", "early_stop", "trajectory_detail",
                                      "temperature_formula", "heatmap_x", "heatmap_y", "gl_bins", "gl_sampling"};
  for (const auto& [key, e] : entries) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(e.line, "unknown key '" + key + "'");
  }

  ConfigFile cfg;
  for (const auto& [key, e] : entries) cfg.lines[key] = e.line;

  auto find = [&](const char* key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto required = [&](const char* key) -> const Entry& {
    const Entry* e = find(key);
    if (!e) throw ConfigError(0, std::string("missing required key '") + key + "'");
    return *e;
  };
  auto scalar = [&](const Entry& e, const char* key) -> std::string_view {
    if (e.value.find(',') != std::string::npos) {
      throw ConfigError(e.line, std::string("key '") + key + "' takes a single value");
    }
    return e.value;
  };

  if (const Entry* e = find("schema_version")) {
    const long v = parse_integer(scalar(*e, "schema_version"), e->line, "schema_version");
    if (v != kConfigSchemaVersion) {
      throw ConfigError(e->line, "unsupported schema_version " + std::to_string(v) + " (expected " +
                                     std::to_string(kConfigSchemaVersion) + ")");
    }
  }

  auto int_list = [&](const char* key, long lo, long hi, const char* what) {
    const Entry& e = required(key);
    std::vector<int> out;
    for (auto item : split_list(e.value)) {
      const long v = parse_integer(item, e.line, key);
      if (v < lo || v > hi) throw ConfigError(e.line, std::string("key '") + key + "' out of range: " + what);
      out.push_back(static_cast<int>(v));
    }
    return out;
  };
  auto positive_list = [&](const char* key) {
    const Entry& e = required(key);
    std::vector<double> out;
    for (auto item : split_list(e.value)) {
      const double v = parse_real(item, e.line, key);
      if (!(v > 0.0)) throw ConfigError(e.line, std::string("key '") + key + "' out of range: must be > 0");
      out.push_back(v);
    }
    return out;
  };

  cfg.grid.agents = int_list("N", 1, 1'000'000, "must be >= 1");
  cfg.grid.memory = int_list("m", 1, kMaxMemory, "must be in [1, 20]");
  cfg.grid.strategies = int_list("s", 1, 1'000'000, "must be >= 1");
  cfg.grid.liquidity = positive_list("lambda");
  cfg.grid.dividend = positive_list("d");
  {
    const Entry& e = required("P_f");
    const double v = parse_real(scalar(e, "P_f"), e.line, "P_f");
    if (!(v > 0.0)) throw ConfigError(e.line, "key 'P_f' out of range: must be > 0");
    cfg.grid.base.fundamental_price = v;
  }

  auto nonneg = [&](const char* key) -> std::optional<long> {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    const long v = parse_integer(scalar(*e, key), e->line, key);
    if (v < 0) throw ConfigError(e->line, std::string("key '") + key + "' out of range: must be >= 0");
    return v;
  };
  cfg.grid.max_steps = nonneg("max_steps");
  cfg.grid.burn_in = nonneg("burn_in");
  if (const Entry* e = find("R")) {
    const long v = parse_integer(scalar(*e, "R"), e->line, "R");
    if (v < 1) throw ConfigError(e->line, "key 'R' out of range: must be >= 1");
    cfg.grid.realizations = v;
  }
  if (const Entry* e = find("fundamental")) cfg.grid.base.fundamental = parse_switch(scalar(*e, "fundamental"), e->line, "fundamental");
  if (const Entry* e = find("early_stop")) cfg.grid.base.early_stop = parse_switch(scalar(*e, "early_stop"), e->line, "early_stop");
  if (const Entry* e = find("trajectory_detail")) {
    const auto v = scalar(*e, "trajectory_detail");
    if (v == "full") cfg.grid.base.detail = TrajectoryDetail::full;
    else if (v == "summary") cfg.grid.base.detail = TrajectoryDetail::summary;
    else throw ConfigError(e->line, "key 'trajectory_detail': expected full or summary");
  }
  if (const Entry* e = find("temperature_formula")) {
    const auto v = scalar(*e, "temperature_formula");
    if (v == "standard") cfg.grid.base.temperature_formula = TemperatureFormula::standard;
    else if (v == "technical") cfg.grid.base.temperature_formula = TemperatureFormula::technical;
    else throw ConfigError(e->line, "key 'temperature_formula': expected standard or technical");
  }
  auto axis = [&](const char* key, SweepParam fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    const auto p = parse_param(scalar(*e, key));
    if (!p) throw ConfigError(e->line, std::string("key '") + key + "': expected one of N, m, s, lambda, d");
    return *p;
  };
  cfg.heatmap.x = axis("heatmap_x", SweepParam::dividend);
  cfg.heatmap.y = axis("heatmap_y", SweepParam::liquidity);
  if (cfg.heatmap.x == cfg.heatmap.y) {
    throw ConfigError(std::max(cfg.line_of("heatmap_x"), cfg.line_of("heatmap_y")), "heatmap axes must differ");
  }
  if (const Entry* e = find("gl_bins")) {
    const long v = parse_integer(scalar(*e, "gl_bins"), e->line, "gl_bins");
    if (v < 8 || v > 100'000) throw ConfigError(e->line, "key 'gl_bins' out of range: must be >= 8");
    cfg.gl_bins = static_cast<int>(v);
  }
  if (const Entry* e = find("gl_sampling")) {
    const auto v = scalar(*e, "gl_sampling");
    if (v == "per_step") cfg.gl_sampling = OrderSampling::per_step;
    else if (v == "per_run") cfg.gl_sampling = OrderSampling::per_run;
    else throw ConfigError(e->line, "key 'gl_sampling': expected per_step or per_run");
  }
  return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.line(), e.message(), path);
  }
}

}  // namespace dgame::io
