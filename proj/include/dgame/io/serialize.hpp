#pragma once

// CSV and JSON encodings. All output is LF-terminated with a fixed column
// order and 17-significant-digit reals.
//
// Run rows (runs.csv):
//   schema_version,N,m,s,lambda,d,P_f,max_steps,fundamental,early_stop,burn_in,
//   trajectory_detail,temperature_formula,seed,temperature,label,stop_step,
//   final_price,mean_abs_o
// Sweep rows (sweep.csv): the config columns, then
//   R,master_seed,temperature,f_spec,f_fund,f_undet,f_abort,
//   f_spec_lo,f_spec_hi,f_fund_lo,f_fund_hi,f_undet_lo,f_undet_hi,
//   f_abort_lo,f_abort_hi,mean_abs_o,error
// A failed sweep cell leaves the numeric summary fields empty and fills error.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dgame/config.hpp"
#include "dgame/ensemble.hpp"
#include "dgame/io/format.hpp"
#include "dgame/phase.hpp"
#include "dgame/realization.hpp"

namespace dgame::io {

inline constexpr int kOutputSchemaVersion = 1;

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunRow {
  int schema_version = kOutputSchemaVersion;
  SimulationConfig config;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  PhaseLabel label = PhaseLabel::undetermined;
  long stop_step = 0;
  double final_price = 0.0;
  double mean_abs_o = 0.0;
};

inline RunRow make_run_row(const SimulationConfig& config, const RunResult& run) {
  return RunRow{kOutputSchemaVersion, config,          run.seed,        config.temperature().value,
                run.label,            run.stop_step,   run.final_price, run.mean_abs_o()};
}

namespace detail {

inline constexpr std::string_view kConfigColumns =
    "N,m,s,lambda,d,P_f,max_steps,fundamental,early_stop,burn_in,trajectory_detail,temperature_formula";
inline constexpr std::size_t kConfigColumnCount = 12;

inline std::string on_off(bool v) { return v ? "on" : "off"; }

inline void append_config(std::string& out, const SimulationConfig& c) {
  out += std::to_string(c.agents) + ',' + std::to_string(c.memory) + ',' + std::to_string(c.strategies) + ',';
  out += format_real(c.liquidity) + ',' + format_real(c.dividend) + ',' + format_real(c.fundamental_price) + ',';
  out += std::to_string(c.max_steps) + ',' + on_off(c.fundamental) + ',' + on_off(c.early_stop) + ',';
  out += std::to_string(c.burn_in) + ',' + std::string(to_string(c.detail)) + ',' +
         std::string(to_string(c.temperature_formula));
}

inline bool parse_on_off(std::string_view s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw FormatError("expected on/off, got '" + std::string(s) + "'");
}

inline SimulationConfig parse_config_fields(std::span<const std::string_view> f) {
  SimulationConfig c;
  c.agents = parse_int_field<int>(f[0]);
  c.memory = parse_int_field<int>(f[1]);
  c.strategies = parse_int_field<int>(f[2]);
  c.liquidity = parse_real_field(f[3]);
  c.dividend = parse_real_field(f[4]);
  c.fundamental_price = parse_real_field(f[5]);
  c.max_steps = parse_int_field<long>(f[6]);
  c.fundamental = parse_on_off(f[7]);
  c.early_stop = parse_on_off(f[8]);
  c.burn_in = parse_int_field<long>(f[9]);
  if (f[10] == "full") c.detail = TrajectoryDetail::full;
  else if (f[10] == "summary") c.detail = TrajectoryDetail::summary;
  else throw FormatError("bad trajectory_detail '" + std::string(f[10]) + "'");
  if (f[11] == "standard") c.temperature_formula = TemperatureFormula::standard;
  else if (f[11] == "technical") c.temperature_formula = TemperatureFormula::technical;
  else throw FormatError("bad temperature_formula '" + std::string(f[11]) + "'");
  return c;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

/// Commas and line breaks cannot appear inside unquoted CSV fields.
inline std::string csv_safe(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

inline std::string config_json(const SimulationConfig& c) {
  std::string out = "{";
  out += "\"N\":" + std::to_string(c.agents);
  out += ",\"m\":" + std::to_string(c.memory);
  out += ",\"s\":" + std::to_string(c.strategies);
  out += ",\"lambda\":" + json_real(c.liquidity);
  out += ",\"d\":" + json_real(c.dividend);
  out += ",\"P_f\":" + json_real(c.fundamental_price);
  out += ",\"max_steps\":" + std::to_string(c.max_steps);
  out += ",\"fundamental\":" + json_escape(on_off(c.fundamental));
  out += ",\"early_stop\":" + json_escape(on_off(c.early_stop));
  out += ",\"burn_in\":" + std::to_string(c.burn_in);
  out += ",\"trajectory_detail\":" + json_escape(to_string(c.detail));
  out += ",\"temperature_formula\":" + json_escape(to_string(c.temperature_formula));
  out += "}";
  return out;
}

inline double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

inline SimulationConfig config_from_json(const nlohmann::json& j) {
  SimulationConfig c;
  c.agents = j.at("N").get<int>();
  c.memory = j.at("m").get<int>();
  c.strategies = j.at("s").get<int>();
  c.liquidity = json_number(j.at("lambda"));
  c.dividend = json_number(j.at("d"));
  c.fundamental_price = json_number(j.at("P_f"));
  c.max_steps = j.at("max_steps").get<long>();
  c.fundamental = parse_on_off(j.at("fundamental").get<std::string>());
  c.early_stop = parse_on_off(j.at("early_stop").get<std::string>());
  c.burn_in = j.at("burn_in").get<long>();
  const auto detail = j.at("trajectory_detail").get<std::string>();
  c.detail = detail == "full" ? TrajectoryDetail::full : TrajectoryDetail::summary;
  const auto formula = j.at("temperature_formula").get<std::string>();
  c.temperature_formula = formula == "technical" ? TemperatureFormula::technical : TemperatureFormula::standard;
  return c;
}

}  // namespace detail

inline std::string runs_csv_header() {
  return "schema_version," + std::string(detail::kConfigColumns) +
         ",seed,temperature,label,stop_step,final_price,mean_abs_o\n";
}

inline std::string write_runs_csv(std::span<const RunRow> rows) {
  std::string out = runs_csv_header();
  for (const auto& r : rows) {
    out += std::to_string(r.schema_version) + ',';
    detail::append_config(out, r.config);
    out += ',' + std::to_string(r.seed) + ',' + format_real(r.temperature) + ',' + std::string(to_string(r.label)) +
           ',' + std::to_string(r.stop_step) + ',' + format_real(r.final_price) + ',' + format_real(r.mean_abs_o) +
           '\n';
  }
  return out;
}

inline std::vector<RunRow> read_runs_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || std::string(lines[0]) + '\n' != runs_csv_header()) {
    throw FormatError("runs CSV: unexpected header");
  }
  std::vector<RunRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 1 + detail::kConfigColumnCount + 6) {
      throw FormatError("runs CSV line " + std::to_string(i + 1) + ": wrong field count");
    }
    try {
      RunRow r;
      r.schema_version = parse_int_field<int>(f[0]);
      if (r.schema_version != kOutputSchemaVersion) throw FormatError("unsupported schema_version");
      r.config = detail::parse_config_fields(std::span(f).subspan(1, detail::kConfigColumnCount));
      const std::size_t k = 1 + detail::kConfigColumnCount;
      r.seed = parse_int_field<std::uint64_t>(f[k]);
      r.temperature = parse_real_field(f[k + 1]);
      r.label = parse_phase_label(f[k + 2]);
      r.stop_step = parse_int_field<long>(f[k + 3]);
      r.final_price = parse_real_field(f[k + 4]);
      r.mean_abs_o = parse_real_field(f[k + 5]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw FormatError("runs CSV line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return rows;
}

inline std::string write_runs_json(std::span<const RunRow> rows) {
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += i == 0 ? "\n  " : ",\n  ";
    out += "{\"schema_version\":" + std::to_string(r.schema_version);
    out += ",\"config\":" + detail::config_json(r.config);
    out += ",\"seed\":" + std::to_string(r.seed);
    out += ",\"temperature\":" + json_real(r.temperature);
    out += ",\"label\":" + json_escape(to_string(r.label));
    out += ",\"stop_step\":" + std::to_string(r.stop_step);
    out += ",\"final_price\":" + json_real(r.final_price);
    out += ",\"mean_abs_o\":" + json_real(r.mean_abs_o) + "}";
  }
  out += rows.empty() ? "]\n" : "\n]\n";
  return out;
}

inline std::vector<RunRow> read_runs_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<RunRow> rows;
  for (const auto& item : j) {
    RunRow r;
    r.schema_version = item.at("schema_version").get<int>();
    r.config = detail::config_from_json(item.at("config"));
    r.seed = item.at("seed").get<std::uint64_t>();
    r.temperature = detail::json_number(item.at("temperature"));
    r.label = parse_phase_label(item.at("label").get<std::string>());
    r.stop_step = item.at("stop_step").get<long>();
    r.final_price = detail::json_number(item.at("final_price"));
    r.mean_abs_o = detail::json_number(item.at("mean_abs_o"));
    rows.push_back(r);
  }
  return rows;
}

namespace detail {

inline constexpr std::array<std::string_view, 4> kFractionKeys = {"speculative", "fundamental", "undetermined",
                                                                  "aborted"};

inline std::string summary_body(const EnsembleSummary& s) {
  std::string out = "{\"schema_version\":" + std::to_string(kOutputSchemaVersion);
  out += ",\"config\":" + config_json(s.config);
  out += ",\"R\":" + std::to_string(s.realizations);
  out += ",\"master_seed\":" + std::to_string(s.master_seed);
  out += ",\"temperature\":" + json_real(s.temperature.value);
  out += ",\"counts\":{";
  for (std::size_t q = 0; q < 4; ++q) {
    out += (q ? ",\"" : "\"") + std::string(kFractionKeys[q]) + "\":" + std::to_string(s.counts[q]);
  }
  out += "},\"fractions\":{";
  for (std::size_t q = 0; q < 4; ++q) {
    out += (q ? ",\"" : "\"") + std::string(kFractionKeys[q]) + "\":" + json_real(s.fractions[q]);
  }
  out += "},\"bootstrap_ci\":{";
  for (std::size_t q = 0; q < 4; ++q) {
    out += (q ? ",\"" : "\"") + std::string(kFractionKeys[q]) + "\":[" + json_real(s.bootstrap_ci[q].lo) + "," +
           json_real(s.bootstrap_ci[q].hi) + "]";
  }
  out += "},\"mean_abs_o\":" + json_real(s.mean_abs_o) + "}";
  return out;
}

inline EnsembleSummary summary_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kOutputSchemaVersion) throw FormatError("unsupported schema_version");
  EnsembleSummary s;
  s.config = config_from_json(j.at("config"));
  s.realizations = j.at("R").get<long>();
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  s.temperature = Temperature{json_number(j.at("temperature"))};
  for (std::size_t q = 0; q < 4; ++q) {
    const std::string key(kFractionKeys[q]);
    s.counts[q] = j.at("counts").at(key).get<long>();
    s.fractions[q] = json_number(j.at("fractions").at(key));
    const auto& ci = j.at("bootstrap_ci").at(key);
    s.bootstrap_ci[q] = Interval{json_number(ci.at(0)), json_number(ci.at(1))};
  }
  s.mean_abs_o = json_number(j.at("mean_abs_o"));
  return s;
}

}  // namespace detail

inline std::string write_summary_json(const EnsembleSummary& s) { return detail::summary_body(s) + "\n"; }

inline EnsembleSummary read_summary_json(std::string_view text) {
  return detail::summary_from_json(nlohmann::json::parse(text));
}

inline std::string sweep_csv_header() {
  return "schema_version," + std::string(detail::kConfigColumns) +
         ",R,master_seed,temperature,f_spec,f_fund,f_undet,f_abort,f_spec_lo,f_spec_hi,f_fund_lo,f_fund_hi,"
         "f_undet_lo,f_undet_hi,f_abort_lo,f_abort_hi,mean_abs_o,error\n";
}

/// `realizations` and `master_seed` are echoed for failed cells, which carry
/// no summary of their own.
inline std::string write_sweep_csv(std::span<const SweepCell> cells, long realizations, std::uint64_t master_seed) {
  std::string out = sweep_csv_header();
  for (const auto& cell : cells) {
    out += std::to_string(kOutputSchemaVersion) + ',';
    detail::append_config(out, cell.config);
    out += ',' + std::to_string(realizations) + ',' + std::to_string(master_seed) + ',';
    std::string temp;
    try {
      temp = format_real(cell.config.temperature().value);
    } catch (const std::exception&) {
      temp = "nan";
    }
    out += temp;
    if (cell.summary) {
      const auto& s = *cell.summary;
      for (std::size_t q = 0; q < 4; ++q) out += ',' + format_real(s.fractions[q]);
      for (std::size_t q = 0; q < 4; ++q) {
        out += ',' + format_real(s.bootstrap_ci[q].lo) + ',' + format_real(s.bootstrap_ci[q].hi);
      }
      out += ',' + format_real(s.mean_abs_o) + ",\n";
    } else {
      out += std::string(13, ',') + ',' + detail::csv_safe(cell.error.empty() ? "failed" : cell.error) + '\n';
    }
  }
  return out;
}

/// Rebuilds sweep cells from sweep.csv. Label counts are recovered from the
/// fractions and R.
inline std::vector<SweepCell> read_sweep_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || std::string(lines[0]) + '\n' != sweep_csv_header()) {
    throw FormatError("sweep CSV: unexpected header");
  }
  std::vector<SweepCell> cells;
  const std::size_t k = 1 + detail::kConfigColumnCount;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != k + 17) throw FormatError("sweep CSV line " + std::to_string(i + 1) + ": wrong field count");
    try {
      if (parse_int_field<int>(f[0]) != kOutputSchemaVersion) throw FormatError("unsupported schema_version");
      SweepCell cell;
      cell.config = detail::parse_config_fields(std::span(f).subspan(1, detail::kConfigColumnCount));
      const long r = parse_int_field<long>(f[k]);
      const auto seed = parse_int_field<std::uint64_t>(f[k + 1]);
      cell.error = std::string(f[k + 16]);
      if (cell.error.empty()) {
        EnsembleSummary s;
        s.config = cell.config;
        s.realizations = r;
        s.master_seed = seed;
        s.temperature = Temperature{parse_real_field(f[k + 2])};
        for (std::size_t q = 0; q < 4; ++q) {
          s.fractions[q] = parse_real_field(f[k + 3 + q]);
          s.counts[q] = std::lround(s.fractions[q] * static_cast<double>(r));
          s.bootstrap_ci[q] = Interval{parse_real_field(f[k + 7 + 2 * q]), parse_real_field(f[k + 8 + 2 * q])};
        }
        s.mean_abs_o = parse_real_field(f[k + 15]);
        cell.summary = s;
      }
      cells.push_back(std::move(cell));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError("sweep CSV line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return cells;
}

inline std::string write_sweep_json(std::span<const SweepCell> cells) {
  std::string out = "[";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out += i == 0 ? "\n  " : ",\n  ";
    if (cells[i].summary) {
      out += detail::summary_body(*cells[i].summary);
    } else {
      out += "{\"schema_version\":" + std::to_string(kOutputSchemaVersion) +
             ",\"config\":" + detail::config_json(cells[i].config) + ",\"error\":" + json_escape(cells[i].error) + "}";
    }
  }
  out += cells.empty() ? "]\n" : "\n]\n";
  return out;
}

/// Per-step records of a full-detail run: t,imbalance,return,direction_bit,
/// n_fundamental_plays,price_after.
inline std::string write_trajectory_csv(const RunResult& run) {
  std::string out = "t,imbalance,return,direction_bit,n_fundamental_plays,price_after\n";
  for (const auto& r : run.trajectory) {
    out += std::to_string(r.t) + ',' + std::to_string(r.imbalance) + ',' + format_real(r.return_) + ',' +
           std::to_string(static_cast<int>(r.direction_bit)) + ',' + std::to_string(r.n_fundamental_plays) + ',' +
           format_real(r.price_after) + '\n';
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dgame::io
