#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "dgame/engine.hpp"
#include "dgame/phase.hpp"
#include "dgame/rng.hpp"

namespace dgame {

enum class TrajectoryDetail { summary, full };

inline std::string_view to_string(TrajectoryDetail d) noexcept {
  return d == TrajectoryDetail::full ? "full" : "summary";
}

inline std::string_view to_string(TemperatureFormula f) noexcept {
  return f == TemperatureFormula::standard ? "standard" : "technical";
}

/// 200 * 2^m, the per-run step cap used by default.
inline long default_max_steps(int m) { return 200L << m; }
/// 2^m steps before the band test starts.
inline long default_burn_in(int m) { return 1L << m; }

struct SimulationConfig {
  int agents = 0;                // N
  int memory = 0;                // m
  int strategies = 0;            // s
  double liquidity = 1.0;        // lambda, shares per unit return
  double dividend = 1.0;         // d, price units
  double fundamental_price = 1;  // P_f, price units
  long max_steps = 0;
  bool fundamental = true;
  bool early_stop = true;
  long burn_in = 0;
  TrajectoryDetail detail = TrajectoryDetail::summary;
  TemperatureFormula temperature_formula = TemperatureFormula::standard;

  /// Config with the step cap and burn-in at their m-dependent defaults.
  static SimulationConfig make(int n, int m, int s, double lambda, double d, double pf) {
    SimulationConfig c;
    c.agents = n;
    c.memory = m;
    c.strategies = s;
    c.liquidity = lambda;
    c.dividend = d;
    c.fundamental_price = pf;
    c.max_steps = (m >= 1 && m <= kMaxMemory) ? default_max_steps(m) : 0;
    c.burn_in = (m >= 1 && m <= kMaxMemory) ? default_burn_in(m) : 0;
    return c;
  }

  MarketParams market_params() const {
    return MarketParams{agents, memory, strategies, liquidity, dividend, fundamental_price, fundamental};
  }

  void validate() const {
    market_params().validate();
    if (max_steps < 0) throw ParameterError("max_steps must be >= 0");
    if (burn_in < 0) throw ParameterError("burn_in must be >= 0");
  }

  Temperature temperature() const {
    return dgame::temperature(memory, agents, strategies, temperature_formula);
  }

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

/// Identifies a parameter cell for seed derivation: (N, m, s, lambda, d, P_f).
inline std::uint64_t cell_key(const SimulationConfig& c) {
  std::uint64_t h = mix64(0x24'67'61'6d'65ULL);
  h = hash_combine(h, static_cast<std::uint64_t>(c.agents));
  h = hash_combine(h, static_cast<std::uint64_t>(c.memory));
  h = hash_combine(h, static_cast<std::uint64_t>(c.strategies));
  h = hash_double(h, c.liquidity);
  h = hash_double(h, c.dividend);
  h = hash_double(h, c.fundamental_price);
  return h;
}

}  // namespace dgame
