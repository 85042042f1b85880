#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dgame/config.hpp"
#include "dgame/engine.hpp"
#include "dgame/phase.hpp"
#include "dgame/rng.hpp"

namespace dgame {

struct RunResult {
  std::uint64_t seed = 0;
  PhaseLabel label = PhaseLabel::undetermined;
  long stop_step = 0;  // number of completed steps
  double initial_price = 0.0;
  double final_price = 0.0;
  int trend_direction = 0;  // +1 / -1 for speculative runs
  double abs_o_sum = 0.0;   // over steps t >= burn_in
  double signed_o_sum = 0.0;
  long o_count = 0;
  long fundamental_plays = 0;
  std::string abort_reason;
  std::vector<StepRecord> trajectory;  // only with TrajectoryDetail::full

  double mean_abs_o() const {
    return o_count > 0 ? abs_o_sum / static_cast<double>(o_count)
                       : std::numeric_limits<double>::quiet_NaN();
  }
  double mean_signed_o() const {
    return o_count > 0 ? signed_o_sum / static_cast<double>(o_count)
                       : std::numeric_limits<double>::quiet_NaN();
  }

  /// P(0) followed by the price after every recorded step.
  std::vector<double> prices() const {
    std::vector<double> out;
    out.reserve(trajectory.size() + 1);
    out.push_back(initial_price);
    for (const auto& r : trajectory) out.push_back(r.price_after);
    return out;
  }
};

/// Runs one realization from a fresh market until max_steps or, with early
/// stop enabled, until the speculative trigger fires.
inline RunResult run_realization(const SimulationConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Market market(config.market_params(), rng);

  RunResult result;
  result.seed = seed;
  result.initial_price = market.price();
  result.final_price = market.price();

  const bool full = config.detail == TrajectoryDetail::full;
  if (full) result.trajectory.reserve(static_cast<std::size_t>(std::min<long>(config.max_steps, 1L << 20)));

  PhaseTracker tracker(config.memory, config.fundamental_price, config.burn_in, market.price());
  const double n = static_cast<double>(config.agents);

  for (long t = 0; t < config.max_steps; ++t) {
    StepRecord rec;
    try {
      rec = market.step(rng, full);
    } catch (const PriceOverflow& e) {
      result.label = PhaseLabel::aborted;
      result.abort_reason = e.what();
      return result;
    }
    ++result.stop_step;
    result.final_price = rec.price_after;
    result.fundamental_plays += rec.n_fundamental_plays;
    if (t >= config.burn_in) {
      const double o = static_cast<double>(rec.imbalance) / n;
      result.abs_o_sum += std::fabs(o);
      result.signed_o_sum += o;
      ++result.o_count;
    }
    const bool fired = tracker.observe(rec.price_after);
    if (full) result.trajectory.push_back(std::move(rec));
    if (fired && config.early_stop) break;
  }

  result.label = tracker.label();
  result.trend_direction = tracker.trend_direction();
  return result;
}

}  // namespace dgame
