#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "dgame/errors.hpp"

namespace dgame {

enum class PhaseLabel { speculative, fundamental, undetermined, aborted };

inline std::string_view to_string(PhaseLabel label) noexcept {
  switch (label) {
    case PhaseLabel::speculative: return "speculative";
    case PhaseLabel::fundamental: return "fundamental";
    case PhaseLabel::undetermined: return "undetermined";
    case PhaseLabel::aborted: return "aborted";
  }
  return "undetermined";
}

inline PhaseLabel parse_phase_label(std::string_view text) {
  if (text == "speculative") return PhaseLabel::speculative;
  if (text == "fundamental") return PhaseLabel::fundamental;
  if (text == "undetermined") return PhaseLabel::undetermined;
  if (text == "aborted") return PhaseLabel::aborted;
  throw ParameterError("unknown phase label '" + std::string(text) + "'");
}

/// `standard` is (2^m + 1)/(N s); `technical` drops the fundamental strategy,
/// 2^m/(N s), and is kept for comparison only.
enum class TemperatureFormula { standard, technical };

struct Temperature {
  double value = 0.0;
  friend auto operator<=>(const Temperature&, const Temperature&) = default;
};

inline Temperature temperature(int m, long agents, long strategies,
                               TemperatureFormula formula = TemperatureFormula::standard) {
  if (m < 1 || agents < 1 || strategies < 1) throw ParameterError("temperature needs m, N, s >= 1");
  const double pool = std::ldexp(1.0, m) + (formula == TemperatureFormula::standard ? 1.0 : 0.0);
  return Temperature{pool / (static_cast<double>(agents) * static_cast<double>(strategies))};
}

/// True when the last m price changes are all strictly up or all strictly down.
inline bool classify_step(std::span<const double> prices, int m) {
  if (m < 1) throw ParameterError("m must be >= 1");
  if (prices.size() < static_cast<std::size_t>(m) + 1) {
    throw ParameterError("classify_step needs at least m + 1 prices");
  }
  const std::size_t last = prices.size() - 1;
  int direction = 0;
  for (std::size_t k = last + 1 - static_cast<std::size_t>(m); k <= last; ++k) {
    const double change = prices[k] - prices[k - 1];
    const int d = change > 0.0 ? 1 : (change < 0.0 ? -1 : 0);
    if (d == 0 || (direction != 0 && d != direction)) return false;
    direction = d;
  }
  return true;
}

/// Streaming classifier. Prices are fed in order starting with P(0); the band
/// [P_f/2, 3 P_f/2] is checked for every price index > burn_in.
class PhaseTracker {
public:
  PhaseTracker(int m, double fundamental_price, long burn_in, double initial_price)
      : m_(m), fundamental_price_(fundamental_price), burn_in_(burn_in), last_(initial_price) {
    if (m < 1) throw ParameterError("m must be >= 1");
    if (burn_in < 0) throw ParameterError("burn-in must be >= 0");
    check_band(initial_price);
  }

  /// Returns true when this price completes a same-sign run of length m.
  bool observe(double price) {
    ++index_;
    const double change = price - last_;
    const int d = change > 0.0 ? 1 : (change < 0.0 ? -1 : 0);
    if (d == 0) {
      run_ = 0;
    } else if (d == direction_) {
      ++run_;
    } else {
      run_ = 1;
    }
    direction_ = d;
    last_ = price;
    check_band(price);
    if (!triggered_ && run_ >= m_) {
      triggered_ = true;
      trigger_index_ = index_;
      trend_direction_ = d;
    }
    return run_ >= m_;
  }

  bool triggered() const noexcept { return triggered_; }
  long trigger_index() const noexcept { return trigger_index_; }
  int trend_direction() const noexcept { return trend_direction_; }
  long observed() const noexcept { return index_; }

  PhaseLabel label() const noexcept {
    if (triggered_) return PhaseLabel::speculative;
    if (post_burn_in_points_ > 0 && in_band_) return PhaseLabel::fundamental;
    return PhaseLabel::undetermined;
  }

private:
  void check_band(double price) {
    if (index_ <= burn_in_) return;
    ++post_burn_in_points_;
    if (!(price >= 0.5 * fundamental_price_ && price <= 1.5 * fundamental_price_)) in_band_ = false;
  }

  int m_;
  double fundamental_price_;
  long burn_in_;
  double last_;
  long index_ = 0;
  int direction_ = 0;
  int run_ = 0;
  bool triggered_ = false;
  long trigger_index_ = -1;
  int trend_direction_ = 0;
  long post_burn_in_points_ = 0;
  bool in_band_ = true;
};

/// Labels a price series P(0), P(1), ...: Speculative if an m-run of
/// same-sign changes occurs anywhere, Fundamental if every price after
/// burn-in stays in the 50% band, Undetermined otherwise (including when no
/// price lies after burn-in).
inline PhaseLabel classify_run(std::span<const double> prices, int m, double fundamental_price,
                               long burn_in) {
  if (prices.size() < 2) return PhaseLabel::undetermined;
  PhaseTracker tracker(m, fundamental_price, burn_in, prices.front());
  for (std::size_t k = 1; k < prices.size(); ++k) {
    if (tracker.observe(prices[k])) break;
  }
  return tracker.label();
}

}  // namespace dgame
