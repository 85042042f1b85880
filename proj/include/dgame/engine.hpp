#pragma once

// One realization of the $-Game: technical lookup-table strategies scored by
// the next-period order imbalance, plus a fundamental rule that is played with
// probability g*exp(-g), g = |P - P_f| / d.
//
// Random-stream protocol (the order of draws is part of the contract; the
// reference implementation in tests/ reproduces it):
//   construction: for agent i = 0..N-1, strategy j = 0..s-1, one table via
//                 generate_strategy; then one draw for the initial window.
//   each step:    for agent i = 0..N-1:
//                   if the fundamental rule is active (probability > 0 and the
//                   price differs from P_f) draw u = uniform01(); the agent
//                   plays the fundamental signal when u < probability;
//                   otherwise pick the best strategy, drawing below(k) only
//                   when k > 1 strategies tie for the maximum score;
//                 if the imbalance is zero, draw one coin for the direction bit.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgame/errors.hpp"
#include "dgame/rng.hpp"

namespace dgame {

inline constexpr int kMaxMemory = 20;

enum class Action : std::int8_t { sell = -1, buy = 1 };

constexpr int to_int(Action a) noexcept { return static_cast<int>(a); }

inline void check_memory(int m) {
  if (m < 1 || m > kMaxMemory) {
    throw ParameterError("memory length m must be in [1, " + std::to_string(kMaxMemory) +
                         "], got " + std::to_string(m));
  }
}

/// Encodes m direction bits (oldest first, most recent last) as
/// h = sum_j b(t-j+1) 2^(j-1): the most recent bit is the least significant.
inline std::uint32_t encode_history(std::span<const std::uint8_t> bits, int m) {
  if (static_cast<int>(bits.size()) != m) {
    throw ParameterError("history has " + std::to_string(bits.size()) + " bits, expected m = " +
                         std::to_string(m));
  }
  check_memory(m);
  std::uint32_t h = 0;
  for (std::size_t j = 0; j < bits.size(); ++j) {
    const std::uint8_t b = bits[bits.size() - 1 - j];
    if (b > 1) throw ParameterError("direction bits must be 0 or 1");
    h |= static_cast<std::uint32_t>(b) << j;
  }
  return h;
}

/// The last m price-direction bits (1 = up, 0 = down).
class HistoryWindow {
public:
  HistoryWindow(int m, std::uint32_t encoded) : m_(m), encoded_(encoded) {
    check_memory(m);
    if (encoded >= (1u << m)) throw ParameterError("encoded history out of range for m");
  }

  static HistoryWindow from_bits(std::span<const std::uint8_t> bits) {
    const int m = static_cast<int>(bits.size());
    return HistoryWindow(m, encode_history(bits, m));
  }

  int memory() const noexcept { return m_; }
  std::uint32_t encoded() const noexcept { return encoded_; }
  std::uint32_t size() const noexcept { return 1u << m_; }

  /// Oldest first, most recent last.
  std::vector<std::uint8_t> bits() const {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) out[static_cast<std::size_t>(m_ - 1 - j)] = (encoded_ >> j) & 1u;
    return out;
  }

  void push(std::uint8_t bit) noexcept {
    encoded_ = ((encoded_ << 1) | (bit & 1u)) & (size() - 1);
  }

  friend bool operator==(const HistoryWindow&, const HistoryWindow&) = default;

private:
  int m_;
  std::uint32_t encoded_;
};

/// Lookup table from each of the 2^m encoded histories to an action.
class StrategyTable {
public:
  explicit StrategyTable(std::vector<Action> actions) : actions_(std::move(actions)) {
    const auto n = actions_.size();
    if (n < 2 || (n & (n - 1)) != 0) throw ParameterError("strategy table length must be 2^m");
    for (auto a : actions_) {
      if (a != Action::buy && a != Action::sell) throw ParameterError("strategy entry not in {-1,+1}");
    }
  }

  Action operator[](std::uint32_t h) const { return actions_.at(h); }
  std::size_t size() const noexcept { return actions_.size(); }
  int memory() const noexcept { return std::countr_zero(actions_.size()); }
  std::span<const Action> actions() const noexcept { return actions_; }

  friend bool operator==(const StrategyTable&, const StrategyTable&) = default;

private:
  std::vector<Action> actions_;
};

/// Entry h is bit (h mod 64) of the (h / 64)-th 64-bit draw; 1 -> buy.
inline StrategyTable generate_strategy(Rng& rng, int m) {
  check_memory(m);
  const std::size_t n = std::size_t{1} << m;
  std::vector<Action> actions(n);
  std::uint64_t word = 0;
  for (std::size_t h = 0; h < n; ++h) {
    if ((h & 63u) == 0) word = rng.next();
    actions[h] = ((word >> (h & 63u)) & 1u) ? Action::buy : Action::sell;
  }
  return StrategyTable(std::move(actions));
}

struct TechnicalAgent {
  int id = 0;
  std::vector<StrategyTable> strategies;
  std::vector<double> scores;         // cumulative virtual payoffs
  std::vector<Action> prev_actions;   // each strategy's recommendation at the previous step
  bool played_fundamental_prev = false;

  /// Score of strategy 0 minus strategy 1; only defined for s = 2.
  double relative_payoff() const {
    if (scores.size() != 2) throw ParameterError("relative payoff requires s = 2");
    return scores[0] - scores[1];
  }
};

/// Index of a maximal score; ties are broken uniformly with one below(k) draw.
inline std::size_t best_strategy_index(std::span<const double> scores, Rng& rng) {
  if (scores.empty()) throw ParameterError("agent holds no strategies");
  double best = scores[0];
  std::size_t ties = 1;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > best) {
      best = scores[j];
      ties = 1;
    } else if (scores[j] == best) {
      ++ties;
    }
  }
  if (ties == 1) {
    for (std::size_t j = 0;; ++j) {
      if (scores[j] == best) return j;
    }
  }
  auto pick = rng.below(ties);
  for (std::size_t j = 0;; ++j) {
    if (scores[j] == best && pick-- == 0) return j;
  }
}

inline std::size_t best_strategy_index(const TechnicalAgent& agent, Rng& rng) {
  return best_strategy_index(std::span<const double>(agent.scores), rng);
}

/// Sell above the fundamental price, buy below, nothing at equality.
inline std::optional<Action> fundamental_signal(double price, double fundamental_price) noexcept {
  if (price > fundamental_price) return Action::sell;
  if (price < fundamental_price) return Action::buy;
  return std::nullopt;
}

/// g*exp(-g) with g = |price - P_f| / d; peaks at 1/e for g = 1.
inline double fundamental_probability(double price, double fundamental_price, double dividend) {
  if (!(dividend > 0.0)) throw ParameterError("dividend must be positive");
  const double g = std::fabs(price - fundamental_price) / dividend;
  if (g == 0.0 || std::isinf(g)) return 0.0;
  return g * std::exp(-g);
}

constexpr double total_profit(long imbalance_prev, long imbalance_cur) noexcept {
  return static_cast<double>(imbalance_prev) * static_cast<double>(imbalance_cur);
}

inline double order_parameter(long imbalance, long agents) {
  if (agents < 1) throw ParameterError("order parameter needs N >= 1");
  if (imbalance > agents || imbalance < -agents) throw ParameterError("|imbalance| exceeds N");
  return static_cast<double>(imbalance) / static_cast<double>(agents);
}

struct MarketParams {
  int agents = 0;          // N
  int memory = 0;          // m
  int strategies = 0;      // s
  double liquidity = 1.0;  // lambda
  double dividend = 1.0;   // d; +inf disables the fundamental rule
  double fundamental_price = 1.0;
  bool fundamental = true;

  void validate() const {
    if (agents < 1) throw ParameterError("N must be >= 1");
    check_memory(memory);
    if (strategies < 1) throw ParameterError("s must be >= 1");
    if (!(liquidity > 0.0) || std::isinf(liquidity)) throw ParameterError("lambda must be > 0");
    if (!(dividend > 0.0)) throw ParameterError("d must be > 0");
    if (!(fundamental_price > 0.0) || std::isinf(fundamental_price)) {
      throw ParameterError("P_f must be > 0");
    }
  }
};

struct MarketState {
  long t = 0;
  double price = 0.0;
  double log_price = 0.0;
  HistoryWindow window{1, 0};
  double fundamental_price = 0.0;
  double dividend = 0.0;
  double liquidity = 0.0;
  long imbalance_prev = 0;
};

/// Serialized field order: t, imbalance, return, direction_bit,
/// n_fundamental_plays, price_after; actions are kept only on request.
struct StepRecord {
  long t = 0;
  std::vector<Action> actions;
  long imbalance = 0;
  double return_ = 0.0;
  std::uint8_t direction_bit = 0;
  int n_fundamental_plays = 0;
  double price_after = 0.0;
};

/// Packed game state. Tables are stored history-major so that the
/// recommendations of every strategy for one history are contiguous.
class Market {
public:
  Market(const MarketParams& params, Rng& rng) : params_(params) {
    params_.validate();
    init_layout();
    for (std::size_t k = 0; k < strategy_count_; ++k) {
      const auto table = generate_strategy(rng, params_.memory);
      for (std::size_t h = 0; h < histories_; ++h) {
        rows_[h * strategy_count_ + k] = static_cast<std::int8_t>(table[static_cast<std::uint32_t>(h)]);
      }
    }
    history_ = static_cast<std::uint32_t>(rng.next() & (histories_ - 1));
    prev_history_ = history_;
  }

  /// Explicit strategies: tables[i][j] for agent i, strategy j.
  Market(const MarketParams& params, const std::vector<std::vector<StrategyTable>>& tables,
         const HistoryWindow& initial)
      : params_(params) {
    params_.validate();
    if (static_cast<int>(tables.size()) != params_.agents) throw ParameterError("need N agents");
    if (initial.memory() != params_.memory) throw ParameterError("window memory differs from m");
    init_layout();
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (static_cast<int>(tables[i].size()) != params_.strategies) {
        throw ParameterError("every agent needs s strategies");
      }
      for (std::size_t j = 0; j < tables[i].size(); ++j) {
        if (tables[i][j].size() != histories_) throw ParameterError("strategy memory differs from m");
        const std::size_t k = i * static_cast<std::size_t>(params_.strategies) + j;
        for (std::size_t h = 0; h < histories_; ++h) {
          rows_[h * strategy_count_ + k] =
              static_cast<std::int8_t>(tables[i][j][static_cast<std::uint32_t>(h)]);
        }
      }
    }
    history_ = initial.encoded();
    prev_history_ = history_;
  }

  const MarketParams& params() const noexcept { return params_; }
  long time() const noexcept { return t_; }
  double price() const noexcept { return price_; }
  double log_price() const noexcept { return log_price_; }
  std::uint32_t history() const noexcept { return history_; }

  MarketState state() const {
    return MarketState{t_,
                       price_,
                       log_price_,
                       HistoryWindow(params_.memory, history_),
                       params_.fundamental_price,
                       params_.dividend,
                       params_.liquidity,
                       imbalance_prev_};
  }

  TechnicalAgent agent(int i) const {
    if (i < 0 || i >= params_.agents) throw ParameterError("agent index out of range");
    const auto s = static_cast<std::size_t>(params_.strategies);
    TechnicalAgent out;
    out.id = i;
    out.played_fundamental_prev = played_fundamental_[static_cast<std::size_t>(i)] != 0;
    for (std::size_t j = 0; j < s; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * s + j;
      std::vector<Action> actions(histories_);
      for (std::size_t h = 0; h < histories_; ++h) actions[h] = static_cast<Action>(rows_[h * strategy_count_ + k]);
      out.strategies.emplace_back(std::move(actions));
      out.scores.push_back(scores_[k]);
      out.prev_actions.push_back(static_cast<Action>(rows_[prev_history_ * strategy_count_ + k]));
    }
    return out;
  }

  /// Advances one period. Throws PriceOverflow, leaving the state untouched,
  /// when the new price is not a positive finite double.
  StepRecord step(Rng& rng, bool keep_actions = true) {
    const auto s = static_cast<std::size_t>(params_.strategies);
    const std::size_t n = static_cast<std::size_t>(params_.agents);
    const double prob = params_.fundamental
                            ? fundamental_probability(price_, params_.fundamental_price, params_.dividend)
                            : 0.0;
    const auto signal = fundamental_signal(price_, params_.fundamental_price);
    const bool override_possible = prob > 0.0 && signal.has_value();
    const std::int8_t signal_value = signal ? static_cast<std::int8_t>(*signal) : 0;

    StepRecord rec;
    rec.t = t_;
    if (keep_actions) rec.actions.resize(n);

    const std::int8_t* current = rows_.data() + history_ * strategy_count_;
    long imbalance = 0;
    int fundamental_plays = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::int8_t a;
      if (override_possible && rng.uniform01() < prob) {
        a = signal_value;
        played_fundamental_[i] = 1;
        ++fundamental_plays;
      } else {
        const auto j = best_strategy_index(std::span<const double>(scores_.data() + i * s, s), rng);
        a = current[i * s + j];
        played_fundamental_[i] = 0;
      }
      imbalance += a;
      if (keep_actions) rec.actions[i] = static_cast<Action>(a);
    }

    const double r = static_cast<double>(imbalance) / params_.liquidity;
    const double new_log = log_price_ + r;
    const double new_price = std::exp(new_log);
    if (!std::isfinite(new_price) || !(new_price > 0.0)) {
      throw PriceOverflow("price left the representable range at t=" + std::to_string(t_) +
                          " (log price " + std::to_string(new_log) + ")");
    }

    std::uint8_t bit;
    if (imbalance > 0) {
      bit = 1;
    } else if (imbalance < 0) {
      bit = 0;
    } else {
      bit = rng.coin() ? 1 : 0;
    }

    // Virtual payoff: previous recommendation times the current imbalance.
    const std::int8_t* prev = rows_.data() + prev_history_ * strategy_count_;
    const double a_cur = static_cast<double>(imbalance);
    double* scores = scores_.data();
    for (std::size_t k = 0; k < strategy_count_; ++k) scores[k] += static_cast<double>(prev[k]) * a_cur;

    prev_history_ = history_;
    history_ = ((history_ << 1) | bit) & static_cast<std::uint32_t>(histories_ - 1);
    log_price_ = new_log;
    price_ = new_price;
    imbalance_prev_ = imbalance;
    ++t_;

    rec.imbalance = imbalance;
    rec.return_ = r;
    rec.direction_bit = bit;
    rec.n_fundamental_plays = fundamental_plays;
    rec.price_after = new_price;
    return rec;
  }

private:
  void init_layout() {
    histories_ = std::size_t{1} << params_.memory;
    strategy_count_ = static_cast<std::size_t>(params_.agents) * static_cast<std::size_t>(params_.strategies);
    rows_.assign(histories_ * strategy_count_, 0);
    scores_.assign(strategy_count_, 0.0);
    played_fundamental_.assign(static_cast<std::size_t>(params_.agents), 0);
    price_ = params_.fundamental_price;
    log_price_ = std::log(price_);
  }

  MarketParams params_;
  std::size_t histories_ = 0;
  std::size_t strategy_count_ = 0;
  std::vector<std::int8_t> rows_;
  std::vector<double> scores_;
  std::vector<std::uint8_t> played_fundamental_;
  std::uint32_t history_ = 0;
  std::uint32_t prev_history_ = 0;
  long t_ = 0;
  double price_ = 0.0;
  double log_price_ = 0.0;
  long imbalance_prev_ = 0;
};

}  // namespace dgame
