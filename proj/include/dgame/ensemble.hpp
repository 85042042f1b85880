#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "dgame/config.hpp"
#include "dgame/phase.hpp"
#include "dgame/realization.hpp"
#include "dgame/rng.hpp"

namespace dgame {

inline constexpr long kDefaultRealizations = 200;
inline constexpr int kBootstrapResamples = 2000;

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls fn(i) for i in [0, count) on `workers` threads. The first exception
/// by index is rethrown after all threads have joined.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr std::size_t label_index(PhaseLabel l) noexcept { return static_cast<std::size_t>(l); }

inline constexpr std::array<PhaseLabel, 4> kAllLabels = {PhaseLabel::speculative, PhaseLabel::fundamental,
                                                         PhaseLabel::undetermined, PhaseLabel::aborted};

struct EnsembleSummary {
  SimulationConfig config;
  long realizations = 0;
  std::uint64_t master_seed = 0;
  Temperature temperature;
  std::array<long, 4> counts{};       // indexed by PhaseLabel
  std::array<double, 4> fractions{};
  std::array<Interval, 4> bootstrap_ci{};
  double mean_abs_o = std::numeric_limits<double>::quiet_NaN();

  double fraction(PhaseLabel l) const { return fractions[label_index(l)]; }
  const Interval& ci(PhaseLabel l) const { return bootstrap_ci[label_index(l)]; }
  double f_spec() const { return fraction(PhaseLabel::speculative); }
  double f_fund() const { return fraction(PhaseLabel::fundamental); }
  double f_undet() const { return fraction(PhaseLabel::undetermined); }
  double f_abort() const { return fraction(PhaseLabel::aborted); }
};

/// 95% percentile-bootstrap intervals for the four label fractions. The
/// interval is widened to contain the point estimate if resampling misses it.
inline std::array<Interval, 4> bootstrap_fractions(std::span<const PhaseLabel> labels, std::uint64_t seed,
                                                   int resamples = kBootstrapResamples) {
  std::array<Interval, 4> out{};
  const std::size_t r = labels.size();
  if (r == 0 || resamples < 1) return out;
  std::array<long, 4> base{};
  for (auto l : labels) ++base[label_index(l)];

  Rng rng(seed);
  std::array<std::vector<double>, 4> draws;
  for (auto& d : draws) d.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    std::array<long, 4> c{};
    for (std::size_t k = 0; k < r; ++k) ++c[label_index(labels[rng.below(r)])];
    for (std::size_t q = 0; q < 4; ++q) draws[q].push_back(static_cast<double>(c[q]) / static_cast<double>(r));
  }
  const auto lo_rank = static_cast<std::size_t>(std::floor(0.025 * resamples));
  const auto hi_rank = static_cast<std::size_t>(std::ceil(0.975 * resamples)) - 1;
  for (std::size_t q = 0; q < 4; ++q) {
    auto& d = draws[q];
    std::sort(d.begin(), d.end());
    const double point = static_cast<double>(base[q]) / static_cast<double>(r);
    out[q] = Interval{std::min(d[lo_rank], point), std::max(d[hi_rank], point)};
  }
  return out;
}

/// Aggregates runs in index order; the result does not depend on how the runs
/// were scheduled.
inline EnsembleSummary summarize(const SimulationConfig& config, std::uint64_t master_seed,
                                 std::span<const RunResult> runs) {
  EnsembleSummary s;
  s.config = config;
  s.realizations = static_cast<long>(runs.size());
  s.master_seed = master_seed;
  s.temperature = config.temperature();

  std::vector<PhaseLabel> labels;
  labels.reserve(runs.size());
  double abs_sum = 0.0;
  long o_count = 0;
  for (const auto& run : runs) {
    ++s.counts[label_index(run.label)];
    labels.push_back(run.label);
    abs_sum += run.abs_o_sum;
    o_count += run.o_count;
  }
  if (!runs.empty()) {
    for (std::size_t q = 0; q < 4; ++q) {
      s.fractions[q] = static_cast<double>(s.counts[q]) / static_cast<double>(runs.size());
    }
  }
  if (o_count > 0) s.mean_abs_o = abs_sum / static_cast<double>(o_count);
  s.bootstrap_ci = bootstrap_fractions(labels, derive_seed(master_seed, cell_key(config), 0xb0075742ULL << 32));
  return s;
}

struct EnsembleResult {
  EnsembleSummary summary;
  std::vector<RunResult> runs;
};

/// R seeded realizations; run k uses derive_seed(master_seed, cell_key(config), k).
inline EnsembleResult run_ensemble_detailed(const SimulationConfig& config, long realizations,
                                            std::uint64_t master_seed, unsigned workers = 0) {
  if (realizations < 1) throw ParameterError("ensemble needs R >= 1");
  config.validate();
  const std::uint64_t key = cell_key(config);
  std::vector<RunResult> runs(static_cast<std::size_t>(realizations));
  parallel_for(runs.size(), workers, [&](std::size_t k) {
    runs[k] = run_realization(config, derive_seed(master_seed, key, k));
  });
  EnsembleResult out{summarize(config, master_seed, runs), {}};
  out.runs = std::move(runs);
  return out;
}

inline EnsembleSummary run_ensemble(const SimulationConfig& config, long realizations, std::uint64_t master_seed,
                                    unsigned workers = 0) {
  return run_ensemble_detailed(config, realizations, master_seed, workers).summary;
}

struct SweepGrid {
  std::vector<int> agents;
  std::vector<int> memory;
  std::vector<int> strategies;
  std::vector<double> liquidity;
  std::vector<double> dividend;
  /// Supplies P_f, the on/off flags, detail level and temperature formula.
  SimulationConfig base;
  /// When unset, each cell uses the m-dependent defaults.
  std::optional<long> max_steps;
  std::optional<long> burn_in;
  long realizations = kDefaultRealizations;
  std::uint64_t master_seed = 0;

  /// Cartesian product ordered by (m, N, s, lambda, d).
  std::vector<SimulationConfig> cells() const {
    if (agents.empty() || memory.empty() || strategies.empty() || liquidity.empty() || dividend.empty()) {
      throw ParameterError("sweep grid has an empty parameter list");
    }
    std::vector<SimulationConfig> out;
    for (int m : memory) {
      for (int n : agents) {
        for (int s : strategies) {
          for (double lam : liquidity) {
            for (double d : dividend) {
              SimulationConfig c = base;
              c.agents = n;
              c.memory = m;
              c.strategies = s;
              c.liquidity = lam;
              c.dividend = d;
              const bool m_ok = m >= 1 && m <= kMaxMemory;
              c.max_steps = max_steps.value_or(m_ok ? default_max_steps(m) : 0);
              c.burn_in = burn_in.value_or(m_ok ? default_burn_in(m) : 0);
              out.push_back(c);
            }
          }
        }
      }
    }
    std::stable_sort(out.begin(), out.end(), [](const SimulationConfig& a, const SimulationConfig& b) {
      return std::tie(a.memory, a.agents, a.strategies, a.liquidity, a.dividend) <
             std::tie(b.memory, b.agents, b.strategies, b.liquidity, b.dividend);
    });
    return out;
  }
};

struct SweepCell {
  SimulationConfig config;
  std::optional<EnsembleSummary> summary;
  std::string error;  // set when the cell failed; summary is then empty
};

inline std::vector<SweepCell> sweep(const SweepGrid& grid, unsigned workers = 0) {
  if (grid.realizations < 1) throw ParameterError("sweep needs R >= 1");
  std::vector<SweepCell> out;
  for (const auto& config : grid.cells()) {
    SweepCell cell{config, std::nullopt, {}};
    try {
      cell.summary = run_ensemble(config, grid.realizations, grid.master_seed, workers);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    out.push_back(std::move(cell));
  }
  return out;
}

/// Temperature at which piecewise-linear f_spec(T) first crosses 0.5, scanning
/// upward in T. Points sharing a temperature are averaged. Empty when fewer
/// than two temperatures are given or no adjacent pair brackets 0.5.
inline std::optional<double> estimate_crossover(std::span<const std::pair<double, double>> points) {
  std::map<double, std::pair<double, int>> by_t;
  for (const auto& [t, f] : points) {
    auto& slot = by_t[t];
    slot.first += f;
    ++slot.second;
  }
  if (by_t.size() < 2) return std::nullopt;
  std::vector<std::pair<double, double>> curve;
  for (const auto& [t, acc] : by_t) curve.emplace_back(t, acc.first / acc.second);

  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto [t0, f0] = curve[i];
    const auto [t1, f1] = curve[i + 1];
    const double g0 = f0 - 0.5;
    const double g1 = f1 - 0.5;
    if (g0 == 0.0) return t0;
    if ((g0 < 0.0) != (g1 < 0.0) || g1 == 0.0) return t0 + (t1 - t0) * g0 / (g0 - g1);
  }
  return std::nullopt;
}

inline std::optional<double> estimate_crossover(std::span<const EnsembleSummary> summaries) {
  std::vector<std::pair<double, double>> points;
  for (const auto& s : summaries) points.emplace_back(s.temperature.value, s.f_spec());
  return estimate_crossover(std::span<const std::pair<double, double>>(points));
}

}  // namespace dgame
