// dgame: command-line driver for single runs, ensembles, sweeps, landscape
// fits and heatmap rendering.
//
// Exit status: 0 on success, 2 on configuration or usage errors, 1 on
// runtime errors.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgame/dgame.hpp"
#include "dgame/io/config_file.hpp"
#include "dgame/io/serialize.hpp"
#include "dgame/io/svg.hpp"

namespace fs = std::filesystem;
using namespace dgame;

namespace {

struct Options {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  unsigned workers = 0;
  std::string format = "csv";
  bool no_early_stop = false;
  std::string fundamental;  // empty: keep the config value
  std::string input;        // plot only
};

struct ConfigFailure {
  std::string message;
};

io::ConfigFile load(const Options& opt) {
  try {
    io::ConfigFile cfg = io::parse_config_file(opt.config_path);
    if (opt.no_early_stop) cfg.grid.base.early_stop = false;
    if (opt.fundamental == "on") cfg.grid.base.fundamental = true;
    if (opt.fundamental == "off") cfg.grid.base.fundamental = false;
    cfg.grid.master_seed = opt.seed;
    return cfg;
  } catch (const std::exception& e) {
    throw ConfigFailure{e.what()};
  }
}

SimulationConfig single_cell(const io::ConfigFile& cfg) {
  try {
    SimulationConfig c = cfg.single();
    c.validate();
    return c;
  } catch (const std::exception& e) {
    throw ConfigFailure{e.what()};
  }
}

void write(const Options& opt, const std::string& name, const std::string& content) {
  io::write_file(fs::path(opt.out_dir) / name, content);
}

int cmd_run(const Options& opt) {
  const auto cfg = load(opt);
  SimulationConfig config = single_cell(cfg);
  config.detail = TrajectoryDetail::full;
  // Same stream as run 0 of an ensemble with this seed.
  const auto result = run_realization(config, derive_seed(opt.seed, cell_key(config), 0));
  fs::create_directories(opt.out_dir);
  const std::vector<io::RunRow> rows{io::make_run_row(config, result)};
  if (opt.format == "json") {
    write(opt, "run.json", io::write_runs_json(rows));
  } else {
    write(opt, "run.csv", io::write_runs_csv(rows));
  }
  write(opt, "trajectory.csv", io::write_trajectory_csv(result));
  const auto prices = result.prices();
  write(opt, "trajectory.svg", io::trajectory_svg(prices, config.fundamental_price));
  std::cout << to_string(result.label) << " after " << result.stop_step << " steps, final price "
            << io::format_real(result.final_price) << "\n";
  return 0;
}

int cmd_ensemble(const Options& opt) {
  const auto cfg = load(opt);
  const SimulationConfig config = single_cell(cfg);
  const auto result = run_ensemble_detailed(config, cfg.realizations(), opt.seed, opt.workers);
  std::vector<io::RunRow> rows;
  rows.reserve(result.runs.size());
  for (const auto& run : result.runs) rows.push_back(io::make_run_row(config, run));
  fs::create_directories(opt.out_dir);
  if (opt.format == "json") {
    write(opt, "runs.json", io::write_runs_json(rows));
  } else {
    write(opt, "runs.csv", io::write_runs_csv(rows));
  }
  write(opt, "summary.json", io::write_summary_json(result.summary));
  const auto& s = result.summary;
  std::cout << "T=" << s.temperature.value << " f_spec=" << s.f_spec() << " f_fund=" << s.f_fund()
            << " f_undet=" << s.f_undet() << " f_abort=" << s.f_abort() << "\n";
  return 0;
}

void write_heatmaps(const Options& opt, const std::vector<SweepCell>& cells, const io::HeatmapSpec& spec) {
  for (const auto& panel : io::emit_heatmaps(cells, spec)) write(opt, "heatmap_" + panel.name + ".svg", panel.svg);
}

int cmd_sweep(const Options& opt) {
  const auto cfg = load(opt);
  try {
    (void)cfg.grid.cells();
  } catch (const std::exception& e) {
    throw ConfigFailure{e.what()};
  }
  const auto cells = sweep(cfg.grid, opt.workers);
  fs::create_directories(opt.out_dir);
  if (opt.format == "json") {
    write(opt, "sweep.json", io::write_sweep_json(cells));
  } else {
    write(opt, "sweep.csv", io::write_sweep_csv(cells, cfg.grid.realizations, cfg.grid.master_seed));
  }
  write_heatmaps(opt, cells, cfg.heatmap);
  int failed = 0;
  for (const auto& c : cells) {
    if (!c.summary) {
      ++failed;
      std::cerr << "cell N=" << c.config.agents << " m=" << c.config.memory << " s=" << c.config.strategies
                << " failed: " << c.error << "\n";
    }
  }
  std::cout << cells.size() << " cells, " << failed << " failed\n";
  return 0;
}

int cmd_gl_fit(const Options& opt) {
  const auto cfg = load(opt);
  SimulationConfig config = single_cell(cfg);
  if (cfg.gl_sampling == io::OrderSampling::per_step) config.detail = TrajectoryDetail::full;
  const auto result = run_ensemble_detailed(config, cfg.realizations(), opt.seed, opt.workers);

  std::vector<double> samples;
  for (const auto& run : result.runs) {
    if (cfg.gl_sampling == io::OrderSampling::per_run) {
      if (run.o_count > 0) samples.push_back(run.mean_signed_o());
      continue;
    }
    for (const auto& rec : run.trajectory) {
      if (rec.t >= config.burn_in) samples.push_back(order_parameter(rec.imbalance, config.agents));
    }
  }
  const auto fit = fit_landscape(samples, cfg.gl_bins);
  const auto& p = fit.polynomial;

  std::string json = "{\"schema_version\":" + std::to_string(io::kOutputSchemaVersion);
  json += ",\"sampling\":" + io::json_escape(cfg.gl_sampling == io::OrderSampling::per_step ? "per_step" : "per_run");
  json += ",\"samples\":" + std::to_string(samples.size());
  json += ",\"bins\":" + std::to_string(cfg.gl_bins);
  json += ",\"nonempty_bins\":" + std::to_string(fit.nonempty_bins);
  json += ",\"polynomial\":{\"C\":" + io::json_real(p.C) + ",\"a\":" + io::json_real(p.a) +
          ",\"alpha\":" + io::json_real(p.alpha) + ",\"b\":" + io::json_real(p.b) +
          ",\"beta\":" + io::json_real(p.beta) + "}";
  json += ",\"stationary_points\":[";
  if (p.beta != 0.0) {
    const auto roots = stationary_points(p.alpha, p.beta);
    for (std::size_t i = 0; i < roots.size(); ++i) json += (i ? "," : "") + io::json_real(roots[i]);
  }
  json += "],\"centers\":[";
  for (std::size_t i = 0; i < fit.centers.size(); ++i) json += (i ? "," : "") + io::json_real(fit.centers[i]);
  json += "],\"landscape\":[";
  for (std::size_t i = 0; i < fit.landscape.size(); ++i) json += (i ? "," : "") + io::json_real(fit.landscape[i]);
  json += "]}\n";

  fs::create_directories(opt.out_dir);
  write(opt, "gl_fit.json", json);
  write(opt, "landscape.svg", io::landscape_svg(fit));
  std::cout << "alpha=" << p.alpha << " beta=" << p.beta << " from " << samples.size() << " samples\n";
  return 0;
}

int cmd_plot(const Options& opt) {
  const auto cfg = load(opt);
  const fs::path input = opt.input.empty() ? fs::path(opt.out_dir) / "sweep.csv" : fs::path(opt.input);
  const auto cells = io::read_sweep_csv(io::read_file(input));
  fs::create_directories(opt.out_dir);
  write_heatmaps(opt, cells, cfg.heatmap);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dollar-game market simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "configuration file")->required();
    sub->add_option("--seed", opt.seed, "master seed (all randomness derives from it)");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--workers", opt.workers, "worker threads (0 = hardware concurrency)");
    sub->add_option("--format", opt.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--no-early-stop", opt.no_early_stop, "run every realization to max_steps");
    sub->add_option("--fundamental", opt.fundamental, "override the fundamental strategy switch")
        ->check(CLI::IsMember({"on", "off"}));
  };
  auto* run = app.add_subcommand("run", "one realization with full trajectory output");
  auto* ensemble = app.add_subcommand("ensemble", "R realizations of one parameter cell");
  auto* sweep_cmd = app.add_subcommand("sweep", "ensembles over a parameter grid, with heatmaps");
  auto* gl = app.add_subcommand("gl-fit", "fit the symmetric quartic landscape to order-parameter samples");
  auto* plot = app.add_subcommand("plot", "render heatmaps from an existing sweep.csv");
  for (auto* sub : {run, ensemble, sweep_cmd, gl, plot}) add_common(sub);
  plot->add_option("--input", opt.input, "sweep CSV (default: <out>/sweep.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (ensemble->parsed()) return cmd_ensemble(opt);
    if (sweep_cmd->parsed()) return cmd_sweep(opt);
    if (gl->parsed()) return cmd_gl_fit(opt);
    if (plot->parsed()) return cmd_plot(opt);
  } catch (const ConfigFailure& e) {
    std::cerr << "config error: " << e.message << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
