// connmaint: run, sweep and analyse connectivity-maintenance scenarios.

#include "connmaint/commands.hpp"
#include "connmaint/config.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

std::string joined_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

struct ScenarioArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seeds = "1";
  int runs = 0;
  std::string out_dir;
  unsigned workers = 0;

  void attach(CLI::App* app, const std::string& default_out) {
    out_dir = default_out;
    app->add_option("-c,--config", config_path, "scenario file (key = value lines)")
        ->check(CLI::ExistingFile);
    app->add_option("-s,--set", overrides, "override, e.g. --set disturbance.p_fail=0.2")
        ->take_all();
    app->add_option("--seeds", seeds, "seed list: 7 | 1,4,9 | 1-20")->capture_default_str();
    app->add_option("-n,--runs", runs, "shorthand for --seeds 1-N")->check(CLI::PositiveNumber);
    app->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    app->add_option("-j,--workers", workers, "worker threads, 0 = all cores")
        ->capture_default_str();
  }

  connmaint::ScenarioConfig config() const {
    return config_path.empty() ? connmaint::parse_config_text("", overrides)
                               : connmaint::parse_config(config_path, overrides);
  }

  std::vector<std::uint64_t> seed_list() const {
    if (runs > 0) return connmaint::parse_seed_list("1-" + std::to_string(runs));
    return connmaint::parse_seed_list(seeds);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized connectivity maintenance under communication failures and noise"};
  app.require_subcommand(1);

  ScenarioArgs run_args;
  auto* run = app.add_subcommand("run", "simulate one scenario for each seed");
  run_args.attach(run, "out/run");

  ScenarioArgs sweep_args;
  std::string p_grid = "0:0.7:0.05";
  std::string eta_grid = "0,0.1,0.3,0.5,1,5";
  bool no_traces = false;
  auto* sweep = app.add_subcommand("sweep", "grid over failure probability and noise variance");
  sweep_args.attach(sweep, "out/sweep");
  sweep->add_option("--p-fail", p_grid, "failure probabilities: list or start:stop:step")
      ->capture_default_str();
  sweep->add_option("--eta", eta_grid, "noise variances: list or start:stop:step")
      ->capture_default_str();
  sweep->add_flag("--no-traces", no_traces, "write only the summaries");

  std::vector<std::string> traces;
  std::string spectrum_out = "out/spectrum";
  double threshold = 10.0;
  auto* spec = app.add_subcommand("spectrum", "amplitude spectrum of u^c from trace CSVs");
  spec->add_option("traces", traces, "trace CSV files")->required()->check(CLI::ExistingFile);
  spec->add_option("-o,--out", spectrum_out, "output directory")->capture_default_str();
  spec->add_option("--threshold", threshold, "high-frequency boundary in Hz")
      ->capture_default_str();

  auto* validate = app.add_subcommand("validate", "run the built-in property checks");

  std::string show_path;
  std::vector<std::string> show_overrides;
  auto* show = app.add_subcommand("config", "print the effective configuration");
  show->add_option("-c,--config", show_path, "scenario file")->check(CLI::ExistingFile);
  show->add_option("-s,--set", show_overrides, "override")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? connmaint::kExitOk : connmaint::kExitUsage;
  }

  const std::string command_line = joined_args(argc, argv);
  try {
    if (*run) {
      connmaint::RunRequest req;
      req.config = run_args.config();
      req.seeds = run_args.seed_list();
      req.out_dir = run_args.out_dir;
      req.workers = run_args.workers;
      req.command_line = command_line;
      return connmaint::cmd_run(req, std::cout);
    }
    if (*sweep) {
      connmaint::SweepRequest req;
      req.config = sweep_args.config();
      req.seeds = sweep_args.seed_list();
      req.out_dir = sweep_args.out_dir;
      req.workers = sweep_args.workers;
      req.command_line = command_line;
      req.p_fail = connmaint::parse_double_list(p_grid, "--p-fail");
      req.eta = connmaint::parse_double_list(eta_grid, "--eta");
      req.write_traces = !no_traces;
      req.stop = &g_stop;
      std::signal(SIGINT, on_interrupt);
      std::signal(SIGTERM, on_interrupt);
      return connmaint::cmd_sweep(req, std::cout);
    }
    if (*spec) {
      connmaint::SpectrumRequest req;
      req.traces.assign(traces.begin(), traces.end());
      req.out_dir = spectrum_out;
      req.threshold_hz = threshold;
      req.command_line = command_line;
      return connmaint::cmd_spectrum(req, std::cout);
    }
    if (*validate) return connmaint::cmd_validate(std::cout);
    if (*show) {
      const auto cfg = show_path.empty() ? connmaint::parse_config_text("", show_overrides)
                                         : connmaint::parse_config(show_path, show_overrides);
      std::cout << connmaint::format_config(cfg);
      return connmaint::kExitOk;
    }
  } catch (const connmaint::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return connmaint::kExitUsage;
  } catch (const connmaint::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return connmaint::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return connmaint::kExitRuntime;
  }
  return connmaint::kExitUsage;
}
