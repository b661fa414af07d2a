#pragma once

// Subcommand implementations behind the `connmaint` executable. Each writes
// into an output directory and returns a process exit code.
//
// Every output directory holds config.txt (effective configuration, readable
// by --config), seeds.txt and metadata.txt. Only metadata.txt carries wall
// clock data, so the other files are byte-identical across repeated runs.

#include "connmaint/engine.hpp"

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace connmaint {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitRuntime = 2,
  kExitValidation = 3,
};

struct RunRequest {
  ScenarioConfig config;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out_dir;
  unsigned workers = 0;  // 0: hardware concurrency
  std::string command_line;  // recorded in metadata.txt
};

struct SweepRequest : RunRequest {
  std::vector<double> p_fail{0.0};
  std::vector<double> eta{0.0};
  bool write_traces = true;
  // Checked before each run starts; runs in flight complete.
  const std::atomic<bool>* stop = nullptr;
};

struct SpectrumRequest {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path out_dir;
  double threshold_hz = 10.0;
  std::string command_line;
};

int cmd_run(const RunRequest& request, std::ostream& log);
int cmd_sweep(const SweepRequest& request, std::ostream& log);
int cmd_spectrum(const SpectrumRequest& request, std::ostream& log);
int cmd_validate(std::ostream& log);

// File-name fragment for a grid value, e.g. 0.05 -> "0.05".
std::string grid_label(double v);

}  // namespace connmaint
