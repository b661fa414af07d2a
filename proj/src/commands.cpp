#include "connmaint/commands.hpp"

#include "connmaint/analysis.hpp"
#include "connmaint/config.hpp"
#include "connmaint/validation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace connmaint {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw OutputError("cannot open " + path.string() + " for writing");
  os << text;
  os.close();
  if (!os) throw OutputError("failed writing " + path.string());
}

template <class Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  write_file(path, buf.str());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_metadata(const fs::path& dir, const std::string& command, unsigned workers) {
  write_file(dir / "metadata.txt",
             fmt::format("created_utc = {}\nversion = {}\nworkers = {}\ncommand = {}\n", utc_now(),
                         kVersion, workers, command));
}

void write_seeds(const fs::path& dir, std::span<const std::uint64_t> seeds) {
  std::string text;
  for (auto s : seeds) text += std::to_string(s) + '\n';
  write_file(dir / "seeds.txt", text);
}

unsigned resolve_workers(unsigned requested, std::size_t jobs) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

// Runs job(k) for k in [0, count) on a worker pool. Jobs not yet started
// when *stop turns true are skipped; returns how many were started.
template <class Job>
std::size_t parallel_for(std::size_t count, unsigned workers, const std::atomic<bool>* stop,
                         Job&& job) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> started{0};
  auto work = [&] {
    for (;;) {
      if (stop != nullptr && stop->load()) return;
      const std::size_t k = next++;
      if (k >= count) return;
      ++started;
      job(k);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  return started.load();
}

std::string outcome_label(Outcome o) { return o == Outcome::maintained ? "maintained" : "lost"; }

std::string trace_name(std::uint64_t seed) { return fmt::format("trace_seed{}.csv", seed); }

const char* kRunPlotScript = R"(#!/usr/bin/env python3
"""Plots for a `connmaint run` directory: connectivity, estimates,
control effort, trajectories and the control-effort spectrum."""
import csv
import glob
import os
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


def plot_trace(path):
    d = read(path)
    stem = os.path.splitext(os.path.basename(path))[0]
    n = len([k for k in d if k.startswith("lambda2_i_")])
    fig, ax = plt.subplots(3, 1, figsize=(7, 10))
    for i in range(1, n + 1):
        ax[0].plot(d["t"], d[f"lambda2_i_{i}"], lw=0.6, alpha=0.7, label=f"agent {i}")
    ax[0].plot(d["t"], d["lambda2"], "k", lw=1.5, label="lambda2")
    ax[0].plot(d["t"], d["lambda2_bar"], "k--", lw=1.0, label="undisturbed")
    ax[0].set_xlabel("t [s]")
    ax[0].set_ylabel("connectivity")
    ax[0].legend(fontsize=7)
    ax[1].plot(d["t"], d["uc_norm"], lw=0.8)
    ax[1].set_xlabel("t [s]")
    ax[1].set_ylabel("|u^c|")
    for i in range(1, n + 1):
        ax[2].plot(d[f"x_{i}"], d[f"y_{i}"], lw=0.8)
        ax[2].plot(d[f"x_{i}"][-1], d[f"y_{i}"][-1], "o")
    ax[2].set_aspect("equal")
    ax[2].set_xlabel("x [m]")
    ax[2].set_ylabel("y [m]")
    fig.tight_layout()
    fig.savefig(os.path.join(here, stem + ".png"), dpi=120)
    plt.close(fig)


def plot_spectrum(path):
    d = read(path)
    stem = os.path.splitext(os.path.basename(path))[0]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(d["freq_hz"][1:], d["magnitude"][1:], lw=0.7)
    ax.axvline(10.0, color="r", ls=":")
    ax.set_xlabel("f [Hz]")
    ax.set_ylabel("|U^c(f)|")
    fig.tight_layout()
    fig.savefig(os.path.join(here, stem + ".png"), dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    for p in sorted(glob.glob(os.path.join(here, "traces", "*.csv"))):
        plot_trace(p)
    for p in sorted(glob.glob(os.path.join(here, "spectra", "*.csv"))):
        plot_spectrum(p)
    sys.exit(0)
)";

const char* kSweepPlotScript = R"(#!/usr/bin/env python3
"""Maintenance rate and high-frequency share of u^c across a sweep grid."""
import csv
import os
from collections import defaultdict

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "summary.csv")) as f:
    rows = list(csv.DictReader(f))

by_eta = defaultdict(list)
for r in rows:
    by_eta[float(r["eta"])].append(r)

fig, ax = plt.subplots(1, 2, figsize=(11, 4))
for eta, cell in sorted(by_eta.items()):
    cell.sort(key=lambda r: float(r["p_fail"]))
    p = [float(r["p_fail"]) for r in cell]
    ax[0].plot(p, [float(r["maintenance_rate"]) for r in cell], "o-", label=f"eta={eta:g}")
ax[0].set_xlabel("p_fail")
ax[0].set_ylabel("maintenance rate")
ax[0].set_ylim(-0.05, 1.05)
ax[0].legend(fontsize=7)

eta_axis = sorted(by_eta)
hf = []
for eta in eta_axis:
    cell = min(by_eta[eta], key=lambda r: float(r["p_fail"]))
    hf.append(float(cell["mean_hf_fraction"]))
ax[1].plot(eta_axis, hf, "s-")
ax[1].set_xlabel("eta")
ax[1].set_ylabel("mean energy share above 10 Hz")
fig.tight_layout()
fig.savefig(os.path.join(here, "sweep.png"), dpi=120)
)";

const char* kSpectrumPlotScript = R"(#!/usr/bin/env python3
"""Amplitude spectra written by `connmaint spectrum`."""
import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
fig, ax = plt.subplots(figsize=(8, 4))
for path in sorted(glob.glob(os.path.join(here, "*_spectrum.csv"))):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    freq = [float(r["freq_hz"]) for r in rows][1:]
    mag = [float(r["magnitude"]) for r in rows][1:]
    ax.semilogy(freq, mag, lw=0.7, label=os.path.basename(path)[:-13])
ax.axvline(10.0, color="r", ls=":")
ax.set_xlabel("f [Hz]")
ax.set_ylabel("amplitude")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(here, "spectrum.png"), dpi=120)
)";

void write_script(const fs::path& path, const char* text) {
  write_file(path, text);
  std::error_code ec;
  fs::permissions(path, fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                  fs::perm_options::add, ec);
}

struct RunRow {
  std::uint64_t seed = 0;
  RunMetrics metrics;
  bool aborted = false;
  std::string error;
};

void write_run_rows(std::ostream& os, std::span<const RunRow> rows) {
  os << "seed,outcome,t_loss,lambda2_min,t_min,xi,xi_prime,xi_bar,hf_fraction,aborted\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      os << r.seed << ",error,,,,,,,,\n";
      continue;
    }
    const RunMetrics& m = r.metrics;
    os << r.seed << ',' << outcome_label(m.outcome) << ','
       << (m.outcome == Outcome::lost ? format_double(m.t_loss) : std::string()) << ','
       << format_double(m.lambda2_min) << ',' << format_double(m.t_min) << ','
       << format_double(m.xi) << ',' << format_double(m.xi_prime) << ','
       << format_double(m.xi_bar) << ',' << format_double(m.hf_fraction) << ','
       << (r.aborted ? 1 : 0) << '\n';
  }
}

}  // namespace

std::string grid_label(double v) { return fmt::format("{:g}", v); }

int cmd_run(const RunRequest& request, std::ostream& log) {
  try {
    request.config.validate();
    if (request.seeds.empty()) throw ConfigError("no seeds given");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const fs::path& out = request.out_dir;
    make_dir(out / "traces");
    make_dir(out / "spectra");
    const unsigned workers = resolve_workers(request.workers, request.seeds.size());
    write_file(out / "config.txt", format_config(request.config));
    write_seeds(out, request.seeds);
    write_metadata(out, request.command_line, workers);

    std::vector<RunRow> rows(request.seeds.size());
    parallel_for(rows.size(), workers, nullptr, [&](std::size_t k) {
      RunRow& row = rows[k];
      row.seed = request.seeds[k];
      try {
        const RunResult result = run_scenario(request.config.with_seed(row.seed));
        row.metrics = compute_metrics(result);
        row.aborted = result.aborted;
        write_with(out / "traces" / trace_name(row.seed),
                   [&](std::ostream& os) { write_trace_csv(os, result); });
        if (result.trace.size() >= 2) {
          const SpectrumResult s = spectrum(control_effort_series(result), result.config.dt);
          write_with(out / "spectra" / fmt::format("spectrum_seed{}.csv", row.seed),
                     [&](std::ostream& os) { write_spectrum_csv(os, s); });
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    });

    write_with(out / "runs.csv", [&](std::ostream& os) { write_run_rows(os, rows); });
    std::size_t maintained = 0, failed = 0;
    std::string text = fmt::format("{:>8} {:>11} {:>9} {:>12} {:>10} {:>10} {:>10}\n", "seed",
                                   "outcome", "t_loss", "lambda2_min", "xi", "xi_bar", "hf");
    for (const auto& r : rows) {
      if (!r.error.empty()) {
        ++failed;
        text += fmt::format("{:>8} {:>11}  {}\n", r.seed, "error", r.error);
        continue;
      }
      const RunMetrics& m = r.metrics;
      if (m.outcome == Outcome::maintained) ++maintained;
      text += fmt::format("{:>8} {:>11} {:>9} {:>12.5f} {:>10.5f} {:>10.5f} {:>10.6f}\n", r.seed,
                          outcome_label(m.outcome),
                          m.outcome == Outcome::lost ? fmt::format("{:.3f}", m.t_loss) : "-",
                          m.lambda2_min, m.xi, m.xi_bar, m.hf_fraction);
    }
    text += fmt::format("maintained {}/{}\n", maintained, rows.size() - failed);
    write_file(out / "summary.txt", text);
    write_script(out / "plot_run.py", kRunPlotScript);
    log << text;
    if (failed > 0) {
      log << "error: " << failed << " run(s) failed\n";
      return kExitRuntime;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_sweep(const SweepRequest& request, std::ostream& log) {
  std::vector<CellKey> cells;
  try {
    request.config.validate();
    if (request.seeds.empty()) throw ConfigError("no seeds given");
    if (request.p_fail.empty() || request.eta.empty()) throw ConfigError("empty sweep grid");
    for (double p : request.p_fail) {
      for (double e : request.eta) {
        ScenarioConfig probe = request.config;
        probe.disturbance.p_fail = p;
        probe.disturbance.eta = e;
        probe.validate();
        cells.push_back({p, e});
      }
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const fs::path& out = request.out_dir;
    make_dir(out);
    const std::size_t n_seeds = request.seeds.size();
    const std::size_t n_jobs = cells.size() * n_seeds;
    const unsigned workers = resolve_workers(request.workers, n_jobs);
    write_file(out / "config.txt", format_config(request.config));
    write_seeds(out, request.seeds);
    {
      std::string grid = "p_fail =";
      for (std::size_t k = 0; k < request.p_fail.size(); ++k)
        grid += (k ? ", " : " ") + format_double(request.p_fail[k]);
      grid += "\neta =";
      for (std::size_t k = 0; k < request.eta.size(); ++k)
        grid += (k ? ", " : " ") + format_double(request.eta[k]);
      write_file(out / "grid.txt", grid + '\n');
    }
    write_metadata(out, request.command_line, workers);

    // Undisturbed twins, one per seed, shared by every disturbed cell.
    const bool any_disturbed = std::any_of(cells.begin(), cells.end(), [](const CellKey& c) {
      return c.p_fail > 0.0 || c.eta > 0.0;
    });
    const bool need_reference = request.config.reference_run && any_disturbed;
    std::vector<std::vector<double>> reference(n_seeds);
    std::vector<std::string> reference_error(n_seeds);
    if (need_reference) {
      ScenarioConfig base = undisturbed(request.config);
      parallel_for(n_seeds, workers, request.stop, [&](std::size_t k) {
        try {
          const RunResult r = simulate(base.with_seed(request.seeds[k]));
          for (const auto& rec : r.trace) reference[k].push_back(rec.lambda2_true);
        } catch (const std::exception& e) {
          reference_error[k] = e.what();
        }
      });
    }

    std::vector<RunRow> rows(n_jobs);
    std::vector<char> done(n_jobs, 0);
    const bool stopped_early = request.stop != nullptr && request.stop->load();
    if (!stopped_early) {
      parallel_for(n_jobs, workers, request.stop, [&](std::size_t job) {
        const CellKey& cell = cells[job / n_seeds];
        const std::size_t si = job % n_seeds;
        RunRow& row = rows[job];
        row.seed = request.seeds[si];
        try {
          if (!reference_error[si].empty()) throw std::runtime_error(reference_error[si]);
          ScenarioConfig cfg = request.config.with_seed(row.seed);
          cfg.disturbance.p_fail = cell.p_fail;
          cfg.disturbance.eta = cell.eta;
          RunResult result = simulate(cfg);
          if (need_reference && cfg.disturbance.active()) {
            const auto& ref = reference[si];
            for (std::size_t k = 0; k < result.trace.size(); ++k) {
              result.trace[k].lambda2_bar =
                  k < ref.size() ? ref[k] : std::numeric_limits<double>::quiet_NaN();
            }
          }
          row.metrics = compute_metrics(result);
          row.aborted = result.aborted;
          if (request.write_traces) {
            const fs::path dir = out / "runs" /
                                 fmt::format("p{}_eta{}", grid_label(cell.p_fail), grid_label(cell.eta));
            make_dir(dir);
            write_with(dir / trace_name(row.seed),
                       [&](std::ostream& os) { write_trace_csv(os, result); });
          }
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        done[job] = 1;
      });
    }

    std::map<CellKey, CellInput> grouped;
    std::size_t failed = 0, completed = 0;
    std::ostringstream runs_csv;
    runs_csv << "p_fail,eta,seed,outcome,t_loss,lambda2_min,t_min,xi,xi_prime,xi_bar,hf_fraction,"
                "aborted\n";
    for (std::size_t job = 0; job < n_jobs; ++job) {
      const CellKey& cell = cells[job / n_seeds];
      CellInput& input = grouped[cell];
      input.expected = n_seeds;
      if (!done[job]) continue;
      const RunRow& row = rows[job];
      std::ostringstream line;
      write_run_rows(line, std::span<const RunRow>(&row, 1));
      std::string body = line.str();
      body.erase(0, body.find('\n') + 1);
      runs_csv << format_double(cell.p_fail) << ',' << format_double(cell.eta) << ',' << body;
      if (!row.error.empty()) {
        ++failed;
        continue;
      }
      ++completed;
      input.runs.push_back(row.metrics);
    }
    const auto summary = sweep_summary(grouped);
    write_file(out / "runs.csv", runs_csv.str());
    write_with(out / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, summary); });
    write_with(out / "summary.txt", [&](std::ostream& os) { write_summary_text(os, summary); });
    write_script(out / "plot_sweep.py", kSweepPlotScript);
    write_summary_text(log, summary);

    if (completed + failed < n_jobs) {
      log << "interrupted: " << completed + failed << " of " << n_jobs
          << " runs finished; incomplete cells are marked in the summary\n";
      return kExitRuntime;
    }
    if (failed > 0) {
      log << "error: " << failed << " run(s) failed, see runs.csv\n";
      return kExitRuntime;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_spectrum(const SpectrumRequest& request, std::ostream& log) {
  if (request.traces.empty()) {
    log << "error: no trace files given\n";
    return kExitUsage;
  }
  if (!(request.threshold_hz > 0.0)) {
    log << "error: threshold must be positive\n";
    return kExitUsage;
  }
  try {
    make_dir(request.out_dir);
    write_metadata(request.out_dir, request.command_line, 1);
    std::string inputs = fmt::format("threshold_hz = {}\n", format_double(request.threshold_hz));
    std::string table = "trace,samples,dt,hf_fraction,time_energy,spectral_energy\n";
    for (const auto& path : request.traces) {
      std::ifstream is(path);
      if (!is) throw OutputError("cannot read " + path.string());
      const TraceColumns cols = read_trace_columns(is);
      const SpectrumResult s = spectrum_from_times(cols.t, cols.uc_norm, request.threshold_hz);
      const std::string stem = path.stem().string();
      write_with(request.out_dir / (stem + "_spectrum.csv"),
                 [&](std::ostream& os) { write_spectrum_csv(os, s); });
      const double dt = (cols.t.back() - cols.t.front()) / static_cast<double>(cols.t.size() - 1);
      table += fmt::format("{},{},{},{},{},{}\n", stem, cols.t.size(), format_double(dt),
                           format_double(s.hf_fraction), format_double(s.time_energy),
                           format_double(s.spectral_energy));
      inputs += "trace = " + path.string() + '\n';
      log << fmt::format("{}: {} samples, energy share above {:g} Hz = {:.6f}\n", stem,
                         cols.t.size(), request.threshold_hz, s.hf_fraction);
    }
    write_file(request.out_dir / "inputs.txt", inputs);
    write_file(request.out_dir / "spectrum_summary.csv", table);
    write_script(request.out_dir / "plot_spectrum.py", kSpectrumPlotScript);
    return kExitOk;
  } catch (const InvalidParameter& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_validate(std::ostream& log) {
  bool all = true;
  try {
    for (const CheckResult& r : run_validation()) {
      log << (r.passed ? "PASS " : "FAIL ") << r.group << ": " << r.detail << '\n';
      all = all && r.passed;
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return all ? kExitOk : kExitValidation;
}

}  // namespace connmaint
