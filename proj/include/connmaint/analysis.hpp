#pragma once

// Post-processing of run traces: connectivity minima, empirical estimation
// error bounds, control-effort spectra and sweep tables.

#include "connmaint/engine.hpp"

#include <complex>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>

namespace connmaint {

struct RunMetrics {
  double lambda2_min = 0.0;
  double t_min = 0.0;
  double xi = 0.0;        // max over valid records of |lambda2_i - lambda2|
  double xi_prime = 0.0;  // max over valid records of |lambda2_i - lambda2_tilde|
  double xi_bar = 0.0;    // max |lambda2 - lambda2_bar|
  Outcome outcome = Outcome::maintained;
  double t_loss = 0.0;
  double hf_fraction = 0.0;
};

// lambda2_tilde from recorded eigenvector estimates with the true average:
//   (k3/k2) (1 - Ave(v^2))
double lambda2_tilde(std::span<const double> nus, const EstimatorGains& gains);

// Error bounds skip records whose estimates are no longer valid. transient
// excludes the first seconds of the run from xi and xi_prime. Without an
// explicit reference, xi_bar uses the trace's own lambda2_bar column.
RunMetrics compute_metrics(const RunResult& result, const RunResult* reference = nullptr,
                           double transient = 0.0);

struct SpectrumResult {
  std::vector<double> freqs;      // Hz, 0 .. Nyquist
  std::vector<double> magnitude;  // single-sided amplitude spectrum
  double hf_fraction = 0.0;       // share of energy strictly above threshold_hz
  double threshold_hz = 10.0;
  double time_energy = 0.0;       // sum x^2
  double spectral_energy = 0.0;   // sum |X_k|^2 / n
};

// Discrete Fourier transform of a real series, all n bins.
std::vector<std::complex<double>> dft(std::span<const double> x);
// Inverse of dft(); returns the real part.
std::vector<double> inverse_dft(std::span<const std::complex<double>> spectrum);

// Rectangular window, no padding.
SpectrumResult spectrum(std::span<const double> series, double dt, double threshold_hz = 10.0);

// Checks uniform spacing of sample times, then calls spectrum().
SpectrumResult spectrum_from_times(std::span<const double> times, std::span<const double> series,
                                   double threshold_hz = 10.0);

std::vector<double> control_effort_series(const RunResult& result);

struct CellKey {
  double p_fail = 0.0;
  double eta = 0.0;
  auto operator<=>(const CellKey&) const = default;
};

struct CellInput {
  std::size_t expected = 0;  // runs scheduled for the cell
  std::vector<RunMetrics> runs;
};

struct CellSummary {
  CellKey key;
  std::size_t runs = 0;
  std::size_t expected = 0;
  std::size_t maintained = 0;
  double maintenance_rate = 0.0;
  double mean_lambda2_min = 0.0;
  double mean_xi = 0.0;
  double mean_hf_fraction = 0.0;
  bool complete = true;
};

std::vector<CellSummary> sweep_summary(const std::map<CellKey, CellInput>& cells);

// CSV and text writers. Floats carry 17 significant digits.
std::string format_double(double v);
void write_trace_csv(std::ostream& os, const RunResult& result);
void write_spectrum_csv(std::ostream& os, const SpectrumResult& spectrum);
void write_summary_csv(std::ostream& os, std::span<const CellSummary> rows);
void write_summary_text(std::ostream& os, std::span<const CellSummary> rows);

// Minimal reader for the trace CSV layout: returns the t and uc_norm columns.
struct TraceColumns {
  std::vector<double> t;
  std::vector<double> uc_norm;
};
TraceColumns read_trace_columns(std::istream& is);

}  // namespace connmaint
