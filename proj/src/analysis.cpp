#include "connmaint/analysis.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

namespace connmaint {

double lambda2_tilde(std::span<const double> nus, const EstimatorGains& gains) {
  if (nus.empty()) return 0.0;
  double sq = 0.0;
  for (double v : nus) sq += v * v;
  return (gains.k3 / gains.k2) * (1.0 - sq / static_cast<double>(nus.size()));
}

std::vector<double> control_effort_series(const RunResult& result) {
  std::vector<double> out;
  out.reserve(result.trace.size());
  for (const auto& r : result.trace) out.push_back(r.u_c_norm);
  return out;
}

RunMetrics compute_metrics(const RunResult& result, const RunResult* reference, double transient) {
  if (result.trace.empty()) throw InvalidParameter("compute_metrics: empty trace");
  RunMetrics m;
  m.outcome = result.outcome;
  m.t_loss = result.t_loss;
  m.lambda2_min = result.trace.front().lambda2_true;
  m.t_min = result.trace.front().t;
  const EstimatorGains& gains = result.config.gains;
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    const TraceRecord& r = result.trace[k];
    if (r.lambda2_true < m.lambda2_min) {
      m.lambda2_min = r.lambda2_true;
      m.t_min = r.t;
    }
    if (reference == nullptr) {
      if (std::isfinite(r.lambda2_bar))
        m.xi_bar = std::max(m.xi_bar, std::abs(r.lambda2_true - r.lambda2_bar));
    } else if (k < reference->trace.size()) {
      m.xi_bar = std::max(m.xi_bar, std::abs(r.lambda2_true - reference->trace[k].lambda2_true));
    }
    if (!r.estimates_valid || r.t < transient) continue;
    const double tilde = lambda2_tilde(r.nu_est, gains);
    for (double est : r.lambda2_est) {
      m.xi = std::max(m.xi, std::abs(est - r.lambda2_true));
      m.xi_prime = std::max(m.xi_prime, std::abs(est - tilde));
    }
  }
  if (result.trace.size() >= 2) {
    m.hf_fraction = spectrum(control_effort_series(result), result.config.dt).hf_fraction;
  }
  return m;
}

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<std::complex<double>> dft(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> out(x.size());
  if (n == 0) return out;
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> half(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(half.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  for (int k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] =
        k <= n / 2 ? half[static_cast<std::size_t>(k)] : std::conj(half[static_cast<std::size_t>(n - k)]);
  }
  return out;
}

std::vector<double> inverse_dft(std::span<const std::complex<double>> spectrum) {
  const int n = static_cast<int>(spectrum.size());
  std::vector<double> out(spectrum.size());
  if (n == 0) return out;
  std::vector<std::complex<double>> half(spectrum.begin(), spectrum.begin() + (n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(half.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

SpectrumResult spectrum(std::span<const double> series, double dt, double threshold_hz) {
  if (series.size() < 2) throw InvalidParameter("spectrum: need at least two samples");
  if (!(dt > 0.0)) throw InvalidParameter("spectrum: sample period must be positive");
  const std::size_t n = series.size();
  const auto bins = dft(series);
  const double fs = 1.0 / dt;
  const double nd = static_cast<double>(n);

  SpectrumResult r;
  r.threshold_hz = threshold_hz;
  for (double v : series) r.time_energy += v * v;

  double total = 0.0, high = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::norm(bins[k]);
    const double f = static_cast<double>(std::min(k, n - k)) * fs / nd;
    total += e;
    if (f > threshold_hz) high += e;
  }
  r.spectral_energy = total / nd;
  r.hf_fraction = total > 0.0 ? high / total : 0.0;

  const std::size_t half = n / 2;
  r.freqs.resize(half + 1);
  r.magnitude.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    r.freqs[k] = static_cast<double>(k) * fs / nd;
    const bool unpaired = k == 0 || (n % 2 == 0 && k == half);
    r.magnitude[k] = (unpaired ? 1.0 : 2.0) * std::abs(bins[k]) / nd;
  }
  return r;
}

SpectrumResult spectrum_from_times(std::span<const double> times, std::span<const double> series,
                                   double threshold_hz) {
  if (times.size() != series.size()) throw InvalidParameter("spectrum: time/value length mismatch");
  if (times.size() < 2) throw InvalidParameter("spectrum: need at least two samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs((times[k] - times[k - 1]) - dt) > 1e-6 * dt) {
      throw InvalidParameter("spectrum: series is not uniformly sampled near t=" +
                             format_double(times[k]));
    }
  }
  return spectrum(series, dt, threshold_hz);
}

std::vector<CellSummary> sweep_summary(const std::map<CellKey, CellInput>& cells) {
  std::vector<CellSummary> rows;
  rows.reserve(cells.size());
  for (const auto& [key, cell] : cells) {
    CellSummary s;
    s.key = key;
    s.runs = cell.runs.size();
    s.expected = std::max(cell.expected, cell.runs.size());
    s.complete = s.runs == s.expected && s.runs > 0;
    for (const auto& m : cell.runs) {
      if (m.outcome == Outcome::maintained) ++s.maintained;
      s.mean_lambda2_min += m.lambda2_min;
      s.mean_xi += m.xi;
      s.mean_hf_fraction += m.hf_fraction;
    }
    if (s.runs > 0) {
      const double n = static_cast<double>(s.runs);
      s.maintenance_rate = static_cast<double>(s.maintained) / n;
      s.mean_lambda2_min /= n;
      s.mean_xi /= n;
      s.mean_hf_fraction /= n;
    }
    rows.push_back(s);
  }
  return rows;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

namespace {

std::string axis_name(std::size_t k) {
  static const char* names[] = {"x", "y", "z"};
  return k < 3 ? names[k] : "c" + std::to_string(k + 1);
}

}  // namespace

void write_trace_csv(std::ostream& os, const RunResult& result) {
  const std::size_t n = result.config.n_agents;
  const std::size_t dim = result.config.dim;
  os << "t,lambda2,lambda2_bar";
  for (std::size_t i = 0; i < n; ++i) os << ",lambda2_i_" << (i + 1);
  os << ",uc_norm";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) os << ',' << axis_name(k) << '_' << (i + 1);
  os << ",connected\n";
  for (const auto& r : result.trace) {
    os << format_double(r.t) << ',' << format_double(r.lambda2_true) << ','
       << format_double(r.lambda2_bar);
    for (double v : r.lambda2_est) os << ',' << format_double(v);
    os << ',' << format_double(r.u_c_norm);
    for (const auto& p : r.positions)
      for (Eigen::Index k = 0; k < p.size(); ++k) os << ',' << format_double(p(k));
    os << ',' << (r.connected ? 1 : 0) << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const SpectrumResult& s) {
  os << "freq_hz,magnitude\n";
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    os << format_double(s.freqs[k]) << ',' << format_double(s.magnitude[k]) << '\n';
  }
}

void write_summary_csv(std::ostream& os, std::span<const CellSummary> rows) {
  os << "p_fail,eta,runs,expected,maintained,maintenance_rate,mean_lambda2_min,mean_xi,"
        "mean_hf_fraction,complete\n";
  for (const auto& r : rows) {
    os << format_double(r.key.p_fail) << ',' << format_double(r.key.eta) << ',' << r.runs << ','
       << r.expected << ',' << r.maintained << ',' << format_double(r.maintenance_rate) << ','
       << format_double(r.mean_lambda2_min) << ',' << format_double(r.mean_xi) << ','
       << format_double(r.mean_hf_fraction) << ',' << (r.complete ? 1 : 0) << '\n';
  }
}

void write_summary_text(std::ostream& os, std::span<const CellSummary> rows) {
  os << fmt::format("{:>7} {:>6} {:>9} {:>9} {:>13} {:>10} {:>10}  {}\n", "p_fail", "eta",
                    "runs", "rate", "mean_l2_min", "mean_xi", "mean_hf", "status");
  for (const auto& r : rows) {
    os << fmt::format("{:>7.3f} {:>6.2f} {:>4}/{:<4} {:>9.3f} {:>13.5f} {:>10.5f} {:>10.6f}  {}\n",
                      r.key.p_fail, r.key.eta, r.runs, r.expected, r.maintenance_rate,
                      r.mean_lambda2_min, r.mean_xi, r.mean_hf_fraction,
                      r.complete ? "complete" : "INCOMPLETE");
  }
}

TraceColumns read_trace_columns(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidParameter("trace CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidParameter("trace CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ct = find("t");
  const std::size_t cu = find("uc_norm");
  TraceColumns out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw InvalidParameter("trace CSV row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " fields, expected " +
                             std::to_string(header.size()));
    }
    out.t.push_back(std::stod(cells[ct]));
    out.uc_norm.push_back(std::stod(cells[cu]));
  }
  return out;
}

}  // namespace connmaint
