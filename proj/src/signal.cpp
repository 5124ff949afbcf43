#include "readout/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace readout {

namespace {

void require_integral_bins(const ReadoutConfig& cfg) {
  const double rounded = std::round(cfg.n_bins);
  if (std::abs(cfg.n_bins - rounded) > 1e-9 * std::max(1.0, std::abs(cfg.n_bins))) {
    throw std::invalid_argument("trace generation requires an integral bin count");
  }
}

}  // namespace

PulseTimes sample_pulse(const TurnOnRate& rate, Rng& rng) {
  PulseTimes pulse;
  pulse.on = rate.is_infinite() ? 0.0 : rng.exponential(1.0 / rate.value());
  pulse.off = pulse.on + rng.exponential(1.0);
  return pulse;
}

double mean_signal(double t, QubitState state, const PulseTimes& pulse) noexcept {
  if (state == QubitState::kPlus && t >= pulse.on && t < pulse.off) return 1.0;
  return -1.0;
}

std::vector<double> bin_mean_values(const ReadoutConfig& cfg, QubitState state,
                                    const PulseTimes& pulse) {
  cfg.validate();
  require_integral_bins(cfg);
  const auto n = static_cast<std::size_t>(std::llround(cfg.n_bins));
  const double tau_b = cfg.tau_b();

  std::vector<double> means(n, -1.0);
  if (state == QubitState::kPlus) {
    for (std::size_t l = 0; l < n; ++l) {
      const double lo = static_cast<double>(l) * tau_b;
      const double hi = lo + tau_b;
      const double overlap =
          std::max(0.0, std::min(pulse.off, hi) - std::max(pulse.on, lo));
      means[l] = 2.0 * overlap / tau_b - 1.0;
    }
  }
  return means;
}

BinnedTrace generate_binned_trace(const ReadoutConfig& cfg, QubitState state, Rng& rng) {
  cfg.validate();
  require_integral_bins(cfg);

  PulseTimes pulse;
  if (state == QubitState::kPlus) pulse = sample_pulse(cfg.rate, rng);

  BinnedTrace trace;
  trace.config = cfg;
  trace.values = bin_mean_values(cfg, state, pulse);
  const double sigma = cfg.sigma();
  for (double& v : trace.values) v += sigma * rng.normal();
  return trace;
}

ContinuousTrace generate_continuous_trace(const ReadoutConfig& cfg, double dt,
                                          QubitState state, Rng& rng) {
  cfg.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must be positive and finite");
  }
  if (dt > cfg.tau_b() / 10.0 + 1e-12) {
    throw std::invalid_argument("dt too coarse: must resolve the bin width (dt <= tau_b/10)");
  }
  if (!cfg.rate.is_infinite() && dt > 0.1 / cfg.rate.value() + 1e-12) {
    throw std::invalid_argument("dt too coarse: must resolve the turn-on time scale");
  }

  const auto n = static_cast<std::size_t>(std::llround(cfg.tau_m / dt));
  if (n == 0 || std::abs(static_cast<double>(n) * dt - cfg.tau_m) > 1e-9 * cfg.tau_m) {
    throw std::invalid_argument("dt must divide tau_m");
  }
  const double noise_sigma = std::sqrt(1.0 / (cfg.snr * dt));

  PulseTimes pulse;
  if (state == QubitState::kPlus) pulse = sample_pulse(cfg.rate, rng);

  ContinuousTrace trace;
  trace.dt = dt;
  trace.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    trace.samples[k] = mean_signal(t, state, pulse) + noise_sigma * rng.normal();
  }
  return trace;
}

double default_trace_dt(const ReadoutConfig& cfg) noexcept {
  double dt = cfg.tau_b();
  if (!cfg.rate.is_infinite()) dt = std::min(dt, 1.0 / cfg.rate.value());
  return std::max(dt / 20.0, 1e-4);
}

double peak_statistic(const BinnedTrace& trace) {
  if (trace.values.empty()) throw std::invalid_argument("empty trace");
  return *std::max_element(trace.values.begin(), trace.values.end());
}

double boxcar_statistic(const BinnedTrace& trace) {
  if (trace.values.empty()) throw std::invalid_argument("empty trace");
  double sum = 0.0;
  for (double v : trace.values) sum += v;
  return sum / static_cast<double>(trace.values.size());
}

BinnedTrace block_average(const ContinuousTrace& trace, const ReadoutConfig& cfg) {
  cfg.validate();
  require_integral_bins(cfg);
  const auto n_bins = static_cast<std::size_t>(std::llround(cfg.n_bins));
  if (trace.samples.empty() || n_bins == 0 || trace.samples.size() % n_bins != 0) {
    throw std::invalid_argument("sample count must be a multiple of the bin count");
  }
  const std::size_t per_bin = trace.samples.size() / n_bins;

  BinnedTrace out;
  out.config = cfg;
  out.values.resize(n_bins);
  for (std::size_t l = 0; l < n_bins; ++l) {
    double sum = 0.0;
    for (std::size_t k = 0; k < per_bin; ++k) sum += trace.samples[l * per_bin + k];
    out.values[l] = sum / static_cast<double>(per_bin);
  }
  return out;
}

}  // namespace readout
