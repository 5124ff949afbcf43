#pragma once

#include <vector>

#include "readout/config.hpp"
#include "readout/rng.hpp"

namespace readout {

// Pulse edge times for a single PLUS shot: the signal sits at -1, jumps to +1
// on [on, off), and returns to -1. Widths are exponential with mean 1; the
// onset is exponential with mean 1/rate (0 exactly for the infinite rate).
struct PulseTimes {
  double on = 0.0;
  double off = 0.0;
  double width() const noexcept { return off - on; }
};

PulseTimes sample_pulse(const TurnOnRate& rate, Rng& rng);

// Noise-free signal at time t. MINUS shots never pulse.
double mean_signal(double t, QubitState state, const PulseTimes& pulse) noexcept;

// One record of per-bin averages. Bin l covers [l*tau_b, (l+1)*tau_b); the
// stored value is the exact time average of the mean signal over the bin plus
// Gaussian noise of variance 1 / (snr * tau_b).
struct BinnedTrace {
  ReadoutConfig config;
  std::vector<double> values;
};

// Uniformly sampled record: samples[k] is the signal on [k*dt, (k+1)*dt),
// evaluated at the left edge, plus Gaussian noise of variance 1 / (snr * dt).
struct ContinuousTrace {
  double dt = 0.0;
  std::vector<double> samples;
  double duration() const noexcept { return dt * static_cast<double>(samples.size()); }
};

// Noise-free per-bin time averages of the mean signal for a fixed pulse.
std::vector<double> bin_mean_values(const ReadoutConfig& cfg, QubitState state,
                                    const PulseTimes& pulse);

BinnedTrace generate_binned_trace(const ReadoutConfig& cfg, QubitState state, Rng& rng);
ContinuousTrace generate_continuous_trace(const ReadoutConfig& cfg, double dt,
                                          QubitState state, Rng& rng);

// Default sampling step: fine enough to resolve both the turn-on edge and the
// bin width, floored so runs stay tractable.
double default_trace_dt(const ReadoutConfig& cfg) noexcept;

double peak_statistic(const BinnedTrace& trace);
double boxcar_statistic(const BinnedTrace& trace);

// Collapse a continuous trace onto the config's bin grid by averaging the
// samples that fall in each bin. Requires the bin width to be a multiple of dt.
BinnedTrace block_average(const ContinuousTrace& trace, const ReadoutConfig& cfg);

}  // namespace readout
