#pragma once

#include <functional>

#include "readout/config.hpp"
#include "readout/signal.hpp"

namespace readout {

// A probability distribution over the filter output, evaluable pointwise.
// Outside [support_lo, support_hi] the density is negligible (< 1e-20 of the
// total mass); quadratures and threshold scans should stay inside.
struct DistPair {
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  double support_lo = 0.0;
  double support_hi = 0.0;
};

struct StateDists {
  DistPair minus;
  DistPair plus;
};

// Normalization masses of the three pulse-edge bin classes: a bin holding
// both edges, only the turn-on edge, or only the turn-off edge.
struct BinNormConstants {
  double both_edges = 0.0;  // in (0, 1)
  double onset = 0.0;       // in (0, rate/(rate-1)] for rate > 1
  double turnoff = 0.0;     // 1 - e^{-tau_b}
};

// Probabilities of the pulse landing fully inside the measurement window,
// starting inside but ending beyond it, or missing it entirely. Sum to 1.
struct RegionWeights {
  double contained = 0.0;
  double overrun = 0.0;
  double missed = 0.0;
};

// Distributions of the bin average for the three pulse-edge bin classes.
struct PulseBinDists {
  DistPair both_edges;
  DistPair onset_only;
  DistPair turnoff_only;
};

double bin_pdf(double psi, double phi, double sigma);
double bin_cdf(double psi, double phi, double sigma);

BinNormConstants norm_constants(double rate, double tau_b);

// Probability that the turn-on edge lands in bin m and the turn-off edge in
// bin n (bins of width tau_b on an unbounded grid).
double cell_prob(int m, int n, const TurnOnRate& rate, double tau_b);

RegionWeights region_weights(const TurnOnRate& rate, double tau_m);

// Exponentially tilted average of the bin noise kernel over the range of bin
// means swept by an edge crossing the bin:
//   pdf(psi)  = int_{-1}^{1} e^{-alpha tau_b (u+1)/2} gauss_pdf(psi; u, sigma) du
//   mass(psi) = (alpha tau_b / 2) int_{-1}^{1} e^{-alpha tau_b (u+1)/2} gauss_cdf(psi; u, sigma) du
// mass(+inf) = 1 - e^{-alpha tau_b}; both are evaluated cancellation-free for
// any alpha, including the large negative values of the fast turn-on regime.
double tilted_window_pdf(double psi, double alpha, double tau_b, double snr);
double tilted_window_mass(double psi, double alpha, double tau_b, double snr);

PulseBinDists avg_bin_dists(const TurnOnRate& rate, double tau_b, double snr);

// Peak statistic (max of bin averages) distributions. The scalar evaluators
// with finite-rate formulas reject an infinite rate; peak_dists/boxcar_dists
// dispatch to the limit forms automatically.
double peak_pdf_minus(double psi, const ReadoutConfig& cfg);
double peak_cdf_minus(double psi, const ReadoutConfig& cfg);
double peak_pdf_plus(double psi, const ReadoutConfig& cfg);
double peak_cdf_plus(double psi, const ReadoutConfig& cfg);

// Conditional peak density given the edge-cell (m, n); requires integral
// n_bins and a finite rate.
double peak_pdf_cell(double psi, int m, int n, const ReadoutConfig& cfg);

// Conditional peak density and CDF for fixed pulse edges (integral n_bins).
double peak_pdf_fixed_times(double psi, QubitState state, const PulseTimes& pulse,
                            const ReadoutConfig& cfg);
double peak_cdf_fixed_times(double psi, QubitState state, const PulseTimes& pulse,
                            const ReadoutConfig& cfg);

// Boxcar statistic (full-window average; single bin of width tau_m).
double boxcar_pdf_minus(double psi, const ReadoutConfig& cfg);
double boxcar_cdf_minus(double psi, const ReadoutConfig& cfg);
double boxcar_pdf_plus(double psi, const ReadoutConfig& cfg);
double boxcar_cdf_plus(double psi, const ReadoutConfig& cfg);

StateDists peak_dists(const ReadoutConfig& cfg);
StateDists boxcar_dists(const ReadoutConfig& cfg);

// Infinite-rate limit forms; the config's rate must be INFINITE.
StateDists limit_peak_dists(const ReadoutConfig& cfg);
StateDists limit_boxcar_dists(const ReadoutConfig& cfg);

// Half-width of the evaluable support in units of sigma.
inline constexpr double kSupportSigmas = 10.0;

}  // namespace readout
