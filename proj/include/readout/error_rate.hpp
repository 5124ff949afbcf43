#pragma once

#include <vector>

#include "readout/analytic.hpp"
#include "readout/config.hpp"

namespace readout {

enum class FilterKind { kBoxcar, kPeak };

struct ErrorRates {
  double eps_plus = 0.0;   // P(declare MINUS | PLUS)
  double eps_minus = 0.0;  // P(declare PLUS | MINUS)
  double eps = 0.0;        // balanced average
};

struct OptimizerProbe {
  double tau_m = 0.0;
  double n_bins = 0.0;
  double eps = 0.0;
};

struct OptimizationResult {
  double nu = 0.0;
  double tau_m = 0.0;
  double n_bins = 0.0;  // continuous optimum
  double eps = 0.0;
  // Best integral bin count adjacent to the continuous optimum, re-solved.
  double n_bins_round = 0.0;
  double nu_round = 0.0;
  double eps_round = 0.0;
  std::vector<OptimizerProbe> trace;
};

struct OptimizeRanges {
  double tau_m_lo = 1e-4;
  double tau_m_hi = 20.0;
  double n_bins_lo = 1.0;
  double n_bins_hi = 500.0;
};

struct ScalingRow {
  double snr = 0.0;
  double eps = 0.0;
  double nu = 0.0;
  double tau_m = 0.0;
  double n_bins = 0.0;
  double eps_sqrt_scaled = 0.0;    // eps * sqrt(snr) / ln(snr)
  double eps_linear_scaled = 0.0;  // eps * snr / ln(snr)
};

// Decision threshold nu solving pdf_plus(nu) = ratio * pdf_minus(nu), where
// ratio is the prior odds P(MINUS)/P(PLUS). Among multiple crossings, returns
// the one with the lowest prior-weighted error. Throws when the densities
// never cross inside the joint support (degenerate distributions).
double solve_threshold(const DistPair& minus, const DistPair& plus, double prior_ratio);

// Conditional and balanced-average error rates of the rule "declare PLUS when
// the statistic exceeds nu".
ErrorRates error_rates(const DistPair& minus, const DistPair& plus, double nu);

// Closed-form balanced error rate of the boxcar filter, assembled from the
// edge-class mass functions rather than by integrating a density. Requires a
// finite turn-on rate.
double boxcar_error_analytic(double nu, const ReadoutConfig& cfg);

// Leading-log large-snr expansions of the optimal boxcar threshold and error.
// Throw std::domain_error outside the asymptotic regime (a log argument <= 1).
double asymptotic_threshold(const ReadoutConfig& cfg);
double asymptotic_error(const ReadoutConfig& cfg);

// Smallest cycling-transition degeneracy for which readout back-action is
// negligible, valid in the sub-unit-noise regime (sigma < 1): snr / 4.
double degeneracy_threshold(double snr);

// Minimizes the balanced error over (tau_m, n_bins) with the threshold solved
// exactly at every probe. n_bins is fixed at 1 for the boxcar filter and
// continuous for the peak filter; a coarse multistart grid feeds a simplex
// refinement. Deterministic and single-threaded.
OptimizationResult optimize_filter(FilterKind filter, const TurnOnRate& rate, double snr,
                                   const OptimizeRanges& ranges = {});

// Error rate at the optimal threshold for fixed (tau_m, n_bins).
ErrorRates filter_error_at(FilterKind filter, const ReadoutConfig& cfg, double* nu_out = nullptr);

// Optimized filter across an snr grid, with companion scaled-error columns.
// Grid points run in parallel on up to `threads` workers.
std::vector<ScalingRow> scaling_study(FilterKind filter, const TurnOnRate& rate,
                                      const std::vector<double>& snr_grid, int threads = 0,
                                      const OptimizeRanges& ranges = {});

StateDists filter_dists(FilterKind filter, const ReadoutConfig& cfg);

}  // namespace readout
