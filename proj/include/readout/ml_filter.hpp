#pragma once

#include <cstdint>
#include <vector>

#include "readout/config.hpp"
#include "readout/signal.hpp"

namespace readout {

// Likelihood-ratio contributions from the three pulse-placement regions:
// pulse fully inside the window, turn-on inside but turn-off beyond, and
// turn-on beyond the window. Held in log space; -inf encodes an exact zero.
struct LikelihoodParts {
  double log_l1 = 0.0;
  double log_l2 = 0.0;
  double log_l3 = 0.0;

  double l1() const;
  double l2() const;
  double l3() const;
  double log_total() const;      // log(l1 + l2 + l3)
  double posterior_plus() const; // total / (1 + total)
};

// Posterior mass per region, p_i = l_i / (1 + total); the PLUS posterior is
// the sum. log_odds tracks log(total) through the integration so the
// likelihood scale survives posteriors that round to 1.
struct EstimatorState {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double log_odds = 0.0;

  double posterior() const { return p1 + p2 + p3; }
};

// Exact step-wise evaluation of the region integrals for a piecewise-constant
// record: within each sample the linear system for (l1, l2, l3) is solved in
// closed form, so the only discretization is the record's own. Requires the
// trace to cover [0, tau_m].
LikelihoodParts likelihood_direct(const ContinuousTrace& trace, const ReadoutConfig& cfg);

// Runge-Kutta integration of the nonlinear posterior system along the trace.
// substeps = 0 picks, per sample, enough substeps to keep the local rate
// bound below 1/2; a positive value forces that many substeps per sample.
// If the state leaves [-band, 1+band] the integration retries with doubled
// substeps before failing.
std::vector<EstimatorState> integrate_estimator(const ContinuousTrace& trace,
                                                const ReadoutConfig& cfg, int substeps = 0);
EstimatorState estimator_final(const ContinuousTrace& trace, const ReadoutConfig& cfg,
                               int substeps = 0);

inline constexpr double kEstimatorBand = 1e-6;

struct MlErrorResult {
  double eps = 0.0;
  double std_err = 0.0;
  std::int64_t records = 0;
  std::int64_t wrong = 0;
};

// Monte-Carlo misidentification fraction of the posterior decision rule
// (declare PLUS above 1/2, unbiased coin at exactly 1/2) over balanced random
// initial states. Record i draws from stream i of the seed, so results are
// independent of the worker count.
MlErrorResult ml_error_rate(const ReadoutConfig& cfg, std::int64_t n_records,
                            std::uint64_t seed, int threads = 0, double dt = 0.0);

// Sampling step for likelihood integration: fine enough to resolve both the
// turn-on scale and the per-sample noise, rounded to divide tau_m exactly.
double default_ml_dt(const ReadoutConfig& cfg);

}  // namespace readout
