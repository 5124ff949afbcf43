#pragma once

#include <array>
#include <string>
#include <vector>

#include "readout/config.hpp"

namespace readout {

struct Histogram {
  std::vector<double> edges;   // size bins + 1, strictly increasing
  std::vector<double> counts;  // size bins, nonnegative

  std::size_t bins() const { return counts.size(); }
  double total() const;
  void validate() const;
};

enum class HistogramFormat { kEdges, kSamples };

// CSV ingestion. kEdges expects rows `edge_lo,edge_hi,count` with contiguous
// bins; kSamples expects one raw value per row and bins them with the
// Freedman-Diaconis width. A single non-numeric header row is skipped.
// Malformed input is rejected with the offending line number.
Histogram ingest_histogram(const std::string& path, HistogramFormat format);

Histogram bin_samples(const std::vector<double>& samples);

// Mixture parameters: raw values x map to the reduced statistic via
// psi = (2 x - scale) / scale.
struct FitParams {
  double scale = 1.0;
  double snr = 100.0;
  double tau_b = 0.1;
  double p_plus = 0.5;
};

struct FitResult {
  FitParams params;
  double chi2 = 0.0;
  int dof = 0;
  double log_like = 0.0;
  // Covariance of (scale, snr, tau_b, p_plus), row-major, from the observed
  // information at the optimum.
  std::array<double, 16> covariance{};
  bool converged = false;
};

// Prior-weighted peak-statistic density at reduced signal psi; the bin count
// tau_m / tau_b enters continuously, keeping tau_b identifiable.
double mixture_pdf(double psi, const FitParams& params, const TurnOnRate& rate, double tau_m);

// Same mixture as a density over raw values (Jacobian 2 / scale).
double mixture_pdf_raw(double x, const FitParams& params, const TurnOnRate& rate, double tau_m);
double mixture_cdf_raw(double x, const FitParams& params, const TurnOnRate& rate, double tau_m);

// Binned Poisson maximum-likelihood fit of the mixture to a raw-value
// histogram at fixed (rate, tau_m). Multistart around the supplied guess;
// replicas run in parallel on up to `threads` workers.
FitResult fit_histogram(const Histogram& hist, const TurnOnRate& rate, double tau_m,
                        const FitParams& init, int threads = 0);

}  // namespace readout
