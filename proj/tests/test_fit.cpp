#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "readout/analytic.hpp"
#include "readout/config.hpp"
#include "readout/fit.hpp"
#include "readout/quadrature.hpp"
#include "readout/rng.hpp"
#include "readout/signal.hpp"

using namespace readout;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("readout_test_" + name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

// Peak statistics of simulated records in raw units x = scale * (1 + psi) / 2.
std::vector<double> simulate_raw_peaks(const FitParams& truth, const TurnOnRate& rate,
                                       double tau_m, int n, std::uint64_t seed) {
  ReadoutConfig cfg;
  cfg.snr = truth.snr;
  cfg.rate = rate;
  cfg.tau_m = tau_m;
  cfg.n_bins = std::round(tau_m / truth.tau_b);
  cfg.validate();
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const QubitState state =
        rng.uniform() < truth.p_plus ? QubitState::kPlus : QubitState::kMinus;
    const BinnedTrace trace = generate_binned_trace(cfg, state, rng);
    raw.push_back(truth.scale * (1.0 + peak_statistic(trace)) / 2.0);
  }
  return raw;
}

double poisson_log_like(const Histogram& hist, const FitParams& params, const TurnOnRate& rate,
                        double tau_m) {
  const double total = hist.total();
  double ll = 0.0;
  double cdf_lo = mixture_cdf_raw(hist.edges.front(), params, rate, tau_m);
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    const double cdf_hi = mixture_cdf_raw(hist.edges[b + 1], params, rate, tau_m);
    const double mu = total * std::max(cdf_hi - cdf_lo, 0.0);
    cdf_lo = cdf_hi;
    if (hist.counts[b] > 0.0) {
      ll += hist.counts[b] * std::log(mu) - mu;
    } else {
      ll -= mu;
    }
  }
  return ll;
}

}  // namespace

TEST_CASE("histogram validation") {
  Histogram h;
  h.edges = {0.0, 1.0, 2.0};
  h.counts = {3.0, 4.0};
  CHECK_NOTHROW(h.validate());
  CHECK(h.total() == 7.0);
  h.edges = {0.0, 1.0};
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.edges = {0.0, 1.0, 0.5};
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.edges = {0.0, 1.0, 2.0};
  h.counts = {3.0, -1.0};
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}

TEST_CASE("edges-format ingestion") {
  const TempFile good("edges_good.csv",
                      "lo,hi,count\n0.0,0.5,12\n0.5,1.0,30\n1.0,1.5,8\n");
  const Histogram hist = ingest_histogram(good.path, HistogramFormat::kEdges);
  REQUIRE(hist.bins() == 3);
  CHECK(hist.edges == std::vector<double>{0.0, 0.5, 1.0, 1.5});
  CHECK(hist.counts == std::vector<double>{12.0, 30.0, 8.0});

  // Errors carry the file and line of the offending row.
  const TempFile gap("edges_gap.csv", "0.0,0.5,12\n0.7,1.0,30\n");
  try {
    ingest_histogram(gap.path, HistogramFormat::kEdges);
    FAIL("expected rejection of non-contiguous bins");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("edges_gap.csv:2") != std::string::npos);
  }

  const TempFile backwards("edges_backwards.csv", "0.0,0.5,12\n0.5,0.3,30\n");
  CHECK_THROWS_AS(ingest_histogram(backwards.path, HistogramFormat::kEdges),
                  std::invalid_argument);

  const TempFile garbled("edges_garbled.csv", "0.0,0.5,12\n0.5,oops,3\n");
  try {
    ingest_histogram(garbled.path, HistogramFormat::kEdges);
    FAIL("expected rejection of a malformed field");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  CHECK_THROWS_AS(ingest_histogram("no_such_file.csv", HistogramFormat::kEdges),
                  std::invalid_argument);
}

TEST_CASE("samples-format ingestion conserves the record count") {
  std::string content = "value\n";
  Rng rng(9);
  for (int i = 0; i < 500; ++i) content += std::to_string(rng.normal()) + "\n";
  const TempFile file("samples.csv", content);
  const Histogram hist = ingest_histogram(file.path, HistogramFormat::kSamples);
  CHECK(hist.total() == 500.0);
  CHECK(hist.bins() >= 10);

  const TempFile empty("samples_empty.csv", "value\n");
  CHECK_THROWS_AS(ingest_histogram(empty.path, HistogramFormat::kSamples),
                  std::invalid_argument);
}

TEST_CASE("binning rejects degenerate samples") {
  CHECK_THROWS_AS(bin_samples({}), std::invalid_argument);
  CHECK_THROWS_AS(bin_samples(std::vector<double>(50, 1.25)), std::invalid_argument);
}

TEST_CASE("automatic bins scale with the interquartile range") {
  std::vector<double> samples;
  Rng rng(13);
  for (int i = 0; i < 8000; ++i) samples.push_back(rng.normal());
  const Histogram hist = bin_samples(samples);
  CHECK(hist.total() == 8000.0);
  // Freedman-Diaconis on a standard normal: width ~ 2 * 1.349 / n^(1/3).
  const double width = hist.edges[1] - hist.edges[0];
  const double expect = 2.0 * 1.349 / std::cbrt(8000.0);
  CHECK(width / expect > 0.8);
  CHECK(width / expect < 1.25);
}

TEST_CASE("mixture reduces to the pure components at the prior extremes") {
  FitParams p;
  p.scale = 2.0;
  p.snr = 60.0;
  p.tau_b = 0.1;
  p.p_plus = 0.0;
  const TurnOnRate rate = TurnOnRate::finite(4.0);
  const double tau_m = 2.0;

  ReadoutConfig cfg;
  cfg.snr = p.snr;
  cfg.rate = rate;
  cfg.tau_m = tau_m;
  cfg.n_bins = tau_m / p.tau_b;
  const StateDists dists = peak_dists(cfg);
  for (double psi : {-1.1, -0.9, -0.6}) {
    CHECK(mixture_pdf(psi, p, rate, tau_m) ==
          doctest::Approx(dists.minus.pdf(psi)).epsilon(1e-12));
  }
  p.p_plus = 1.0;
  for (double psi : {-0.5, 0.3, 0.9}) {
    CHECK(mixture_pdf(psi, p, rate, tau_m) ==
          doctest::Approx(dists.plus.pdf(psi)).epsilon(1e-12));
  }
}

TEST_CASE("raw-unit mixture integrates to one and matches its CDF") {
  FitParams p;
  p.scale = 2.3;
  p.snr = 45.0;
  p.tau_b = 0.12;
  p.p_plus = 0.4;
  const TurnOnRate rate = TurnOnRate::finite(4.0);
  const double tau_m = 1.8;
  // Raw support: x = scale (1 + psi) / 2 over the psi support.
  const double sigma = 1.0 / std::sqrt(p.snr * p.tau_b);
  const double x_lo = p.scale * (1.0 + (-1.0 - 12.0 * sigma)) / 2.0;
  const double x_hi = p.scale * (1.0 + (1.0 + 12.0 * sigma)) / 2.0;
  const double mass = integrate(
      [&](double x) { return mixture_pdf_raw(x, p, rate, tau_m); }, x_lo, x_hi, 1e-12);
  CHECK(std::fabs(mass - 1.0) < 1e-8);
  for (double x : {0.4, 1.1, 2.0}) {
    const double q = integrate(
        [&](double x2) { return mixture_pdf_raw(x2, p, rate, tau_m); }, x_lo, x, 1e-12);
    CHECK(std::fabs(mixture_cdf_raw(x, p, rate, tau_m) - q) < 1e-8);
  }
}

TEST_CASE("fit recovers the generating parameters") {
  FitParams truth;
  truth.scale = 2.0;
  truth.snr = 110.0;
  truth.tau_b = 0.075;
  truth.p_plus = 0.47;
  const TurnOnRate rate = TurnOnRate::finite(4.0);
  const double tau_m = 2.475;  // 33 bins exactly
  const std::vector<double> raw = simulate_raw_peaks(truth, rate, tau_m, 20000, 101);
  const Histogram hist = bin_samples(raw);

  FitParams init;
  init.scale = 2.4;
  init.snr = 70.0;
  init.tau_b = 0.11;
  init.p_plus = 0.35;
  const FitResult result = fit_histogram(hist, rate, tau_m, init);

  CHECK(result.converged);
  CHECK(std::fabs(result.params.snr - truth.snr) / truth.snr < 0.10);
  CHECK(std::fabs(result.params.p_plus - truth.p_plus) < 0.02);
  CHECK(std::fabs(result.params.tau_b - truth.tau_b) / truth.tau_b < 0.15);
  CHECK(std::fabs(result.params.scale - truth.scale) / truth.scale < 0.05);

  // The fitted likelihood cannot sit below the generating parameters'.
  const double ll_true = poisson_log_like(hist, truth, rate, tau_m);
  CHECK(result.log_like >= ll_true - 2.0);
  CHECK(result.log_like ==
        doctest::Approx(poisson_log_like(hist, result.params, rate, tau_m)).epsilon(1e-9));

  // Goodness of fit is compatible with a correct model.
  CHECK(result.dof >= 1);
  CHECK(result.chi2 / result.dof < 2.0);

  // Reported uncertainties are positive and in a plausible range.
  CHECK(result.covariance[0] > 0.0);
  CHECK(result.covariance[5] > 0.0);
  CHECK(result.covariance[10] > 0.0);
  CHECK(result.covariance[15] > 0.0);
  const double sd_p = std::sqrt(result.covariance[15]);
  CHECK(sd_p > 1e-4);
  CHECK(sd_p < 0.05);
}

TEST_CASE("fit drives the plus weight to zero on pure minus data") {
  FitParams truth;
  truth.scale = 2.0;
  truth.snr = 80.0;
  truth.tau_b = 0.1;
  truth.p_plus = 0.0;
  const TurnOnRate rate = TurnOnRate::finite(4.0);
  const double tau_m = 2.0;
  const std::vector<double> raw = simulate_raw_peaks(truth, rate, tau_m, 20000, 202);
  const Histogram hist = bin_samples(raw);

  FitParams init;
  init.scale = 2.2;
  init.snr = 60.0;
  init.tau_b = 0.12;
  init.p_plus = 0.3;
  const FitResult result = fit_histogram(hist, rate, tau_m, init);
  CHECK(result.params.p_plus < 0.01);
}

TEST_CASE("fit lands on the same optimum from displaced starts") {
  FitParams truth;
  truth.scale = 2.0;
  truth.snr = 110.0;
  truth.tau_b = 0.075;
  truth.p_plus = 0.47;
  const TurnOnRate rate = TurnOnRate::finite(4.0);
  const double tau_m = 2.475;
  const std::vector<double> raw = simulate_raw_peaks(truth, rate, tau_m, 20000, 101);
  const Histogram hist = bin_samples(raw);

  FitParams lo = truth, hi = truth;
  lo.scale *= 0.5;
  lo.snr *= 0.5;
  lo.tau_b *= 0.5;
  lo.p_plus = 0.25;
  hi.scale *= 1.5;
  hi.snr *= 1.5;
  hi.tau_b *= 1.5;
  hi.p_plus = 0.7;
  const FitResult from_lo = fit_histogram(hist, rate, tau_m, lo);
  const FitResult from_hi = fit_histogram(hist, rate, tau_m, hi);
  CHECK(std::fabs(from_lo.params.snr - from_hi.params.snr) / from_hi.params.snr < 0.02);
  CHECK(std::fabs(from_lo.params.p_plus - from_hi.params.p_plus) < 0.005);
  CHECK(std::fabs(from_lo.params.tau_b - from_hi.params.tau_b) / from_hi.params.tau_b < 0.05);
  CHECK(std::fabs(from_lo.log_like - from_hi.log_like) < 0.5);
}

TEST_CASE("fit round-trips across randomized generating parameters") {
  Rng rng(4242);
  const TurnOnRate rate = TurnOnRate::finite(4.0);
  for (int trial = 0; trial < 5; ++trial) {
    FitParams truth;
    truth.scale = 1.5 + rng.uniform() * 1.5;
    truth.snr = 30.0 * std::pow(10.0, rng.uniform());  // 30 to 300
    truth.tau_b = 0.02 * std::pow(15.0, rng.uniform());  // 0.02 to 0.3
    truth.p_plus = 0.2 + 0.6 * rng.uniform();
    const double n_bins = std::max(8.0, std::min(60.0, std::round(2.0 / truth.tau_b)));
    const double tau_m = n_bins * truth.tau_b;
    CAPTURE(trial);
    CAPTURE(truth.snr);
    CAPTURE(truth.tau_b);
    CAPTURE(truth.p_plus);

    const std::vector<double> raw =
        simulate_raw_peaks(truth, rate, tau_m, 20000, 1000 + static_cast<std::uint64_t>(trial));
    const Histogram hist = bin_samples(raw);

    FitParams init = truth;
    init.scale *= 1.2;
    init.snr *= 0.8;
    init.tau_b *= 1.25;
    init.p_plus = 0.5;
    const FitResult result = fit_histogram(hist, rate, tau_m, init);
    CHECK(std::fabs(result.params.snr - truth.snr) / truth.snr < 0.10);
    CHECK(std::fabs(result.params.p_plus - truth.p_plus) < 0.02);
    CHECK(std::fabs(result.params.tau_b - truth.tau_b) / truth.tau_b < 0.15);
    const double ll_true = poisson_log_like(hist, truth, rate, tau_m);
    CHECK(result.log_like >= ll_true - 2.0);
  }
}

TEST_CASE("fit validates its inputs") {
  Histogram sparse;
  sparse.edges = {0.0, 1.0, 2.0, 3.0};
  sparse.counts = {5.0, 0.0, 5.0};
  FitParams init;
  CHECK_THROWS_AS(fit_histogram(sparse, TurnOnRate::finite(4.0), 2.0, init),
                  std::invalid_argument);

  Histogram ok;
  for (int i = 0; i <= 12; ++i) ok.edges.push_back(0.2 * i);
  ok.counts.assign(12, 10.0);
  FitParams bad;
  bad.p_plus = 0.0;
  CHECK_THROWS_AS(fit_histogram(ok, TurnOnRate::finite(4.0), 2.0, bad),
                  std::invalid_argument);
  bad = FitParams{};
  bad.tau_b = -0.1;
  CHECK_THROWS_AS(fit_histogram(ok, TurnOnRate::finite(4.0), 2.0, bad),
                  std::invalid_argument);
}
