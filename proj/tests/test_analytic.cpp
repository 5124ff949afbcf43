#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "readout/analytic.hpp"
#include "readout/config.hpp"
#include "readout/quadrature.hpp"
#include "readout/signal.hpp"
#include "readout/special.hpp"

using namespace readout;

namespace {

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

ReadoutConfig make_cfg(double snr, TurnOnRate rate, double tau_m, double n_bins) {
  ReadoutConfig cfg;
  cfg.snr = snr;
  cfg.rate = rate;
  cfg.tau_m = tau_m;
  cfg.n_bins = n_bins;
  return cfg;
}

struct PdfRef {
  double psi, pdf, cdf;
};

// All reference values below were computed with 60-digit arithmetic from the
// defining integrals, independently of this library.

void check_refs(const ReadoutConfig& cfg, const std::vector<PdfRef>& refs, double tol) {
  for (const PdfRef& ref : refs) {
    CAPTURE(ref.psi);
    CHECK(rel_err(peak_pdf_plus(ref.psi, cfg), ref.pdf) < tol);
    CHECK(rel_err(peak_cdf_plus(ref.psi, cfg), ref.cdf) < tol);
  }
}

}  // namespace

TEST_CASE("bin noise kernel") {
  CHECK(rel_err(bin_pdf(0.0, -1.0, 0.5), 0.10798193302637610) < 1e-14);
  CHECK(rel_err(bin_cdf(0.0, -1.0, 0.5), 0.5 * std::erfc(-2.0 / std::sqrt(2.0))) < 1e-14);
}

TEST_CASE("bin-class normalization masses") {
  const BinNormConstants d4 = norm_constants(4.0, 0.5);
  CHECK(rel_err(d4.both_edges, 0.23640421479535967) < 1e-14);
  CHECK(rel_err(d4.onset, 1.0358264531354269) < 1e-14);
  CHECK(rel_err(d4.turnoff, 0.39346934028736658) < 1e-14);
  // rate = 1 hits the removable singularity in the onset mass.
  const BinNormConstants d1 = norm_constants(1.0, 0.5);
  CHECK(rel_err(d1.both_edges, 0.090204010431049865) < 1e-14);
  CHECK(rel_err(d1.onset, 0.5) < 1e-14);
  CHECK_THROWS_AS(norm_constants(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("pulse-edge cell probabilities") {
  const TurnOnRate g = TurnOnRate::finite(4.0);
  CHECK(rel_err(cell_prob(0, 0, g, 0.5), 0.23640421479535967) < 1e-14);
  CHECK(rel_err(cell_prob(1, 1, g, 0.5), 0.031993831367659025) < 1e-14);
  CHECK(rel_err(cell_prob(0, 3, g, 0.5), 0.090940255955028926) < 1e-14);
  CHECK(rel_err(cell_prob(2, 5, g, 0.5), 0.0016656288885213679) < 1e-14);
  CHECK(cell_prob(2, 1, g, 0.5) == 0.0);
  CHECK(cell_prob(-1, 3, g, 0.5) == 0.0);

  // The cell grid carries the full pulse measure.
  double total = 0.0;
  for (int m = 0; m < 90; ++m) {
    for (int n = m; n < m + 90; ++n) total += cell_prob(m, n, g, 0.5);
  }
  CHECK(rel_err(total, 1.0) < 1e-12);

  // Infinite rate pins the turn-on edge into bin 0.
  const TurnOnRate inf = TurnOnRate::infinite();
  CHECK(cell_prob(1, 2, inf, 0.5) == 0.0);
  double total_inf = 0.0;
  for (int n = 0; n < 200; ++n) total_inf += cell_prob(0, n, inf, 0.5);
  CHECK(rel_err(total_inf, 1.0) < 1e-12);
}

TEST_CASE("window region weights") {
  const RegionWeights w = region_weights(TurnOnRate::finite(4.0), 2.0);
  CHECK(rel_err(w.contained, 0.81966477656048391) < 1e-13);
  CHECK(rel_err(w.overrun, 0.17999976081161357) < 1e-13);
  CHECK(rel_err(w.missed, 0.00033546262790251184) < 1e-13);
  CHECK(rel_err(w.contained + w.overrun + w.missed, 1.0) < 1e-14);

  const RegionWeights wi = region_weights(TurnOnRate::infinite(), 2.0);
  CHECK(wi.missed == 0.0);
  CHECK(rel_err(wi.contained + wi.overrun, 1.0) < 1e-14);
}

TEST_CASE("tilted window kernel matches references and quadrature") {
  const double tb = 0.5, snr = 10.0, psi = 0.2;
  CHECK(rel_err(tilted_window_pdf(psi, 1.0, tb, snr), 0.72031338095729646) < 1e-13);
  CHECK(rel_err(tilted_window_mass(psi, 1.0, tb, snr), 0.25370950571885358) < 1e-13);
  CHECK(rel_err(tilted_window_pdf(psi, -3.0, tb, snr), 2.4085472893395839) < 1e-13);
  CHECK(rel_err(tilted_window_mass(psi, -3.0, tb, snr), -1.5772043835637330) < 1e-13);

  // Direct quadrature of the defining integrals.
  const double sig = 1.0 / std::sqrt(snr * tb);
  for (double alpha : {1.0, -3.0, 0.5, -30.0, 25.0}) {
    for (double x : {-0.7, 0.2, 1.1}) {
      CAPTURE(alpha);
      CAPTURE(x);
      const double pdf_quad = integrate(
          [&](double u) {
            return std::exp(-alpha * tb * (u + 1.0) / 2.0) * gauss_pdf(x, u, sig);
          },
          -1.0, 1.0, 1e-12);
      CHECK(rel_err(tilted_window_pdf(x, alpha, tb, snr), pdf_quad) < 1e-8);
      const double mass_quad = (alpha * tb / 2.0) *
                               integrate(
                                   [&](double u) {
                                     return std::exp(-alpha * tb * (u + 1.0) / 2.0) *
                                            gauss_cdf(x, u, sig);
                                   },
                                   -1.0, 1.0, 1e-12);
      CHECK(std::fabs(tilted_window_mass(x, alpha, tb, snr) - mass_quad) <
            1e-8 * std::max(1.0, std::fabs(mass_quad)));
    }
  }

  // Total tilted mass is the closed-form window weight; zero tilt is weightless.
  const double hi = 1.0 + kSupportSigmas * sig;
  CHECK(rel_err(tilted_window_mass(hi, 1.0, tb, snr), -std::expm1(-1.0 * tb)) < 1e-10);
  CHECK(std::fabs(tilted_window_mass(psi, 0.0, tb, snr)) < 1e-14);
}

TEST_CASE("pulse bin-class averages match references") {
  // rate = 4, tau_b = 0.5, snr = 10, evaluated at psi = 0.2.
  const PulseBinDists d = avg_bin_dists(TurnOnRate::finite(4.0), 0.5, 10.0);
  CHECK(rel_err(d.both_edges.pdf(0.2), 0.41703143036928713) < 1e-13);
  CHECK(rel_err(d.both_edges.cdf(0.2), 0.77223258710936496) < 1e-13);
  CHECK(rel_err(d.onset_only.pdf(0.2), 0.51883164478822608) < 1e-13);
  CHECK(rel_err(d.onset_only.cdf(0.2), 0.45299978019306293) < 1e-13);
  CHECK(rel_err(d.turnoff_only.pdf(0.2), 0.45766804881876086) < 1e-13);
  CHECK(rel_err(d.turnoff_only.cdf(0.2), 0.64480120746780237) < 1e-13);

  const PulseBinDists f = avg_bin_dists(TurnOnRate::finite(1e5), 0.5, 10.0);
  CHECK(rel_err(f.both_edges.pdf(0.2), 0.4576723271131775) < 1e-11);
  CHECK(rel_err(f.both_edges.cdf(0.2), 0.64481057960259295) < 1e-11);
  CHECK(rel_err(f.onset_only.pdf(0.2), 0.18013304349461944) < 1e-11);
  CHECK(rel_err(f.onset_only.cdf(0.2), 0.03682634045394505) < 1e-11);
  CHECK(rel_err(f.turnoff_only.pdf(0.2), 0.45766804881876086) < 1e-11);
  CHECK(rel_err(f.turnoff_only.cdf(0.2), 0.64480120746780237) < 1e-11);
}

TEST_CASE("bin-class averages are smooth through the unit rate") {
  // The onset-bearing masses hit a 0/0 form at rate = 1; the evaluation must
  // pass through it without a jump.
  const double psi = 0.3;
  struct Ref {
    double rate, qif, qi;
  };
  const Ref refs[] = {
      {1.0000001, 0.84160063426976895, 0.64448011687504865},
      {1.0, 0.8416006353527454, 0.64448012148093823},
      {0.9999999, 0.84160063643572187, 0.6444801260868278},
  };
  for (const Ref& ref : refs) {
    CAPTURE(ref.rate);
    const PulseBinDists d = avg_bin_dists(TurnOnRate::finite(ref.rate), 0.5, 10.0);
    CHECK(rel_err(d.both_edges.cdf(psi), ref.qif) < 1e-12);
    CHECK(rel_err(d.onset_only.cdf(psi), ref.qi) < 1e-12);
  }
}

TEST_CASE("bin-class averages normalize and integrate to their CDFs") {
  for (double rate : {4.0, 1.0, 40.0}) {
    CAPTURE(rate);
    const PulseBinDists d = avg_bin_dists(TurnOnRate::finite(rate), 0.5, 10.0);
    for (const DistPair* pair : {&d.both_edges, &d.onset_only, &d.turnoff_only}) {
      const double mass = integrate(pair->pdf, pair->support_lo, pair->support_hi, 1e-12);
      CHECK(rel_err(mass, 1.0) < 1e-8);
      CHECK(rel_err(pair->cdf(pair->support_hi), 1.0) < 1e-10);
      CHECK(std::fabs(pair->cdf(pair->support_lo)) < 1e-10);
      // The CDF route and the density route use different kernels; they must
      // agree as distribution and integral.
      for (double x : {-0.6, 0.2, 0.9}) {
        const double q = integrate(pair->pdf, pair->support_lo, x, 1e-12);
        CHECK(std::fabs(pair->cdf(x) - q) < 1e-8);
      }
    }
  }
}

TEST_CASE("peak statistic distribution matches references, rate 4") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 4.0);
  check_refs(cfg,
             {{-1.05, 0.030560644511150565, 0.0034870042778162071},
              {-0.3, 0.31130481555848085, 0.14171400221025228},
              {0.2, 0.30012893597825013, 0.29448312168392156},
              {0.9, 0.49637091902880013, 0.55228465088191399},
              {1.02, 0.55045163844686108, 0.61522176041357897},
              {1.3, 0.55886713600692458, 0.77582644755690475}},
             1e-12);
}

TEST_CASE("peak statistic distribution matches references, stiff rate 1e5") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(1e5), 2.0, 4.0);
  check_refs(cfg,
             {{0.2, 0.22969296451392397, 0.25669985502534107},
              {1.02, 0.56318025859148211, 0.53818403750136659}},
             1e-10);
}

TEST_CASE("peak statistic distribution matches references, unit rate") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(1.0), 2.0, 4.0);
  check_refs(cfg, {{0.3, 0.29165158497692801, 0.45378558353415013}}, 1e-12);
}

TEST_CASE("peak statistic distribution supports non-integral bin counts") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 3.3);
  check_refs(cfg,
             {{-0.3, 0.34084040455999267, 0.17990047738765009},
              {0.6, 0.39773983908139593, 0.48310989838595907}},
             1e-12);
}

TEST_CASE("peak statistic distribution matches references in the instant-on limit") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::infinite(), 2.0, 4.0);
  const StateDists d = limit_peak_dists(cfg);
  CHECK(rel_err(d.plus.pdf(0.2), 0.22968824562555615) < 1e-12);
  CHECK(rel_err(d.plus.cdf(0.2), 0.2566988924190346) < 1e-12);
  CHECK(rel_err(d.plus.pdf(1.02), 0.56316915306581936) < 1e-12);
  CHECK(rel_err(d.plus.cdf(1.02), 0.53817360678092745) < 1e-12);
  // The dispatching constructor must route to the same limit forms.
  const StateDists via = peak_dists(cfg);
  CHECK(via.plus.pdf(0.2) == d.plus.pdf(0.2));
  CHECK(via.plus.cdf(1.02) == d.plus.cdf(1.02));
  // The finite-rate scalar evaluators reject the symbolic infinite rate.
  CHECK_THROWS_AS(peak_pdf_plus(0.2, cfg), std::invalid_argument);
}

TEST_CASE("boxcar distribution matches references, rate 4") {
  const ReadoutConfig cfg = make_cfg(250.0, TurnOnRate::finite(4.0), 1.2915, 1.0);
  CHECK(rel_err(boxcar_pdf_plus(-0.9, cfg), 0.60331650222814837) < 1e-12);
  CHECK(rel_err(boxcar_cdf_plus(-0.9, cfg), 0.06922225171443048) < 1e-12);
  CHECK(rel_err(boxcar_pdf_plus(-0.5, cfg), 0.49716289279846637) < 1e-12);
  CHECK(rel_err(boxcar_cdf_plus(-0.5, cfg), 0.29059055362867532) < 1e-12);
  CHECK(rel_err(boxcar_pdf_plus(0.0, cfg), 0.41594135965093977) < 1e-12);
  CHECK(rel_err(boxcar_cdf_plus(0.0, cfg), 0.5152299837266727) < 1e-12);
  // MINUS is pure bin noise around -1 at the full window width.
  const double sig = 1.0 / std::sqrt(cfg.snr * cfg.tau_m);
  CHECK(rel_err(boxcar_pdf_minus(-0.9, cfg), gauss_pdf(-0.9, -1.0, sig)) < 1e-14);
  CHECK(rel_err(boxcar_cdf_minus(-0.9, cfg), gauss_cdf(-0.9, -1.0, sig)) < 1e-14);
}

TEST_CASE("boxcar distribution matches references in the instant-on limit") {
  const ReadoutConfig cfg = make_cfg(250.0, TurnOnRate::infinite(), 0.0351, 1.0);
  const StateDists d = limit_boxcar_dists(cfg);
  CHECK(rel_err(d.plus.pdf(-0.2), 0.019203808630886775) < 1e-12);
  CHECK(rel_err(d.plus.cdf(-0.2), 0.01412467172586191) < 1e-12);
  CHECK(rel_err(d.plus.pdf(0.5), 0.396921667609463) < 1e-12);
  CHECK(rel_err(d.plus.cdf(0.5), 0.092685895733495154) < 1e-12);
  const StateDists via = boxcar_dists(cfg);
  CHECK(via.plus.pdf(0.5) == d.plus.pdf(0.5));
}

TEST_CASE("distributions normalize and CDFs integrate their densities") {
  const std::vector<ReadoutConfig> configs = {
      make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 4.0),
      make_cfg(10.0, TurnOnRate::finite(1e5), 2.0, 4.0),
      make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 3.3),
      make_cfg(10.0, TurnOnRate::infinite(), 2.0, 4.0),
      make_cfg(250.0, TurnOnRate::finite(4.0), 1.2915, 1.0),
      make_cfg(250.0, TurnOnRate::infinite(), 0.0351, 1.0),
  };
  for (const ReadoutConfig& cfg : configs) {
    CAPTURE(cfg.rate.str());
    CAPTURE(cfg.n_bins);
    CAPTURE(cfg.snr);
    for (bool use_peak : {true, false}) {
      const StateDists d = use_peak ? peak_dists(cfg) : boxcar_dists(cfg);
      for (const DistPair* pair : {&d.minus, &d.plus}) {
        const double mass = integrate(pair->pdf, pair->support_lo, pair->support_hi, 1e-12);
        CHECK(rel_err(mass, 1.0) < 1e-8);
        CHECK(rel_err(pair->cdf(pair->support_hi), 1.0) < 1e-9);
        CHECK(std::fabs(pair->cdf(pair->support_lo)) < 1e-9);
        const double mid = 0.5 * (pair->support_lo + pair->support_hi);
        for (double x : {mid - 0.9, mid, mid + 0.7}) {
          const double q = integrate(pair->pdf, pair->support_lo, x, 1e-12);
          CHECK(std::fabs(pair->cdf(x) - q) < 1e-8);
        }
        // CDFs are monotone on a sweep of the support.
        double prev = -1e-12;
        for (int k = 0; k <= 64; ++k) {
          const double x = pair->support_lo +
                           (pair->support_hi - pair->support_lo) * k / 64.0;
          const double c = pair->cdf(x);
          CHECK(c >= prev - 1e-12);
          prev = c;
        }
      }
    }
  }
}

TEST_CASE("single-bin peak statistic degenerates to the boxcar") {
  const ReadoutConfig cfg = make_cfg(30.0, TurnOnRate::finite(4.0), 1.5, 1.0);
  const StateDists peak = peak_dists(cfg);
  const StateDists box = boxcar_dists(cfg);
  for (double x : {-1.3, -0.8, -0.2, 0.4, 1.1}) {
    CAPTURE(x);
    CHECK(rel_err(peak.plus.pdf(x), box.plus.pdf(x)) < 1e-10);
    CHECK(rel_err(peak.plus.cdf(x), box.plus.cdf(x)) < 1e-10);
    CHECK(rel_err(peak.minus.pdf(x), box.minus.pdf(x)) < 1e-10);
    CHECK(rel_err(peak.minus.cdf(x), box.minus.cdf(x)) < 1e-10);
  }

  const ReadoutConfig lim = make_cfg(30.0, TurnOnRate::infinite(), 1.5, 1.0);
  const StateDists lpeak = peak_dists(lim);
  const StateDists lbox = boxcar_dists(lim);
  for (double x : {-0.8, 0.0, 0.9}) {
    CHECK(rel_err(lpeak.plus.pdf(x), lbox.plus.pdf(x)) < 1e-10);
    CHECK(rel_err(lpeak.plus.cdf(x), lbox.plus.cdf(x)) < 1e-10);
  }
}

TEST_CASE("minus-state peak distribution is the max of independent bin draws") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 4.0);
  const double sig = cfg.sigma();
  for (double x : {-1.2, -0.6, 0.1}) {
    const double q = gauss_cdf(x, -1.0, sig);
    const double p = gauss_pdf(x, -1.0, sig);
    CHECK(rel_err(peak_cdf_minus(x, cfg), std::pow(q, 4.0)) < 1e-12);
    CHECK(rel_err(peak_pdf_minus(x, cfg), 4.0 * std::pow(q, 3.0) * p) < 1e-12);
  }
}

TEST_CASE("cell-conditional densities recombine into the marginal") {
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 4.0);
  const int nbins = 4;
  const int cap = nbins + 80;
  for (double psi : {-0.8, 0.2, 0.9, 1.3}) {
    CAPTURE(psi);
    double sum = 0.0;
    for (int m = 0; m <= cap; ++m) {
      for (int n = m; n <= cap; ++n) {
        sum += cell_prob(m, n, cfg.rate, cfg.tau_b()) * peak_pdf_cell(psi, m, n, cfg);
      }
    }
    CHECK(rel_err(sum, peak_pdf_plus(psi, cfg)) < 1e-10);
  }
}

TEST_CASE("cell-conditional densities match the fixed-edge quadrature") {
  // Independent oracle: average the fixed-edge density over the exponential
  // edge measure restricted to one cell, then normalize by the cell weight.
  const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 4.0);
  const double tb = cfg.tau_b();
  const double g = cfg.rate.value();

  struct Cell {
    int m, n;
  };
  for (const Cell cell : {Cell{0, 2}, Cell{1, 1}}) {
    CAPTURE(cell.m);
    CAPTURE(cell.n);
    for (double psi : {0.2, 0.9}) {
      CAPTURE(psi);
      const double joint = integrate(
          [&](double on) {
            const double lo = std::max(on, cell.n * tb);
            return g * std::exp(-g * on) *
                   integrate(
                       [&](double off) {
                         return std::exp(-(off - on)) *
                                peak_pdf_fixed_times(psi, QubitState::kPlus,
                                                     PulseTimes{on, off}, cfg);
                       },
                       lo, (cell.n + 1) * tb, 1e-11);
          },
          cell.m * tb, (cell.m + 1) * tb, 1e-10);
      const double weight = cell_prob(cell.m, cell.n, cfg.rate, tb);
      CHECK(rel_err(peak_pdf_cell(psi, cell.m, cell.n, cfg), joint / weight) < 1e-6);
    }
  }
}

TEST_CASE("fixed-edge distributions are per-bin noise products") {
  ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(4.0), 2.0, 4.0);
  const PulseTimes pulse{0.6, 1.4};
  const std::vector<double> means = bin_mean_values(cfg, QubitState::kPlus, pulse);
  const double sig = cfg.sigma();
  for (double psi : {-0.4, 0.1, 0.8}) {
    CAPTURE(psi);
    double prod = 1.0, dsum = 0.0;
    for (double phi : means) {
      prod *= gauss_cdf(psi, phi, sig);
    }
    for (std::size_t l = 0; l < means.size(); ++l) {
      double term = gauss_pdf(psi, means[l], sig);
      for (std::size_t j = 0; j < means.size(); ++j) {
        if (j != l) term *= gauss_cdf(psi, means[j], sig);
      }
      dsum += term;
    }
    CHECK(rel_err(peak_cdf_fixed_times(psi, QubitState::kPlus, pulse, cfg), prod) < 1e-12);
    CHECK(rel_err(peak_pdf_fixed_times(psi, QubitState::kPlus, pulse, cfg), dsum) < 1e-12);
  }
  // MINUS ignores the pulse entirely.
  CHECK(rel_err(peak_pdf_fixed_times(0.0, QubitState::kMinus, pulse, cfg),
                peak_pdf_minus(0.0, cfg)) < 1e-12);
}

TEST_CASE("finite-rate distributions converge to the instant-on limit") {
  // Distance to the limit shrinks like 1/rate across the whole support.
  const ReadoutConfig lim_cfg = make_cfg(10.0, TurnOnRate::infinite(), 2.0, 4.0);
  const StateDists lim = limit_peak_dists(lim_cfg);
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(-1.5 + 3.2 * k / 40.0);

  double prev_sup = 1e300;
  std::vector<double> sups;
  for (double rate : {1e2, 1e3, 1e4, 1e5}) {
    const ReadoutConfig cfg = make_cfg(10.0, TurnOnRate::finite(rate), 2.0, 4.0);
    double sup = 0.0;
    for (double psi : grid) {
      sup = std::max(sup, std::fabs(peak_pdf_plus(psi, cfg) - lim.plus.pdf(psi)));
      sup = std::max(sup, std::fabs(peak_cdf_plus(psi, cfg) - lim.plus.cdf(psi)));
    }
    CAPTURE(rate);
    CHECK(sup < prev_sup);
    prev_sup = sup;
    sups.push_back(sup);
  }
  // First-order convergence: one decade of rate buys one decade of distance.
  CHECK(sups[1] / sups[2] > 5.0);
  CHECK(sups[1] / sups[2] < 20.0);
  CHECK(sups[2] / sups[3] > 5.0);
  CHECK(sups[2] / sups[3] < 20.0);
  // At rate 1e5 the finite evaluation is within 1e-4 of the limit everywhere.
  CHECK(sups[3] < 1e-4);
}
