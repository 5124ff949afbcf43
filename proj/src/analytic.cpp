#include "readout/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "readout/special.hpp"

namespace readout {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slog(double x) { return x > 0.0 ? std::log(x) : -kInf; }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Log-domain noise kernel values around the two clean signal levels.
struct GaussLogs {
  double lq_m, lq_p, lp_m, lp_p;
};

GaussLogs gauss_logs(double psi, double sigma) {
  return {log_gauss_cdf(psi, -1.0, sigma), log_gauss_cdf(psi, 1.0, sigma),
          log_gauss_pdf(psi, -1.0, sigma), log_gauss_pdf(psi, 1.0, sigma)};
}

// sum_{j < M} y^j = (1 - y^M)/(1 - y), continued to real M; 0 for M <= 0.
// Takes the log of y so extreme ratios never leave the log domain.
double geom_sum(double m, double log_y) {
  if (m <= 0.0) return 0.0;
  if (log_y == 0.0) return m;
  return std::expm1(m * log_y) / std::expm1(log_y);
}

// sum_{j < M} j y^j = y d/dy geom_sum. The direct form cancels near y = 1,
// so a short expansion takes over there.
double geom_sum_idx(double m, double log_y) {
  if (m <= 0.0) return 0.0;
  const double d = std::expm1(log_y);
  if (std::abs(d) * std::max(m, 1.0) < 1e-3) {
    const double c0 = 0.5 * m * (m - 1.0);
    const double c1 = m * (m - 1.0) * (2.0 * m - 1.0) / 6.0;
    const double c2 = m * (m - 1.0) * (m - 2.0) * (3.0 * m - 1.0) / 24.0;
    return c0 + d * (c1 + d * c2);
  }
  const double ym = std::exp(m * log_y);
  return (-(1.0 + d) * std::expm1(m * log_y) + m * d * ym) / (d * d);
}

// log of e^{log_w} * int_{-1}^{1} e^{-alpha tau_b (u+1)/2} gauss_pdf(psi; u, sigma) du.
// The Gaussian and tilt exponents are combined analytically so no intermediate
// ever overflows, even for |alpha| ~ 1e6.
double log_tilted(double psi, double alpha, double tau_b, double snr, double log_w) {
  const double sig = 1.0 / std::sqrt(snr * tau_b);
  const double s2 = sig * std::numbers::sqrt2;
  const double c = alpha / (2.0 * snr);
  const double a_arg = (psi - 1.0 - c) / s2;
  const double b_arg = (psi + 1.0 - c) / s2;
  const double d_ba = (2.0 * snr * psi - alpha) * tau_b;  // b_arg^2 - a_arg^2
  if (a_arg >= 0.0) {
    const double expo = -alpha * tau_b - 0.5 * snr * tau_b * (psi - 1.0) * (psi - 1.0);
    return log_w - std::numbers::ln2 + expo + log_erfcx_diff(a_arg, b_arg, d_ba);
  }
  if (b_arg <= 0.0) {
    const double expo = -0.5 * snr * tau_b * (psi + 1.0) * (psi + 1.0);
    return log_w - std::numbers::ln2 + expo + log_erfcx_diff(-b_arg, -a_arg, -d_ba);
  }
  const double expo = alpha * alpha * tau_b / (8.0 * snr) - 0.5 * alpha * tau_b * (psi + 1.0);
  return log_w - std::numbers::ln2 + expo + slog(std::erf(b_arg) - std::erf(a_arg));
}

// e^{log_w} * (alpha tau_b / 2) int e^{-alpha tau_b (u+1)/2} gauss_cdf(psi; u, sigma) du,
// via the integrated-by-parts identity; signed for alpha < 0.
double tilted_mass(double psi, double alpha, double tau_b, double snr, double log_w) {
  const double sig = 1.0 / std::sqrt(snr * tau_b);
  const double t1 = std::exp(log_w + log_gauss_cdf(psi, -1.0, sig));
  const double t2 = std::exp(log_w - alpha * tau_b + log_gauss_cdf(psi, 1.0, sig));
  const double t3 = std::exp(log_tilted(psi, alpha, tau_b, snr, log_w));
  return t1 - t2 - t3;
}

// tilted_mass / alpha, finite at alpha -> 0 (expansion of the integral in the
// tilt rate takes over below |alpha| tau_b = 1e-4).
double tilted_mass_over_rate(double psi, double alpha, double tau_b, double snr,
                             double log_w) {
  if (std::abs(alpha) * tau_b >= 1e-4) {
    return tilted_mass(psi, alpha, tau_b, snr, log_w) / alpha;
  }
  const double sig = 1.0 / std::sqrt(snr * tau_b);
  const double s2 = sig * sig;
  const double qm = gauss_cdf(psi, -1.0, sig);
  const double qp = gauss_cdf(psi, 1.0, sig);
  const double pm = gauss_pdf(psi, -1.0, sig);
  const double pp = gauss_pdf(psi, 1.0, sig);
  const double m0 = (psi + 1.0) * qm - (psi - 1.0) * qp + s2 * (pm - pp);
  const auto anti = [&](double w) {
    return 0.5 * (w * w - s2) * gauss_cdf(w, 0.0, sig) + 0.5 * s2 * w * gauss_pdf(w, 0.0, sig);
  };
  const double m1 = (psi + 1.0) * m0 - (anti(psi + 1.0) - anti(psi - 1.0));
  return std::exp(log_w) * 0.5 * tau_b * (m0 - 0.5 * alpha * tau_b * m1);
}

// Pointwise pdf and CDF of the three edge-bin average classes.
struct BarVals {
  double pif, qif, pi, qi, pf, qf;
};

BarVals bar_vals(double psi, const TurnOnRate& rate, double tau_b, double snr,
                 const BinNormConstants& d) {
  BarVals b{};
  const double h1 = std::exp(log_tilted(psi, 1.0, tau_b, snr, 0.0));
  const double mass1 = tilted_mass(psi, 1.0, tau_b, snr, 0.0);
  b.pf = 0.5 * tau_b / d.turnoff * h1;
  b.qf = clamp01(mass1 / d.turnoff);
  if (rate.is_infinite()) {
    const double sig = 1.0 / std::sqrt(snr * tau_b);
    b.pif = b.pf;
    b.qif = b.qf;
    b.pi = gauss_pdf(psi, 1.0, sig);
    b.qi = gauss_cdf(psi, 1.0, sig);
    return b;
  }
  const double g = rate.value();
  const double alpha = 1.0 - g;
  const double h2_if = std::exp(log_tilted(psi, alpha, tau_b, snr, -g * tau_b));
  const double h2_i = std::exp(log_tilted(psi, alpha, tau_b, snr, -(g - 1.0) * tau_b));
  b.pif = std::max(0.0, 0.5 * tau_b / d.both_edges * (h1 - h2_if));
  b.pi = 0.5 * g * tau_b / d.onset * h2_i;
  b.qif = clamp01(
      (mass1 - tilted_mass_over_rate(psi, alpha, tau_b, snr, -g * tau_b)) / d.both_edges);
  b.qi = clamp01(g / d.onset * tilted_mass_over_rate(psi, alpha, tau_b, snr, -(g - 1.0) * tau_b));
  return b;
}

struct Eval {
  double pdf, cdf;
};

// Contribution of configurations with the two pulse edges in distinct bins,
// both inside the window, resummed over the tilt ratio a = e^{log_a}. The
// base of the dominant power is chosen so every exponent stays non-positive.
Eval split_edge_block(const GaussLogs& gl, const BarVals& b, double n_bins, double log_a,
                      double log_pre) {
  const double m = n_bins - 1.0;
  const double log_u = gl.lq_p - gl.lq_m + log_a;
  const bool swapped = log_u > 0.0;
  const double base = swapped ? gl.lq_p + log_a : gl.lq_m;
  const double log_y = swapped ? -log_u : log_u;
  const double gv = geom_sum(m, log_y);
  const double gi = geom_sum_idx(m, log_y);
  const double g_near = (m - 1.0) * gv - gi;
  const double lg_if = slog(gv);
  const double lg_minus = slog(swapped ? gi : g_near);
  const double lg_plus = slog(swapped ? g_near : gi);
  const double pre = log_pre + log_a + (n_bins - 2.0) * base;
  Eval e;
  e.pdf = std::exp(pre + lg_if) * (b.pi * b.qf + b.qi * b.pf) +
          std::exp(pre + lg_minus + gl.lp_m - gl.lq_m) * (b.qi * b.qf) +
          std::exp(pre + lg_plus + gl.lp_p - gl.lq_p) * (b.qi * b.qf);
  e.cdf = std::exp(pre + lg_if) * (b.qi * b.qf);
  return e;
}

Eval peak_plus_eval(double psi, const ReadoutConfig& cfg) {
  const double tb = cfg.tau_b();
  const double sig = cfg.sigma();
  const double snr = cfg.snr;
  const double nb = cfg.n_bins;
  if (psi <= -1.0 - 30.0 * sig) return {0.0, 0.0};
  if (psi >= 1.0 + 30.0 * sig) return {0.0, 1.0};
  const GaussLogs gl = gauss_logs(psi, sig);

  if (cfg.rate.is_infinite()) {
    const double dff = -std::expm1(-tb);
    const BinNormConstants d{dff, 1.0, dff};
    const BarVals b = bar_vals(psi, cfg.rate, tb, snr, d);
    double pdf = dff * ((nb - 1.0) * std::exp((nb - 2.0) * gl.lq_m + gl.lp_m) * b.qf +
                        std::exp((nb - 1.0) * gl.lq_m) * b.pf);
    double cdf = dff * std::exp((nb - 1.0) * gl.lq_m) * b.qf;
    const Eval e1 = split_edge_block(gl, b, nb, -tb, 0.0);
    pdf += dff * e1.pdf;
    cdf += dff * e1.cdf;
    // Turn-off beyond the window: every bin sits at the pulse level.
    pdf += nb * std::exp(-tb * nb + (nb - 1.0) * gl.lq_p + gl.lp_p);
    cdf += std::exp(nb * (-tb + gl.lq_p));
    return {std::max(0.0, pdf), clamp01(cdf)};
  }

  const double g = cfg.rate.value();
  const BinNormConstants d = norm_constants(g, tb);
  const BarVals b = bar_vals(psi, cfg.rate, tb, snr, d);
  const double la = -g * tb;

  // Both edges in one bin, anywhere in the window.
  const double g_na = geom_sum(nb, la);
  double pdf = d.both_edges * g_na *
               ((nb - 1.0) * std::exp((nb - 2.0) * gl.lq_m + gl.lp_m) * b.qif +
                std::exp((nb - 1.0) * gl.lq_m) * b.pif);
  double cdf = d.both_edges * g_na * std::exp((nb - 1.0) * gl.lq_m) * b.qif;

  // Edges in distinct bins, both inside the window.
  const Eval e1 = split_edge_block(gl, b, nb, -tb, 0.0);
  const Eval e2 = split_edge_block(gl, b, nb, (g - 1.0) * tb, nb * la);
  const double scale = d.onset * d.turnoff / -std::expm1(la);
  pdf += scale * (e1.pdf - e2.pdf);
  cdf += scale * (e1.cdf - e2.cdf);

  // Turn-on inside, turn-off beyond the window.
  const double la3 = -(g - 1.0) * tb;
  const double log_v = gl.lq_m - gl.lq_p + la3;
  const bool swapped = log_v > 0.0;
  const double base = swapped ? gl.lq_m + la3 : gl.lq_p;
  const double log_y = swapped ? -log_v : log_v;
  const double gv = geom_sum(nb, log_y);
  const double gi = geom_sum_idx(nb, log_y);
  const double g_near = (nb - 1.0) * gv - gi;
  const double lgc_i = slog(gv);
  const double lgc_m = slog(swapped ? g_near : gi);
  const double lgc_p = slog(swapped ? gi : g_near);
  const double pre = -tb * nb + (nb - 1.0) * base;
  pdf += d.onset * (std::exp(pre + lgc_i) * b.pi +
                    std::exp(pre + lgc_m + gl.lp_m - gl.lq_m) * b.qi +
                    std::exp(pre + lgc_p + gl.lp_p - gl.lq_p) * b.qi);
  cdf += d.onset * std::exp(pre + lgc_i) * b.qi;

  // Pulse missed the window entirely.
  pdf += nb * std::exp(nb * la + (nb - 1.0) * gl.lq_m + gl.lp_m);
  cdf += std::exp(nb * (la + gl.lq_m));
  return {std::max(0.0, pdf), clamp01(cdf)};
}

Eval peak_minus_eval(double psi, const ReadoutConfig& cfg) {
  const double sig = cfg.sigma();
  if (psi <= -1.0 - 30.0 * sig) return {0.0, 0.0};
  if (psi >= 1.0 + 30.0 * sig) return {0.0, 1.0};
  const double nb = cfg.n_bins;
  const double lq = log_gauss_cdf(psi, -1.0, sig);
  const double lp = log_gauss_pdf(psi, -1.0, sig);
  return {nb * std::exp((nb - 1.0) * lq + lp), clamp01(std::exp(nb * lq))};
}

Eval boxcar_plus_eval(double psi, const ReadoutConfig& cfg) {
  const double tm = cfg.tau_m;
  const double snr = cfg.snr;
  const double sig = 1.0 / std::sqrt(snr * tm);
  if (psi <= -1.0 - 30.0 * sig) return {0.0, 0.0};
  if (psi >= 1.0 + 30.0 * sig) return {0.0, 1.0};
  if (cfg.rate.is_infinite()) {
    const double dff = -std::expm1(-tm);
    const BinNormConstants d{dff, 1.0, dff};
    const BarVals b = bar_vals(psi, cfg.rate, tm, snr, d);
    const double w = std::exp(-tm);
    return {dff * b.pf + w * gauss_pdf(psi, 1.0, sig),
            clamp01(dff * b.qf + w * gauss_cdf(psi, 1.0, sig))};
  }
  const double g = cfg.rate.value();
  const BinNormConstants d = norm_constants(g, tm);
  const BarVals b = bar_vals(psi, cfg.rate, tm, snr, d);
  const double w_i = d.onset * std::exp(-tm);
  const double w_m = std::exp(-g * tm);
  return {std::max(0.0, d.both_edges * b.pif + w_i * b.pi + w_m * gauss_pdf(psi, -1.0, sig)),
          clamp01(d.both_edges * b.qif + w_i * b.qi + w_m * gauss_cdf(psi, -1.0, sig))};
}

void require_finite_rate(const ReadoutConfig& cfg, const char* what) {
  if (cfg.rate.is_infinite()) {
    throw std::invalid_argument(std::string(what) + ": rate must be finite; use the limit forms");
  }
}

void require_infinite_rate(const ReadoutConfig& cfg, const char* what) {
  if (!cfg.rate.is_infinite()) {
    throw std::invalid_argument(std::string(what) + ": rate must be INFINITE");
  }
}

int integral_bins(const ReadoutConfig& cfg) {
  const double r = std::round(cfg.n_bins);
  if (r < 1.0 || std::abs(cfg.n_bins - r) > 1e-9 * std::max(1.0, std::abs(cfg.n_bins))) {
    throw std::invalid_argument("n_bins must be a positive integer for per-bin evaluation");
  }
  return static_cast<int>(r);
}

}  // namespace

double bin_pdf(double psi, double phi, double sigma) { return gauss_pdf(psi, phi, sigma); }

double bin_cdf(double psi, double phi, double sigma) { return gauss_cdf(psi, phi, sigma); }

BinNormConstants norm_constants(double rate, double tau_b) {
  if (!(rate > 0.0) || !std::isfinite(rate) || !(tau_b > 0.0) || !std::isfinite(tau_b)) {
    throw std::invalid_argument("norm_constants: rate and tau_b must be positive and finite");
  }
  BinNormConstants d;
  d.turnoff = -std::expm1(-tau_b);
  d.onset = rate * tau_b * exprel(-(rate - 1.0) * tau_b);
  d.both_edges = -std::expm1(-rate * tau_b) - d.onset * std::exp(-tau_b);
  return d;
}

double cell_prob(int m, int n, const TurnOnRate& rate, double tau_b) {
  if (!(tau_b > 0.0) || !std::isfinite(tau_b)) {
    throw std::invalid_argument("cell_prob: tau_b must be positive and finite");
  }
  if (m < 0 || n < m) return 0.0;
  if (rate.is_infinite()) {
    if (m > 0) return 0.0;
    return -std::expm1(-tau_b) * std::exp(-tau_b * n);
  }
  const double g = rate.value();
  const BinNormConstants d = norm_constants(g, tau_b);
  if (n == m) return d.both_edges * std::exp(-g * tau_b * m);
  return d.onset * d.turnoff * std::exp(-g * tau_b * m - tau_b * (n - m));
}

RegionWeights region_weights(const TurnOnRate& rate, double tau_m) {
  if (!(tau_m > 0.0) || !std::isfinite(tau_m)) {
    throw std::invalid_argument("region_weights: tau_m must be positive and finite");
  }
  RegionWeights w;
  if (rate.is_infinite()) {
    w.missed = 0.0;
    w.overrun = std::exp(-tau_m);
    w.contained = -std::expm1(-tau_m);
    return w;
  }
  const double g = rate.value();
  w.missed = std::exp(-g * tau_m);
  w.overrun = g * tau_m * exprel(-(g - 1.0) * tau_m) * std::exp(-tau_m);
  w.contained = std::max(0.0, -std::expm1(-g * tau_m) - w.overrun);
  return w;
}

double tilted_window_pdf(double psi, double alpha, double tau_b, double snr) {
  return std::exp(log_tilted(psi, alpha, tau_b, snr, 0.0));
}

double tilted_window_mass(double psi, double alpha, double tau_b, double snr) {
  return tilted_mass(psi, alpha, tau_b, snr, 0.0);
}

PulseBinDists avg_bin_dists(const TurnOnRate& rate, double tau_b, double snr) {
  if (!(tau_b > 0.0) || !(snr > 0.0)) {
    throw std::invalid_argument("avg_bin_dists: tau_b and snr must be positive");
  }
  const double sig = 1.0 / std::sqrt(snr * tau_b);
  const double lo = -1.0 - kSupportSigmas * sig;
  const double hi = 1.0 + kSupportSigmas * sig;
  const BinNormConstants d =
      rate.is_infinite()
          ? BinNormConstants{-std::expm1(-tau_b), 1.0, -std::expm1(-tau_b)}
          : norm_constants(rate.value(), tau_b);
  PulseBinDists out;
  out.both_edges = {[=](double x) { return bar_vals(x, rate, tau_b, snr, d).pif; },
                    [=](double x) { return bar_vals(x, rate, tau_b, snr, d).qif; }, lo, hi};
  out.onset_only = {[=](double x) { return bar_vals(x, rate, tau_b, snr, d).pi; },
                    [=](double x) { return bar_vals(x, rate, tau_b, snr, d).qi; }, lo, hi};
  out.turnoff_only = {[=](double x) { return bar_vals(x, rate, tau_b, snr, d).pf; },
                      [=](double x) { return bar_vals(x, rate, tau_b, snr, d).qf; }, lo, hi};
  return out;
}

double peak_pdf_minus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  return peak_minus_eval(psi, cfg).pdf;
}

double peak_cdf_minus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  return peak_minus_eval(psi, cfg).cdf;
}

double peak_pdf_plus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg, "peak_pdf_plus");
  return peak_plus_eval(psi, cfg).pdf;
}

double peak_cdf_plus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg, "peak_cdf_plus");
  return peak_plus_eval(psi, cfg).cdf;
}

double peak_pdf_cell(double psi, int m, int n, const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg, "peak_pdf_cell");
  const int nbins = integral_bins(cfg);
  if (m < 0 || n < m) {
    throw std::invalid_argument("peak_pdf_cell: cell indices must satisfy 0 <= m <= n");
  }
  const double tb = cfg.tau_b();
  const double sig = cfg.sigma();
  if (psi <= -1.0 - 30.0 * sig || psi >= 1.0 + 30.0 * sig) return 0.0;
  const GaussLogs gl = gauss_logs(psi, sig);
  if (m >= nbins) return nbins * std::exp((nbins - 1.0) * gl.lq_m + gl.lp_m);
  const BinNormConstants d = norm_constants(cfg.rate.value(), tb);
  const BarVals b = bar_vals(psi, cfg.rate, tb, cfg.snr, d);
  if (n >= nbins) {
    const double pre = m * gl.lq_m + (nbins - 1.0 - m) * gl.lq_p;
    return m * std::exp(pre - gl.lq_m + gl.lp_m) * b.qi +
           (nbins - 1.0 - m) * std::exp(pre - gl.lq_p + gl.lp_p) * b.qi +
           std::exp(pre) * b.pi;
  }
  if (m == n) {
    const double pre = (nbins - 1.0) * gl.lq_m;
    return (nbins - 1.0) * std::exp(pre - gl.lq_m + gl.lp_m) * b.qif + std::exp(pre) * b.pif;
  }
  const int k = n - m;
  const double pre = (nbins - 1.0 - k) * gl.lq_m + (k - 1.0) * gl.lq_p;
  return (nbins - 1.0 - k) * std::exp(pre - gl.lq_m + gl.lp_m) * (b.qi * b.qf) +
         (k - 1.0) * std::exp(pre - gl.lq_p + gl.lp_p) * (b.qi * b.qf) +
         std::exp(pre) * (b.pi * b.qf + b.qi * b.pf);
}

namespace {

Eval peak_fixed_eval(double psi, QubitState state, const PulseTimes& pulse,
                     const ReadoutConfig& cfg) {
  cfg.validate();
  const int nbins = integral_bins(cfg);
  const double tb = cfg.tau_b();
  const double sig = cfg.sigma();
  double sum_lq = 0.0;
  std::vector<double> lq(nbins), lp(nbins);
  for (int l = 0; l < nbins; ++l) {
    double phi = -1.0;
    if (state == QubitState::kPlus) {
      const double lo = l * tb;
      const double hi = lo + tb;
      const double overlap =
          std::max(0.0, std::min(pulse.off, hi) - std::max(pulse.on, lo));
      phi = 2.0 * overlap / tb - 1.0;
    }
    lq[l] = log_gauss_cdf(psi, phi, sig);
    lp[l] = log_gauss_pdf(psi, phi, sig);
    sum_lq += lq[l];
  }
  double pdf = 0.0;
  for (int l = 0; l < nbins; ++l) pdf += std::exp(sum_lq - lq[l] + lp[l]);
  return {pdf, clamp01(std::exp(sum_lq))};
}

}  // namespace

double peak_pdf_fixed_times(double psi, QubitState state, const PulseTimes& pulse,
                            const ReadoutConfig& cfg) {
  return peak_fixed_eval(psi, state, pulse, cfg).pdf;
}

double peak_cdf_fixed_times(double psi, QubitState state, const PulseTimes& pulse,
                            const ReadoutConfig& cfg) {
  return peak_fixed_eval(psi, state, pulse, cfg).cdf;
}

double boxcar_pdf_minus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  return gauss_pdf(psi, -1.0, 1.0 / std::sqrt(cfg.snr * cfg.tau_m));
}

double boxcar_cdf_minus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  return gauss_cdf(psi, -1.0, 1.0 / std::sqrt(cfg.snr * cfg.tau_m));
}

double boxcar_pdf_plus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg, "boxcar_pdf_plus");
  return boxcar_plus_eval(psi, cfg).pdf;
}

double boxcar_cdf_plus(double psi, const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg, "boxcar_cdf_plus");
  return boxcar_plus_eval(psi, cfg).cdf;
}

StateDists peak_dists(const ReadoutConfig& cfg) {
  cfg.validate();
  const double hw = 1.0 + kSupportSigmas * cfg.sigma();
  StateDists s;
  s.minus = {[cfg](double x) { return peak_minus_eval(x, cfg).pdf; },
             [cfg](double x) { return peak_minus_eval(x, cfg).cdf; }, -hw, hw};
  s.plus = {[cfg](double x) { return peak_plus_eval(x, cfg).pdf; },
            [cfg](double x) { return peak_plus_eval(x, cfg).cdf; }, -hw, hw};
  return s;
}

StateDists boxcar_dists(const ReadoutConfig& cfg) {
  cfg.validate();
  const double sig = 1.0 / std::sqrt(cfg.snr * cfg.tau_m);
  const double hw = 1.0 + kSupportSigmas * sig;
  StateDists s;
  s.minus = {[cfg](double x) { return boxcar_pdf_minus(x, cfg); },
             [cfg](double x) { return boxcar_cdf_minus(x, cfg); }, -hw, hw};
  s.plus = {[cfg](double x) { return boxcar_plus_eval(x, cfg).pdf; },
            [cfg](double x) { return boxcar_plus_eval(x, cfg).cdf; }, -hw, hw};
  return s;
}

StateDists limit_peak_dists(const ReadoutConfig& cfg) {
  cfg.validate();
  require_infinite_rate(cfg, "limit_peak_dists");
  return peak_dists(cfg);
}

StateDists limit_boxcar_dists(const ReadoutConfig& cfg) {
  cfg.validate();
  require_infinite_rate(cfg, "limit_boxcar_dists");
  return boxcar_dists(cfg);
}

}  // namespace readout
