#include "readout/error_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "readout/optimize.hpp"
#include "readout/util.hpp"

namespace readout {

namespace {

constexpr int kScanPoints = 512;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Prior-weighted error of "declare PLUS above nu" for prior odds
// ratio = P(MINUS)/P(PLUS).
double weighted_error(const DistPair& minus, const DistPair& plus, double nu, double ratio) {
  const double w_plus = 1.0 / (1.0 + ratio);
  return w_plus * clamp01(plus.cdf(nu)) + (1.0 - w_plus) * clamp01(1.0 - minus.cdf(nu));
}

}  // namespace

double solve_threshold(const DistPair& minus, const DistPair& plus, double prior_ratio) {
  if (!(prior_ratio > 0.0) || !std::isfinite(prior_ratio)) {
    throw std::invalid_argument("prior odds ratio must be positive and finite");
  }
  const double lo = std::min(minus.support_lo, plus.support_lo);
  const double hi = std::max(minus.support_hi, plus.support_hi);

  const auto diff = [&](double x) { return plus.pdf(x) - prior_ratio * minus.pdf(x); };

  // Exact zeros carry no sign information (flat stretches, or both tails
  // underflowing at the support edges), so the scan skips them; a crossing is
  // a sign change between consecutive nonzero samples.
  std::vector<double> crossings;
  bool have_prev = false;
  double prev_x = lo;
  double prev_g = 0.0;
  for (int k = 0; k < kScanPoints; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / (kScanPoints - 1);
    const double g = diff(x);
    if (g == 0.0) continue;
    if (have_prev && (prev_g < 0.0) != (g < 0.0)) {
      double a = prev_x;
      double b = x;
      double ga = prev_g;
      for (int it = 0; it < 90 && b - a > 1e-15 * (hi - lo); ++it) {
        const double m = 0.5 * (a + b);
        const double gm = diff(m);
        if (gm == 0.0) {
          a = b = m;
          break;
        }
        if ((ga < 0.0) != (gm < 0.0)) {
          b = m;
        } else {
          a = m;
          ga = gm;
        }
      }
      crossings.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_g = g;
    have_prev = true;
  }

  if (crossings.empty()) {
    throw std::runtime_error(
        "degenerate distributions: the densities never cross inside the support");
  }
  double best = crossings.front();
  double best_eps = weighted_error(minus, plus, best, prior_ratio);
  for (std::size_t i = 1; i < crossings.size(); ++i) {
    const double eps = weighted_error(minus, plus, crossings[i], prior_ratio);
    if (eps < best_eps) {
      best_eps = eps;
      best = crossings[i];
    }
  }
  return best;
}

ErrorRates error_rates(const DistPair& minus, const DistPair& plus, double nu) {
  if (!std::isfinite(nu)) throw std::invalid_argument("threshold must be finite");
  ErrorRates out;
  out.eps_plus = clamp01(plus.cdf(nu));
  out.eps_minus = clamp01(1.0 - minus.cdf(nu));
  out.eps = 0.5 * (out.eps_plus + out.eps_minus);
  return out;
}

double boxcar_error_analytic(double nu, const ReadoutConfig& cfg) {
  cfg.validate();
  if (cfg.rate.is_infinite()) {
    throw std::invalid_argument("closed-form boxcar error requires a finite turn-on rate");
  }
  const double g = cfg.rate.value();
  const double tm = cfg.tau_m;
  const BinNormConstants c = norm_constants(g, tm);
  const PulseBinDists d = avg_bin_dists(cfg.rate, tm, cfg.snr);
  const double sigma = 1.0 / std::sqrt(cfg.snr * tm);
  const double q_minus = bin_cdf(nu, -1.0, sigma);

  const double eps_plus = c.both_edges * d.both_edges.cdf(nu) +
                          c.onset * std::exp(-tm) * d.onset_only.cdf(nu) +
                          std::exp(-g * tm) * q_minus;
  return 0.5 * (clamp01(eps_plus) + clamp01(1.0 - q_minus));
}

namespace {

// Effective turn-on prefactor of the large-snr expansions; tends to 1/tau_m
// as the rate grows.
double asymptotic_gamma(double g, double tm) {
  const double e = std::exp(-g * tm);
  return (1.0 - e) / ((1.0 - (1.0 - g) * e) * tm);
}

void require_finite_rate(const ReadoutConfig& cfg) {
  if (cfg.rate.is_infinite()) {
    throw std::invalid_argument("asymptotic expansions require a finite turn-on rate");
  }
}

}  // namespace

double asymptotic_threshold(const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg);
  const double r = cfg.snr;
  const double tm = cfg.tau_m;
  const double gam = asymptotic_gamma(cfg.rate.value(), tm);
  const double arg = std::sqrt(2.0 * r * tm / std::numbers::pi) * gam;
  if (!(arg > 1.0)) {
    throw std::domain_error("outside the asymptotic regime: log argument <= 1");
  }
  return std::sqrt(2.0 / (r * tm)) * std::sqrt(std::log(arg)) - 1.0;
}

double asymptotic_error(const ReadoutConfig& cfg) {
  cfg.validate();
  require_finite_rate(cfg);
  const double r = cfg.snr;
  const double tm = cfg.tau_m;
  const double g = cfg.rate.value();
  const double gam = asymptotic_gamma(g, tm);
  const double arg1 = 2.0 * gam * gam * r * tm / std::numbers::pi;
  const double arg2 = 4.0 * r * tm;
  if (!(arg1 > 1.0) || !(arg2 > 1.0)) {
    throw std::domain_error("outside the asymptotic regime: log argument <= 1");
  }
  const double e = std::exp(-g * tm);
  const double bracket = 1.0 - (1.0 - g) * e;
  return 0.5 * e + 0.25 * std::sqrt(tm / r) * bracket *
                       (std::sqrt(std::log(arg1)) + 1.0 / std::sqrt(std::log(arg2)));
}

double degeneracy_threshold(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::invalid_argument("snr must be positive and finite");
  }
  return snr / 4.0;
}

StateDists filter_dists(FilterKind filter, const ReadoutConfig& cfg) {
  return filter == FilterKind::kBoxcar ? boxcar_dists(cfg) : peak_dists(cfg);
}

ErrorRates filter_error_at(FilterKind filter, const ReadoutConfig& cfg, double* nu_out) {
  const StateDists dists = filter_dists(filter, cfg);
  const double nu = solve_threshold(dists.minus, dists.plus, 1.0);
  if (nu_out != nullptr) *nu_out = nu;
  return error_rates(dists.minus, dists.plus, nu);
}

namespace {

struct Objective {
  FilterKind filter;
  TurnOnRate rate;
  double snr;
  OptimizeRanges ranges;
  std::vector<OptimizerProbe>* trace;

  double eval(double tau_m, double n_bins, double* nu_out = nullptr) const {
    ReadoutConfig cfg;
    cfg.snr = snr;
    cfg.rate = rate;
    cfg.tau_m = tau_m;
    cfg.n_bins = n_bins;
    const double eps = filter_error_at(filter, cfg, nu_out).eps;
    if (trace != nullptr) trace->push_back({tau_m, n_bins, eps});
    return eps;
  }

  // Coordinates are (log tau_m[, log n_bins]); points outside the search box
  // are clamped and charged a quadratic penalty so the simplex stays inside.
  double operator()(const std::vector<double>& x) const {
    double log_tm = x[0];
    double log_n = filter == FilterKind::kBoxcar ? 0.0 : x[1];
    double penalty = 0.0;
    const auto clamp_log = [&penalty](double v, double lo, double hi) {
      const double c = std::min(std::max(v, std::log(lo)), std::log(hi));
      penalty += (v - c) * (v - c);
      return c;
    };
    log_tm = clamp_log(log_tm, ranges.tau_m_lo, ranges.tau_m_hi);
    if (filter == FilterKind::kPeak) log_n = clamp_log(log_n, ranges.n_bins_lo, ranges.n_bins_hi);
    return eval(std::exp(log_tm), std::exp(log_n)) + penalty;
  }
};

}  // namespace

OptimizationResult optimize_filter(FilterKind filter, const TurnOnRate& rate, double snr,
                                   const OptimizeRanges& ranges) {
  if (!(ranges.tau_m_lo > 0.0) || !(ranges.tau_m_hi > ranges.tau_m_lo) ||
      !(ranges.n_bins_lo >= 1.0) || !(ranges.n_bins_hi > ranges.n_bins_lo)) {
    throw std::invalid_argument("invalid optimization ranges");
  }

  OptimizationResult result;
  Objective objective{filter, rate, snr, ranges, &result.trace};

  const int grid = 6;
  const double lt_lo = std::log(ranges.tau_m_lo);
  const double lt_hi = std::log(ranges.tau_m_hi);
  const double ln_lo = std::log(ranges.n_bins_lo);
  const double ln_hi = std::log(ranges.n_bins_hi);

  SimplexOptions options;
  options.f_rel_tol = 1e-4;
  options.step = 0.35;
  options.max_iters = 300;

  bool any_converged = false;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  const auto start_coord = [grid](double lo, double hi, int i) {
    return lo + (hi - lo) * (static_cast<double>(i) + 0.5) / grid;
  };

  for (int i = 0; i < grid; ++i) {
    const double lt = start_coord(lt_lo, lt_hi, i);
    const int n_starts = filter == FilterKind::kBoxcar ? 1 : grid;
    for (int j = 0; j < n_starts; ++j) {
      std::vector<double> x0{lt};
      if (filter == FilterKind::kPeak) x0.push_back(start_coord(ln_lo, ln_hi, j));
      const SimplexResult run = minimize_simplex(objective, x0, options);
      any_converged = any_converged || run.converged;
      if (run.f < best_f) {
        best_f = run.f;
        best_x = run.x;
      }
    }
  }

  // The trace may contain a point below the best simplex vertex (probed during
  // a rejected expansion); honor it so the reported point is the global best.
  OptimizerProbe best_probe{0.0, 1.0, std::numeric_limits<double>::infinity()};
  for (const OptimizerProbe& p : result.trace) {
    if (p.eps < best_probe.eps) best_probe = p;
  }
  if (!std::isfinite(best_probe.eps)) {
    throw std::runtime_error("filter optimization produced no finite error rate");
  }
  if (!any_converged) {
    std::ostringstream msg;
    msg << "filter optimization did not converge; best so far: eps=" << best_probe.eps
        << " at tau_m=" << best_probe.tau_m << ", n_bins=" << best_probe.n_bins;
    throw std::runtime_error(msg.str());
  }

  std::vector<OptimizerProbe> trace = std::move(result.trace);
  result.trace.clear();
  result.tau_m = best_probe.tau_m;
  result.n_bins = best_probe.n_bins;
  Objective final_objective{filter, rate, snr, ranges, nullptr};
  result.eps = final_objective.eval(result.tau_m, result.n_bins, &result.nu);

  const double n_floor = std::max(ranges.n_bins_lo, std::floor(result.n_bins));
  const double n_ceil = std::min(ranges.n_bins_hi, std::ceil(result.n_bins));
  result.n_bins_round = n_floor;
  result.eps_round = final_objective.eval(result.tau_m, n_floor, &result.nu_round);
  if (n_ceil != n_floor) {
    double nu_ceil = 0.0;
    const double eps_ceil = final_objective.eval(result.tau_m, n_ceil, &nu_ceil);
    if (eps_ceil < result.eps_round) {
      result.n_bins_round = n_ceil;
      result.eps_round = eps_ceil;
      result.nu_round = nu_ceil;
    }
  }

  result.trace = std::move(trace);
  return result;
}

std::vector<ScalingRow> scaling_study(FilterKind filter, const TurnOnRate& rate,
                                      const std::vector<double>& snr_grid, int threads,
                                      const OptimizeRanges& ranges) {
  if (snr_grid.empty()) throw std::invalid_argument("snr grid must be nonempty");
  std::vector<ScalingRow> rows(snr_grid.size());
  parallel_for(snr_grid.size(), resolve_thread_count(threads), [&](std::size_t i) {
    const double r = snr_grid[i];
    const OptimizationResult opt = optimize_filter(filter, rate, r, ranges);
    const double log_r = std::log(r);
    rows[i] = {r,
               opt.eps,
               opt.nu,
               opt.tau_m,
               opt.n_bins,
               opt.eps * std::sqrt(r) / log_r,
               opt.eps * r / log_r};
  });
  return rows;
}

}  // namespace readout
