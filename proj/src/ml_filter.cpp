#include "readout/ml_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "readout/rng.hpp"
#include "readout/special.hpp"
#include "readout/util.hpp"

namespace readout {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double log_add(double a, double b) {
  LogSumExp acc;
  acc.add(a);
  acc.add(b);
  return acc.value();
}

}  // namespace

double LikelihoodParts::l1() const { return std::exp(log_l1); }
double LikelihoodParts::l2() const { return std::exp(log_l2); }
double LikelihoodParts::l3() const { return std::exp(log_l3); }

double LikelihoodParts::log_total() const {
  LogSumExp acc;
  acc.add(log_l1);
  acc.add(log_l2);
  acc.add(log_l3);
  return acc.value();
}

double LikelihoodParts::posterior_plus() const { return logistic(log_total()); }

LikelihoodParts likelihood_direct(const ContinuousTrace& trace, const ReadoutConfig& cfg) {
  if (trace.samples.empty() || !(trace.dt > 0.0)) {
    throw std::domain_error("likelihood integration needs a nonempty trace");
  }
  if (trace.duration() < cfg.tau_m * (1.0 - 1e-9)) {
    throw std::domain_error("trace must cover the full measurement window");
  }
  const double r = cfg.snr;
  const double dt = trace.dt;
  const bool finite = !cfg.rate.is_infinite();
  const double g = finite ? cfg.rate.value() : 0.0;

  // Region order: l3 (pulse not yet started) feeds l2 (pulse running) feeds
  // l1 (pulse finished). Each sample applies the closed-form propagator of
  // the linear system with the signal held at that sample's value.
  LikelihoodParts parts;
  parts.log_l1 = kNegInf;
  parts.log_l2 = finite ? kNegInf : 0.0;
  parts.log_l3 = finite ? 0.0 : kNegInf;

  const double log_g = finite ? std::log(g) : kNegInf;
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const double c = 2.0 * trace.samples[k] * r - 1.0;
    const double growth = exp_integral(c, dt);  // int_0^dt e^{c s} ds

    double log_from_l2 = parts.log_l2 + std::log(growth);
    if (finite) {
      // (int_0^dt e^{c s} ds - int_0^dt e^{-g s} ds) / (c + g), the kernel of
      // starts that happen inside this sample and are still running at its
      // end, integrated over the start time.
      const double a = c + g;
      const double kernel = std::abs(a) * dt < 1e-6
                                ? exp_integral_t(c, dt)
                                : (growth - exp_integral(-g, dt)) / a;
      const double log_started = parts.log_l3 + log_g + std::log(dt * exprel(a * dt)) - g * dt;
      // Starts inside the sample that also finish inside it.
      const double log_finished = parts.log_l3 + log_g + std::log(std::max(kernel, 0.0));
      parts.log_l1 = log_add(parts.log_l1, log_add(log_from_l2, log_finished));
      parts.log_l2 = log_add(parts.log_l2 + c * dt, log_started);
      parts.log_l3 = -g * (dt * static_cast<double>(k + 1));
    } else {
      parts.log_l1 = log_add(parts.log_l1, log_from_l2);
      parts.log_l2 += c * dt;
    }
  }
  return parts;
}

namespace {

struct Derivatives {
  double d1, d2, d3, dl;
};

struct PosteriorSystem {
  double two_r;  // 2 * snr
  double g;      // finite turn-on rate or 0 in the infinite limit
  bool finite;

  Derivatives rhs(const EstimatorState& y, double psi) const {
    const double s = two_r * psi;
    const double total = std::max(y.p1 + y.p2 + (finite ? y.p3 : 0.0), 1e-290);
    Derivatives d;
    d.d1 = y.p2 - s * y.p1 * y.p2;
    d.d2 = (finite ? g * y.p3 : 0.0) + (s - 1.0) * y.p2 - s * y.p2 * y.p2;
    d.d3 = finite ? -g * y.p3 - s * y.p2 * y.p3 : 0.0;
    d.dl = s * y.p2 / total;
    return d;
  }

  EstimatorState advance(const EstimatorState& y, const Derivatives& d, double h) const {
    return {y.p1 + h * d.d1, y.p2 + h * d.d2, y.p3 + h * d.d3, y.log_odds + h * d.dl};
  }

  EstimatorState rk4_step(const EstimatorState& y, double psi, double h) const {
    const Derivatives k1 = rhs(y, psi);
    const Derivatives k2 = rhs(advance(y, k1, 0.5 * h), psi);
    const Derivatives k3 = rhs(advance(y, k2, 0.5 * h), psi);
    const Derivatives k4 = rhs(advance(y, k3, h), psi);
    EstimatorState out;
    out.p1 = y.p1 + h / 6.0 * (k1.d1 + 2.0 * k2.d1 + 2.0 * k3.d1 + k4.d1);
    out.p2 = y.p2 + h / 6.0 * (k1.d2 + 2.0 * k2.d2 + 2.0 * k3.d2 + k4.d2);
    out.p3 = y.p3 + h / 6.0 * (k1.d3 + 2.0 * k2.d3 + 2.0 * k3.d3 + k4.d3);
    out.log_odds = y.log_odds + h / 6.0 * (k1.dl + 2.0 * k2.dl + 2.0 * k3.dl + k4.dl);
    return out;
  }

  bool in_band(const EstimatorState& y) const {
    const auto ok = [](double p) { return p >= -kEstimatorBand && p <= 1.0 + kEstimatorBand; };
    return ok(y.p1) && ok(y.p2) && ok(y.p3) && ok(y.posterior());
  }
};

// Integrates the whole trace, invoking observe(state) for the initial state
// and after every sample. Returns false on a band violation.
template <typename Observer>
bool integrate_once(const ContinuousTrace& trace, const PosteriorSystem& sys, int substeps,
                    int multiplier, Observer&& observe) {
  EstimatorState y;
  y.p2 = sys.finite ? 0.0 : 0.5;
  y.p3 = sys.finite ? 0.5 : 0.0;
  observe(y);
  const double dt = trace.dt;
  for (double psi : trace.samples) {
    int m = substeps;
    if (m <= 0) {
      const double rate_bound = std::abs(sys.two_r * psi) + 1.0 + (sys.finite ? sys.g : 0.0);
      m = static_cast<int>(std::ceil(rate_bound * dt / 0.5));
      m = std::max(m, 1);
    }
    m *= multiplier;
    const double h = dt / static_cast<double>(m);
    for (int s = 0; s < m; ++s) {
      y = sys.rk4_step(y, psi, h);
      if (!sys.in_band(y)) return false;
    }
    observe(y);
  }
  return true;
}

// Each retry restarts from scratch with doubled substeps, so the observer is
// reset before every attempt.
template <typename Reset, typename Observer>
void integrate_with_retry(const ContinuousTrace& trace, const ReadoutConfig& cfg, int substeps,
                          Reset&& reset, Observer&& observe) {
  if (trace.samples.empty() || !(trace.dt > 0.0)) {
    throw std::domain_error("estimator integration needs a nonempty trace");
  }
  PosteriorSystem sys;
  sys.two_r = 2.0 * cfg.snr;
  sys.finite = !cfg.rate.is_infinite();
  sys.g = sys.finite ? cfg.rate.value() : 0.0;

  for (int multiplier = 1; multiplier <= 64; multiplier *= 2) {
    reset();
    if (integrate_once(trace, sys, substeps, multiplier, observe)) return;
  }
  throw std::runtime_error("posterior left the unit band despite step refinement");
}

}  // namespace

std::vector<EstimatorState> integrate_estimator(const ContinuousTrace& trace,
                                                const ReadoutConfig& cfg, int substeps) {
  std::vector<EstimatorState> states;
  states.reserve(trace.samples.size() + 1);
  integrate_with_retry(
      trace, cfg, substeps, [&] { states.clear(); },
      [&](const EstimatorState& y) { states.push_back(y); });
  return states;
}

EstimatorState estimator_final(const ContinuousTrace& trace, const ReadoutConfig& cfg,
                               int substeps) {
  EstimatorState last;
  integrate_with_retry(
      trace, cfg, substeps, [] {}, [&](const EstimatorState& y) { last = y; });
  return last;
}

double default_ml_dt(const ReadoutConfig& cfg) {
  double raw = 0.1 / cfg.snr;
  if (!cfg.rate.is_infinite()) raw = std::min(raw, 0.1 / cfg.rate.value());
  raw = std::min(raw, cfg.tau_b() / 10.0);
  const double steps = std::ceil(cfg.tau_m / raw);
  return cfg.tau_m / steps;
}

MlErrorResult ml_error_rate(const ReadoutConfig& cfg, std::int64_t n_records,
                            std::uint64_t seed, int threads, double dt) {
  cfg.validate();
  if (n_records <= 0) throw std::invalid_argument("record count must be positive");
  if (dt <= 0.0) dt = default_ml_dt(cfg);

  std::vector<unsigned char> wrong(static_cast<std::size_t>(n_records), 0);
  parallel_for(static_cast<std::size_t>(n_records), resolve_thread_count(threads),
               [&](std::size_t i) {
                 Rng rng(seed, i);
                 const QubitState state = rng.coin() ? QubitState::kPlus : QubitState::kMinus;
                 const ContinuousTrace trace = generate_continuous_trace(cfg, dt, state, rng);
                 const double posterior = estimator_final(trace, cfg).posterior();
                 bool declare_plus;
                 if (posterior > 0.5) {
                   declare_plus = true;
                 } else if (posterior < 0.5) {
                   declare_plus = false;
                 } else {
                   declare_plus = rng.coin();
                 }
                 wrong[i] = declare_plus != (state == QubitState::kPlus) ? 1 : 0;
               });

  MlErrorResult out;
  out.records = n_records;
  for (unsigned char w : wrong) out.wrong += w;
  out.eps = static_cast<double>(out.wrong) / static_cast<double>(n_records);
  out.std_err = std::sqrt(std::max(out.eps * (1.0 - out.eps), 0.0) /
                          static_cast<double>(n_records));
  return out;
}

}  // namespace readout
