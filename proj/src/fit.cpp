#include "readout/fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "readout/analytic.hpp"
#include "readout/optimize.hpp"
#include "readout/util.hpp"

namespace readout {

double Histogram::total() const {
  double sum = 0.0;
  for (double c : counts) sum += c;
  return sum;
}

void Histogram::validate() const {
  if (counts.empty() || edges.size() != counts.size() + 1) {
    throw std::invalid_argument("histogram needs one more edge than bins");
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) {
      throw std::invalid_argument("histogram edges must be strictly increasing");
    }
  }
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("histogram counts must be nonnegative");
    }
  }
  if (!(total() > 0.0)) throw std::invalid_argument("histogram must hold at least one count");
}

namespace {

[[noreturn]] void ingest_error(const std::string& path, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw std::invalid_argument(msg.str());
}

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && begin != end;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Histogram bin_samples(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("no samples to bin");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(width > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("samples are too degenerate to bin");
  }
  const auto n_bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));

  Histogram hist;
  hist.edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    hist.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  hist.counts.assign(n_bins, 0.0);
  for (double x : sorted) {
    auto idx = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(n_bins));
    idx = std::min(idx, n_bins - 1);
    hist.counts[idx] += 1.0;
  }
  hist.validate();
  return hist;
}

Histogram ingest_histogram(const std::string& path, HistogramFormat format) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file: " + path);

  Histogram hist;
  std::vector<double> samples;
  std::string line;
  std::size_t line_no = 0;
  bool saw_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    double first = 0.0;
    if (!parse_double(fields[0], first)) {
      if (!saw_row && line_no <= 1) continue;  // header row
      ingest_error(path, line_no, "malformed numeric field '" + fields[0] + "'");
    }
    saw_row = true;
    if (format == HistogramFormat::kSamples) {
      samples.push_back(first);
      continue;
    }
    if (fields.size() < 3) ingest_error(path, line_no, "expected edge_lo,edge_hi,count");
    double edge_hi = 0.0;
    double count = 0.0;
    if (!parse_double(fields[1], edge_hi) || !parse_double(fields[2], count)) {
      ingest_error(path, line_no, "malformed numeric field");
    }
    if (!(edge_hi > first)) ingest_error(path, line_no, "bin edges not increasing");
    if (!(count >= 0.0)) ingest_error(path, line_no, "negative count");
    if (hist.edges.empty()) {
      hist.edges.push_back(first);
    } else if (std::abs(hist.edges.back() - first) >
               1e-9 * std::max(1.0, std::abs(first))) {
      ingest_error(path, line_no, "bins are not contiguous with the previous row");
    }
    hist.edges.push_back(edge_hi);
    hist.counts.push_back(count);
  }

  if (format == HistogramFormat::kSamples) {
    if (samples.empty()) ingest_error(path, line_no, "no samples found");
    return bin_samples(samples);
  }
  if (hist.counts.empty()) ingest_error(path, line_no, "no histogram rows found");
  hist.validate();
  return hist;
}

namespace {

ReadoutConfig mixture_config(const FitParams& params, const TurnOnRate& rate, double tau_m) {
  ReadoutConfig cfg;
  cfg.snr = params.snr;
  cfg.rate = rate;
  cfg.tau_m = tau_m;
  // The bin count enters the model continuously, keeping tau_b identifiable
  // (a rounded count would make the likelihood flat between integer steps).
  cfg.n_bins = std::max(1.0, tau_m / params.tau_b);
  cfg.prior_plus = params.p_plus;
  return cfg;
}

}  // namespace

double mixture_pdf(double psi, const FitParams& params, const TurnOnRate& rate, double tau_m) {
  const ReadoutConfig cfg = mixture_config(params, rate, tau_m);
  const StateDists dists = peak_dists(cfg);
  return (1.0 - params.p_plus) * dists.minus.pdf(psi) + params.p_plus * dists.plus.pdf(psi);
}

double mixture_pdf_raw(double x, const FitParams& params, const TurnOnRate& rate, double tau_m) {
  const double psi = (2.0 * x - params.scale) / params.scale;
  return mixture_pdf(psi, params, rate, tau_m) * 2.0 / params.scale;
}

double mixture_cdf_raw(double x, const FitParams& params, const TurnOnRate& rate, double tau_m) {
  const ReadoutConfig cfg = mixture_config(params, rate, tau_m);
  const StateDists dists = peak_dists(cfg);
  const double psi = (2.0 * x - params.scale) / params.scale;
  return (1.0 - params.p_plus) * dists.minus.cdf(psi) + params.p_plus * dists.plus.cdf(psi);
}

namespace {

constexpr double kMaxFitBins = 1e4;

double logit(double p) { return std::log(p / (1.0 - p)); }
double inv_logit(double u) {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

FitParams params_from(const std::vector<double>& u) {
  FitParams p;
  p.scale = std::exp(u[0]);
  p.snr = std::exp(u[1]);
  p.tau_b = std::exp(u[2]);
  p.p_plus = inv_logit(u[3]);
  return p;
}

struct PoissonObjective {
  const Histogram* hist;
  TurnOnRate rate;
  double tau_m;
  double total;

  // Negative Poisson log-likelihood per count; +inf rejects a parameter point
  // (zero predicted mass under an occupied bin, or an absurd bin count).
  double operator()(const std::vector<double>& u) const {
    const FitParams p = params_from(u);
    if (!(tau_m / p.tau_b <= kMaxFitBins)) return std::numeric_limits<double>::infinity();
    const ReadoutConfig cfg = mixture_config(p, rate, tau_m);
    const StateDists dists = peak_dists(cfg);
    const auto mix_cdf = [&](double x) {
      const double psi = (2.0 * x - p.scale) / p.scale;
      return (1.0 - p.p_plus) * dists.minus.cdf(psi) + p.p_plus * dists.plus.cdf(psi);
    };

    double neg_ll = 0.0;
    double cdf_lo = mix_cdf(hist->edges.front());
    for (std::size_t b = 0; b < hist->bins(); ++b) {
      const double cdf_hi = mix_cdf(hist->edges[b + 1]);
      const double mu = total * std::max(cdf_hi - cdf_lo, 0.0);
      cdf_lo = cdf_hi;
      const double n = hist->counts[b];
      if (n > 0.0) {
        if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
        neg_ll -= n * std::log(mu) - mu;
      } else {
        neg_ll += mu;
      }
    }
    return neg_ll / total;
  }
};

// Symmetric 4x4 solve by Gauss-Jordan with partial pivoting; returns false on
// a singular (non-invertible) information matrix.
bool invert4(std::array<double, 16>& m) {
  std::array<double, 32> a{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[static_cast<std::size_t>(i * 8 + j)] = m[static_cast<std::size_t>(i * 4 + j)];
    a[static_cast<std::size_t>(i * 8 + 4 + i)] = 1.0;
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 4; ++row) {
      if (std::abs(a[static_cast<std::size_t>(row * 8 + col)]) >
          std::abs(a[static_cast<std::size_t>(pivot * 8 + col)])) {
        pivot = row;
      }
    }
    if (a[static_cast<std::size_t>(pivot * 8 + col)] == 0.0) return false;
    if (pivot != col) {
      for (int j = 0; j < 8; ++j) {
        std::swap(a[static_cast<std::size_t>(col * 8 + j)], a[static_cast<std::size_t>(pivot * 8 + j)]);
      }
    }
    const double inv = 1.0 / a[static_cast<std::size_t>(col * 8 + col)];
    for (int j = 0; j < 8; ++j) a[static_cast<std::size_t>(col * 8 + j)] *= inv;
    for (int row = 0; row < 4; ++row) {
      if (row == col) continue;
      const double factor = a[static_cast<std::size_t>(row * 8 + col)];
      if (factor == 0.0) continue;
      for (int j = 0; j < 8; ++j) {
        a[static_cast<std::size_t>(row * 8 + j)] -= factor * a[static_cast<std::size_t>(col * 8 + j)];
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m[static_cast<std::size_t>(i * 4 + j)] = a[static_cast<std::size_t>(i * 8 + 4 + j)];
    }
  }
  return true;
}

}  // namespace

FitResult fit_histogram(const Histogram& hist, const TurnOnRate& rate, double tau_m,
                        const FitParams& init, int threads) {
  hist.validate();
  std::size_t occupied = 0;
  for (double c : hist.counts) occupied += c > 0.0 ? 1 : 0;
  if (occupied < 10) {
    throw std::invalid_argument("fit needs at least 10 nonempty histogram bins");
  }
  if (!(init.scale > 0.0) || !(init.snr > 0.0) || !(init.tau_b > 0.0) ||
      !(init.p_plus > 0.0 && init.p_plus < 1.0)) {
    throw std::invalid_argument("initial fit guess out of range");
  }

  PoissonObjective objective{&hist, rate, tau_m, hist.total()};
  const std::vector<double> u0{std::log(init.scale), std::log(init.snr), std::log(init.tau_b),
                               logit(init.p_plus)};

  // Deterministic multistart: sign patterns around the guess break the
  // dependence on any single basin of attraction.
  const double d = 0.4;
  const std::vector<std::array<double, 4>> offsets{
      {0, 0, 0, 0},       {+d, +d, +d, +2 * d}, {-d, -d, -d, -2 * d}, {+d, -d, +d, -2 * d},
      {-d, +d, -d, +2 * d}, {+d, +d, -d, 0},      {-d, -d, +d, 0},      {+d, -d, -d, +2 * d},
      {-d, +d, +d, -2 * d}};

  SimplexOptions options;
  options.max_iters = 1500;
  options.f_rel_tol = 1e-6;
  options.step = 0.25;

  std::vector<SimplexResult> runs(offsets.size());
  parallel_for(offsets.size(), resolve_thread_count(threads), [&](std::size_t i) {
    std::vector<double> start = u0;
    for (std::size_t k = 0; k < 4; ++k) start[k] += offsets[i][k];
    runs[i] = minimize_simplex(objective, start, options);
  });

  const SimplexResult* best = &runs.front();
  for (const SimplexResult& run : runs) {
    if (run.f < best->f) best = &run;
  }

  SimplexOptions polish = options;
  polish.step = 0.05;
  const SimplexResult polished = minimize_simplex(objective, best->x, polish);
  const SimplexResult& final_run = polished.f <= best->f ? polished : *best;
  if (!std::isfinite(final_run.f)) {
    throw std::runtime_error("fit objective is not finite anywhere near the initial guess");
  }

  FitResult result;
  result.params = params_from(final_run.x);
  result.converged = final_run.converged;
  result.log_like = -final_run.f * objective.total;

  // Goodness of fit over bins with enough expected counts for the chi-square
  // approximation.
  {
    const ReadoutConfig cfg = mixture_config(result.params, rate, tau_m);
    const StateDists dists = peak_dists(cfg);
    const FitParams& p = result.params;
    const auto mix_cdf = [&](double x) {
      const double psi = (2.0 * x - p.scale) / p.scale;
      return (1.0 - p.p_plus) * dists.minus.cdf(psi) + p.p_plus * dists.plus.cdf(psi);
    };
    double chi2 = 0.0;
    int used = 0;
    double cdf_lo = mix_cdf(hist.edges.front());
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      const double cdf_hi = mix_cdf(hist.edges[b + 1]);
      const double mu = objective.total * std::max(cdf_hi - cdf_lo, 0.0);
      cdf_lo = cdf_hi;
      if (mu >= 5.0) {
        const double delta = hist.counts[b] - mu;
        chi2 += delta * delta / mu;
        ++used;
      }
    }
    result.chi2 = chi2;
    result.dof = std::max(used - 1 - 4, 1);
  }

  // Observed-information covariance in natural parameters, by central
  // differences of the total negative log-likelihood.
  {
    const std::vector<double>& u = final_run.x;
    const auto neg_ll_total = [&](const std::vector<double>& v) {
      return objective(v) * objective.total;
    };
    std::array<double, 4> h{};
    h.fill(1e-4);
    std::array<double, 16> hessian{};
    const double f0 = neg_ll_total(u);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i; j < 4; ++j) {
        std::vector<double> v = u;
        double value = 0.0;
        if (i == j) {
          v[i] = u[i] + h[i];
          const double fp = neg_ll_total(v);
          v[i] = u[i] - h[i];
          const double fm = neg_ll_total(v);
          value = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        } else {
          v[i] = u[i] + h[i];
          v[j] = u[j] + h[j];
          const double fpp = neg_ll_total(v);
          v[j] = u[j] - h[j];
          const double fpm = neg_ll_total(v);
          v[i] = u[i] - h[i];
          const double fmm = neg_ll_total(v);
          v[j] = u[j] + h[j];
          const double fmp = neg_ll_total(v);
          value = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        }
        hessian[i * 4 + j] = hessian[j * 4 + i] = value;
      }
    }
    if (invert4(hessian)) {
      // Transform from the unconstrained coordinates back to natural ones:
      // cov_nat = J cov_u J^T with diagonal J = d(theta)/d(u).
      const FitParams& p = result.params;
      const std::array<double, 4> jac{p.scale, p.snr, p.tau_b, p.p_plus * (1.0 - p.p_plus)};
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          result.covariance[i * 4 + j] = jac[i] * hessian[i * 4 + j] * jac[j];
        }
      }
    }
  }

  return result;
}

}  // namespace readout
