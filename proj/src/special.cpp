#include "readout/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace readout {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

// Continued fraction erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
// (modified Lentz), accurate for large x where exp(x^2)*erfc(x) would overflow
// or lose digits.
double erfcx_cf(double x) {
  const double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double a = 0.5 * static_cast<double>(i);
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return kInvSqrtPi / f;
}

}  // namespace

double erfcx(double x) {
  if (x >= 6.0) return erfcx_cf(x);
  if (x >= -26.5) return std::exp(x * x) * std::erfc(x);
  return kInf;
}

double log_erfc(double x) {
  if (x <= 0.0) return std::log(std::erfc(x));  // erfc in [1, 2): no cancellation
  return std::log(erfcx(x)) - x * x;
}

double log_erfcx_diff(double a, double b, double d) {
  const double diff = erfcx(a) - std::exp(-d) * erfcx(b);
  return diff > 0.0 ? std::log(diff) : -kInf;
}

double log_erf_diff(double a, double b) {
  if (!(a <= b)) return -kInf;
  if (a >= 0.0) {
    return -a * a + log_erfcx_diff(a, b, (b - a) * (b + a));
  }
  if (b <= 0.0) return log_erf_diff(-b, -a);
  // Arguments straddle 0: the two erf values add, no cancellation.
  const double diff = std::erf(b) - std::erf(a);
  return diff > 0.0 ? std::log(diff) : -kInf;
}

double exprel(double x) {
  if (x == 0.0) return 1.0;
  return std::expm1(x) / x;
}

double exp_integral(double a, double T) { return T * exprel(a * T); }

double exp_integral_t(double a, double T) {
  const double z = a * T;
  if (std::abs(z) < 1e-5) {
    // T^2 * (1/2 + z/3 + z^2/8 + z^3/30): series of int_0^1 u e^{z u} du.
    return T * T * (0.5 + z * (1.0 / 3.0 + z * (0.125 + z / 30.0)));
  }
  return (T * std::exp(z) - exp_integral(a, T)) / a;
}

double gauss_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double log_gauss_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gauss_cdf(double x, double mean, double sigma) {
  return 0.5 * std::erfc((mean - x) / (sigma * std::numbers::sqrt2));
}

double log_gauss_cdf(double x, double mean, double sigma) {
  return log_erfc((mean - x) / (sigma * std::numbers::sqrt2)) - std::numbers::ln2;
}

void LogSumExp::add(double log_term) noexcept {
  if (log_term == -kInf) return;
  if (log_term <= max_) {
    sum_ += std::exp(log_term - max_);
    return;
  }
  sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
  max_ = log_term;
}

double LogSumExp::value() const noexcept {
  if (max_ == -kInf) return -kInf;
  return max_ + std::log(sum_);
}

}  // namespace readout
