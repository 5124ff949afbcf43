#pragma once

namespace readout {

// exp(x^2) * erfc(x). Accurate over the full double range for x >= 0;
// overflows to +inf for x below about -26.6.
double erfcx(double x);

// log(erfc(x)) without underflow for large positive x.
double log_erfc(double x);

// log(erf(b) - erf(a)) for a <= b, stable when both tails agree to many
// digits. Returns -inf when the difference underflows.
double log_erf_diff(double a, double b);

// log(erfcx(a) - exp(-d) * erfcx(b)) for 0 <= a <= b with d = b^2 - a^2.
// d is passed in so callers can evaluate it free of cancellation.
double log_erfcx_diff(double a, double b, double d);

// (e^x - 1) / x with the removable singularity at 0.
double exprel(double x);

// int_0^T e^{a s} ds = T * exprel(a T); nonnegative for T >= 0.
double exp_integral(double a, double T);

// int_0^T s e^{a s} ds.
double exp_integral_t(double a, double T);

double gauss_pdf(double x, double mean, double sigma);
double log_gauss_pdf(double x, double mean, double sigma);
double gauss_cdf(double x, double mean, double sigma);
double log_gauss_cdf(double x, double mean, double sigma);

// Streaming log-sum-exp accumulator for sums of positive terms given in log
// space. add(-inf) is a no-op; an empty accumulator reports -inf.
class LogSumExp {
 public:
  void add(double log_term) noexcept;
  double value() const noexcept;

 private:
  double max_ = -1.0 / 0.0;
  double sum_ = 0.0;  // sum of exp(term - max_)
};

}  // namespace readout
