#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "readout/special.hpp"

using namespace readout;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}
}  // namespace

TEST_CASE("erfcx matches high-precision references") {
  // Reference values computed with 60-digit arithmetic.
  struct Ref {
    double x, value;
  };
  const Ref refs[] = {
      {0.001, 0.99887262008115141},
      {5.9999, 0.092778073860032111},
      {6.0001, 0.092775061789333535},
      {12.0, 0.046854221014893763},
      {50.0, 0.011281536265323773},
      {700.0, 0.00080598429692265994},
      {-1.0, 5.0089800807622835},
      {-5.0, 144009798674.66104},
      {-26.0, 7.6577249314905684e+293},
  };
  for (const Ref& ref : refs) {
    CAPTURE(ref.x);
    CHECK(rel_err(erfcx(ref.x), ref.value) < 2e-15);
  }
  CHECK(erfcx(0.0) == 1.0);
  CHECK(std::isinf(erfcx(-27.0)));
}

TEST_CASE("erfcx satisfies the defining identity at moderate arguments") {
  for (double x : {-2.0, -0.5, 0.3, 1.0, 2.5, 4.0}) {
    CAPTURE(x);
    CHECK(rel_err(erfcx(x), std::exp(x * x) * std::erfc(x)) < 1e-13);
  }
}

TEST_CASE("log_erfc tracks erfc without underflow") {
  CHECK(rel_err(log_erfc(1.0), std::log(std::erfc(1.0))) < 1e-14);
  CHECK(rel_err(log_erfc(-3.0), std::log(std::erfc(-3.0))) < 1e-14);
  // erfc(40) ~ 1e-697 underflows; log form must stay finite.
  const double x = 40.0;
  const double expect = -x * x + std::log(erfcx(x));
  CHECK(rel_err(log_erfc(x), expect) < 1e-14);
}

TEST_CASE("log_erf_diff matches high-precision references") {
  struct Ref {
    double a, b, value;
  };
  const Ref refs[] = {
      {2.0, 2.5, -5.4559581047094086},
      {-0.5, 0.7, 0.18090478001492589},
      {-9.0, -8.0, -66.659472007662987},
      {30.0, 30.1, -903.97656605090436},
      {100.0, 100.001, -10006.885307246672},
  };
  for (const Ref& ref : refs) {
    CAPTURE(ref.a);
    CAPTURE(ref.b);
    CHECK(rel_err(log_erf_diff(ref.a, ref.b), ref.value) < 1e-13);
  }
  CHECK(log_erf_diff(1.0, 1.0) == -kInf);
  // Symmetric under sign flip of both endpoints.
  CHECK(rel_err(log_erf_diff(-2.5, -2.0), log_erf_diff(2.0, 2.5)) < 1e-14);
}

TEST_CASE("exprel handles the removable singularity") {
  CHECK(exprel(0.0) == 1.0);
  CHECK(rel_err(exprel(1e-12), 1.0 + 0.5e-12) < 1e-14);
  CHECK(rel_err(exprel(2.0), (std::exp(2.0) - 1.0) / 2.0) < 1e-14);
  CHECK(rel_err(exprel(-30.0), (std::exp(-30.0) - 1.0) / -30.0) < 1e-14);
}

TEST_CASE("exp_integral is the exact exponential primitive") {
  CHECK(rel_err(exp_integral(0.7, 2.0), (std::exp(1.4) - 1.0) / 0.7) < 1e-14);
  CHECK(exp_integral(0.0, 3.0) == 3.0);
  CHECK(exp_integral(-5.0, 0.0) == 0.0);
}

TEST_CASE("exp_integral_t matches references including the small-a regime") {
  CHECK(rel_err(exp_integral_t(-2.0, 0.7), 0.10204182163503611) < 1e-13);
  CHECK(rel_err(exp_integral_t(1e-9, 0.7), 0.24500000011433333) < 1e-13);
  CHECK(exp_integral_t(0.0, 0.7) == doctest::Approx(0.245).epsilon(1e-14));
}

TEST_CASE("gauss pdf/cdf and their logs are consistent") {
  const double x = 0.37, mu = -0.2, s = 0.8;
  CHECK(rel_err(gauss_pdf(x, mu, s),
                std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) / (s * std::sqrt(2.0 * M_PI))) <
        1e-14);
  CHECK(rel_err(gauss_cdf(x, mu, s), 0.5 * std::erfc((mu - x) / (s * std::sqrt(2.0)))) < 1e-14);
  CHECK(rel_err(std::exp(log_gauss_pdf(x, mu, s)), gauss_pdf(x, mu, s)) < 1e-13);
  CHECK(rel_err(std::exp(log_gauss_cdf(x, mu, s)), gauss_cdf(x, mu, s)) < 1e-13);
  // Deep tail: the log CDF must stay finite where the plain CDF underflows.
  CHECK(log_gauss_cdf(-40.0, 0.0, 1.0) < -700.0);
  CHECK(std::isfinite(log_gauss_cdf(-40.0, 0.0, 1.0)));
}

TEST_CASE("log-sum-exp accumulator") {
  LogSumExp acc;
  CHECK(acc.value() == -kInf);
  acc.add(-kInf);
  CHECK(acc.value() == -kInf);
  acc.add(std::log(0.25));
  acc.add(std::log(0.5));
  acc.add(-kInf);
  acc.add(std::log(0.25));
  CHECK(rel_err(acc.value(), 0.0) < 1e-14);  // log(1)

  LogSumExp big;
  big.add(-1000.0);
  big.add(-1000.0);
  CHECK(rel_err(big.value(), -1000.0 + std::log(2.0)) < 1e-14);
}
