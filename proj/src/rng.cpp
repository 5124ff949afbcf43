#include "readout/rng.hpp"

#include <cmath>
#include <numbers>

namespace readout {

double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

double Rng::exponential(double mean) noexcept {
  return -mean * std::log(uniform());
}

}  // namespace readout
