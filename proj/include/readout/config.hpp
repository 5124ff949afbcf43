#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace readout {

// Turn-on rate of the signal pulse, in units of the inverse mean pulse width.
// The infinite-rate case (pulse starts at t = 0 with certainty) is a distinct
// symbolic value, never a large float, so code can dispatch to dedicated
// limit formulas instead of evaluating e^{rate * t} at overflow scale.
class TurnOnRate {
 public:
  static TurnOnRate finite(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("turn-on rate must be positive and finite");
    }
    return TurnOnRate(value, false);
  }
  static TurnOnRate infinite() noexcept { return TurnOnRate(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  double value() const {
    if (infinite_) {
      throw std::logic_error("finite value requested from infinite turn-on rate");
    }
    return value_;
  }

  std::string str() const { return infinite_ ? "inf" : std::to_string(value_); }

  friend bool operator==(const TurnOnRate& a, const TurnOnRate& b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  TurnOnRate(double value, bool infinite) noexcept : value_(value), infinite_(infinite) {}
  double value_;
  bool infinite_;
};

enum class QubitState { kMinus, kPlus };

// Dimensionless readout model parameters. Times are in units of the mean
// pulse width, signal levels in units of the pulse amplitude, and snr is the
// integrated signal-to-noise ratio r (bin noise variance = 1 / (r * tau_b)).
struct ReadoutConfig {
  double snr = 100.0;
  TurnOnRate rate = TurnOnRate::finite(4.0);
  double tau_m = 2.0;
  double n_bins = 1.0;  // real-valued; must be integral to simulate traces
  double prior_plus = 0.5;

  double tau_b() const noexcept { return tau_m / n_bins; }
  double sigma_sq() const noexcept { return 1.0 / (snr * tau_b()); }
  double sigma() const noexcept { return std::sqrt(sigma_sq()); }

  void validate() const {
    if (!(snr > 0.0) || !std::isfinite(snr)) {
      throw std::invalid_argument("snr must be positive and finite");
    }
    if (!(tau_m > 0.0) || !std::isfinite(tau_m)) {
      throw std::invalid_argument("tau_m must be positive and finite");
    }
    if (!(n_bins >= 1.0) || !std::isfinite(n_bins)) {
      throw std::invalid_argument("n_bins must be >= 1 and finite");
    }
    if (!(prior_plus >= 0.0 && prior_plus <= 1.0)) {
      throw std::invalid_argument("prior_plus must lie in [0, 1]");
    }
  }
};

}  // namespace readout
