#pragma once

#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace readout {

// Adaptive Gauss-Kronrod integral of f over [lo, hi], refined until the
// error estimate drops below tol relative to the L1 mass.
template <typename F>
double integrate(F&& f, double lo, double hi, double tol = 1e-10) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), lo, hi, 12, tol, &error);
}

}  // namespace readout
