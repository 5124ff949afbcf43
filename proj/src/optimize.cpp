#include "readout/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace readout {

namespace {

struct Vertex {
  std::vector<double> x;
  double f = 0.0;
};

std::vector<double> centroid_excluding_worst(const std::vector<Vertex>& simplex) {
  const std::size_t dim = simplex.front().x.size();
  std::vector<double> c(dim, 0.0);
  for (std::size_t v = 0; v + 1 < simplex.size(); ++v) {
    for (std::size_t k = 0; k < dim; ++k) c[k] += simplex[v].x[k];
  }
  for (double& ck : c) ck /= static_cast<double>(simplex.size() - 1);
  return c;
}

std::vector<double> blend(const std::vector<double>& a, const std::vector<double>& b,
                          double weight_b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + weight_b * (b[k] - a[k]);
  return out;
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x0,
                               const SimplexOptions& options) {
  if (x0.empty()) throw std::invalid_argument("simplex minimization needs at least one variable");
  const std::size_t dim = x0.size();

  SimplexResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Vertex> simplex(dim + 1);
  simplex[0] = {x0, eval(x0)};
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<double> x = x0;
    x[k] += options.step;
    simplex[k + 1] = {std::move(x), 0.0};
    simplex[k + 1].f = eval(simplex[k + 1].x);
  }

  const auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::sort(simplex.begin(), simplex.end(), by_f);

  for (result.iters = 0; result.iters < options.max_iters; ++result.iters) {
    const Vertex& best = simplex.front();
    const Vertex& worst = simplex.back();
    const double scale = std::max(std::abs(best.f), options.f_abs_floor);
    if (std::isfinite(worst.f) && worst.f - best.f <= options.f_rel_tol * scale) {
      result.converged = true;
      break;
    }

    const std::vector<double> center = centroid_excluding_worst(simplex);
    Vertex reflected{blend(center, worst.x, -1.0), 0.0};
    reflected.f = eval(reflected.x);

    if (reflected.f < best.f) {
      Vertex expanded{blend(center, worst.x, -2.0), 0.0};
      expanded.f = eval(expanded.x);
      simplex.back() = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
    } else if (reflected.f < simplex[dim - 1].f) {
      simplex.back() = std::move(reflected);
    } else {
      const bool outside = reflected.f < worst.f;
      Vertex contracted{blend(center, outside ? reflected.x : worst.x, 0.5), 0.0};
      contracted.f = eval(contracted.x);
      if (contracted.f < std::min(reflected.f, worst.f)) {
        simplex.back() = std::move(contracted);
      } else {
        for (std::size_t v = 1; v < simplex.size(); ++v) {
          simplex[v].x = blend(simplex[0].x, simplex[v].x, 0.5);
          simplex[v].f = eval(simplex[v].x);
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_f);
  }

  result.x = simplex.front().x;
  result.f = simplex.front().f;
  return result;
}

}  // namespace readout
