#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "milnor/compiled.hpp"
#include "milnor/rng.hpp"

namespace milnor {

struct SolverOptions {
  int max_iter = 80;
  int max_halvings = 30;
  double tol = 1e-10;
  int polish_iters = 3;
  double max_step = INFINITY;  // trust-region cap on the step norm
};

struct SolveResult {
  Vec x;
  double residual = INFINITY;  // max-norm of the residual vector
  int iterations = 0;
  bool converged = false;
};

/// Residual function: fills r and its Jacobian at x.
using ResidualFn = std::function<void(const Vec& x, Vec& r, Mat& jac)>;

/// Damped Gauss-Newton with minimum-norm least-squares steps. Underdetermined
/// systems move to a nearby solution; overdetermined ones minimize ||r||.
inline SolveResult gauss_newton(const ResidualFn& fn, Vec x, const SolverOptions& opt, Rng* rng = nullptr) {
  SolveResult res;
  Vec r, r_try;
  Mat jac, jac_try;
  fn(x, r, jac);
  if (!r.allFinite()) {
    res.x = x;
    return res;
  }
  double norm2 = r.squaredNorm();
  int polish = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    const double rinf = r.lpNorm<Eigen::Infinity>();
    if (rinf <= opt.tol) {
      if (polish++ >= opt.polish_iters || rinf == 0.0) break;
    }
    Vec step;
    if (jac.norm() == 0.0) {
      // Flat spot: random coordinate probe instead of a Newton step.
      if (rng == nullptr) break;
      const double h = std::max(1e-3 * x.norm(), 1e-8);
      step = h * rng->direction(static_cast<std::size_t>(x.size()));
    } else {
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(jac);
      cod.setThreshold(1e-13);
      step = -cod.solve(r);
    }
    if (!step.allFinite()) break;
    if (const double sn = step.norm(); sn > opt.max_step) step *= opt.max_step / sn;
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      Vec x_try = x + t * step;
      fn(x_try, r_try, jac_try);
      if (r_try.allFinite() && r_try.squaredNorm() < norm2) {
        x = std::move(x_try);
        r.swap(r_try);
        jac.swap(jac_try);
        norm2 = r.squaredNorm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  res.x = x;
  res.residual = r.lpNorm<Eigen::Infinity>();
  res.converged = res.residual <= opt.tol;
  return res;
}

}  // namespace milnor
