#pragma once

#include <functional>

namespace slowfast {

// A scalar slow-fast system
//
//   dx = f(x, y) dt
//   dy = (1/eps) g(x, y) dt + (1/sqrt(eps)) beta(x, y) dW,
//
// together with whatever analytic ingredients are known for it. Models are
// immutable values: construct one, then share it freely across concurrent
// realizations.
//
// The optional fields stay empty when unknown. Operations that need them
// (Metropolis correction, exact initialization, reference columns) fail
// loudly rather than substituting an approximation.
struct Model {
  std::function<double(double, double)> slow_drift;  // f(x, y)
  std::function<double(double, double)> fast_drift;  // g(x, y)
  std::function<double(double, double)> diffusion;   // beta(x, y)
  double epsilon = 0.0;                              // time-scale separation, > 0

  // Averaged drift F(X) of the reduced equation dX/dt = F(X).
  std::function<double(double)> exact_f_bar;
  // Exact solution of the reduced equation: (x0, t) -> X(t).
  std::function<double(double, double)> exact_macro_solution;
  // log density of the invariant measure of y at frozen X, up to an additive
  // constant. Required by the Metropolis-corrected chain.
  std::function<double(double, double)> invariant_log_density;

  // Extended-precision duplicates of the three system functions, evaluated by
  // the coupled-pair estimator so the near-cancelling chain difference is not
  // rounded through double on every step. Optional for user models (the pair
  // falls back to the double closures); the built-ins always provide them.
  std::function<long double(long double, long double)> slow_drift_xp;
  std::function<long double(long double, long double)> fast_drift_xp;
  std::function<long double(long double, long double)> diffusion_xp;

  bool has_xp() const {
    return static_cast<bool>(slow_drift_xp) && static_cast<bool>(fast_drift_xp) &&
           static_cast<bool>(diffusion_xp);
  }
};

// Parameters of the built-in linear system
//
//   f = lambda*x + p*y,   g = q*x - A*y,   beta = 1.
struct LinearParams {
  double lambda = 0.0;
  double p = 0.0;
  double q = 0.0;
  double A = 0.0;

  // lambda < 0 and pq/(-lambda) < A <= 2, so solutions decay and the fast
  // chain admits a stable step size.
  void validate() const;
};

// Mean and variance of the invariant measure of the linear fast equation at
// frozen slow state X: (qX/A, 1/(2A)).
struct InvariantMoments {
  double mean = 0.0;
  double variance = 0.0;
};
InvariantMoments invariant_moments_linear(const LinearParams& params, double X);

// Linear Ornstein-Uhlenbeck test system, with all analytic ingredients.
Model make_linear_model(const LinearParams& params, double epsilon);

// Nonlinear test system f = -(y + y^2), g = -(y - x), beta = 1. The averaged
// drift is F(X) = -(X + X^2 + 1/2) and the exact macro solution involves a
// tangent; evaluating it within 1e-8 of a tangent pole is an error.
Model make_nonlinear_model(double epsilon);

}  // namespace slowfast
