#include "slowfast/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace slowfast {

namespace {

void require_positive_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("model: epsilon must be positive, got " + std::to_string(epsilon));
  }
}

}  // namespace

void LinearParams::validate() const {
  if (!(lambda < 0.0)) {
    throw std::invalid_argument("LinearParams: lambda must be negative, got " + std::to_string(lambda));
  }
  const double lower = p * q / (-lambda);
  if (!(A > lower && A <= 2.0)) {
    throw std::invalid_argument("LinearParams: A must lie in (pq/(-lambda), 2] = (" +
                                std::to_string(lower) + ", 2], got " + std::to_string(A));
  }
}

InvariantMoments invariant_moments_linear(const LinearParams& params, double X) {
  params.validate();
  return {params.q * X / params.A, 1.0 / (2.0 * params.A)};
}

Model make_linear_model(const LinearParams& params, double epsilon) {
  params.validate();
  require_positive_epsilon(epsilon);

  const double lambda = params.lambda;
  const double p = params.p;
  const double q = params.q;
  const double A = params.A;
  const double mean_rate = lambda + p * q / A;  // decay rate of the reduced equation

  auto f = [lambda, p](auto x, auto y) { return lambda * x + p * y; };
  auto g = [q, A](auto x, auto y) { return q * x - A * y; };

  Model m;
  m.slow_drift = [f](double x, double y) { return f(x, y); };
  m.fast_drift = [g](double x, double y) { return g(x, y); };
  m.diffusion = [](double, double) { return 1.0; };
  m.slow_drift_xp = f;
  m.fast_drift_xp = g;
  m.diffusion_xp = [](long double, long double) { return 1.0L; };
  m.epsilon = epsilon;
  m.exact_f_bar = [mean_rate](double X) { return mean_rate * X; };
  m.exact_macro_solution = [mean_rate](double x0, double t) { return x0 * std::exp(mean_rate * t); };
  // Gaussian invariant measure N(qX/A, 1/(2A)), up to the normalizing constant.
  m.invariant_log_density = [q, A](double X, double y) {
    const double centered = y - q * X / A;
    return -A * centered * centered;
  };
  return m;
}

Model make_nonlinear_model(double epsilon) {
  require_positive_epsilon(epsilon);

  auto f = [](auto, auto y) { return -(y + y * y); };
  auto g = [](auto x, auto y) { return -(y - x); };

  Model m;
  m.slow_drift = [f](double x, double y) { return f(x, y); };
  m.fast_drift = [g](double x, double y) { return g(x, y); };
  m.diffusion = [](double, double) { return 1.0; };
  m.slow_drift_xp = f;
  m.fast_drift_xp = g;
  m.diffusion_xp = [](long double, long double) { return 1.0L; };
  m.epsilon = epsilon;
  m.exact_f_bar = [](double X) { return -(X + X * X + 0.5); };
  m.exact_macro_solution = [](double x0, double t) {
    const double theta = 0.5 * t - std::atan(2.0 * x0 + 1.0);
    // Distance from theta to the nearest tangent pole pi/2 + k*pi.
    const double to_pole = std::remainder(theta - 0.5 * std::numbers::pi, std::numbers::pi);
    if (std::abs(to_pole) < 1e-8) {
      throw std::domain_error("exact_macro_solution: evaluation at t = " + std::to_string(t) +
                              " lies within 1e-8 of a tangent pole");
    }
    return -0.5 - 0.5 * std::tan(theta);
  };
  // N(X, 1/2): -(y - X)^2 up to the normalizing constant.
  m.invariant_log_density = [](double X, double y) {
    const double centered = y - X;
    return -centered * centered;
  };
  return m;
}

}  // namespace slowfast
