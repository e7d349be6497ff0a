#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "slowfast/model.hpp"

namespace testutil {

// The linear test parameters used throughout the experiment suite.
inline slowfast::LinearParams reference_params() { return {-10.0, 4.0, 0.5, 1.2}; }

// Quadrature of h(y) against a normal density N(mean, var); trapezoid over
// +-12 sigma is exact to machine precision for polynomially-bounded h.
inline double gaussian_expectation(const std::function<double(double)>& h, double mean,
                                   double var, int points = 4001) {
  const double sigma = std::sqrt(var);
  const double lo = mean - 12.0 * sigma;
  const double hi = mean + 12.0 * sigma;
  const double dx = (hi - lo) / (points - 1);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double y = lo + i * dx;
    const double z = (y - mean) / sigma;
    const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    acc += w * h(y) * norm * std::exp(-0.5 * z * z);
  }
  return acc * dx;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace testutil
