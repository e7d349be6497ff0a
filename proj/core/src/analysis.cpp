#include "slowfast/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "slowfast/errors.hpp"

namespace slowfast {

TildeConstants tilde_constants(double A, double delta_t_micro, double epsilon, int M) {
  if (!(A > 0.0) || !(delta_t_micro > 0.0) || !(epsilon > 0.0) || M < 1) {
    throw std::invalid_argument("tilde_constants: need A > 0, delta_t > 0, epsilon > 0, M >= 1");
  }
  TildeConstants tc;
  tc.A_tilde = A * delta_t_micro / epsilon;
  tc.B_tilde = (1.0 - std::pow(1.0 - tc.A_tilde, M)) / (M * tc.A_tilde);
  return tc;
}

double nobias_micro_step(double A, double epsilon) {
  if (!(A > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("nobias_micro_step: need A > 0 and epsilon > 0");
  }
  return 2.0 * epsilon / A;
}

double vr_step_ratio(const LinearParams& params, double delta_t, const TildeConstants& tc) {
  return 1.0 + delta_t * (params.lambda + params.p * params.q / params.A * (1.0 - tc.B_tilde));
}

double vr_variance_prediction(const LinearParams& params, double delta_t,
                              const TildeConstants& tc, int N, double var0) {
  if (N < 0 || var0 < 0.0) {
    throw std::invalid_argument("vr_variance_prediction: need N >= 0 and var0 >= 0");
  }
  return std::pow(vr_step_ratio(params, delta_t, tc), 2 * N) * var0;
}

double vr_estimator_path_linear(const LinearParams& params, double delta_t,
                                const TildeConstants& tc, int N, double F_bar_0) {
  if (N < 0) {
    throw std::invalid_argument("vr_estimator_path_linear: need N >= 0");
  }
  return std::pow(vr_step_ratio(params, delta_t, tc), N) * F_bar_0;
}

double asymptotic_bias_linear(const LinearParams& params, const TildeConstants& tc, double X0,
                              double F_bar_0) {
  const double denom =
      params.lambda + params.p * params.q / params.A * (1.0 - tc.B_tilde);
  return X0 - F_bar_0 / denom;
}

EnsembleStats ensemble_stats(const std::vector<std::vector<double>>& rows) {
  const auto J = static_cast<int>(rows.size());
  if (J < 2) {
    throw std::invalid_argument("ensemble_stats: need at least 2 realizations, got " +
                                std::to_string(J));
  }
  const std::size_t width = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != width) {
      throw std::invalid_argument("ensemble_stats: realizations have unequal lengths");
    }
  }

  EnsembleStats out;
  out.realization_count = J;
  out.mean.assign(width, 0.0);
  out.variance.assign(width, 0.0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < width; ++i) out.mean[i] += row[i];
  }
  for (std::size_t i = 0; i < width; ++i) out.mean[i] /= J;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < width; ++i) {
      const double d = row[i] - out.mean[i];
      out.variance[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < width; ++i) out.variance[i] /= (J - 1);
  return out;
}

EnsembleStats ensemble_stats_scalar(const std::vector<double>& values) {
  std::vector<std::vector<double>> rows;
  rows.reserve(values.size());
  for (const double v : values) rows.push_back({v});
  return ensemble_stats(rows);
}

double exact_mean_reference(const Model& model,
                            const std::vector<double>& x_values_per_realization) {
  if (!model.exact_f_bar) {
    throw UnsupportedModelError("exact_mean_reference: model has no exact_f_bar");
  }
  if (x_values_per_realization.empty()) {
    throw std::invalid_argument("exact_mean_reference: no realizations given");
  }
  double sum = 0.0;
  for (const double x : x_values_per_realization) sum += model.exact_f_bar(x);
  return sum / static_cast<double>(x_values_per_realization.size());
}

namespace {

double sample_std(const std::vector<double>& samples) {
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (const double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : samples) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

KdeResult kernel_density(const std::vector<double>& samples, const std::vector<double>& grid) {
  if (samples.size() < 2) {
    throw std::invalid_argument("kernel_density: need at least 2 samples");
  }
  const auto n = static_cast<double>(samples.size());
  const double sigma = sample_std(samples);

  KdeResult out;
  if (!(sigma > 0.0)) {
    out.point_mass = samples.front();
    out.density.assign(grid.size(), 0.0);
    return out;
  }
  out.bandwidth = 1.06 * sigma * std::pow(n, -0.2);

  const double norm = 1.0 / (n * out.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  out.density.reserve(grid.size());
  for (const double g : grid) {
    double acc = 0.0;
    for (const double x : samples) {
      const double z = (g - x) / out.bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    out.density.push_back(norm * acc);
  }
  return out;
}

std::vector<double> kde_grid(const std::vector<double>& samples, int points) {
  if (samples.size() < 2 || points < 2) {
    throw std::invalid_argument("kde_grid: need at least 2 samples and 2 points");
  }
  const double sigma = sample_std(samples);
  const double h = sigma > 0.0 ? 1.06 * sigma * std::pow(static_cast<double>(samples.size()), -0.2)
                               : 1.0;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 4.0 * h;
  const double hi = *hi_it + 4.0 * h;
  std::vector<double> grid;
  grid.reserve(points);
  for (int i = 0; i < points; ++i) {
    grid.push_back(lo + (hi - lo) * i / (points - 1));
  }
  return grid;
}

}  // namespace slowfast
