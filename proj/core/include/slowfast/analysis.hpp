#pragma once

#include <optional>
#include <vector>

#include "slowfast/model.hpp"

namespace slowfast {

// The two constants governing the linear-case behavior of the coupled
// estimator: A_tilde = A dt/eps, B_tilde = (1 - (1 - A_tilde)^M) / (M A_tilde).
// B_tilde = 0 (even M, A dt/eps = 2) is exactly the no-added-bias regime.
struct TildeConstants {
  double A_tilde = 0.0;
  double B_tilde = 0.0;
};

TildeConstants tilde_constants(double A, double delta_t_micro, double epsilon, int M);

// Micro step size that removes the coupled estimator's linear-case bias for
// even M: delta_t = 2 eps / A.
double nobias_micro_step(double A, double epsilon);

// Geometric per-step ratio of the linear-case recursion:
//   r = 1 + delta_t (lambda + (pq/A)(1 - B_tilde)).
double vr_step_ratio(const LinearParams& params, double delta_t, const TildeConstants& tc);

// Var[F_bar^N] = r^{2N} var0: the variance of the coupled estimator after N
// steps depends only on the variance of the initial estimate.
double vr_variance_prediction(const LinearParams& params, double delta_t,
                              const TildeConstants& tc, int N, double var0);

// F_bar^N = r^N F_bar^0.
double vr_estimator_path_linear(const LinearParams& params, double delta_t,
                                const TildeConstants& tc, int N, double F_bar_0);

// Fixed point of the linear-case recursion for N -> infinity:
//   X_inf = X0 - F_bar_0 / (lambda + (pq/A)(1 - B_tilde)).
double asymptotic_bias_linear(const LinearParams& params, const TildeConstants& tc, double X0,
                              double F_bar_0);

// Pointwise sample mean and unbiased sample variance across realizations.
struct EnsembleStats {
  std::vector<double> mean;
  std::vector<double> variance;
  int realization_count = 0;
};

// rows[j] is realization j; all rows must share one length, and at least two
// realizations are required for the variance to exist.
EnsembleStats ensemble_stats(const std::vector<std::vector<double>>& rows);
EnsembleStats ensemble_stats_scalar(const std::vector<double>& values);

// Mean of F over the per-realization slow states: the reference line the
// single-step distributions are compared against. Requires exact_f_bar.
double exact_mean_reference(const Model& model, const std::vector<double>& x_values_per_realization);

// Gaussian kernel density estimate with Silverman bandwidth
// 1.06 sigma_hat n^{-1/5}. Zero-spread samples are reported as a point mass
// instead of a crash.
struct KdeResult {
  std::vector<double> density;       // one entry per grid point
  double bandwidth = 0.0;
  std::optional<double> point_mass;  // set when the sample has no spread
};

KdeResult kernel_density(const std::vector<double>& samples, const std::vector<double>& grid);

// Evenly spaced grid spanning the samples plus four bandwidths on both sides.
std::vector<double> kde_grid(const std::vector<double>& samples, int points = 201);

}  // namespace slowfast
