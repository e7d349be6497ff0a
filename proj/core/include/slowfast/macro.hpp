#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slowfast/estimators.hpp"
#include "slowfast/micro.hpp"
#include "slowfast/model.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

// Uniform macro time mesh and initial data.
struct MacroConfig {
  double delta_t = 0.0;  // macro step
  double t_end = 0.0;
  double x0 = 0.0;  // initial slow state
  double y0 = 0.0;  // initial fast state

  // Number of macro steps, rounded to the nearest integer; the experiments
  // all use divisible grids, so no fractional final step exists.
  int num_steps() const;
  void validate() const;
};

// Periodically replace the variance-reduced estimate with a fresh reference
// estimate. A step whose index is a multiple of period (counting from the
// initialization at index 0) runs the configured initialization procedure
// instead of the coupled pair. No period means no reinitialization.
struct ReinitPolicy {
  std::optional<int> period;
  InitSpec spec;

  static ReinitPolicy none() { return {std::nullopt, InitSpec::exact()}; }
  static ReinitPolicy every(int period, InitSpec spec) { return {period, spec}; }
  void validate() const;
};

// One macro solution path. x_values[n+1] == x_values[n] + delta_t * f_values[n]
// holds exactly as stored, and |x| == |t| == |f| + 1.
struct Trajectory {
  std::vector<double> times;     // t^0 .. t^N
  std::vector<double> x_values;  // X^0 .. X^N
  std::vector<double> f_values;  // F^0 .. F^{N-1}
  std::int64_t micro_samples = 0;       // cost meter
  std::vector<std::string> warnings;    // e.g. persistent macro-step growth
};

// One forward Euler step: X + delta_t * F.
inline double fe_step(double X, double F, double delta_t) { return X + delta_t * F; }

// Forward Euler driven by the plain chain estimator: step n estimates F at
// X^n with seed step_seed(n), warm-starting each chain from the previous
// chain's final state.
Trajectory run_hmm_trajectory(const Model& model, const MacroConfig& macro,
                              const MicroConfig& micro, const SeedSchedule& seeds);

// Forward Euler driven by the variance-reduced estimator. Step 0 is the
// initialization; every later step uses the coupled-pair estimate, except
// steps at multiples of the reinitialization period, which run the reinit
// spec instead. Per-step records (including the coupled pairs) are appended
// to *records when given.
Trajectory run_vr_trajectory(const Model& model, const MacroConfig& macro,
                             const MicroConfig& micro, const InitSpec& init,
                             const ReinitPolicy& reinit, const SeedSchedule& seeds,
                             std::vector<EstimateRecord>* records = nullptr);

}  // namespace slowfast
