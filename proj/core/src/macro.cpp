#include "slowfast/macro.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "slowfast/errors.hpp"

namespace slowfast {

int MacroConfig::num_steps() const {
  return static_cast<int>(std::llround(t_end / delta_t));
}

void MacroConfig::validate() const {
  if (!(delta_t > 0.0)) {
    throw std::invalid_argument("MacroConfig: delta_t must be positive");
  }
  if (!(t_end > 0.0) || num_steps() < 1) {
    throw std::invalid_argument("MacroConfig: t_end must allow at least one step");
  }
}

void ReinitPolicy::validate() const {
  if (period.has_value() && *period < 1) {
    throw std::invalid_argument("ReinitPolicy: period must be >= 1 when present");
  }
  spec.validate();
}

namespace {

// Flags persistent |1 + dt F'| > 1 growth, with F' estimated by secant. The
// secant is noise-dominated when the state barely moves, so the warning also
// needs the step increments to have actually grown over the streak.
class GrowthMonitor {
 public:
  explicit GrowthMonitor(double delta_t) : delta_t_(delta_t) {}

  void observe(double x_prev, double x_cur, double f_prev, double f_cur, Trajectory& out) {
    const double dx = x_cur - x_prev;
    if (std::abs(dx) < 1e-300) return;
    const double secant = (f_cur - f_prev) / dx;
    const double increment = std::abs(delta_t_ * f_cur);
    if (std::abs(1.0 + delta_t_ * secant) > 1.0) {
      if (streak_ == 0) streak_start_increment_ = increment;
      ++streak_;
    } else {
      streak_ = 0;
    }
    if (streak_ >= kPersistent && increment >= kGrowthFactor * streak_start_increment_ &&
        out.warnings.empty()) {
      out.warnings.push_back(
          "macro step looks unstable: |1 + delta_t dF/dX| > 1 with growing increments over " +
          std::to_string(streak_) + " consecutive steps");
    }
  }

 private:
  static constexpr int kPersistent = 10;
  static constexpr double kGrowthFactor = 4.0;
  double delta_t_;
  int streak_ = 0;
  double streak_start_increment_ = 0.0;
};

}  // namespace

Trajectory run_hmm_trajectory(const Model& model, const MacroConfig& macro,
                              const MicroConfig& micro, const SeedSchedule& seeds) {
  macro.validate();
  micro.validate();
  const int N = macro.num_steps();

  Trajectory out;
  out.times.reserve(N + 1);
  out.x_values.reserve(N + 1);
  out.f_values.reserve(N);
  out.times.push_back(0.0);
  out.x_values.push_back(macro.x0);

  GrowthMonitor monitor(macro.delta_t);
  double X = macro.x0;
  double y = macro.y0;
  for (int n = 0; n < N; ++n) {
    const EstimateRecord rec = hmm_estimate(model, X, y, micro, seeds.step_seed(n));
    out.f_values.push_back(rec.value);
    out.micro_samples += rec.micro_samples;
    const double X_next = fe_step(X, rec.value, macro.delta_t);
    if (n > 0) {
      monitor.observe(out.x_values[n - 1], X, out.f_values[n - 1], rec.value, out);
    }
    X = X_next;
    y = rec.y_final;
    out.x_values.push_back(X);
    out.times.push_back((n + 1) * macro.delta_t);
  }
  return out;
}

Trajectory run_vr_trajectory(const Model& model, const MacroConfig& macro,
                             const MicroConfig& micro, const InitSpec& init,
                             const ReinitPolicy& reinit, const SeedSchedule& seeds,
                             std::vector<EstimateRecord>* records) {
  macro.validate();
  micro.validate();
  init.validate();
  reinit.validate();
  const int N = macro.num_steps();

  Trajectory out;
  out.times.reserve(N + 1);
  out.x_values.reserve(N + 1);
  out.f_values.reserve(N);
  out.times.push_back(0.0);
  out.x_values.push_back(macro.x0);

  GrowthMonitor monitor(macro.delta_t);
  EstimateRecord rec = initialize_estimate(model, macro.x0, macro.y0, init, micro, seeds, 0);
  if (records) records->push_back(rec);
  out.micro_samples += rec.micro_samples;
  out.f_values.push_back(rec.value);

  double X_prev = macro.x0;
  double X = fe_step(macro.x0, rec.value, macro.delta_t);
  out.x_values.push_back(X);
  out.times.push_back(macro.delta_t);

  for (int n = 1; n < N; ++n) {
    EstimateRecord next;
    if (reinit.period.has_value() && n % *reinit.period == 0) {
      next = initialize_estimate(model, X, rec.y_final, reinit.spec, micro, seeds, n);
    } else {
      next = vr_estimate(model, X_prev, X, rec.value, rec.y_final, micro, seeds.step_seed(n));
    }
    if (records) records->push_back(next);
    out.micro_samples += next.micro_samples;
    out.f_values.push_back(next.value);
    monitor.observe(X_prev, X, rec.value, next.value, out);

    const double X_next = fe_step(X, next.value, macro.delta_t);
    X_prev = X;
    X = X_next;
    rec = next;
    out.x_values.push_back(X);
    out.times.push_back((n + 1) * macro.delta_t);
  }
  return out;
}

}  // namespace slowfast
