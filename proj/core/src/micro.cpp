#include "slowfast/micro.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "slowfast/errors.hpp"

namespace slowfast {

void MicroConfig::validate() const {
  if (!(delta_t > 0.0)) {
    throw std::invalid_argument("MicroConfig: delta_t must be positive, got " +
                                std::to_string(delta_t));
  }
  if (M < 1) {
    throw std::invalid_argument("MicroConfig: M must be >= 1, got " + std::to_string(M));
  }
}

double em_step(const Model& model, double X, double y, double xi, double delta_t) {
  const double u = delta_t / model.epsilon;
  const double next = y + u * model.fast_drift(X, y) + std::sqrt(u) * model.diffusion(X, y) * xi;
  if (!std::isfinite(next)) {
    throw NumericalBlowupError("em_step: non-finite update from X=" + std::to_string(X) +
                               ", y=" + std::to_string(y) + ", xi=" + std::to_string(xi));
  }
  return next;
}

ChainResult em_chain(const Model& model, double X, double y0, const MicroConfig& cfg,
                     GaussianStream& stream) {
  cfg.validate();
  ChainResult out;
  out.samples.reserve(cfg.M);
  double y = y0;
  for (int m = 0; m < cfg.M; ++m) {
    const double xi = stream.next_normal();
    try {
      y = em_step(model, X, y, xi, cfg.delta_t);
    } catch (const NumericalBlowupError& e) {
      throw NumericalBlowupError("em_chain: step " + std::to_string(m + 1) + " of " +
                                 std::to_string(cfg.M) + ": " + e.what());
    }
    out.samples.push_back(y);
  }
  out.y_final = y;
  return out;
}

double mala_log_acceptance(const Model& model, double X, double y, double y_proposal,
                           double delta_t) {
  if (!model.invariant_log_density) {
    throw UnsupportedModelError("mala: model has no invariant_log_density");
  }
  const double u = delta_t / model.epsilon;
  const auto proposal_mean = [&](double from) { return from + u * model.fast_drift(X, from); };
  const auto proposal_var = [&](double from) {
    const double b = model.diffusion(X, from);
    return u * b * b;
  };
  const double var_fwd = proposal_var(y);
  const double var_bwd = proposal_var(y_proposal);
  if (!(var_fwd > 0.0) || !(var_bwd > 0.0)) {
    throw UnsupportedModelError("mala: proposal variance vanished (diffusion is zero)");
  }
  const double fwd = y_proposal - proposal_mean(y);
  const double bwd = y - proposal_mean(y_proposal);
  const double target = model.invariant_log_density(X, y_proposal) - model.invariant_log_density(X, y);
  // Variances differ only for state-dependent diffusion; keep the log-normalizers.
  const double transition = -0.5 * bwd * bwd / var_bwd - 0.5 * std::log(var_bwd) +
                            0.5 * fwd * fwd / var_fwd + 0.5 * std::log(var_fwd);
  return target + transition;
}

ChainResult mala_chain(const Model& model, double X, double y0, const MicroConfig& cfg,
                       GaussianStream& stream) {
  cfg.validate();
  if (!model.invariant_log_density) {
    throw UnsupportedModelError("mala_chain: model has no invariant_log_density");
  }
  ChainResult out;
  out.samples.reserve(cfg.M);
  double y = y0;
  for (int m = 0; m < cfg.M; ++m) {
    const double xi = stream.next_normal();
    const double proposal = em_step(model, X, y, xi, cfg.delta_t);
    const double log_alpha = mala_log_acceptance(model, X, y, proposal, cfg.delta_t);
    const double uacc = stream.next_uniform();
    if (std::log(uacc) < log_alpha) {
      y = proposal;
    }
    out.samples.push_back(y);
  }
  out.y_final = y;
  return out;
}

}  // namespace slowfast
