#include "slowfast/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "slowfast/errors.hpp"

namespace slowfast {

void InitSpec::validate() const {
  switch (kind) {
    case Kind::Exact:
      return;
    case Kind::Estimated:
      if (m_star < 1) {
        throw std::invalid_argument("InitSpec: estimated initialization needs m_star >= 1");
      }
      return;
    case Kind::Averaged:
      if (s < 1 || m < 1) {
        throw std::invalid_argument("InitSpec: averaged initialization needs s >= 1 and m >= 1");
      }
      return;
  }
  throw std::invalid_argument("InitSpec: unknown kind");
}

std::int64_t InitSpec::sample_budget() const {
  switch (kind) {
    case Kind::Exact:
      return 0;
    case Kind::Estimated:
      return m_star;
    case Kind::Averaged:
      return static_cast<std::int64_t>(s) * m;
  }
  return 0;
}

EstimateRecord hmm_estimate(const Model& model, double X, double y0, const MicroConfig& cfg,
                            std::uint64_t seed) {
  cfg.validate();
  GaussianStream stream(seed);
  const ChainResult chain = cfg.use_mh ? mala_chain(model, X, y0, cfg, stream)
                                       : em_chain(model, X, y0, cfg, stream);
  double sum = 0.0;
  for (const double y : chain.samples) {
    sum += model.slow_drift(X, y);
  }
  EstimateRecord rec;
  rec.value = sum / cfg.M;
  rec.seed = seed;
  rec.M = cfg.M;
  rec.y_final = chain.y_final;
  rec.used_mh = cfg.use_mh;
  rec.micro_samples = cfg.M;
  if (!std::isfinite(rec.value)) {
    throw NumericalBlowupError("hmm_estimate: non-finite estimate at X=" + std::to_string(X));
  }
  return rec;
}

double cpi_estimate(const Model& model, double X, std::span<const double> ensemble_y, int K,
                    double delta_t_micro, std::uint64_t seed) {
  if (ensemble_y.empty()) {
    throw std::invalid_argument("cpi_estimate: ensemble must be non-empty");
  }
  if (K < 1) {
    throw std::invalid_argument("cpi_estimate: K must be >= 1");
  }
  if (!(delta_t_micro > 0.0)) {
    throw std::invalid_argument("cpi_estimate: delta_t_micro must be positive");
  }
  GaussianStream stream(seed);
  const double u = delta_t_micro / model.epsilon;
  const double root_u = std::sqrt(u);
  double slope_sum = 0.0;
  for (const double y_start : ensemble_y) {
    // K steps of the full system: slow variable by forward Euler, fast
    // variable by Euler-Maruyama. Nothing is frozen here.
    double x = X;
    double y = y_start;
    for (int k = 0; k < K; ++k) {
      const double xi = stream.next_normal();
      const double x_next = x + delta_t_micro * model.slow_drift(x, y);
      const double y_next = y + u * model.fast_drift(x, y) + root_u * model.diffusion(x, y) * xi;
      if (!std::isfinite(x_next) || !std::isfinite(y_next)) {
        throw NumericalBlowupError("cpi_estimate: non-finite state after " +
                                   std::to_string(k + 1) + " coupled steps");
      }
      x = x_next;
      y = y_next;
    }
    slope_sum += (x - X) / (K * delta_t_micro);
  }
  return slope_sum / static_cast<double>(ensemble_y.size());
}

namespace {

// Coupled-pair loop in extended precision. The two chains share the state
// type and the normal sequence; only the frozen slow state differs.
template <typename Scalar, typename F, typename G, typename B>
EstimateRecord::CoupledPair coupled_pair_sums(F&& f, G&& g, B&& beta, double epsilon,
                                              double X_prev, double X_cur, double y0,
                                              const MicroConfig& cfg, GaussianStream& stream,
                                              double& y_final, long double& mean_diff) {
  const Scalar u = static_cast<Scalar>(cfg.delta_t) / static_cast<Scalar>(epsilon);
  const Scalar root_u = std::sqrt(u);
  const Scalar xc = static_cast<Scalar>(X_cur);
  const Scalar xp = static_cast<Scalar>(X_prev);

  Scalar yc = static_cast<Scalar>(y0);
  Scalar yp = yc;
  // Sample 1 is the shared initial state; its contribution to the difference
  // is exactly zero.
  long double sum_cur = static_cast<long double>(f(xc, yc));
  long double sum_prev = static_cast<long double>(f(xp, yp));
  long double sum_diff = sum_cur - sum_prev;
  for (int m = 1; m < cfg.M; ++m) {
    const Scalar xi = static_cast<Scalar>(stream.next_normal());
    yc = yc + u * g(xc, yc) + root_u * beta(xc, yc) * xi;
    yp = yp + u * g(xp, yp) + root_u * beta(xp, yp) * xi;
    if (!std::isfinite(static_cast<double>(yc)) || !std::isfinite(static_cast<double>(yp))) {
      throw NumericalBlowupError("vr_estimate: non-finite chain state at sample " +
                                 std::to_string(m + 1) + " of " + std::to_string(cfg.M));
    }
    const long double fc = static_cast<long double>(f(xc, yc));
    const long double fp = static_cast<long double>(f(xp, yp));
    sum_cur += fc;
    sum_prev += fp;
    sum_diff += fc - fp;
  }
  y_final = static_cast<double>(yc);
  mean_diff = sum_diff / cfg.M;
  return {static_cast<double>(sum_cur / cfg.M), static_cast<double>(sum_prev / cfg.M)};
}

}  // namespace

EstimateRecord vr_estimate(const Model& model, double X_prev, double X_cur, double F_bar_prev,
                           double y0, const MicroConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.use_mh) {
    throw UnsupportedModelError(
        "vr_estimate: the Metropolis correction decorrelates the coupled chains; "
        "use it in the initialization only");
  }
  GaussianStream stream(seed);
  double y_final = 0.0;
  long double mean_diff = 0.0;
  EstimateRecord::CoupledPair pair;
  if (model.has_xp()) {
    pair = coupled_pair_sums<long double>(model.slow_drift_xp, model.fast_drift_xp,
                                          model.diffusion_xp, model.epsilon, X_prev, X_cur, y0,
                                          cfg, stream, y_final, mean_diff);
  } else {
    pair = coupled_pair_sums<double>(model.slow_drift, model.fast_drift, model.diffusion,
                                     model.epsilon, X_prev, X_cur, y0, cfg, stream, y_final,
                                     mean_diff);
  }

  EstimateRecord rec;
  rec.value = F_bar_prev + static_cast<double>(mean_diff);
  rec.seed = seed;
  rec.M = cfg.M;
  rec.y_final = y_final;
  rec.used_mh = false;
  rec.micro_samples = 2 * static_cast<std::int64_t>(cfg.M);
  rec.pair = pair;
  if (!std::isfinite(rec.value)) {
    throw NumericalBlowupError("vr_estimate: non-finite estimate at X_cur=" +
                               std::to_string(X_cur));
  }
  return rec;
}

EstimateRecord initialize_estimate(const Model& model, double X0, double y0, const InitSpec& spec,
                                   const MicroConfig& cfg, const SeedSchedule& seeds,
                                   std::int64_t step_index) {
  spec.validate();
  switch (spec.kind) {
    case InitSpec::Kind::Exact: {
      if (!model.exact_f_bar) {
        throw UnsupportedModelError("initialize_estimate: exact initialization needs exact_f_bar");
      }
      EstimateRecord rec;
      rec.value = model.exact_f_bar(X0);
      rec.seed = 0;
      rec.M = 0;
      rec.y_final = y0;  // no chain ran; the warm start passes through
      rec.used_mh = false;
      rec.micro_samples = 0;
      return rec;
    }
    case InitSpec::Kind::Estimated: {
      MicroConfig init_cfg = cfg;
      init_cfg.M = spec.m_star;
      init_cfg.use_mh = spec.use_mh;
      return hmm_estimate(model, X0, y0, init_cfg, seeds.step_seed(step_index));
    }
    case InitSpec::Kind::Averaged: {
      MicroConfig replica_cfg = cfg;
      replica_cfg.M = spec.m;
      replica_cfg.use_mh = spec.use_mh;
      double sum = 0.0;
      double y = y0;
      EstimateRecord last;
      for (int r = 1; r <= spec.s; ++r) {
        last = hmm_estimate(model, X0, y, replica_cfg, seeds.replica_seed(step_index, r));
        sum += last.value;
        y = last.y_final;
      }
      EstimateRecord rec;
      rec.value = sum / spec.s;
      rec.seed = seeds.replica_seed(step_index, 1);
      rec.M = spec.m;
      rec.y_final = y;
      rec.used_mh = spec.use_mh;
      rec.micro_samples = spec.sample_budget();
      return rec;
    }
  }
  throw std::invalid_argument("initialize_estimate: unknown InitSpec kind");
}

}  // namespace slowfast
