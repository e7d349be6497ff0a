#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "slowfast/micro.hpp"
#include "slowfast/model.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

// One time-derivative estimate with its provenance.
struct EstimateRecord {
  double value = 0.0;        // the F estimate
  std::uint64_t seed = 0;    // stream seed that produced it
  int M = 0;                 // samples per chain (0 for an exact initialization)
  double y_final = 0.0;      // warm-start handoff: last micro state of the chain
  bool used_mh = false;
  std::int64_t micro_samples = 0;  // cost meter: chain samples consumed

  // The two correlated plain estimates behind a variance-reduced value;
  // empty for anything that is not a coupled-pair estimate.
  struct CoupledPair {
    double hat_current = 0.0;   // F_hat(X_cur; seed)
    double hat_previous = 0.0;  // F_hat(X_prev; seed)
  };
  std::optional<CoupledPair> pair;
};

// How to produce the variance-reduced recursion's reference estimate, both at
// t = 0 and at reinitialization steps.
struct InitSpec {
  enum class Kind { Exact, Estimated, Averaged };

  Kind kind = Kind::Exact;
  int m_star = 0;       // Estimated: sample budget M*
  int s = 0;            // Averaged: number of replica estimators S
  int m = 0;            // Averaged: samples per replica M
  bool use_mh = false;  // Metropolis-correct the initialization chains

  static InitSpec exact() { return {Kind::Exact, 0, 0, 0, false}; }
  static InitSpec estimated(int m_star, bool use_mh = false) {
    return {Kind::Estimated, m_star, 0, 0, use_mh};
  }
  static InitSpec averaged(int s, int m, bool use_mh = false) {
    return {Kind::Averaged, 0, s, m, use_mh};
  }

  void validate() const;
  std::int64_t sample_budget() const;  // 0, m_star, or s*m
};

// Markov chain Monte Carlo estimate of the averaged drift at frozen slow
// state X: the mean of f(X, y^m) over the M chain samples, Euler-Maruyama or
// Metropolis-corrected per cfg.use_mh.
EstimateRecord hmm_estimate(const Model& model, double X, double y0, const MicroConfig& cfg,
                            std::uint64_t seed);

// Coarse projective integration estimate: evolve each (X, y^m) pair of the
// ensemble under the full coupled system for K Euler-Maruyama steps of size
// delta_t_micro and return the mean slope (X_K - X) / (K delta_t).
double cpi_estimate(const Model& model, double X, std::span<const double> ensemble_y, int K,
                    double delta_t_micro, std::uint64_t seed);

// Variance-reduced estimate at X_cur, using the previous instant as control
// variable:
//
//   value = F_hat(X_cur; seed) - (F_hat(X_prev; seed) - F_bar_prev).
//
// Both chains start from the same y0 and consume the identical normal
// sequence, so their difference is driven purely by X_cur - X_prev. Each
// chain's sample set is the shared initial state followed by its M-1 advanced
// states; starting the sample average at the common point is what makes the
// coupled difference vanish at the first sample and the linear-case recursion
// exact. y_final is the last state of the X_cur chain.
//
// The Metropolis correction is rejected here: rejections land in different
// places in the two chains and destroy the coupling. Apply it in the
// initialization instead.
EstimateRecord vr_estimate(const Model& model, double X_prev, double X_cur, double F_bar_prev,
                           double y0, const MicroConfig& cfg, std::uint64_t seed);

// Reference estimate for the variance-reduced recursion at macro step
// step_index (0 = the initialization proper).
//   Exact:     F(X0) from the model oracle, no sampling.
//   Estimated: one chain of m_star samples, seed step_seed(step_index).
//   Averaged:  mean of s estimates of m samples each, seeds
//              replica_seed(step_index, 1..s), chains warm-started
//              sequentially from one another's final state.
EstimateRecord initialize_estimate(const Model& model, double X0, double y0, const InitSpec& spec,
                                   const MicroConfig& cfg, const SeedSchedule& seeds,
                                   std::int64_t step_index = 0);

}  // namespace slowfast
