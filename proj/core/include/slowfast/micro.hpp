#pragma once

#include <vector>

#include "slowfast/model.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

// Discretization of the fast equation at frozen slow state.
struct MicroConfig {
  double delta_t = 0.0;  // micro time step
  int M = 0;             // chain length / sample count
  bool use_mh = false;   // Metropolis-correct the chain

  void validate() const;
};

// One Euler-Maruyama update of the fast variable at frozen slow state X:
//   y + (dt/eps) g(X, y) + sqrt(dt/eps) beta(X, y) xi.
// Throws NumericalBlowupError if the result is not finite.
double em_step(const Model& model, double X, double y, double xi, double delta_t);

struct ChainResult {
  // samples[k] is the state after k+1 update steps from y0 (the sample
  // labelled m = k+1); samples.size() == M.
  std::vector<double> samples;
  double y_final = 0.0;  // last state, the warm start handed to the next chain
};

// Markov chain of M Euler-Maruyama steps from y0. Consumes exactly M normals
// from the stream's normal lane and nothing from its uniform lane, so two
// calls with equal (X, y0, cfg, seed) are bitwise identical and chaining two
// M-step calls through y_final equals one 2M-step call on the same stream.
ChainResult em_chain(const Model& model, double X, double y0, const MicroConfig& cfg,
                     GaussianStream& stream);

// Log Metropolis acceptance ratio for an Euler-Maruyama proposal from y to
// y_proposal: [log rho(y') - log rho(y)] + [log q(y|y') - log q(y'|y)], with
// q the Gaussian transition density of the scheme.
double mala_log_acceptance(const Model& model, double X, double y, double y_proposal,
                           double delta_t);

// Metropolis-adjusted chain: each step proposes with em_step and accepts with
// probability min(1, exp(mala_log_acceptance)). Proposals draw from the
// normal lane and accept/reject decisions from the uniform lane, so a
// rejection never shifts the normal sequence. Requires
// model.invariant_log_density.
ChainResult mala_chain(const Model& model, double X, double y0, const MicroConfig& cfg,
                       GaussianStream& stream);

}  // namespace slowfast
