#include <cmath>
#include <algorithm>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/estimators.hpp"
#include "slowfast/macro.hpp"
#include "slowfast/model.hpp"

using namespace slowfast;
using testutil::reference_params;
using testutil::sample_mean;
using testutil::sample_variance;

namespace {

Model zero_diffusion_linear(double epsilon) {
  Model m = make_linear_model(reference_params(), epsilon);
  m.diffusion = [](double, double) { return 0.0; };
  m.diffusion_xp = [](long double, long double) { return 0.0L; };
  return m;
}

// Enumerated double geometric sum behind the linear coupled-pair recursion:
// sum_{m=2..M} sum_{i=0..m-2} (1 - At)^i.
double enumerated_geometric_sum(double A_tilde, int M) {
  double total = 0.0;
  for (int m = 2; m <= M; ++m) {
    double inner = 0.0;
    double term = 1.0;
    for (int i = 0; i <= m - 2; ++i) {
      inner += term;
      term *= (1.0 - A_tilde);
    }
    total += inner;
  }
  return total;
}

// Per-step ratio of the linear recursion derived from the enumeration alone.
double enumerated_step_ratio(const LinearParams& p, double macro_dt, double micro_dt,
                             double epsilon, int M) {
  const double u = micro_dt / epsilon;
  const double S = enumerated_geometric_sum(p.A * u, M);
  return 1.0 + macro_dt * (p.lambda + u * p.p * p.q * S / M);
}

}  // namespace

TEST_CASE("hmm_estimate with a single sample is f at the first chain state") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  GaussianStream probe(321);
  const double y1 = em_step(m, 1.0, 1.0, probe.next_normal(), 1e-3);

  const EstimateRecord rec = hmm_estimate(m, 1.0, 1.0, {1e-3, 1, false}, 321);
  CHECK(rec.value == m.slow_drift(1.0, y1));
  CHECK(rec.y_final == y1);
  CHECK(rec.M == 1);
  CHECK(rec.micro_samples == 1);
}

TEST_CASE("zero-diffusion chain from the fixed point estimates F exactly") {
  const Model m = zero_diffusion_linear(1e-3);
  const double X = 1.0;
  const double y_star = 0.5 * X / 1.2;
  const EstimateRecord rec = hmm_estimate(m, X, y_star, {1e-3, 50, false}, 99);
  CHECK(rec.value == doctest::Approx(m.exact_f_bar(X)).epsilon(1e-13));
}

TEST_CASE("hmm_estimate is unbiased for the linear system") {
  // starting on the invariant mean keeps every chain state mean-exact
  const LinearParams params = reference_params();
  const Model m = make_linear_model(params, 1e-3);
  const double X = 1.0;
  const double y0 = params.q * X / params.A;
  std::vector<double> values;
  for (int j = 0; j < 500; ++j) {
    values.push_back(hmm_estimate(m, X, y0, {1e-3, 50, false}, realization_seed(42, j)).value);
  }
  const double mean = sample_mean(values);
  const double se = std::sqrt(sample_variance(values) / values.size());
  CHECK(std::abs(mean - (-8.333333333333334)) <= 3.0 * se);
}

TEST_CASE("cpi with K=1 equals the chain-sample average of f") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  const MicroConfig cfg{1e-3, 50, false};
  const std::uint64_t seed = 777;

  const EstimateRecord hmm = hmm_estimate(m, 1.0, 1.0, cfg, seed);
  GaussianStream s(seed);
  const ChainResult chain = em_chain(m, 1.0, 1.0, cfg, s);
  const double cpi = cpi_estimate(m, 1.0, chain.samples, 1, cfg.delta_t, 1234);
  CHECK(cpi == doctest::Approx(hmm.value).epsilon(1e-12));
}

TEST_CASE("cpi with one zero-diffusion member is a deterministic slope") {
  const Model m = zero_diffusion_linear(1e-3);
  const std::vector<double> ensemble{0.7};
  const double a = cpi_estimate(m, 1.0, ensemble, 4, 1e-3, 1);
  const double b = cpi_estimate(m, 1.0, ensemble, 4, 1e-3, 2);
  CHECK(a == b);  // no diffusion, seeds irrelevant
}

TEST_CASE("cpi rejects bad arguments") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  CHECK_THROWS_AS(cpi_estimate(m, 1.0, {}, 1, 1e-3, 1), std::invalid_argument);
  const std::vector<double> e{1.0};
  CHECK_THROWS_AS(cpi_estimate(m, 1.0, e, 0, 1e-3, 1), std::invalid_argument);
}

TEST_CASE("vr_estimate cancels perfectly when the state did not move") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  const EstimateRecord rec = vr_estimate(m, 1.0, 1.0, -3.25, 0.8, {1e-3, 50, false}, 4242);
  CHECK(rec.value == -3.25);
  CHECK(rec.pair.has_value());
  CHECK(rec.pair->hat_current == rec.pair->hat_previous);
  CHECK(rec.micro_samples == 100);
}

TEST_CASE("vr_estimate rejects the Metropolis correction") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  CHECK_THROWS_AS(vr_estimate(m, 1.0, 0.9, -8.0, 1.0, {1e-3, 50, true}, 7),
                  UnsupportedModelError);
}

TEST_CASE("linear vr_estimate is deterministic and matches the enumerated recursion") {
  const LinearParams params = reference_params();
  const Model m = make_linear_model(params, 1e-3);
  const double macro_dt = 0.02;
  const MicroConfig cfg{1e-3, 50, false};

  const double F_prev = m.exact_f_bar(1.0);  // -8.3333...
  const double X_prev = 1.0;
  const double X_cur = fe_step(X_prev, F_prev, macro_dt);

  // independent oracle: the enumerated double geometric sum
  const double ratio = enumerated_step_ratio(params, macro_dt, cfg.delta_t, 1e-3, cfg.M);
  CHECK(ratio == doctest::Approx(0.8327777777777778).epsilon(1e-12));
  const double expected = ratio * F_prev;
  CHECK(expected == doctest::Approx(-6.939814814814815).epsilon(1e-12));

  std::vector<double> values;
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL, 123456ULL, 888888888ULL}) {
    const EstimateRecord rec = vr_estimate(m, X_prev, X_cur, F_prev, 1.0, cfg, seed);
    values.push_back(rec.value);
    CHECK(rec.value == doctest::Approx(expected).epsilon(1e-12));
  }
  // seed invariance: spread across seeds at roundoff level only
  for (const double v : values) {
    CHECK(std::abs(v - values.front()) <= 1e-10 * std::abs(values.front()));
  }
}

TEST_CASE("vr_estimate difference scales linearly in the macro step (nonlinear)") {
  const Model m = make_nonlinear_model(1e-3);
  const double X0 = 1.0;
  const double F0 = m.exact_f_bar(X0);
  const MicroConfig cfg{1e-3, 50, false};

  std::vector<double> dts, medians;
  for (double dt : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
    std::vector<double> gaps;
    for (int j = 0; j < 64; ++j) {
      const double X1 = fe_step(X0, F0, dt);
      const EstimateRecord rec =
          vr_estimate(m, X0, X1, F0, 0.5, cfg, realization_seed(5050, j));
      gaps.push_back(std::abs(rec.value - F0));
    }
    std::sort(gaps.begin(), gaps.end());
    dts.push_back(dt);
    medians.push_back(gaps[gaps.size() / 2]);
  }
  const double slope = testutil::loglog_slope(dts, medians);
  CHECK(slope > 0.7);
  CHECK(slope < 1.3);
}

TEST_CASE("exact initialization returns the oracle and passes the warm start through") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  const SeedSchedule seeds{11};
  const EstimateRecord rec =
      initialize_estimate(m, 1.0, 0.77, InitSpec::exact(), {1e-3, 50, false}, seeds);
  CHECK(rec.value == doctest::Approx(-8.333333333333334).epsilon(1e-14));
  CHECK(rec.y_final == 0.77);
  CHECK(rec.micro_samples == 0);

  Model no_oracle = m;
  no_oracle.exact_f_bar = nullptr;
  CHECK_THROWS_AS(
      initialize_estimate(no_oracle, 1.0, 0.77, InitSpec::exact(), {1e-3, 50, false}, seeds),
      UnsupportedModelError);
}

TEST_CASE("averaged initialization with S=1 is a plain estimate on the replica seed") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  const SeedSchedule seeds{314159};
  const MicroConfig cfg{1e-3, 50, false};
  const EstimateRecord avg =
      initialize_estimate(m, 1.0, 1.0, InitSpec::averaged(1, 50), cfg, seeds);
  const EstimateRecord plain = hmm_estimate(m, 1.0, 1.0, cfg, seeds.replica_seed(0, 1));
  CHECK(avg.value == plain.value);
  CHECK(avg.y_final == plain.y_final);
}

TEST_CASE("averaged and estimated initializations have equal sample budgets") {
  CHECK(InitSpec::averaged(10, 50).sample_budget() == InitSpec::estimated(500).sample_budget());
  const Model m = make_linear_model(reference_params(), 1e-3);
  const SeedSchedule seeds{21};
  const MicroConfig cfg{1e-3, 50, false};
  const EstimateRecord a =
      initialize_estimate(m, 1.0, 1.0, InitSpec::averaged(10, 50), cfg, seeds);
  const EstimateRecord b =
      initialize_estimate(m, 1.0, 1.0, InitSpec::estimated(500), cfg, seeds);
  CHECK(a.micro_samples == 500);
  CHECK(b.micro_samples == 500);
}

TEST_CASE("averaged replicas chain their warm starts sequentially") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  const SeedSchedule seeds{404};
  const MicroConfig cfg{1e-3, 20, false};

  const EstimateRecord avg =
      initialize_estimate(m, 1.0, 1.0, InitSpec::averaged(3, 20), cfg, seeds);

  double y = 1.0;
  double sum = 0.0;
  for (int r = 1; r <= 3; ++r) {
    const EstimateRecord rec = hmm_estimate(m, 1.0, y, cfg, seeds.replica_seed(0, r));
    sum += rec.value;
    y = rec.y_final;
  }
  CHECK(avg.value == doctest::Approx(sum / 3.0).epsilon(1e-15));
  CHECK(avg.y_final == y);
}

TEST_CASE("telescoped expansion reproduces the recursive estimate") {
  const Model m = make_linear_model(reference_params(), 1e-3);
  const MacroConfig macro{0.02, 0.4, 1.0, 1.0};  // 20 steps
  const MicroConfig micro{1e-3, 30, false};
  const SeedSchedule seeds{31337};

  std::vector<EstimateRecord> records;
  run_vr_trajectory(m, macro, micro, InitSpec::estimated(200), ReinitPolicy::none(), seeds,
                    &records);
  REQUIRE(records.size() == 20);

  const int last = static_cast<int>(records.size()) - 1;
  double tele = records[last].pair->hat_current;
  for (int n = 1; n < last; ++n) {
    tele += records[n].pair->hat_current - records[n + 1].pair->hat_previous;
  }
  tele -= records[1].pair->hat_previous - records[0].value;
  CHECK(tele == doctest::Approx(records[last].value).epsilon(1e-12));
}

TEST_CASE("the variance-reduced recursion adds no bias") {
  // E[F_bar^N] - E[F_hat(X^N)] equals E[F_bar^0] - E[F_hat(X^0)] within noise
  const Model m = make_linear_model(reference_params(), 1e-3);
  const MicroConfig micro{1e-3, 20, false};
  const double dt = 0.02;
  const int N = 3;
  const int J = 400;

  std::vector<double> gap0, gapN;
  for (int j = 0; j < J; ++j) {
    const SeedSchedule seeds{realization_seed(6021023, j)};
    EstimateRecord rec = initialize_estimate(m, 1.0, 1.0, InitSpec::estimated(100), micro, seeds);
    const double f_bar_0 = rec.value;
    double X_prev = 1.0;
    double X = fe_step(1.0, rec.value, dt);
    for (int n = 1; n <= N; ++n) {
      rec = vr_estimate(m, X_prev, X, rec.value, rec.y_final, micro, seeds.step_seed(n));
      if (n < N) {
        X_prev = X;
        X = fe_step(X, rec.value, dt);
      }
    }
    // independent plain estimates at both anchor states
    const double hat0 = hmm_estimate(m, 1.0, 1.0, micro, seeds.step_seed(1000)).value;
    const double hatN = hmm_estimate(m, X, rec.y_final, micro, seeds.step_seed(2000)).value;
    gap0.push_back(f_bar_0 - hat0);
    gapN.push_back(rec.value - hatN);
  }
  const double d0 = sample_mean(gap0);
  const double dN = sample_mean(gapN);
  const double se =
      std::sqrt(sample_variance(gap0) / J + sample_variance(gapN) / J);
  CHECK(std::abs(dN - d0) <= 3.0 * se);
}
