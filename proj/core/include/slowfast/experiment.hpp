#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slowfast/estimators.hpp"
#include "slowfast/macro.hpp"
#include "slowfast/model.hpp"

namespace slowfast {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind { SingleStepDistribution, LocalVariance, Trajectory };
enum class EstimatorKind { Hmm, Vr };

// A fully resolved, self-describing experiment. The JSON form of this struct
// is what the CLI consumes and what every result file embeds in its metadata
// sidecar, so a result can always be re-run exactly.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Trajectory;

  bool linear_model = true;
  LinearParams params;  // linear model only
  double epsilon = 0.0;

  // micro discretization; an absent delta_t means "nobias" (2 eps / A,
  // linear model only)
  std::optional<double> micro_delta_t;
  int micro_M = 0;
  bool micro_use_mh = false;

  // macro mesh; the list fields drive the local_variance sweep, the scalar
  // fields everything else
  double macro_delta_t = 0.0;
  double t_end = 0.0;
  std::vector<double> delta_t_list;
  std::vector<int> n_steps_list;
  double x0 = 0.0;
  double y0 = 0.0;

  EstimatorKind estimator = EstimatorKind::Hmm;
  InitSpec init;                            // vr only
  ReinitPolicy reinit = ReinitPolicy::none();  // vr trajectory only

  int realizations = 0;
  std::uint64_t master_seed = 0;
  std::string output;  // default output path, may be overridden on the command line

  void validate() const;
  double resolved_micro_delta_t() const;
  Model build_model() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Rectangular numeric table plus its self-describing metadata block.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json metadata;
};

struct ExperimentResult {
  ResultTable table;
  // Auxiliary tables written next to the main one, keyed by a suffix
  // (currently only "kde" for the distribution experiments).
  std::vector<std::pair<std::string, ResultTable>> extra_tables;
};

// Runs all realizations of the configured experiment across a worker pool.
// jobs <= 0 picks the default (SLOWFAST_VR_JOBS or the hardware concurrency).
// Row order is by realization index regardless of scheduling, so results are
// independent of the job count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 0);

// Writes the table as CSV (17 significant digits) and its metadata as a
// .meta.json sidecar with the same basename.
void emit_csv(const ResultTable& table, const std::filesystem::path& path);

// Reads back a CSV written by emit_csv, including the sidecar when present.
ResultTable parse_csv(const std::filesystem::path& path);

int default_jobs();

}  // namespace slowfast
