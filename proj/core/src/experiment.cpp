#include "slowfast/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "slowfast/analysis.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SingleStepDistribution: return "single_step_distribution";
    case ExperimentKind::LocalVariance: return "local_variance";
    case ExperimentKind::Trajectory: return "trajectory";
  }
  return "?";
}

ExperimentKind kind_from_name(const std::string& s) {
  if (s == "single_step_distribution") return ExperimentKind::SingleStepDistribution;
  if (s == "local_variance") return ExperimentKind::LocalVariance;
  if (s == "trajectory") return ExperimentKind::Trajectory;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

nlohmann::json init_to_json(const InitSpec& spec) {
  nlohmann::json j;
  switch (spec.kind) {
    case InitSpec::Kind::Exact:
      j["kind"] = "exact";
      break;
    case InitSpec::Kind::Estimated:
      j["kind"] = "estimated";
      j["m_star"] = spec.m_star;
      break;
    case InitSpec::Kind::Averaged:
      j["kind"] = "averaged";
      j["s"] = spec.s;
      j["m"] = spec.m;
      break;
  }
  j["use_mh"] = spec.use_mh;
  return j;
}

InitSpec init_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const bool mh = j.value("use_mh", false);
  if (kind == "exact") return InitSpec::exact();
  if (kind == "estimated") return InitSpec::estimated(j.at("m_star").get<int>(), mh);
  if (kind == "averaged") return InitSpec::averaged(j.at("s").get<int>(), j.at("m").get<int>(), mh);
  throw ConfigError("unknown init kind '" + kind + "'");
}

// Runs body(j) for j in [0, count) on a small pool, surfacing the first
// failure (by realization index) with its original exception type.
void parallel_realizations(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int j = 0; j < count; ++j) {
      try {
        body(j);
      } catch (const NumericalBlowupError& e) {
        throw NumericalBlowupError("realization " + std::to_string(j) + ": " + e.what());
      } catch (const std::exception& e) {
        throw std::runtime_error("realization " + std::to_string(j) + ": " + e.what());
      }
    }
    return;
  }

  std::atomic<int> next{0};
  std::mutex mu;
  int failed_index = std::numeric_limits<int>::max();
  std::string failure;
  bool failure_is_blowup = false;

  auto worker = [&] {
    for (;;) {
      const int j = next.fetch_add(1);
      if (j >= count) return;
      try {
        body(j);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (j < failed_index) {
          failed_index = j;
          failure = e.what();
          failure_is_blowup = dynamic_cast<const NumericalBlowupError*>(&e) != nullptr;
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (failed_index != std::numeric_limits<int>::max()) {
    const std::string msg = "realization " + std::to_string(failed_index) + ": " + failure;
    if (failure_is_blowup) throw NumericalBlowupError(msg);
    throw std::runtime_error(msg);
  }
}

}  // namespace

int default_jobs() {
  if (const char* env = std::getenv("SLOWFAST_VR_JOBS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double ExperimentConfig::resolved_micro_delta_t() const {
  if (micro_delta_t.has_value()) return *micro_delta_t;
  if (!linear_model) {
    throw ConfigError("micro.delta_t = \"nobias\" needs the linear model");
  }
  return nobias_micro_step(params.A, epsilon);
}

Model ExperimentConfig::build_model() const {
  return linear_model ? make_linear_model(params, epsilon) : make_nonlinear_model(epsilon);
}

void ExperimentConfig::validate() const {
  try {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (linear_model) params.validate();
    if (micro_M < 1) throw ConfigError("micro.M must be >= 1");
    const double dte = resolved_micro_delta_t();
    if (!(dte > 0.0)) throw ConfigError("micro.delta_t must be positive");
    if (linear_model && params.A * dte / epsilon > 2.0 + 1e-12) {
      throw ConfigError("micro.delta_t violates the chain stability bound A dt/eps <= 2");
    }
    if (realizations < 2) throw ConfigError("realizations must be >= 2");
    if (estimator == EstimatorKind::Vr) {
      if (micro_use_mh) {
        throw ConfigError(
            "the vr estimator cannot use the Metropolis correction; "
            "set init.use_mh instead");
      }
      init.validate();
    }
    if (reinit.period.has_value() &&
        (estimator != EstimatorKind::Vr || kind != ExperimentKind::Trajectory)) {
      throw ConfigError("reinit only applies to vr trajectory experiments");
    }
    reinit.validate();

    switch (kind) {
      case ExperimentKind::SingleStepDistribution:
        if (!(macro_delta_t > 0.0)) throw ConfigError("macro.delta_t must be positive");
        break;
      case ExperimentKind::LocalVariance:
        if (delta_t_list.empty()) throw ConfigError("macro.delta_t_list must be non-empty");
        for (const double dt : delta_t_list) {
          if (!(dt > 0.0)) throw ConfigError("macro.delta_t_list entries must be positive");
        }
        if (n_steps_list.empty()) throw ConfigError("macro.n_steps_list must be non-empty");
        for (const int n : n_steps_list) {
          if (n < 1) throw ConfigError("macro.n_steps_list entries must be >= 1");
        }
        break;
      case ExperimentKind::Trajectory: {
        MacroConfig mc{macro_delta_t, t_end, x0, y0};
        mc.validate();
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    if (j.value("schema_version", kConfigSchemaVersion) != kConfigSchemaVersion) {
      throw ConfigError("unsupported schema_version");
    }
    cfg.kind = kind_from_name(j.at("experiment").get<std::string>());

    const auto& jm = j.at("model");
    const std::string model_kind = jm.at("kind").get<std::string>();
    if (model_kind == "linear") {
      cfg.linear_model = true;
      cfg.params.lambda = jm.at("lambda").get<double>();
      cfg.params.p = jm.at("p").get<double>();
      cfg.params.q = jm.at("q").get<double>();
      cfg.params.A = jm.at("A").get<double>();
    } else if (model_kind == "nonlinear") {
      cfg.linear_model = false;
    } else {
      throw ConfigError("unknown model kind '" + model_kind + "'");
    }
    cfg.epsilon = j.at("epsilon").get<double>();

    const auto& jmi = j.at("micro");
    const auto& jdt = jmi.at("delta_t");
    if (jdt.is_string()) {
      if (jdt.get<std::string>() != "nobias") {
        throw ConfigError("micro.delta_t must be a number or \"nobias\"");
      }
      cfg.micro_delta_t.reset();
    } else {
      cfg.micro_delta_t = jdt.get<double>();
    }
    cfg.micro_M = jmi.at("M").get<int>();
    cfg.micro_use_mh = jmi.value("use_mh", false);

    const auto& jma = j.at("macro");
    cfg.x0 = jma.at("x0").get<double>();
    cfg.y0 = jma.at("y0").get<double>();
    if (jma.contains("delta_t")) cfg.macro_delta_t = jma.at("delta_t").get<double>();
    if (jma.contains("t_end")) cfg.t_end = jma.at("t_end").get<double>();
    if (jma.contains("delta_t_list")) {
      cfg.delta_t_list = jma.at("delta_t_list").get<std::vector<double>>();
    }
    if (jma.contains("n_steps_list")) {
      cfg.n_steps_list = jma.at("n_steps_list").get<std::vector<int>>();
    }

    const std::string est = j.at("estimator").get<std::string>();
    if (est == "hmm") {
      cfg.estimator = EstimatorKind::Hmm;
    } else if (est == "vr") {
      cfg.estimator = EstimatorKind::Vr;
    } else {
      throw ConfigError("unknown estimator '" + est + "'");
    }

    if (j.contains("init") && !j.at("init").is_null()) {
      cfg.init = init_from_json(j.at("init"));
    } else if (cfg.estimator == EstimatorKind::Vr) {
      throw ConfigError("vr estimator needs an init spec");
    }
    if (j.contains("reinit") && !j.at("reinit").is_null()) {
      const auto& jr = j.at("reinit");
      cfg.reinit = ReinitPolicy::every(jr.at("period").get<int>(), init_from_json(jr.at("spec")));
    }

    cfg.realizations = j.at("realizations").get<int>();
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    cfg.output = j.value("output", std::string{});
    cfg.validate();
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config " + file.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["experiment"] = kind_name(cfg.kind);
  if (cfg.linear_model) {
    j["model"] = {{"kind", "linear"},
                  {"lambda", cfg.params.lambda},
                  {"p", cfg.params.p},
                  {"q", cfg.params.q},
                  {"A", cfg.params.A}};
  } else {
    j["model"] = {{"kind", "nonlinear"}};
  }
  j["epsilon"] = cfg.epsilon;
  j["micro"] = {{"delta_t", cfg.resolved_micro_delta_t()},
                {"M", cfg.micro_M},
                {"use_mh", cfg.micro_use_mh}};
  nlohmann::json jma;
  jma["x0"] = cfg.x0;
  jma["y0"] = cfg.y0;
  if (cfg.kind == ExperimentKind::LocalVariance) {
    jma["delta_t_list"] = cfg.delta_t_list;
    jma["n_steps_list"] = cfg.n_steps_list;
  } else {
    jma["delta_t"] = cfg.macro_delta_t;
    if (cfg.kind == ExperimentKind::Trajectory) jma["t_end"] = cfg.t_end;
  }
  j["macro"] = jma;
  j["estimator"] = cfg.estimator == EstimatorKind::Hmm ? "hmm" : "vr";
  if (cfg.estimator == EstimatorKind::Vr) j["init"] = init_to_json(cfg.init);
  if (cfg.reinit.period.has_value()) {
    j["reinit"] = {{"period", *cfg.reinit.period}, {"spec", init_to_json(cfg.reinit.spec)}};
  }
  j["realizations"] = cfg.realizations;
  j["master_seed"] = cfg.master_seed;
  j["output"] = cfg.output;
  return j;
}

namespace {

nlohmann::json base_metadata(const ExperimentConfig& cfg, std::int64_t total_micro_samples) {
  nlohmann::json meta;
  meta["tool_version"] = kToolVersion;
  meta["config"] = config_to_json(cfg);
  meta["total_micro_samples"] = total_micro_samples;
  return meta;
}

ExperimentResult run_single_step(const ExperimentConfig& cfg, const Model& model, int jobs) {
  const int J = cfg.realizations;
  MicroConfig micro{cfg.resolved_micro_delta_t(), cfg.micro_M, cfg.micro_use_mh};

  std::vector<double> f0(J), x1(J), f1(J);
  std::vector<std::int64_t> cost(J);
  parallel_realizations(J, jobs, [&](int j) {
    const SeedSchedule sched{realization_seed(cfg.master_seed, j)};
    EstimateRecord rec0, rec1;
    if (cfg.estimator == EstimatorKind::Hmm) {
      rec0 = hmm_estimate(model, cfg.x0, cfg.y0, micro, sched.step_seed(0));
      const double X1 = fe_step(cfg.x0, rec0.value, cfg.macro_delta_t);
      rec1 = hmm_estimate(model, X1, rec0.y_final, micro, sched.step_seed(1));
      x1[j] = X1;
    } else {
      rec0 = initialize_estimate(model, cfg.x0, cfg.y0, cfg.init, micro, sched, 0);
      const double X1 = fe_step(cfg.x0, rec0.value, cfg.macro_delta_t);
      rec1 = vr_estimate(model, cfg.x0, X1, rec0.value, rec0.y_final, micro, sched.step_seed(1));
      x1[j] = X1;
    }
    f0[j] = rec0.value;
    f1[j] = rec1.value;
    cost[j] = rec0.micro_samples + rec1.micro_samples;
  });

  ExperimentResult res;
  res.table.columns = {"realization", "f0", "x1", "f1"};
  std::int64_t total_cost = 0;
  for (int j = 0; j < J; ++j) {
    res.table.rows.push_back({static_cast<double>(j), f0[j], x1[j], f1[j]});
    total_cost += cost[j];
  }

  res.table.metadata = base_metadata(cfg, total_cost);
  const EnsembleStats stats = ensemble_stats_scalar(f1);
  res.table.metadata["f1_mean"] = stats.mean[0];
  res.table.metadata["f1_variance"] = stats.variance[0];
  if (model.exact_f_bar) {
    res.table.metadata["exact_mean_reference"] = exact_mean_reference(model, x1);
  }

  // Coupled estimates under exact initialization agree across seeds up to
  // roundoff; treat that spread as degenerate rather than smoothing it.
  const double spread_floor = 1e-12 * std::max(1.0, std::abs(stats.mean[0]));
  if (std::sqrt(stats.variance[0]) > spread_floor) {
    const std::vector<double> grid = kde_grid(f1);
    const KdeResult kde = kernel_density(f1, grid);
    res.table.metadata["kde_bandwidth"] = kde.bandwidth;
    ResultTable kt;
    kt.columns = {"f", "density"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      kt.rows.push_back({grid[i], kde.density[i]});
    }
    kt.metadata = {{"bandwidth", kde.bandwidth}, {"samples", J}};
    res.extra_tables.emplace_back("kde", std::move(kt));
  } else {
    res.table.metadata["f1_point_mass"] = f1.front();
  }
  return res;
}

ExperimentResult run_local_variance(const ExperimentConfig& cfg, const Model& model, int jobs) {
  const int J = cfg.realizations;
  MicroConfig micro{cfg.resolved_micro_delta_t(), cfg.micro_M, cfg.micro_use_mh};
  const bool predict = cfg.estimator == EstimatorKind::Vr && cfg.linear_model;

  ExperimentResult res;
  res.table.columns = {"delta_t", "n_steps", "var_f", "var_f0"};
  if (predict) res.table.columns.push_back("var_predicted");

  std::int64_t total_cost = 0;
  for (const double dt : cfg.delta_t_list) {
    for (const int N : cfg.n_steps_list) {
      std::vector<double> fN(J), f0(J);
      std::vector<std::int64_t> cost(J);
      parallel_realizations(J, jobs, [&](int j) {
        const SeedSchedule sched{realization_seed(cfg.master_seed, j)};
        std::int64_t c = 0;
        if (cfg.estimator == EstimatorKind::Hmm) {
          double X = cfg.x0;
          double y = cfg.y0;
          EstimateRecord rec;
          for (int n = 0; n <= N; ++n) {
            rec = hmm_estimate(model, X, y, micro, sched.step_seed(n));
            c += rec.micro_samples;
            if (n == 0) f0[j] = rec.value;
            X = fe_step(X, rec.value, dt);
            y = rec.y_final;
          }
          fN[j] = rec.value;
        } else {
          EstimateRecord rec = initialize_estimate(model, cfg.x0, cfg.y0, cfg.init, micro, sched, 0);
          c += rec.micro_samples;
          f0[j] = rec.value;
          double X_prev = cfg.x0;
          double X = fe_step(cfg.x0, rec.value, dt);
          for (int n = 1; n <= N; ++n) {
            rec = vr_estimate(model, X_prev, X, rec.value, rec.y_final, micro, sched.step_seed(n));
            c += rec.micro_samples;
            X_prev = X;
            X = fe_step(X, rec.value, dt);
          }
          fN[j] = rec.value;
        }
        cost[j] = c;
      });
      for (const std::int64_t c : cost) total_cost += c;

      const double var_f = ensemble_stats_scalar(fN).variance[0];
      const double var_f0 = ensemble_stats_scalar(f0).variance[0];
      std::vector<double> row{dt, static_cast<double>(N), var_f, var_f0};
      if (predict) {
        const TildeConstants tc =
            tilde_constants(cfg.params.A, micro.delta_t, cfg.epsilon, micro.M);
        row.push_back(vr_variance_prediction(cfg.params, dt, tc, N, var_f0));
      }
      res.table.rows.push_back(std::move(row));
    }
  }
  res.table.metadata = base_metadata(cfg, total_cost);
  return res;
}

ExperimentResult run_trajectory_experiment(const ExperimentConfig& cfg, const Model& model,
                                           int jobs) {
  const int J = cfg.realizations;
  MicroConfig micro{cfg.resolved_micro_delta_t(), cfg.micro_M, cfg.micro_use_mh};
  const MacroConfig macro{cfg.macro_delta_t, cfg.t_end, cfg.x0, cfg.y0};
  const int N = macro.num_steps();

  std::vector<Trajectory> trajectories(J);
  parallel_realizations(J, jobs, [&](int j) {
    const SeedSchedule sched{realization_seed(cfg.master_seed, j)};
    trajectories[j] = cfg.estimator == EstimatorKind::Hmm
                          ? run_hmm_trajectory(model, macro, micro, sched)
                          : run_vr_trajectory(model, macro, micro, cfg.init, cfg.reinit, sched);
  });

  std::vector<std::vector<double>> x_rows(J), f_rows(J);
  std::int64_t total_cost = 0;
  std::vector<std::string> warnings;
  for (int j = 0; j < J; ++j) {
    x_rows[j] = trajectories[j].x_values;
    f_rows[j] = trajectories[j].f_values;
    total_cost += trajectories[j].micro_samples;
    if (warnings.empty() && !trajectories[j].warnings.empty()) {
      warnings = trajectories[j].warnings;
    }
  }
  const EnsembleStats xs = ensemble_stats(x_rows);
  const EnsembleStats fs = ensemble_stats(f_rows);

  ExperimentResult res;
  const bool have_exact = static_cast<bool>(model.exact_macro_solution);
  res.table.columns = {"t", "mean_x", "var_x", "mean_f", "var_f"};
  if (have_exact) res.table.columns.push_back("exact_x");
  const std::vector<double>& times = trajectories.front().times;
  for (int n = 0; n <= N; ++n) {
    std::vector<double> row{times[n], xs.mean[n], xs.variance[n],
                            n < N ? fs.mean[n] : kNan, n < N ? fs.variance[n] : kNan};
    if (have_exact) row.push_back(model.exact_macro_solution(cfg.x0, times[n]));
    res.table.rows.push_back(std::move(row));
  }
  res.table.metadata = base_metadata(cfg, total_cost);
  if (!warnings.empty()) res.table.metadata["warnings"] = warnings;
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  if (jobs <= 0) jobs = default_jobs();
  const Model model = cfg.build_model();
  switch (cfg.kind) {
    case ExperimentKind::SingleStepDistribution:
      return run_single_step(cfg, model, jobs);
    case ExperimentKind::LocalVariance:
      return run_local_variance(cfg, model, jobs);
    case ExperimentKind::Trajectory:
      return run_trajectory_experiment(cfg, model, jobs);
  }
  throw ConfigError("unknown experiment kind");
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p.replace_extension(".meta.json");
  return p;
}

}  // namespace

void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  char buf[64];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
      out << buf;
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());

  if (!table.metadata.is_null()) {
    nlohmann::json meta = table.metadata;
    meta["generated_at_utc"] = []() {
      const auto now = std::chrono::system_clock::now();
      const std::time_t t = std::chrono::system_clock::to_time_t(now);
      char stamp[32];
      std::tm tm_utc{};
      gmtime_r(&t, &tm_utc);
      std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
      return std::string(stamp);
    }();
    std::ofstream meta_out(sidecar_path(path));
    if (!meta_out) throw IoError("cannot open " + sidecar_path(path).string() + " for writing");
    meta_out << meta.dump(2) << '\n';
    if (!meta_out) throw IoError("failed writing " + sidecar_path(path).string());
  }
}

ResultTable parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ResultTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv " + path.string());
  {
    std::stringstream header(line);
    std::string col;
    while (std::getline(header, col, ',')) table.columns.push_back(col);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    table.rows.push_back(std::move(row));
  }
  const std::filesystem::path meta = sidecar_path(path);
  if (std::filesystem::exists(meta)) {
    std::ifstream meta_in(meta);
    meta_in >> table.metadata;
  }
  return table;
}

}  // namespace slowfast
