#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otra/common.hpp"
#include "otra/io.hpp"
#include "otra/lab.hpp"
#include "otra/ot.hpp"
#include "otra/reward.hpp"
#include "otra/selftest.hpp"

namespace {

using namespace otra;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 1;
constexpr int kExitNumericFailure = 2;
constexpr int kExitNotConverged = 3;

struct SolverFlags {
  std::string metric_path;
  double order_p = 2.0;
  std::string solver = "exact";
  double reg_epsilon = OtConfig{}.reg_epsilon;
  int max_iterations = OtConfig{}.max_iterations;
  double convergence_tol = OtConfig{}.convergence_tol;

  OtConfig ot_config() const {
    OtConfig config;
    config.order_p = order_p;
    config.reg_epsilon = reg_epsilon;
    config.max_iterations = max_iterations;
    config.convergence_tol = convergence_tol;
    config.validate();
    return config;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags* flags, bool with_solver) {
  cmd->add_option("--metric", flags->metric_path,
                  "Ground metric CSV (row,col,value)")
      ->required();
  cmd->add_option("--p", flags->order_p, "Wasserstein order p >= 1");
  if (with_solver) {
    cmd->add_option("--solver", flags->solver, "exact or sinkhorn")
        ->check(CLI::IsMember({"exact", "sinkhorn"}));
  }
  cmd->add_option("--reg-epsilon", flags->reg_epsilon,
                  "Entropic regularization strength");
  cmd->add_option("--max-iterations", flags->max_iterations,
                  "Iteration cap for entropic solvers");
  cmd->add_option("--tol", flags->convergence_tol,
                  "Convergence tolerance for entropic solvers");
}

int run_distance(const std::string& mu_path, const std::string& nu_path,
                 const SolverFlags& flags, bool strict) {
  const DiscreteMeasure mu = read_measure_csv(mu_path);
  const DiscreteMeasure nu = read_measure_csv(nu_path);
  const GroundMetric metric = read_metric_csv(flags.metric_path);
  if (flags.solver == "exact") {
    const auto result = exact_wasserstein(mu, nu, metric, flags.order_p);
    std::cout << format_double(result.distance) << "\n";
    return kExitOk;
  }
  const auto result = sinkhorn_distance(mu, nu, metric, flags.ot_config());
  std::cout << format_double(result.value) << "\n";
  if (!result.converged) {
    std::cerr << "warning: sinkhorn hit the iteration cap before reaching "
                 "tolerance\n";
    if (strict) return kExitNotConverged;
  }
  return kExitOk;
}

int run_centroid(const std::string& set_path, const SolverFlags& flags,
                 double temperature, std::uint64_t seed, bool strict) {
  const auto rewards = read_reward_set_csv(set_path);
  std::vector<DiscreteMeasure> measures;
  measures.reserve(rewards.size());
  for (const auto& r : rewards) measures.push_back(phi_embed(r, temperature));
  const GroundMetric metric = read_metric_csv(flags.metric_path);
  const OtConfig config = flags.ot_config();

  const MedoidResult medoid =
      medoid_centroid(measures, metric, flags.order_p);
  const Vector weights =
      Vector::Constant(static_cast<Eigen::Index>(measures.size()),
                       1.0 / static_cast<double>(measures.size()));

  constexpr int kMultistarts = 5;
  std::vector<Vector> solutions;
  bool all_converged = true;
  for (int k = 0; k < kMultistarts; ++k) {
    BarycenterResult result;
    if (k == 0) {
      result = wasserstein_barycenter(measures, weights, metric, config);
    } else {
      Rng rng(seed + 3 + static_cast<std::uint64_t>(k));
      Vector init(metric.size());
      for (Eigen::Index i = 0; i < init.size(); ++i) {
        init(i) = rng.uniform(0.1, 1.0);
      }
      init /= init.sum();
      result =
          wasserstein_barycenter(measures, weights, metric, config, &init);
    }
    all_converged = all_converged && result.converged;
    solutions.push_back(result.barycenter.weights);
  }
  double spread = 0.0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < solutions.size(); ++j) {
      spread = std::max(spread,
                        0.5 * (solutions[i] - solutions[j]).cwiseAbs().sum());
    }
  }
  const auto objective = [&](const Vector& point_weights) {
    const DiscreteMeasure point{point_weights};
    double total = 0.0;
    for (std::size_t i = 0; i < measures.size(); ++i) {
      const double dist =
          exact_wasserstein(point, measures[i], metric, flags.order_p)
              .distance;
      total += weights(static_cast<Eigen::Index>(i)) *
               std::pow(dist, flags.order_p);
    }
    return total;
  };

  std::cout << "medoid_index " << medoid.index << "\n";
  std::cout << "medoid_objective " << format_double(medoid.objective) << "\n";
  std::cout << "barycenter_objective " << format_double(objective(solutions[0]))
            << "\n";
  std::cout << "barycenter_objective_at_medoid "
            << format_double(objective(
                   measures[static_cast<std::size_t>(medoid.index)].weights))
            << "\n";
  std::cout << "multistart_spread " << format_double(spread) << "\n";
  std::cout << "barycenter_converged " << (all_converged ? "true" : "false")
            << "\n";
  if (!all_converged) {
    std::cerr << "warning: barycenter hit the iteration cap before reaching "
                 "tolerance\n";
    if (strict) return kExitNotConverged;
  }
  return kExitOk;
}

int run_ambiguity(const std::string& set_path, const SolverFlags& flags,
                  double temperature) {
  const auto rewards = read_reward_set_csv(set_path);
  std::vector<DiscreteMeasure> measures;
  measures.reserve(rewards.size());
  for (const auto& r : rewards) measures.push_back(phi_embed(r, temperature));
  const GroundMetric metric = read_metric_csv(flags.metric_path);
  const double delta =
      average_pairwise_distance(measures, metric, flags.order_p);
  const double variance = compute_reward_variance(rewards);
  std::cout << "delta_d " << format_double(delta) << "\n";
  std::cout << "variance_d " << format_double(variance) << "\n";
  return kExitOk;
}

int run_experiment(ExperimentKind kind, const std::string& config_path,
                   const std::string& out_dir, bool seed_given,
                   std::uint64_t seed, bool strict) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (config.kind != kind) {
    throw ConfigError("config key \"kind\": expected \"" + to_string(kind) +
                      "\", got \"" + to_string(config.kind) + "\"");
  }
  if (seed_given) config.master_seed = seed;

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.master_seed = config.master_seed;
  manifest.config_json = experiment_config_to_json(config);
  manifest.started_at = utc_timestamp();

  std::vector<ResultRecord> records;
  switch (kind) {
    case ExperimentKind::kConverge:
      records = run_convergence_experiment(config);
      break;
    case ExperimentKind::kNoise:
      records = run_noise_experiment(config);
      break;
    case ExperimentKind::kDimSweep:
      records = run_dimensionality_experiment(config);
      break;
    case ExperimentKind::kCentroid:
      records = run_centroid_analysis(config);
      break;
  }
  manifest.finished_at = utc_timestamp();

  namespace fs = std::filesystem;
  const fs::path dir(out_dir.empty() ? "." : out_dir);
  const fs::path records_path = dir / "records.csv";
  const std::string csv = records_to_csv(records);
  write_file_atomic(records_path.string(), csv);
  manifest.outputs.push_back({"records.csv", records_digest(csv)});
  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest, manifest_path.string());

  std::size_t flagged = 0;
  for (const auto& r : records) {
    if (!r.converged) ++flagged;
  }
  std::cout << "wrote " << records.size() << " records to "
            << records_path.string() << "\n";
  std::cout << "manifest " << manifest_path.string() << "\n";
  if (flagged > 0) {
    std::cerr << "warning: " << flagged << " record(s) flagged as "
              << "not converged\n";
    if (strict) return kExitNotConverged;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward-ambiguity analysis in Wasserstein space"};
  app.require_subcommand(1);

  // distance
  auto* distance_cmd =
      app.add_subcommand("distance", "W_p between two measure files");
  std::string mu_path;
  std::string nu_path;
  SolverFlags distance_flags;
  bool distance_strict = false;
  distance_cmd->add_option("mu", mu_path, "First measure CSV")->required();
  distance_cmd->add_option("nu", nu_path, "Second measure CSV")->required();
  add_solver_flags(distance_cmd, &distance_flags, true);
  distance_cmd->add_flag("--strict", distance_strict,
                         "Exit 3 if the solver did not converge");

  // centroid
  auto* centroid_cmd = app.add_subcommand(
      "centroid", "Medoid and barycenter report for a reward-set file");
  std::string centroid_set;
  SolverFlags centroid_flags;
  double centroid_temperature = kDefaultTemperature;
  std::uint64_t centroid_seed = 0;
  bool centroid_strict = false;
  centroid_cmd->add_option("set", centroid_set, "Reward set CSV")->required();
  add_solver_flags(centroid_cmd, &centroid_flags, false);
  centroid_cmd->add_option("--temperature", centroid_temperature,
                           "Softmax embedding temperature");
  centroid_cmd->add_option("--seed", centroid_seed,
                           "Seed for the multi-start initializations");
  centroid_cmd->add_flag("--strict", centroid_strict,
                         "Exit 3 if the barycenter did not converge");

  // ambiguity
  auto* ambiguity_cmd = app.add_subcommand(
      "ambiguity", "Average pairwise distance and variance of a reward set");
  std::string ambiguity_set;
  SolverFlags ambiguity_flags;
  double ambiguity_temperature = kDefaultTemperature;
  ambiguity_cmd->add_option("set", ambiguity_set, "Reward set CSV")
      ->required();
  add_solver_flags(ambiguity_cmd, &ambiguity_flags, false);
  ambiguity_cmd->add_option("--temperature", ambiguity_temperature,
                            "Softmax embedding temperature");

  // experiment runners
  struct ExperimentArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool strict = false;
    CLI::Option* seed_option = nullptr;
  };
  const auto add_experiment = [&](const char* name, const char* blurb,
                                  ExperimentArgs* args) {
    auto* cmd = app.add_subcommand(name, blurb);
    cmd->add_option("--config", args->config_path, "Experiment config JSON")
        ->required();
    cmd->add_option("--out-dir", args->out_dir,
                    "Directory for records.csv and manifest.json");
    args->seed_option =
        cmd->add_option("--seed", args->seed, "Override the master seed");
    cmd->add_flag("--strict", args->strict,
                  "Exit 3 if any record is flagged as not converged");
    return cmd;
  };
  ExperimentArgs converge_args;
  ExperimentArgs noise_args;
  ExperimentArgs dim_args;
  auto* converge_cmd = add_experiment(
      "converge", "Reward recovery vs trajectory count", &converge_args);
  auto* noise_cmd = add_experiment(
      "noise", "Embedding drift under expert perturbation", &noise_args);
  auto* dim_cmd = add_experiment(
      "dim-sweep", "Ambiguity growth with state-action dimension", &dim_args);

  // selftest
  auto* selftest_cmd =
      app.add_subcommand("selftest", "Run the built-in oracle battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n\n" << app.help() << std::flush;
    return kExitInvalidInput;
  }

  try {
    if (app.got_subcommand(distance_cmd)) {
      return run_distance(mu_path, nu_path, distance_flags, distance_strict);
    }
    if (app.got_subcommand(centroid_cmd)) {
      return run_centroid(centroid_set, centroid_flags, centroid_temperature,
                          centroid_seed, centroid_strict);
    }
    if (app.got_subcommand(ambiguity_cmd)) {
      return run_ambiguity(ambiguity_set, ambiguity_flags,
                           ambiguity_temperature);
    }
    if (app.got_subcommand(converge_cmd)) {
      return run_experiment(ExperimentKind::kConverge,
                            converge_args.config_path, converge_args.out_dir,
                            converge_args.seed_option->count() > 0,
                            converge_args.seed, converge_args.strict);
    }
    if (app.got_subcommand(noise_cmd)) {
      return run_experiment(ExperimentKind::kNoise, noise_args.config_path,
                            noise_args.out_dir,
                            noise_args.seed_option->count() > 0,
                            noise_args.seed, noise_args.strict);
    }
    if (app.got_subcommand(dim_cmd)) {
      return run_experiment(ExperimentKind::kDimSweep, dim_args.config_path,
                            dim_args.out_dir,
                            dim_args.seed_option->count() > 0, dim_args.seed,
                            dim_args.strict);
    }
    if (app.got_subcommand(selftest_cmd)) {
      return run_selftest(std::cout) == 0 ? kExitOk : kExitNumericFailure;
    }
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInvalidInput;
  } catch (const GenerationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumericFailure;
  } catch (const NumericError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumericFailure;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumericFailure;
  }
  return kExitInvalidInput;
}
