#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "massart/learner.hpp"
#include "massart/lower_bound.hpp"
#include "massart/serialization.hpp"
#include "massart/synth.hpp"

namespace massart {

inline constexpr const char* kExperimentSchema = "massart/experiment/1";
inline constexpr const char* kReportSchema = "massart/report/1";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Scenario { MarginMassart, GeneralMassart, Rcn, LowerBound };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario scenario);

struct LowerBoundGrid {
  std::vector<std::string> phis;
  std::vector<double> etas;
  std::vector<double> gammas;
  VerifyMode mode = VerifyMode::Surrogate;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::MarginMassart;
  Eigen::Index dimension = 10;
  double gamma = 0.1;
  double eta = 0.1;
  double epsilon = 0.05;
  PolicyKind policy = PolicyKind::Constant;
  PolicyOptions policy_options;
  int bits = 8;
  std::optional<double> beta;
  std::vector<std::uint64_t> seeds;
  std::size_t fresh_eval_sample = 100000;
  double slack = 0.02;
  std::optional<double> error_bound;  // default eta + epsilon + slack
  LearnerBudget budget;
  std::optional<std::size_t> rcn_iterations;
  LowerBoundGrid lower_bound;
  std::filesystem::path output_directory = "results";
  std::string csv_name = "results.csv";
  std::string json_name = "results.json";
  bool record_wall_time = false;

  double guarantee() const { return error_bound.value_or(eta + epsilon + slack); }
  void validate() const;
};

// Throws ConfigError on unknown keys, wrong types, or invalid values.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct SeedRow {
  std::uint64_t seed = 0;
  std::string status;  // "ok", "violation", or "aborted"
  double error = 0.0;
  double label_noise = 0.0;  // fraction of eval labels disagreeing with the target
  std::size_t rounds = 0;
  std::size_t stages = 0;
  double wall_time = 0.0;
  Json record;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<SeedRow> rows;
  std::vector<LowerBoundReport> lower_bounds;
  double mean_error = 0.0;
  double max_error = 0.0;
  bool passed = false;
};

// Runs one seed of a learner scenario.
SeedRow run_seed(const ExperimentConfig& config, std::uint64_t seed);
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string report_csv(const ExperimentReport& report);
Json report_json(const ExperimentReport& report);

// Writes CSV and JSON into the configured directory, or into
// $MASSART_OUTPUT_DIR when set. Returns the directory used.
std::filesystem::path write_report(const ExperimentReport& report);

// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace massart
