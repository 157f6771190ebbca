#include "massart/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace massart {

Scenario parse_scenario(const std::string& name) {
  if (name == "margin_massart") return Scenario::MarginMassart;
  if (name == "general_massart") return Scenario::GeneralMassart;
  if (name == "rcn") return Scenario::Rcn;
  if (name == "lower_bound") return Scenario::LowerBound;
  throw ConfigError("unknown scenario: " + name);
}

std::string scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::MarginMassart:
      return "margin_massart";
    case Scenario::GeneralMassart:
      return "general_massart";
    case Scenario::Rcn:
      return "rcn";
    case Scenario::LowerBound:
      return "lower_bound";
  }
  return "margin_massart";
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, end);
}

namespace {

void require_known_keys(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read(const Json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

MarginLearnerConfig margin_config(const ExperimentConfig& c, std::uint64_t seed) {
  MarginLearnerConfig out;
  out.gamma = c.gamma;
  out.eta = c.eta;
  out.epsilon = c.epsilon;
  out.seed = seed;
  out.budget = c.budget;
  return out;
}

GeneralLearnerConfig general_config(const ExperimentConfig& c, std::uint64_t seed) {
  GeneralLearnerConfig out;
  out.eta = c.eta;
  out.epsilon = c.epsilon;
  out.bits = c.bits;
  out.beta = c.beta;
  out.seed = seed;
  out.budget = c.budget;
  return out;
}

RcnLearnerConfig rcn_config(const ExperimentConfig& c, std::uint64_t seed) {
  RcnLearnerConfig out;
  out.gamma = c.gamma;
  out.eta = c.eta;
  out.epsilon = c.epsilon;
  out.seed = seed;
  out.sgd_constant = c.budget.sgd_constant;
  out.delta = c.budget.round_delta;
  out.sgd_iterations = c.rcn_iterations ? c.rcn_iterations : c.budget.sgd_iterations;
  out.replicates = c.budget.replicates;
  out.validation_sample = c.budget.validation_sample;
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    if (scenario == Scenario::LowerBound) {
      if (lower_bound.phis.empty() || lower_bound.etas.empty() || lower_bound.gammas.empty()) {
        throw ConfigError("lower_bound: phis, etas and gammas must be nonempty");
      }
      for (const auto& phi : lower_bound.phis) SurrogateLoss::from_id(phi);
      return;
    }
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (fresh_eval_sample < 1000) throw ConfigError("fresh_eval_sample must be at least 1000");
    if (dimension < 2) throw ConfigError("dimension must be at least 2");
    if (!(slack >= 0.0)) throw ConfigError("slack must be nonnegative");
    switch (scenario) {
      case Scenario::MarginMassart:
        margin_config(*this, 0).validate();
        break;
      case Scenario::GeneralMassart:
        general_config(*this, 0).validate();
        break;
      case Scenario::Rcn:
        if (policy != PolicyKind::Constant) throw ConfigError("rcn requires the constant policy");
        rcn_config(*this, 0).validate();
        break;
      case Scenario::LowerBound:
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    require_known_keys(j,
                       {"schema", "scenario", "dimension", "gamma", "eta", "epsilon", "policy",
                        "band_noisy_fraction", "region_cuts", "bits", "beta", "seeds",
                        "fresh_eval_sample", "slack", "error_bound", "budget", "rcn_iterations",
                        "lower_bound", "output", "record_wall_time"},
                       "config");
    if (j.contains("schema") && j.at("schema").get<std::string>() != kExperimentSchema) {
      throw ConfigError("config: unsupported schema");
    }
    c.scenario = parse_scenario(j.at("scenario").get<std::string>());
    read(j, "dimension", c.dimension);
    read(j, "gamma", c.gamma);
    read(j, "eta", c.eta);
    read(j, "epsilon", c.epsilon);
    if (j.contains("policy")) c.policy = parse_policy_kind(j.at("policy").get<std::string>());
    read(j, "band_noisy_fraction", c.policy_options.band_noisy_fraction);
    read(j, "region_cuts", c.policy_options.region_cuts);
    read(j, "bits", c.bits);
    read(j, "beta", c.beta);
    read(j, "seeds", c.seeds);
    read(j, "fresh_eval_sample", c.fresh_eval_sample);
    read(j, "slack", c.slack);
    read(j, "error_bound", c.error_bound);
    read(j, "rcn_iterations", c.rcn_iterations);
    read(j, "record_wall_time", c.record_wall_time);
    if (j.contains("budget")) {
      const Json& b = j.at("budget");
      require_known_keys(b,
                         {"round_constant", "sgd_constant", "round_delta", "max_rounds",
                          "round_sample", "sgd_iterations", "replicates", "validation_sample",
                          "unlabeled_sample", "filter_sample", "rejection_cap"},
                         "budget");
      read(b, "round_constant", c.budget.round_constant);
      read(b, "sgd_constant", c.budget.sgd_constant);
      read(b, "round_delta", c.budget.round_delta);
      read(b, "max_rounds", c.budget.max_rounds);
      read(b, "round_sample", c.budget.round_sample);
      read(b, "sgd_iterations", c.budget.sgd_iterations);
      read(b, "replicates", c.budget.replicates);
      read(b, "validation_sample", c.budget.validation_sample);
      read(b, "unlabeled_sample", c.budget.unlabeled_sample);
      read(b, "filter_sample", c.budget.filter_sample);
      read(b, "rejection_cap", c.budget.rejection_cap);
    }
    if (j.contains("lower_bound")) {
      const Json& lb = j.at("lower_bound");
      require_known_keys(lb, {"phis", "etas", "gammas", "mode"}, "lower_bound");
      read(lb, "phis", c.lower_bound.phis);
      read(lb, "etas", c.lower_bound.etas);
      read(lb, "gammas", c.lower_bound.gammas);
      if (lb.contains("mode")) c.lower_bound.mode = parse_verify_mode(lb.at("mode").get<std::string>());
    }
    if (j.contains("output")) {
      const Json& o = j.at("output");
      require_known_keys(o, {"directory", "csv", "json"}, "output");
      if (o.contains("directory")) c.output_directory = o.at("directory").get<std::string>();
      read(o, "csv", c.csv_name);
      read(o, "json", c.json_name);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json budget = {{"round_constant", c.budget.round_constant},
                 {"sgd_constant", c.budget.sgd_constant},
                 {"round_delta", c.budget.round_delta},
                 {"rejection_cap", c.budget.rejection_cap}};
  auto put = [&](const char* key, const std::optional<std::size_t>& v) {
    if (v) budget[key] = *v;
  };
  put("max_rounds", c.budget.max_rounds);
  put("round_sample", c.budget.round_sample);
  put("sgd_iterations", c.budget.sgd_iterations);
  put("replicates", c.budget.replicates);
  put("validation_sample", c.budget.validation_sample);
  put("unlabeled_sample", c.budget.unlabeled_sample);
  put("filter_sample", c.budget.filter_sample);

  Json out = {{"schema", kExperimentSchema},
              {"scenario", scenario_name(c.scenario)},
              {"dimension", c.dimension},
              {"gamma", c.gamma},
              {"eta", c.eta},
              {"epsilon", c.epsilon},
              {"policy", policy_kind_name(c.policy)},
              {"band_noisy_fraction", c.policy_options.band_noisy_fraction},
              {"region_cuts", c.policy_options.region_cuts},
              {"bits", c.bits},
              {"seeds", c.seeds},
              {"fresh_eval_sample", c.fresh_eval_sample},
              {"slack", c.slack},
              {"budget", budget},
              {"record_wall_time", c.record_wall_time},
              {"output", {{"directory", c.output_directory.string()}, {"csv", c.csv_name}, {"json", c.json_name}}}};
  if (c.beta) out["beta"] = *c.beta;
  if (c.error_bound) out["error_bound"] = *c.error_bound;
  if (c.rcn_iterations) out["rcn_iterations"] = *c.rcn_iterations;
  if (c.scenario == Scenario::LowerBound) {
    out["lower_bound"] = {{"phis", c.lower_bound.phis},
                          {"etas", c.lower_bound.etas},
                          {"gammas", c.lower_bound.gammas},
                          {"mode", verify_mode_name(c.lower_bound.mode)}};
  }
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

SeedRow run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t learner_seed = Rng::derive_seed(seed, 0x5eed);
  SeedRow row;
  row.seed = seed;
  Json learner_record;

  auto evaluate = [&](MassartOracle& oracle, const auto& hypothesis) {
    std::size_t mistakes = 0;
    std::size_t noisy = 0;
    for (std::size_t i = 0; i < config.fresh_eval_sample; ++i) {
      const LabeledExample ex = oracle.draw();
      mistakes += hypothesis.predict(ex.x()) != ex.y();
      noisy += oracle.target().predict(ex.x()) != ex.y();
    }
    const auto n = static_cast<double>(config.fresh_eval_sample);
    row.error = static_cast<double>(mistakes) / n;
    row.label_noise = static_cast<double>(noisy) / n;
  };

  bool aborted = false;
  switch (config.scenario) {
    case Scenario::MarginMassart:
    case Scenario::GeneralMassart: {
      const bool margin = config.scenario == Scenario::MarginMassart;
      MassartOracle oracle =
          margin ? gen_margin_massart(config.dimension, config.gamma, config.eta, config.policy, seed,
                                      config.policy_options)
                 : gen_bit_massart(config.dimension, config.bits, config.eta, config.policy, seed,
                                   config.policy_options);
      const LearnerResult result = margin ? learn_margin(oracle, margin_config(config, learner_seed))
                                          : learn_general(oracle, general_config(config, learner_seed));
      evaluate(oracle, result.list);
      row.rounds = result.rounds.size();
      row.stages = result.list.size();
      aborted = result.aborted;
      learner_record = learner_result_to_json(result);
      break;
    }
    case Scenario::Rcn: {
      MassartOracle oracle = gen_margin_massart(config.dimension, config.gamma, config.eta,
                                                PolicyKind::Constant, seed, config.policy_options);
      const RcnResult result = learn_rcn(oracle, rcn_config(config, learner_seed));
      evaluate(oracle, result.halfspace);
      row.rounds = 1;
      row.stages = 1;
      aborted = result.degenerate;
      learner_record = {{"weights", vector_to_json(result.halfspace.weights())},
                        {"smoothing", result.smoothing},
                        {"lambda", result.lambda},
                        {"value_estimate", result.value_estimate},
                        {"degenerate", result.degenerate}};
      break;
    }
    case Scenario::LowerBound:
      throw ConfigError("run_seed: lower_bound has no seeds");
  }

  row.status = aborted ? "aborted" : (row.error <= config.guarantee() ? "ok" : "violation");
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.record = {{"seed", seed},
                {"status", row.status},
                {"error", row.error},
                {"label_noise", row.label_noise},
                {"guarantee", config.guarantee()},
                {"rounds", row.rounds},
                {"stages", row.stages},
                {"learner", std::move(learner_record)}};
  if (config.record_wall_time) row.record["wall_time_s"] = row.wall_time;
  return row;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  if (config.scenario == Scenario::LowerBound) {
    report.passed = true;
    for (const auto& phi : config.lower_bound.phis) {
      for (double eta : config.lower_bound.etas) {
        for (double gamma : config.lower_bound.gammas) {
          LowerBoundReport cell = verify_lower_bound(phi, eta, gamma, config.lower_bound.mode);
          report.passed = report.passed && cell.passed;
          report.max_error = std::max(report.max_error, cell.measured_error);
          report.lower_bounds.push_back(std::move(cell));
        }
      }
    }
    return report;
  }
  report.passed = true;
  double total = 0.0;
  for (std::uint64_t seed : config.seeds) {
    SeedRow row = run_seed(config, seed);
    report.passed = report.passed && row.status == "ok";
    total += row.error;
    report.max_error = std::max(report.max_error, row.error);
    report.rows.push_back(std::move(row));
  }
  report.mean_error = total / static_cast<double>(report.rows.size());
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  if (report.config.scenario == Scenario::LowerBound) {
    out << "phi,eta,gamma,mode,case,measured_error,predicted_bound,theorem_bound,status\n";
    for (const auto& cell : report.lower_bounds) {
      out << cell.phi_id << ',' << format_double(cell.eta) << ',' << format_double(cell.gamma) << ','
          << verify_mode_name(cell.mode) << ',' << case_name(cell.instance.case_tag) << ','
          << format_double(cell.measured_error) << ',' << format_double(cell.predicted_error_bound)
          << ',' << format_double(cell.theorem_bound) << ',' << (cell.passed ? "ok" : "violation")
          << '\n';
    }
    return out.str();
  }
  out << "seed,status,error,rounds,stages,wall_time_s\n";
  for (const auto& row : report.rows) {
    out << row.seed << ',' << row.status << ',' << format_double(row.error) << ',' << row.rounds << ','
        << row.stages << ',' << (report.config.record_wall_time ? format_double(row.wall_time) : "NA")
        << '\n';
  }
  out << "mean,," << format_double(report.mean_error) << ",,,\n";
  out << "max," << (report.passed ? "ok" : "violation") << ',' << format_double(report.max_error)
      << ",,,\n";
  return out.str();
}

Json report_json(const ExperimentReport& report) {
  Json out = {{"schema", kReportSchema}, {"config", config_to_json(report.config)}};
  if (report.config.scenario == Scenario::LowerBound) {
    Json cells = Json::array();
    for (const auto& cell : report.lower_bounds) cells.push_back(lower_bound_report_to_json(cell));
    out["cells"] = std::move(cells);
  } else {
    Json rows = Json::array();
    for (const auto& row : report.rows) rows.push_back(row.record);
    out["rows"] = std::move(rows);
    out["aggregate"] = {{"mean_error", report.mean_error}, {"max_error", report.max_error}};
  }
  out["passed"] = report.passed;
  return out;
}

std::filesystem::path write_report(const ExperimentReport& report) {
  std::filesystem::path dir = report.config.output_directory;
  if (const char* env = std::getenv("MASSART_OUTPUT_DIR"); env && *env) dir = env;
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / report.config.csv_name, std::ios::binary);
    csv << report_csv(report);
  }
  {
    std::ofstream json(dir / report.config.json_name, std::ios::binary);
    json << report_json(report).dump(2) << '\n';
  }
  return dir;
}

}  // namespace massart
