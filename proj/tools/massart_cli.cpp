#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "massart/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kConfigError = 2;

int run(const std::string& config_path) {
  const massart::ExperimentConfig config = massart::load_config(config_path);
  const massart::ExperimentReport report = massart::run_experiment(config);
  const auto dir = massart::write_report(report);
  std::cout << massart::report_csv(report);
  std::cout << "wrote " << (dir / config.csv_name).string() << " and "
            << (dir / config.json_name).string() << '\n';
  return report.passed ? kOk : kViolation;
}

int verify(const std::string& phi, double eta, double gamma, const std::string& mode) {
  const massart::LowerBoundReport report =
      massart::verify_lower_bound(phi, eta, gamma, massart::parse_verify_mode(mode));
  massart::Json out = massart::lower_bound_report_to_json(report);
  if (report.passed) out.erase("instance");
  std::cout << out.dump(2) << '\n';
  return report.passed ? kOk : kViolation;
}

int emit(const std::string& phi_id, double eta, double gamma, const std::string& which,
         const std::string& output) {
  const auto phi = massart::SurrogateLoss::from_id(phi_id);
  massart::LowerBoundInstance instance = [&] {
    if (which == "case1") return massart::build_case1(phi, eta, gamma);
    if (which == "case2") return massart::build_case2(phi, eta, gamma);
    if (which == "modified") return massart::build_case2_modified(phi, eta, gamma);
    if (which == "auto") {
      return massart::case1_point(phi, eta) ? massart::build_case1(phi, eta, gamma)
                                            : massart::build_case2(phi, eta, gamma);
    }
    throw massart::ConfigError("unknown case: " + which);
  }();
  const std::string text = massart::instance_to_json(instance).dump(2) + "\n";
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw massart::ConfigError("cannot write " + output);
    out << text;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Halfspace learning under Massart noise: experiments and lower-bound checks"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("config", config_path, "Path to the experiment config")->required();

  std::string phi = "hinge";
  std::string mode = "surrogate";
  std::string which = "auto";
  std::string output;
  double eta = 0.3;
  double gamma = 0.05;
  auto* verify_cmd = app.add_subcommand("verify-lb", "Verify a lower-bound construction");
  verify_cmd->add_option("--phi", phi, "hinge | logistic | exponential | squared_hinge")->required();
  verify_cmd->add_option("--eta", eta, "Massart noise bound")->required();
  verify_cmd->add_option("--gamma", gamma, "Margin")->required();
  verify_cmd->add_option("--mode", mode, "surrogate | surrogate_plus_threshold");

  auto* emit_cmd = app.add_subcommand("emit-instance", "Write a lower-bound instance as JSON");
  emit_cmd->add_option("--phi", phi, "Surrogate loss id")->required();
  emit_cmd->add_option("--eta", eta, "Massart noise bound")->required();
  emit_cmd->add_option("--gamma", gamma, "Margin")->required();
  emit_cmd->add_option("--case", which, "auto | case1 | case2 | modified");
  emit_cmd->add_option("--output", output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return run(config_path);
    if (*verify_cmd) return verify(phi, eta, gamma, mode);
    if (*emit_cmd) return emit(phi, eta, gamma, which, output);
  } catch (const massart::CaseInapplicable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kViolation;
  }
  return kConfigError;
}
