// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "massart/experiment.hpp"
#include "massart/loss.hpp"
#include "massart/optim.hpp"
#include "massart/region.hpp"
#include "oracles.hpp"

using namespace massart;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kConfigDir = MASSART_CONFIG_DIR;
const fs::path kScratch = fs::temp_directory_path() / "massart_acceptance";

// Loads a shipped config and points its output into the scratch directory.
ExperimentConfig shipped(const std::string& name) {
  ExperimentConfig config = load_config(kConfigDir / (name + ".json"));
  config.output_directory = kScratch / name;
  return config;
}

// Learner reports produced by criteria 1-4, reused by the determinism check.
std::map<std::string, std::pair<std::string, std::string>> first_outputs;

ExperimentReport run_and_keep(const std::string& name) {
  const ExperimentConfig config = shipped(name);
  ExperimentReport report = run_experiment(config);
  const fs::path dir = write_report(report);
  first_outputs[name] = {slurp(dir / config.csv_name), slurp(dir / config.json_name)};
  return report;
}

struct RowSummary {
  double max_error = 0;
  double max_seconds = 0;
  bool all_ok = true;
};

RowSummary summarize(const ExperimentReport& report) {
  RowSummary s;
  for (const auto& row : report.rows) {
    s.max_error = std::max(s.max_error, row.error);
    s.max_seconds = std::max(s.max_seconds, row.wall_time);
    s.all_ok = s.all_ok && row.status == "ok";
  }
  return s;
}

Outcome criterion1() {
  const auto report = run_and_keep("margin_constant");
  const auto s = summarize(report);
  const bool ok = s.all_ok && report.rows.size() == 5 && s.max_error <= 0.17 && s.max_seconds < 120;
  return {ok, "max error " + fmt(s.max_error) + " (bound 0.17), slowest seed " + fmt(s.max_seconds) + " s"};
}

Outcome criterion2() {
  const auto band = run_and_keep("margin_band");
  const auto s = summarize(band);
  const auto low = run_and_keep("margin_band_low_opt");
  const auto t = summarize(low);
  const double eta = low.config.eta;
  const bool ok = s.all_ok && s.max_error <= 0.17 && t.all_ok && t.max_error < eta;
  return {ok, "band max error " + fmt(s.max_error) + " (bound 0.17); OPT 0.02 run error " +
                  fmt(t.max_error) + " (< eta " + fmt(eta) + ")"};
}

Outcome criterion3() {
  const auto report = run_and_keep("general_bits");
  const auto s = summarize(report);
  double min_kept = 1.0;
  for (const auto& row : report.rows) {
    for (const auto& round : row.record.at("learner").at("rounds")) {
      min_kept = std::min(min_kept, round.at("kept_fraction").get<double>());
    }
  }
  const bool ok = s.all_ok && s.max_error <= 0.27 && min_kept >= 0.5 && s.max_seconds < 300;
  return {ok, "max error " + fmt(s.max_error) + " (bound 0.27), min kept fraction " + fmt(min_kept) +
                  ", slowest seed " + fmt(s.max_seconds) + " s"};
}

Outcome criterion4() {
  const auto report = run_and_keep("rcn");
  const auto s = summarize(report);
  bool proper = true;
  for (const auto& row : report.rows) {
    const Vector w = vector_from_json(row.record.at("learner").at("weights"));
    proper = proper && w.size() == report.config.dimension && std::abs(w.norm() - 1) < 1e-9;
  }
  const bool ok = s.all_ok && proper && s.max_error <= 0.32;
  return {ok, "max error " + fmt(s.max_error) + " (bound 0.32), unit-norm halfspaces " +
                  (proper ? "yes" : "no")};
}

// Random finite Massart distribution with clean labels sign(<w*, x>).
FiniteDistribution random_massart(int d, int n, double eta, double gamma, const Vector& w_star,
                                  Rng& rng) {
  std::vector<WeightedPoint> pts;
  double total = 0;
  while (static_cast<int>(pts.size()) < n) {
    const Vector x = oracles::ball_point(d, rng);
    if (std::abs(w_star.dot(x)) < gamma) continue;
    const double m = 0.05 + rng.uniform();
    total += m;
    pts.push_back({x, m, {sign_label(w_star.dot(x)), eta * rng.uniform()}});
  }
  for (auto& p : pts) p.mass /= total;
  return FiniteDistribution(std::move(pts));
}

Outcome criterion5() {
  Rng rng(5005);
  int trials = 0, failures = 0, draws = 0;
  while (trials < 1000) {
    ++draws;
    const int d = 1 + static_cast<int>(rng.below(5));
    const Vector w_star = d == 1 ? Vector::Ones(1) : Vector(oracles::ball_point(d, rng).normalized());
    const double eta = 0.49 * rng.uniform();
    const auto dist = random_massart(d, 1 + static_cast<int>(rng.below(25)), eta, 0.0, w_star, rng);
    const double lambda = eta + (0.5 - eta) * 0.999 * rng.uniform();
    const double pull = rng.uniform();
    const double scale = rng.uniform();
    const Vector w = scale * (pull * w_star + oracles::ball_point(d, rng));
    if (w.norm() > 1) continue;
    const double loss = oracles::enumerated_loss(lambda, w, dist);
    if (!(loss < 0)) continue;
    ++trials;
    try {
      const auto wit = structural_oracle(LeakyReluParams(lambda), w, dist);
      double mass = 0, err = 0;
      for (const auto& p : dist.points()) {
        const double s = w.dot(p.x);
        if (std::abs(s) < wit.threshold) continue;
        mass += p.mass;
        err += p.mass * (sign_label(s) == p.law.label ? p.law.flip_or_zero() : 1 - p.law.flip_or_zero());
      }
      const bool first = mass > 0 && mass >= -loss / (2 * lambda) - 1e-12;
      const bool second = mass > 0 && err / mass <= lambda + loss / 2 + 1e-12;
      failures += !(first && second);
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {failures == 0, std::to_string(trials) + " trials (" + std::to_string(draws) +
                             " draws), " + std::to_string(failures) + " failures"};
}

Outcome criterion6() {
  Rng rng(6006);
  double worst_gap = 0, worst_lemma = -1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(5));
    const Vector w_star = d == 1 ? Vector::Ones(1) : Vector(oracles::ball_point(d, rng).normalized());
    const double eta = 0.49 * rng.uniform();
    const double gamma = 0.3 * rng.uniform();
    const auto dist = random_massart(d, 1 + static_cast<int>(rng.below(25)), eta, gamma, w_star, rng);
    const LeakyReluParams params(eta + (0.5 - eta) * 0.999 * rng.uniform());
    const Vector w = oracles::ball_point(d, rng);
    worst_gap = std::max(worst_gap, std::abs(closed_form_loss(params, w, dist) -
                                             oracles::enumerated_loss(params.lambda(), w, dist)));
    double opt = 0;
    for (const auto& p : dist.points()) opt += p.mass * p.law.flip_or_zero();
    const double at_star = closed_form_loss(params, w_star, dist);
    worst_lemma = std::max(worst_lemma, at_star + gamma * (params.lambda() - opt));
  }
  const bool ok = worst_gap <= 1e-12 && worst_lemma <= 1e-12;
  return {ok, "max |closed form - enumeration| " + fmt(worst_gap) +
                  ", max L(w*) + gamma (lambda - OPT) " + fmt(worst_lemma)};
}

Outcome criterion7() {
  const ExperimentConfig config = shipped("lower_bound");
  int cells = 0, failures = 0;
  double slowest = 0, tightest = 1e300;
  for (const auto& phi : config.lower_bound.phis) {
    for (double eta : config.lower_bound.etas) {
      for (double gamma : config.lower_bound.gammas) {
        const auto start = Clock::now();
        const auto r = verify_lower_bound(phi, eta, gamma, VerifyMode::Surrogate);
        const double elapsed = seconds_since(start);
        slowest = std::max(slowest, elapsed);
        const double bound = std::min(eta / (8 * gamma), 0.5);
        const double exact = oracles::enumerated_error(r.w_hat, r.instance.distribution);
        tightest = std::min(tightest, exact - bound);
        ++cells;
        failures += !(r.passed && exact >= bound - 1e-6 && elapsed < 30);
      }
    }
  }
  return {failures == 0 && cells == 16, std::to_string(cells) + " cells, " + std::to_string(failures) +
                                            " failures, min (error - bound) " + fmt(tightest) +
                                            ", slowest cell " + fmt(slowest) + " s"};
}

Outcome criterion8() {
  const double gamma = 0.05, eta = 0.3;
  const double bound = (1 - 8 * gamma * std::sqrt(3.0) / 3) * eta / (4 * (1 - eta));
  int failures = 0;
  double lowest = 1e300;
  for (const auto& phi : surrogate_battery()) {
    const auto r = verify_lower_bound(phi.id(), eta, gamma, VerifyMode::SurrogatePlusThreshold);
    // Independent scan of every threshold over the support.
    const auto& dist = r.instance.distribution;
    double best = 1e300;
    for (const auto& cut : dist.points()) {
      const double t = std::abs(r.w_hat.dot(cut.x));
      double mass = 0, err = 0;
      for (const auto& p : dist.points()) {
        const double s = r.w_hat.dot(p.x);
        if (std::abs(s) < t || p.mass <= 0) continue;
        mass += p.mass;
        err += p.mass * (sign_label(s) == p.law.label ? p.law.flip_or_zero() : 1 - p.law.flip_or_zero());
      }
      if (mass > 0) best = std::min(best, err / mass);
    }
    lowest = std::min(lowest, best);
    failures += !(r.passed && r.instance.case_tag == LowerBoundCase::ModifiedCaseII && best >= bound - 1e-6);
  }
  return {failures == 0, "min best-threshold error " + fmt(lowest) + " (bound " + fmt(bound) + "), " +
                             std::to_string(failures) + " failures"};
}

Outcome criterion9() {
  Rng rng(9009);
  const std::size_t iterations = 10000;
  double worst = -1e300;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vector> slopes;
    std::vector<double> offsets;
    const int pieces = 3 + static_cast<int>(rng.below(6));
    for (int k = 0; k < pieces; ++k) {
      slopes.push_back(oracles::ball_point(2, rng));
      offsets.push_back(rng.uniform(-0.5, 0.5));
    }
    auto value = [&](const Vector& w) {
      double best = -1e300;
      for (int k = 0; k < pieces; ++k) best = std::max(best, slopes[k].dot(w) + offsets[k]);
      return best;
    };
    auto subgradient = [&](const Vector& w, Rng&, Vector& out) {
      int arg = 0;
      for (int k = 1; k < pieces; ++k) {
        if (slopes[k].dot(w) + offsets[k] > slopes[arg].dot(w) + offsets[arg]) arg = k;
      }
      out = slopes[arg];
    };
    const auto res = projected_sgd(subgradient, 2, {iterations, std::nullopt, 1, 1});
    worst = std::max(worst, value(res.averaged) - oracles::grid_minimum(value).value);
  }
  const double bound = 2 / std::sqrt(static_cast<double>(iterations));
  return {worst <= bound, "max L(w_bar) - grid minimum " + fmt(worst) + " (bound " + fmt(bound) + ")"};
}

Outcome criterion10() {
  int compared = 0, mismatches = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".json") continue;
    const std::string name = entry.path().stem().string();
    const ExperimentConfig config = shipped(name);
    std::pair<std::string, std::string> first;
    if (auto it = first_outputs.find(name); it != first_outputs.end()) {
      first = it->second;
    } else {
      const fs::path dir = write_report(run_experiment(config));
      first = {slurp(dir / config.csv_name), slurp(dir / config.json_name)};
    }
    const fs::path dir = write_report(run_experiment(config));
    const bool same = first.first == slurp(dir / config.csv_name) &&
                      first.second == slurp(dir / config.json_name) && !first.first.empty();
    ++compared;
    if (!same) {
      ++mismatches;
      differing += " " + name;
    }
  }
  return {mismatches == 0 && compared > 0,
          std::to_string(compared) + " configs rerun, " + std::to_string(mismatches) + " differ" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"margin Massart guarantee", criterion1},
      {"adversarial noise policy", criterion2},
      {"general-case guarantee", criterion3},
      {"RCN proper learner", criterion4},
      {"structural lemma suite", criterion5},
      {"closed-form loss and w* lemma", criterion6},
      {"surrogate lower bound", criterion7},
      {"thresholding lower bound", criterion8},
      {"SGD regret", criterion9},
      {"determinism", criterion10},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  // Keep outputs away from any MASSART_OUTPUT_DIR set by the caller.
  unsetenv("MASSART_OUTPUT_DIR");
  fs::remove_all(kScratch);
  fs::create_directories(kScratch);

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.passed;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", outcome.passed ? "PASS" : "FAIL", number,
                criteria[i].first.c_str(), outcome.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
