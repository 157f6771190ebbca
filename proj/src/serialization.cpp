#include "massart/serialization.hpp"

#include <stdexcept>

namespace massart {

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw std::invalid_argument("ragged matrix rows");
    m.row(r) = row.transpose();
  }
  return m;
}

Json distribution_to_json(const FiniteDistribution& dist) {
  Json points = Json::array();
  for (const auto& p : dist.points()) {
    Json item = {{"x", vector_to_json(p.x)}, {"mass", p.mass}, {"label", p.law.label}};
    item["flip"] = p.law.flip_probability ? Json(*p.law.flip_probability) : Json(nullptr);
    points.push_back(std::move(item));
  }
  return {{"points", std::move(points)}};
}

FiniteDistribution distribution_from_json(const Json& j) {
  std::vector<WeightedPoint> points;
  for (const auto& item : j.at("points")) {
    WeightedPoint p;
    p.x = vector_from_json(item.at("x"));
    p.mass = item.at("mass").get<double>();
    p.law.label = item.at("label").get<int>();
    if (item.contains("flip") && !item.at("flip").is_null()) {
      p.law.flip_probability = item.at("flip").get<double>();
    }
    points.push_back(std::move(p));
  }
  return FiniteDistribution(std::move(points));
}

namespace {

LowerBoundCase parse_case(const std::string& name) {
  if (name == "CaseI") return LowerBoundCase::CaseI;
  if (name == "CaseII") return LowerBoundCase::CaseII;
  if (name == "ModifiedCaseII") return LowerBoundCase::ModifiedCaseII;
  throw std::invalid_argument("unknown construction case: " + name);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json instance_to_json(const LowerBoundInstance& instance) {
  Json out = distribution_to_json(instance.distribution);
  out["schema"] = kInstanceSchema;
  out["phi"] = instance.phi_id;
  out["case"] = case_name(instance.case_tag);
  out["gamma"] = instance.gamma;
  out["eta"] = instance.eta;
  out["predicted_error_bound"] = instance.predicted_error_bound;
  out["witness"] = vector_to_json(instance.witness);
  out["p"] = instance.p;
  out["z"] = optional_number(instance.z);
  out["alpha"] = optional_number(instance.alpha);
  return out;
}

LowerBoundInstance instance_from_json(const Json& j) {
  if (j.value("schema", std::string()) != kInstanceSchema) {
    throw std::invalid_argument("lower-bound instance: unsupported schema");
  }
  auto optional = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  LowerBoundInstance instance{distribution_from_json(j),
                              j.at("phi").get<std::string>(),
                              j.at("predicted_error_bound").get<double>(),
                              parse_case(j.at("case").get<std::string>()),
                              j.at("gamma").get<double>(),
                              j.at("eta").get<double>(),
                              vector_from_json(j.at("witness")),
                              j.at("p").get<double>(),
                              optional("z"),
                              optional("alpha")};
  check_instance(instance);
  return instance;
}

Json decision_list_to_json(const DecisionList& list) {
  Json stages = Json::array();
  for (const auto& stage : list.stages()) {
    Json item = {{"direction", vector_to_json(stage.direction())},
                 {"threshold", stage.threshold()},
                 {"reverted_direction", vector_to_json(stage.reverted_direction())}};
    if (stage.transform()) item["transform"] = matrix_to_json(*stage.transform());
    if (stage.region()) {
      item["ellipsoid"] = {{"shape", matrix_to_json(stage.region()->shape)},
                           {"radius", stage.region()->radius}};
    }
    stages.push_back(std::move(item));
  }
  return {{"schema", kDecisionListSchema}, {"default_label", list.default_label()}, {"stages", stages}};
}

DecisionList decision_list_from_json(const Json& j) {
  if (j.value("schema", std::string()) != kDecisionListSchema) {
    throw std::invalid_argument("decision list: unsupported schema");
  }
  DecisionList list(j.at("default_label").get<int>());
  for (const auto& item : j.at("stages")) {
    std::optional<Matrix> transform;
    std::optional<Ellipsoid> region;
    if (item.contains("transform")) transform = matrix_from_json(item.at("transform"));
    if (item.contains("ellipsoid")) {
      region = Ellipsoid{matrix_from_json(item.at("ellipsoid").at("shape")),
                         item.at("ellipsoid").at("radius").get<double>()};
    }
    list.append(Stage(vector_from_json(item.at("direction")), item.at("threshold").get<double>(),
                      std::move(transform), std::move(region)));
  }
  return list;
}

Json diagnostics_to_json(const RoundDiagnostics& diag) {
  Json out = {{"round", diag.round},
              {"sgd_loss", diag.sgd_loss},
              {"mass_floor", diag.mass_floor},
              {"threshold", diag.threshold},
              {"region_mass", diag.region_mass},
              {"conditional_error", diag.conditional_error},
              {"unclassified_before", diag.unclassified_before},
              {"unclassified_after", diag.unclassified_after},
              {"sgd_attempts", diag.sgd_attempts},
              {"rejected_draws", diag.rejected_draws}};
  if (diag.kept_fraction) out["kept_fraction"] = *diag.kept_fraction;
  if (diag.gamma_eff) out["gamma_eff"] = *diag.gamma_eff;
  return out;
}

Json learner_result_to_json(const LearnerResult& result) {
  Json rounds = Json::array();
  for (const auto& diag : result.rounds) rounds.push_back(diagnostics_to_json(diag));
  return {{"classifier", decision_list_to_json(result.list)},
          {"rounds", std::move(rounds)},
          {"unclassified", result.unclassified},
          {"aborted", result.aborted},
          {"round_cap_reached", result.round_cap_reached},
          {"reason", result.reason}};
}

Json lower_bound_report_to_json(const LowerBoundReport& report) {
  return {{"phi", report.phi_id},
          {"eta", report.eta},
          {"gamma", report.gamma},
          {"mode", verify_mode_name(report.mode)},
          {"case", case_name(report.instance.case_tag)},
          {"case1_predicate", report.case1_predicate},
          {"case1_certified", report.case1_certified},
          {"w_hat", vector_to_json(report.w_hat)},
          {"objective", report.objective},
          {"stationarity", report.stationarity},
          {"sign_error", report.sign_error},
          {"measured_error", report.measured_error},
          {"predicted_error_bound", report.predicted_error_bound},
          {"theorem_bound", report.theorem_bound},
          {"passed", report.passed},
          {"instance", instance_to_json(report.instance)}};
}

}  // namespace massart
