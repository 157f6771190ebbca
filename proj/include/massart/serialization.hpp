#pragma once

#include <json.hpp>

#include "massart/core.hpp"
#include "massart/learner.hpp"
#include "massart/lower_bound.hpp"
#include "massart/synth.hpp"

namespace massart {

using Json = nlohmann::json;

inline constexpr const char* kInstanceSchema = "massart/lower-bound-instance/1";
inline constexpr const char* kDecisionListSchema = "massart/decision-list/1";

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);

// {"points": [{"x": [...], "mass": m, "label": y, "flip": f | null}, ...]}
Json distribution_to_json(const FiniteDistribution& dist);
FiniteDistribution distribution_from_json(const Json& j);

Json instance_to_json(const LowerBoundInstance& instance);
LowerBoundInstance instance_from_json(const Json& j);

// {"schema", "default_label", "stages": [{"direction", "threshold", "transform"?, "ellipsoid"?, "reverted_direction"}]}
Json decision_list_to_json(const DecisionList& list);
DecisionList decision_list_from_json(const Json& j);

Json diagnostics_to_json(const RoundDiagnostics& diag);
Json learner_result_to_json(const LearnerResult& result);
Json lower_bound_report_to_json(const LowerBoundReport& report);

}  // namespace massart
