#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plearn/bnp.hpp"
#include "plearn/bounds.hpp"
#include "plearn/model.hpp"
#include "plearn/obsfn.hpp"
#include "plearn/simgen.hpp"
#include "plearn/transest.hpp"

namespace plearn {

using Json = nlohmann::json;

/// Malformed document. `field` is a JSON path ("transition[1][0]") or "line N" for CSV.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Well-formed document describing an invalid object.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& path);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& path);

Json model_to_json(const PomdpModel& model);
/// Rows that miss 1 by at most the probability tolerance are renormalized;
/// anything worse is reported as a ValidationError.
PomdpModel model_from_json(const Json& j);
std::string serialize_model(const PomdpModel& model);
PomdpModel deserialize_model(const std::string& text);

Json emission_to_json(const GaussianEmission& e);
GaussianEmission emission_from_json(const Json& j, const std::string& path);

/// Header seq_id,t,y1..yn[,action][,latent]; the action on row t is the one
/// taken between t and t+1 (empty on the last row).
std::string series_to_csv(const Dataset& data);
Dataset series_from_csv(const std::string& text);

struct LabelTable {
  std::vector<std::string> ids;
  std::vector<LabeledSequence> sequences;
  bool has_actions = false;
};

/// Header seq_id,t,label[,action].
std::string labels_to_csv(const LabelTable& table);
LabelTable labels_from_csv(const std::string& text);

Json policy_to_json(const PolicyTree& policy, const PomdpModel& model);
PolicyTree policy_from_json(const Json& j, const PomdpModel& model);

Json posterior_to_json(const FitResult& fit, const Dataset& data);
Json sample_to_json(const PosteriorSample& sample, const Dataset& data);

Json observation_matrix_to_json(const ObservationMatrix& m);
ObservationMatrix observation_matrix_from_json(const Json& j);

Json scenario_to_json(const GroundTruthScenario& s);
GroundTruthScenario scenario_from_json(const Json& j);

Json bound_report_to_json(const BoundReport& r);

Json hyperparams_to_json(const BpHmmHyperparams& h);

}  // namespace plearn
