#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prevcorr/aux_model.hpp"
#include "prevcorr/datagen.hpp"
#include "prevcorr/losses.hpp"
#include "prevcorr/metrics.hpp"
#include "prevcorr/model.hpp"
#include "prevcorr/predict.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

using json = nlohmann::json;

// ---- dataset CSV: header f0..f{d-1},y; full-precision decimals ----

void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// generator sidecar next to a dataset
void write_dataset_sidecar(const json& generator_spec, std::uint64_t seed,
                           const std::string& dataset_path);

// ---- trained-model checkpoint (JSON) ----

struct Standardization {
  Vec mean, sd;
};

struct Checkpoint {
  ModelSpec model;
  Vec w;
  bool has_aux = false;
  AuxSpec aux_spec;
  AuxParams aux;
  LossConfig loss;
  std::uint64_t seed = 0;
  std::optional<Standardization> standardization;
  std::vector<EpochLog> training_log;

  // log-marginal vector for prediction rules: the auxiliary model's
  // output at the trained parameters
  Vec log_marginal() const;
};

json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const json& j);
void write_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// ---- model / loss / policy (de)serialization, strict on unknown keys ----

json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j);
json loss_config_to_json(const LossConfig& cfg);
LossConfig loss_config_from_json(const json& j);
json minibatch_policy_to_json(const MinibatchPolicy& p);
MinibatchPolicy minibatch_policy_from_json(const json& j);
json aux_spec_to_json(const AuxSpec& spec);
AuxSpec aux_spec_from_json(const json& j);
json population_spec_to_json(const PopulationSpec& pop);
PopulationSpec population_spec_from_json(const json& j);

// throws std::invalid_argument when j holds a key outside `allowed`
void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where);

// ---- results ----

// per-sample probabilities plus the chosen action
void write_predictions_csv(const Mat& probs, const std::vector<int>& actions,
                           const std::string& path);

// threshold,fpr,tpr,informedness,markedness rows
void write_curves_csv(const std::vector<CurvePoint>& curve,
                      const std::string& path);

// scalars (NaN serialized as null) plus curve summaries
json metrics_report_json(const SummaryStats& stats, const RiskReport& nell,
                         double holdout_risk_value, double holdout_ll_value,
                         double auc);

json dirichlet_state_to_json(const DirichletState& st);

void write_json(const json& j, const std::string& path);
json read_json(const std::string& path);

// JSON-safe scalar: NaN and infinities map to null
json json_number(double v);

}  // namespace prevcorr
