#pragma once

#include <string>

#include <json.hpp>

#include "crcs/certify.hpp"
#include "crcs/estimators.hpp"
#include "crcs/model.hpp"
#include "crcs/simulate.hpp"
#include "crcs/truth.hpp"

namespace crcs {

// Shortest 17-significant-digit form; round-trips any double.
std::string fmt17(double x);

// Dataset CSV: header "time,status", one observation per row.
std::string dataset_to_csv(const Dataset& d);
Dataset dataset_from_csv_text(const std::string& text, int K);
Dataset read_dataset_csv(const std::string& path, int K);
void write_dataset_csv(const std::string& path, const Dataset& d);

nlohmann::json step_fn_to_json(const StepFn& f);
StepFn step_fn_from_json(const nlohmann::json& j);

nlohmann::json system_to_json(const SubDistSystem& s);
// Rebuilds with an unbounded sum tolerance so naive outputs reload as-is.
SubDistSystem system_from_json(const nlohmann::json& j);

nlohmann::json fenchel_to_json(const FenchelReport& r);
nlohmann::json naive_to_json(const NaiveResult& r, int K, int n);
nlohmann::json mle_to_json(const MleResult& r, int K, int n);

nlohmann::json obs_dist_to_json(const ObsDist& g);
ObsDist obs_dist_from_json(const nlohmann::json& j);
nlohmann::json cause_shape_to_json(const CauseShape& s);
CauseShape cause_shape_from_json(const nlohmann::json& j);
nlohmann::json truth_model_to_json(const TruthModel& tm);
TruthModel truth_model_from_json(const nlohmann::json& j);

RateConfig rate_config_from_json(const nlohmann::json& j);
nlohmann::json rate_table_to_json(const RateTable& t);
std::string rate_table_to_csv(const RateTable& t);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace crcs
