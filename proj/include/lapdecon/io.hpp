#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lapdecon/deconv.hpp"
#include "lapdecon/dp_bayes.hpp"
#include "lapdecon/metrics.hpp"
#include "lapdecon/model.hpp"
#include "lapdecon/npmle.hpp"
#include "lapdecon/rates.hpp"

namespace lapdecon {

using nlohmann::json;

//! Shortest round-trip decimal form ("%.17g"); "nan"/"inf" for non-finite.
std::string format_double(double v);

json to_json(const GroundTruthSpec& spec);
GroundTruthSpec ground_truth_from_json(const json& j);

json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const json& j);

json to_json(const NpmleResult& r);

json to_json(const DpPrior& prior);
DpPrior prior_from_json(const json& j);

json to_json(const McmcConfig& cfg);
McmcConfig mcmc_from_json(const json& j);

json to_json(const BayesEstimates& est);

json to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

//! Reads the first column of a CSV with an optional header row.
std::vector<double> read_data_csv(const std::filesystem::path& path);

void write_csv(std::ostream& os, const Sample& s);
void write_csv(std::ostream& os, const DensityGrid& g, const std::string& value_name = "density");
void write_csv(std::ostream& os, const StepCdf& cdf);
void write_csv(std::ostream& os, const ChainTrace& trace);
void write_records_csv(std::ostream& os, const RateTable& table);
void write_slopes_csv(std::ostream& os, const RateTable& table);
void write_merging_csv(std::ostream& os, const MergingTable& table);

//! One row per report; `inputs` is a free-form label.
void write_inequality_csv(std::ostream& os, const std::vector<std::pair<std::string, InequalityReport>>& rows);
void write_bias_csv(std::ostream& os, const std::vector<std::pair<double, double>>& rows);

}  // namespace lapdecon
