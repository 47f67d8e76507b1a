// JSON documents for problems, reports and experiment configs, and the CSV
// run table.
//
// CSV columns, in order: N, r, seed, objective, nominal, por_percent,
// iterations, wall_time_s, status.
#pragma once

#include "arpdps/lotsizing.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace arpdps::io {

using Json = nlohmann::json;

/// {"dim": d, "terms": [{"exponents": [...], "coeff": c}, ...]}
Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j);

Json to_json(const ArpProblem& p);
ArpProblem arp_from_json(const Json& j);

/// {objective, iterations, wall_time_s, status, ..., residual_history?}
Json to_json(const SolveReport& r);

Json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentConfig load_experiment_config(const std::string& path);

Json to_json(const RunRecord& r);

void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
/// Per (N, r): count, converged count, mean/std of objective, PoR and iterations, mean wall time.
Json aggregate(const std::vector<RunRecord>& records);

/// Writes `path` (CSV) and the aggregate next to it with a .json extension.
void write_outputs(const std::string& path, const ExperimentConfig& cfg, const std::vector<RunRecord>& records);

}  // namespace arpdps::io
