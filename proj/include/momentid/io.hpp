#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "momentid/detector.hpp"
#include "momentid/errors.hpp"
#include "momentid/estimators.hpp"
#include "momentid/model.hpp"

namespace momentid {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Dataset CSV: header `env,t,y`, env in {1, 2}, one sample per row.
EnvPairDataset read_dataset_csv(std::istream& in);
EnvPairDataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const EnvPairDataset& data);

// Scenario TOML:
//   change = "gamma"
//   [env1]
//   alpha = 0.5
//   beta = 0.65
//   gamma = 0.85
//   noise_u = { family = "exponential", params = [1.0] }
//   noise_t = { family = "exponential", params = [1.0] }
//   noise_y = { family = "exponential", params = [1.0], scale = 1.0 }
//   [env2]
//   gamma = 2.05
// Keys missing from [env2] are copied from [env1]. The result is checked
// against `change`; violations throw InvalidArgument.
ScenarioSpec parse_scenario_toml(std::string_view text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string scenario_to_toml(const ScenarioSpec& scenario);

// JSON object with keys method, beta_hat or candidates, order_found, branch,
// detected_source (when set) and diagnostics.
std::string report_json(const EstimateReport& report);
// {"source": ..., "evidence": {"ks_T", "ks_Y", "q1", "q2", "se_q1", "se_q2", ...}}
std::string verdict_json(const ChangeVerdict& verdict);
// {"error": {"code": ..., "message": ...}}
std::string error_json(ErrorCode code, std::string_view message);

}  // namespace momentid
