#pragma once

#include <json.hpp>

#include <functional>
#include <ostream>
#include <string>

namespace sharecap::cli {

// Stable exit codes: 0 success, 2 input error, 3 unstable load,
// 4 internal simulation failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitUnstable = 3;
inline constexpr int kExitSimFailure = 4;

nlohmann::json load_json_file(const std::string& path);

int cmd_predict(const nlohmann::json& config, const std::string& out_dir, std::ostream& diag);
int cmd_simulate(const nlohmann::json& config, const std::string& out_dir, std::ostream& diag);
int cmd_validate(const nlohmann::json& sweep, const std::string& out_dir, std::ostream& diag);
int cmd_plan(const std::string& areas_path, const nlohmann::json& options,
             const std::string& out_dir, std::ostream& diag);
int cmd_infer_rho(const std::string& samples_path, const nlohmann::json& options,
                  const std::string& out_dir, std::ostream& diag);

// Re-runs the command recorded in a manifest; outputs are byte-identical.
int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& diag);

// Runs a command body, mapping exceptions onto the exit-code contract.
int guarded(const std::function<int()>& body, std::ostream& diag);

} // namespace sharecap::cli
