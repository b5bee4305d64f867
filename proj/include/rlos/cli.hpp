#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlos/select.hpp"

namespace rlos {

/// Exit codes shared by all subcommands.
enum ExitCode : int { kExitOk = 0, kExitDataError = 1, kExitNumericalFailure = 2 };

/// Runs `rlos <subcommand> ...`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

nlohmann::json report_to_json(const SelectionReport& report);
/// Rebuilds the per-r results from a stored report and reapplies select_r.
SelectionReport report_from_json(const nlohmann::json& j);

/// (i - 0.35) / n for i = 1..n.
std::vector<double> plotting_positions(std::size_t n);

}  // namespace rlos
