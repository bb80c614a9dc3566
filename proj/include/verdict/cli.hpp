#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "verdict/config.hpp"

namespace verdict {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitTransport = 4;
inline constexpr int kExitThreshold = 5;

// Subcommand bodies. Each writes its reports under config.out, prints a
// short summary to `log`, and returns an exit code (throwing project
// errors is also allowed; run_cli maps them to codes).
int cmd_validate(const RunConfig& config, std::ostream& log);
int cmd_judge(const RunConfig& config, std::ostream& log);
int cmd_score(const RunConfig& config, std::ostream& log);
int cmd_correlate(const RunConfig& config, std::ostream& log);
int cmd_converge(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);

// Full argv-level entry point used by main() and the CLI tests.
int run_cli(const std::vector<std::string>& args, std::ostream& log,
            std::ostream& err);

}  // namespace verdict
