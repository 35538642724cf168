#pragma once

// The subcommands of the chemo_limit executable, callable in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace chemo::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,         ///< check ran but did not pass, or an unexpected error
  kConfigError = 2,     ///< unreadable or invalid configuration
  kFitRejected = 3,     ///< too few usable sweep points for a rate fit
  kTrajectoryFailed = 4,
};

struct CommandOptions {
  std::string config_path;  ///< may be empty for semigroup-check
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

/// Thread count from --threads, else CHEMO_LIMIT_THREADS, else `fallback`.
unsigned resolve_threads(const std::optional<unsigned>& flag, unsigned fallback);

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_pes_rates(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_ids_rates(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_energy_check(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_semigroup_check(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace chemo::cli
