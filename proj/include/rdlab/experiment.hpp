#pragma once
/// Experiment orchestration behind the command-line tool: strict JSON config
/// parsing with per-field error paths, per-subcommand defaults, execution of
/// the underlying solvers, and CSV / JSON / SVG emission with byte-stable
/// formatting.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rdlab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Command-line flags that override config fields.
struct Overrides {
    std::optional<std::string> out_dir;        ///< --out, overrides output.dir
    std::optional<std::string> format;         ///< --format, overrides output.format
    std::optional<std::uint64_t> seed;         ///< --seed, overrides the perturbed IC seed
};

/// Process-level result of one subcommand: 0 ok, 2 config error,
/// 3 numerical failure. message is a one-line human summary.
struct Outcome {
    int exit_code = 0;
    std::string message;
};

/// Subcommand names accepted by run_command, in display order.
[[nodiscard]] const std::vector<std::string>& command_names();

/// Parses and resolves raw_config for the given subcommand, runs it, and
/// writes the output files (CSV always, result.json always, SVG unless
/// disabled; the payload arrays land in result.json when format is "json").
/// Config problems produce exit code 2 before any execution; numerical
/// failures produce 3 with whatever partial outputs exist.
[[nodiscard]] Outcome run_command(const std::string& command,
                                  const nlohmann::ordered_json& raw_config,
                                  const Overrides& overrides);

}  // namespace rdlab::cli
