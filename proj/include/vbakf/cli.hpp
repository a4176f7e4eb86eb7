#pragma once

#include "vbakf/error.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vbakf::cli {

enum class Command { simulate, filter, experiment };

enum class OutputFormat { csv, csv_md };

struct CliConfig {
    Command command = Command::experiment;
    std::optional<std::string> preset;
    std::optional<std::string> config_path;
    std::optional<std::string> data_dir;  ///< `filter` only
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<std::size_t> mc_reps;
    OutputFormat format = OutputFormat::csv;
};

/// Bad command line. exit_code is 2, or 0 when help was requested (the
/// message is then the help text).
class UsageError : public Error {
public:
    UsageError(const std::string& message, int exit_code = 2) : Error(message), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

/// Arguments after the program name. Throws UsageError.
CliConfig parse_args(const std::vector<std::string>& args);

/// Runs the command. Returns 0 on success and 1 on runtime or configuration
/// failure (reported on stderr).
int execute(const CliConfig& config);

/// parse_args + execute with usage errors reported on stderr (exit 2).
int run(const std::vector<std::string>& args);

} // namespace vbakf::cli
