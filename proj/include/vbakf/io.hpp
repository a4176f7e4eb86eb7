#pragma once

// JSON configuration and CSV/markdown emission.
//
// JSON mirrors the library types field for field; unknown keys are errors.
// Matrices are arrays of rows, vectors are flat arrays.
//
// CSV numbers use the shortest decimal string that parses back to the same
// double, so re-reading a file reproduces the in-memory values exactly.
// Absent values (dropped packets, disabled baselines) are empty fields.
// Files start with one provenance comment line beginning with '#'.

#include "vbakf/experiment.hpp"
#include "vbakf/filter.hpp"
#include "vbakf/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vbakf::io {

/// Everything `filter` needs besides the data: priors and the initial belief.
struct FilterConfig {
    VbHyperParams hyper;
    GaussianBelief x0;
};

// ------------------------------------------------------------ JSON

/// Parse errors carry "source:line:col"; semantic errors carry the JSON
/// pointer of the offending value. Both throw ConfigError.
ScenarioConfig parse_scenario(std::string_view text, std::string_view source = "<input>");
ExperimentSpec parse_experiment(std::string_view text, std::string_view source = "<input>");
FilterConfig parse_filter_config(std::string_view text, std::string_view source = "<input>");

/// Canonical (sorted-key, compact) serialization. parse_x(to_json(v)) == v.
std::string to_json(const ScenarioConfig& config);
std::string to_json(const ExperimentSpec& spec);
std::string to_json(const FilterConfig& config);

/// Pretty-printed variant for files meant to be read by people.
std::string to_json_pretty(const ScenarioConfig& config);

// ------------------------------------------------------------ CSV

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

/// Inverse of format_double; throws IoError on malformed input.
double parse_double(std::string_view text);

struct Provenance {
    std::string preset;  ///< preset name, or "custom"
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;  ///< fnv1a64 of the canonical JSON
};

/// "# vbakf <version> preset=<name> seed=<seed> config=<16 hex digits>"
std::string provenance_line(const Provenance& p);

std::string series_csv(const std::vector<RunResult>& results, std::size_t d_x, std::size_t d_y, const Provenance& p);
std::string summary_csv(const SummaryTable& table, const Provenance& p);
std::string summary_markdown(const SummaryTable& table, std::string_view name, const Provenance& p);

/// One row per (k, sensor): k, sensor_id, gamma, y...; dropped packets have empty y fields.
std::string dataset_csv(const SensorDataset& dataset, const Provenance& p);
/// True states, one row per k.
std::string truth_csv(const SensorDataset& dataset, const Provenance& p);
/// Latent clean indicators z (1 = clean), one row per (k, sensor). Evaluation only.
std::string labels_csv(const SensorDataset& dataset, const Provenance& p);
/// VB-AKF output of the `filter` command, one row per k.
std::string filter_csv(const std::vector<VbPosterior>& posteriors, const Provenance& p);

struct CsvTable {
    std::vector<std::string> comments;  ///< leading '#' lines without the '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; IoError if missing.
    std::size_t column(std::string_view name) const;
};

/// Comma-separated, no quoting (none of our fields need it). IoError on
/// ragged rows.
CsvTable parse_csv(std::string_view text);

/// Rebuilds the observation set written by dataset_csv.
ObservationSet parse_dataset_csv(std::string_view text, const ScenarioConfig& config);

// ------------------------------------------------------------ files

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place, so readers never
/// see a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace vbakf::io
