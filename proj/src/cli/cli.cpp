#include "vbakf/cli.hpp"

#include "vbakf/experiment.hpp"
#include "vbakf/io.hpp"
#include "vbakf/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

#ifndef VBAKF_VERSION
#define VBAKF_VERSION "unknown"
#endif

namespace vbakf::cli {

namespace fs = std::filesystem;

namespace {

std::string valid_presets() {
    std::string out;
    for (auto name : preset_names()) out += (out.empty() ? "" : ", ") + std::string(name);
    return out;
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir + "'" + (ec ? ": " + ec.message() : ""));
    }
    return dir;
}

void write(const fs::path& path, const std::string& content) {
    io::write_file_atomic(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

int run_simulate(const CliConfig& c) {
    const std::string text = io::read_file(*c.config_path);
    const ScenarioConfig scenario = io::parse_scenario(text, *c.config_path);
    const io::Provenance p{"custom", *c.seed, fnv1a64(io::to_json(scenario))};
    const fs::path out = prepare_out_dir(c.out_dir);
    const SensorDataset dataset = generate(scenario, *c.seed);
    write(out / "scenario.json", io::to_json_pretty(scenario));
    write(out / "dataset.csv", io::dataset_csv(dataset, p));
    write(out / "truth.csv", io::truth_csv(dataset, p));
    write(out / "labels.csv", io::labels_csv(dataset, p));
    return 0;
}

int run_filter_command(const CliConfig& c) {
    const fs::path data = *c.data_dir;
    const std::string scenario_path = (data / "scenario.json").string();
    const ScenarioConfig scenario = io::parse_scenario(io::read_file(scenario_path), scenario_path);
    const ObservationSet obs = io::parse_dataset_csv(io::read_file(data / "dataset.csv"), scenario);
    const io::FilterConfig fc = io::parse_filter_config(io::read_file(*c.config_path), *c.config_path);
    const io::Provenance p{"custom", 0, fnv1a64(io::to_json(fc) + io::to_json(scenario))};
    const fs::path out = prepare_out_dir(c.out_dir);
    const std::vector<VbPosterior> posteriors = run_filter(obs, fc.hyper, fc.x0, scenario.f, scenario.h);
    write(out / "filter.csv", io::filter_csv(posteriors, p));
    return 0;
}

int run_experiment_command(const CliConfig& c) {
    ExperimentSpec spec;
    if (c.preset) {
        spec = preset(*c.preset);
    } else {
        spec = io::parse_experiment(io::read_file(*c.config_path), *c.config_path);
    }
    if (c.seed) spec.root_seed = *c.seed;
    if (c.mc_reps) spec.mc_reps = *c.mc_reps;
    spec.validate();

    const io::Provenance p{c.preset ? *c.preset : "custom", spec.root_seed, fnv1a64(io::to_json(spec))};
    const fs::path out = prepare_out_dir(c.out_dir);

    const std::vector<RunResult> results = run_experiment(spec);
    const SummaryTable summary = summarize(results);

    write(out / (spec.name + "_series.csv"),
          io::series_csv(results, spec.scenario.d_x, spec.scenario.d_y, p));
    write(out / (spec.name + "_summary.csv"), io::summary_csv(summary, p));
    if (c.format == OutputFormat::csv_md) {
        write(out / (spec.name + "_summary.md"), io::summary_markdown(summary, spec.name, p));
    }
    return 0;
}

} // namespace

CliConfig parse_args(const std::vector<std::string>& args) {
    CliConfig config;
    CLI::App app{"Variational Bayesian adaptive Kalman filter: simulation, filtering and experiments", "vbakf"};
    app.set_version_flag("--version", VBAKF_VERSION);
    app.require_subcommand(1);

    std::string preset_name;
    std::string config_path;
    std::string data_dir;
    std::uint64_t seed = 0;
    std::size_t mc_reps = 0;
    std::string format = "csv";

    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a scenario JSON");
    simulate->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--seed", seed, "Dataset seed")->required();
    simulate->add_option("--out-dir", config.out_dir, "Output directory")->required();

    CLI::App* filter = app.add_subcommand("filter", "Run VB-AKF on a dataset directory written by simulate");
    filter->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    filter->add_option("--config", config_path, "Filter JSON (hyper, x0)")->required()->check(CLI::ExistingFile);
    filter->add_option("--out-dir", config.out_dir, "Output directory")->required();

    CLI::App* experiment = app.add_subcommand("experiment", "Run a preset or custom Monte-Carlo experiment");
    CLI::Option* preset_opt = experiment->add_option("--preset", preset_name, "Preset name (" + valid_presets() + ")");
    CLI::Option* config_opt =
        experiment->add_option("--config", config_path, "Experiment JSON")->check(CLI::ExistingFile);
    preset_opt->excludes(config_opt);
    CLI::Option* seed_opt = experiment->add_option("--seed", seed, "Root seed override");
    CLI::Option* reps_opt =
        experiment->add_option("--mc-reps", mc_reps, "Replication count override")->check(CLI::PositiveNumber);
    experiment->add_option("--out-dir", config.out_dir, "Output directory")->required();
    experiment->add_option("--format", format, "csv or csv+md")->check(CLI::IsMember({"csv", "csv+md"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), 0);
    } catch (const CLI::CallForAllHelp&) {
        throw UsageError(app.help("", CLI::AppFormatMode::All), 0);
    } catch (const CLI::CallForVersion&) {
        throw UsageError(VBAKF_VERSION, 0);
    } catch (const CLI::ParseError& err) {
        throw UsageError(err.what());
    }

    if (simulate->parsed()) {
        config.command = Command::simulate;
        config.config_path = config_path;
        config.seed = seed;
    } else if (filter->parsed()) {
        config.command = Command::filter;
        config.config_path = config_path;
        config.data_dir = data_dir;
    } else {
        config.command = Command::experiment;
        if (preset_opt->count() == 0 && config_opt->count() == 0) {
            throw UsageError("experiment: one of --preset or --config is required");
        }
        if (preset_opt->count()) {
            const auto names = preset_names();
            if (std::find(names.begin(), names.end(), preset_name) == names.end()) {
                throw UsageError("--preset: unknown preset '" + preset_name + "' (valid: " + valid_presets() + ")");
            }
            config.preset = preset_name;
        } else {
            config.config_path = config_path;
        }
        if (seed_opt->count()) config.seed = seed;
        if (reps_opt->count()) config.mc_reps = mc_reps;
        config.format = format == "csv+md" ? OutputFormat::csv_md : OutputFormat::csv;
    }
    return config;
}

int execute(const CliConfig& config) {
    try {
        switch (config.command) {
        case Command::simulate:
            return run_simulate(config);
        case Command::filter:
            return run_filter_command(config);
        case Command::experiment:
            return run_experiment_command(config);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
    }
    return 1;
}

int run(const std::vector<std::string>& args) {
    CliConfig config;
    try {
        config = parse_args(args);
    } catch (const UsageError& err) {
        (err.exit_code() == 0 ? std::cout : std::cerr) << err.what() << "\n";
        if (err.exit_code() != 0) std::cerr << "run with --help for usage\n";
        return err.exit_code();
    }
    return execute(config);
}

} // namespace vbakf::cli
