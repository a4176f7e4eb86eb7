#pragma once

#include "vbakf/filter.hpp"
#include "vbakf/simulator.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vbakf {

struct BaselineFlags {
    bool oracle = true;
    bool static_kf = true;

    bool operator==(const BaselineFlags&) const = default;
};

/// A named scalar parameter swept over a grid. Recognised parameters:
/// "n_sensors", "q_true" (every segment, times I), "r_true" (every segment,
/// times I) and "e" (scenario and filter, times I).
struct Sweep {
    std::string parameter;
    std::vector<double> values;

    bool operator==(const Sweep&) const = default;
};

struct ExperimentSpec {
    std::string name;
    ScenarioConfig scenario;
    VbHyperParams hyper;
    GaussianBelief x0;
    std::size_t mc_reps = 1;
    std::uint64_t root_seed = 0;
    BaselineFlags baselines;
    Matrix static_q;  ///< nominal Q for the static Kalman baseline
    Matrix static_r;  ///< nominal R for the static Kalman baseline
    std::optional<Sweep> sweep;

    /// Throws ConfigError.
    void validate() const;
    std::size_t sweep_points() const { return sweep ? sweep->values.size() : 1; }
};

struct StepRecord {
    std::size_t k = 0;
    Vector x_true;
    Vector xhat_vb;
    Matrix p_vb;
    std::optional<Vector> xhat_oracle;
    std::optional<Vector> xhat_static;
    Matrix eq_plugin;  ///< E[Q] plug-in, V_k / (nu_k - d - 1)
    Matrix er_plugin;  ///< E[R] plug-in, U_k / (u_k - d - 1)
    double dropout_est = 0.0;
    double corruption_est = 0.0;
    double dropout_true = 0.0;
    double corruption_true = 0.0;
};

struct RunResult {
    std::size_t sweep_index = 0;
    std::optional<double> sweep_value;
    std::size_t rep = 0;
    std::uint64_t dataset_seed = 0;
    std::vector<StepRecord> records;

    double rmse_vb = 0.0;
    std::optional<double> rmse_oracle;
    std::optional<double> rmse_static;
    double corruption_rate_rmse = 0.0;  ///< against the scheduled 1 - beta_k
    double dropout_rate_rmse = 0.0;     ///< against the scheduled 1 - rho_k
    std::size_t cross_term_fallbacks = 0;
};

struct SummaryRow {
    std::optional<double> sweep_value;
    std::string metric;
    double mean = 0.0;
    double sd = 0.0;  ///< (n - 1) convention; 0 for a single rep
    double p10 = 0.0;
    double p90 = 0.0;
};

using SummaryTable = std::vector<SummaryRow>;

/// sqrt(mean_k ||est_k - truth_k||^2). Throws LengthMismatch on unequal or
/// zero length, DimensionMismatch on per-entry dimension differences.
double rmse(std::span<const Vector> estimates, std::span<const Vector> truths);

/// Scalar-series RMSE.
double rmse(std::span<const double> estimates, std::span<const double> truths);

/// exp1, exp2, exp3, exp4a, exp4b, exp4c.
std::span<const std::string_view> preset_names();

/// Throws UnknownPreset (message lists the valid names).
ExperimentSpec preset(std::string_view name);

enum class RegimeMode {
    step,   ///< variance changes persist until the horizon
    pulse,  ///< variance changes last a single time step
};

/// The transient-robustness study with either persistent or one-step spikes.
ExperimentSpec make_transient_experiment(RegimeMode mode);

/// The spec for one sweep point (the spec itself when there is no sweep).
ExperimentSpec sweep_point(const ExperimentSpec& spec, std::size_t sweep_index);

/// Seed of the dataset for (sweep point, replication).
std::uint64_t rep_seed(std::uint64_t root_seed, std::size_t sweep_index, std::size_t rep);

/// One replication: generate, run the filter and enabled baselines on the
/// same dataset, compute metrics.
RunResult run_replication(const ExperimentSpec& point, std::size_t sweep_index, std::size_t rep);

/// All sweep points x replications, ordered by (sweep_index, rep). Work is
/// spread over `threads` workers (0 = hardware concurrency); the output does
/// not depend on the thread count.
std::vector<RunResult> run_experiment(const ExperimentSpec& spec, std::size_t threads = 0);

/// Per sweep point and metric: mean, sd, p10, p90 over replications.
/// Metrics: rmse_vb, rmse_oracle, rmse_static, corruption_rate_rmse,
/// dropout_rate_rmse (baseline metrics only when present).
/// Throws EmptyInput.
SummaryTable summarize(const std::vector<RunResult>& results);

/// Linear-interpolation percentile (q in [0,1]) of unsorted values.
double percentile(std::vector<double> values, double q);

} // namespace vbakf
