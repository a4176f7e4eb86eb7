#include "vbakf/error.hpp"
#include "vbakf/experiment.hpp"
#include "vbakf/kernels.hpp"
#include "vbakf/linalg.hpp"
#include "vbakf/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace vbakf {

namespace {

bool is_positive_integer(double v) { return v >= 1.0 && std::floor(v) == v && v < 1e9; }

void require_shape(const Matrix& m, std::size_t n, const char* what) {
    if (m.rows() != n || m.cols() != n) throw ConfigError(std::string(what) + " has the wrong shape");
    if (!is_positive_definite(m)) throw ConfigError(std::string(what) + " is not symmetric positive definite");
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

} // namespace

void ExperimentSpec::validate() const {
    scenario.validate();
    hyper.validate(scenario.d_x, scenario.d_y);
    // The posterior dof is nu_0 + 1; the plug-in E[Q] needs it above d_x + 1.
    if (!(hyper.q_prior.dof > double(scenario.d_x))) {
        throw ConfigError("q_prior dof must exceed d_x so that the plug-in mean of Q exists");
    }
    if (x0.mean.dim() != scenario.d_x) throw ConfigError("x0 mean must have dimension d_x");
    require_shape(x0.cov, scenario.d_x, "x0 covariance");
    if (mc_reps < 1) throw ConfigError("mc_reps must be at least 1");
    if (baselines.static_kf) {
        require_shape(static_q, scenario.d_x, "static_q");
        require_shape(static_r, scenario.d_y, "static_r");
    }
    if (sweep) {
        const std::string& p = sweep->parameter;
        if (p != "n_sensors" && p != "q_true" && p != "r_true" && p != "e") {
            throw ConfigError("unknown sweep parameter '" + p + "' (valid: n_sensors, q_true, r_true, e)");
        }
        if (sweep->values.empty()) throw ConfigError("sweep values must be nonempty");
        for (double v : sweep->values) {
            if (p == "n_sensors" ? !is_positive_integer(v) : !(std::isfinite(v) && v > 0.0)) {
                throw ConfigError("sweep value out of range for '" + p + "'");
            }
        }
    }
}

ExperimentSpec sweep_point(const ExperimentSpec& spec, std::size_t sweep_index) {
    if (!spec.sweep) {
        if (sweep_index != 0) throw ConfigError("sweep index out of range");
        return spec;
    }
    if (sweep_index >= spec.sweep->values.size()) throw ConfigError("sweep index out of range");
    ExperimentSpec point = spec;
    const double v = spec.sweep->values[sweep_index];
    const std::string& p = spec.sweep->parameter;
    ScenarioConfig& s = point.scenario;
    if (p == "n_sensors") {
        s.n_sensors = static_cast<std::size_t>(v);
    } else if (p == "q_true") {
        for (auto& seg : s.segments) seg.q_true = Matrix::identity(s.d_x) * v;
    } else if (p == "r_true") {
        for (auto& seg : s.segments) seg.r_true = Matrix::identity(s.d_y) * v;
    } else if (p == "e") {
        s.e = Matrix::identity(s.d_y) * v;
        point.hyper.e = s.e;
    } else {
        throw ConfigError("unknown sweep parameter '" + p + "'");
    }
    return point;
}

std::uint64_t rep_seed(std::uint64_t root_seed, std::size_t sweep_index, std::size_t rep) {
    return derive_seed(root_seed, "rep", sweep_index, rep);
}

double rmse(std::span<const Vector> estimates, std::span<const Vector> truths) {
    if (estimates.size() != truths.size() || estimates.empty()) {
        throw LengthMismatch("rmse: series must have equal nonzero length");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        if (estimates[k].dim() != truths[k].dim()) throw DimensionMismatch("rmse: entry dimensions differ");
        acc += (estimates[k] - truths[k]).squared_norm();
    }
    return std::sqrt(acc / double(estimates.size()));
}

double rmse(std::span<const double> estimates, std::span<const double> truths) {
    if (estimates.size() != truths.size() || estimates.empty()) {
        throw LengthMismatch("rmse: series must have equal nonzero length");
    }
    return std::sqrt(kernels::active().sum_squared_difference(estimates, truths) / double(estimates.size()));
}

RunResult run_replication(const ExperimentSpec& point, std::size_t sweep_index, std::size_t rep) {
    RunResult out;
    out.sweep_index = sweep_index;
    if (point.sweep) out.sweep_value = point.sweep->values.at(sweep_index);
    out.rep = rep;
    out.dataset_seed = rep_seed(point.root_seed, sweep_index, rep);

    try {
        const SensorDataset dataset = generate(point.scenario, out.dataset_seed);
        const std::vector<VbPosterior> vb = run_filter(dataset, point.hyper, point.x0);
        std::vector<GaussianBelief> oracle;
        std::vector<GaussianBelief> fixed;
        if (point.baselines.oracle) oracle = kalman_oracle(dataset, point.x0);
        if (point.baselines.static_kf) fixed = kalman_static(dataset, point.static_q, point.static_r, point.x0);

        const std::size_t T = point.scenario.horizon;
        std::vector<Vector> est_vb, est_oracle, est_static;
        std::vector<double> corr_est(T), corr_true(T), drop_est(T), drop_true(T);
        out.records.reserve(T);
        for (std::size_t k = 0; k < T; ++k) {
            const RegimeSegment& seg = regime_at(point.scenario, k);
            StepRecord r;
            r.k = k;
            r.x_true = dataset.x_true()[k];
            r.xhat_vb = vb[k].belief.mean;
            r.p_vb = vb[k].belief.cov;
            if (!oracle.empty()) r.xhat_oracle = oracle[k].mean;
            if (!fixed.empty()) r.xhat_static = fixed[k].mean;
            r.eq_plugin = iw_mean(vb[k].q_post);
            r.er_plugin = iw_mean(vb[k].r_post);
            r.dropout_est = vb[k].dropout_rate_est;
            r.corruption_est = vb[k].corruption_rate_est;
            r.dropout_true = seg.dropout_rate;
            r.corruption_true = seg.corruption_rate;
            out.cross_term_fallbacks += vb[k].cross_term_fallbacks;

            est_vb.push_back(r.xhat_vb);
            if (r.xhat_oracle) est_oracle.push_back(*r.xhat_oracle);
            if (r.xhat_static) est_static.push_back(*r.xhat_static);
            corr_est[k] = r.corruption_est;
            corr_true[k] = r.corruption_true;
            drop_est[k] = r.dropout_est;
            drop_true[k] = r.dropout_true;
            out.records.push_back(std::move(r));
        }
        out.rmse_vb = rmse(est_vb, dataset.x_true());
        if (!est_oracle.empty()) out.rmse_oracle = rmse(est_oracle, dataset.x_true());
        if (!est_static.empty()) out.rmse_static = rmse(est_static, dataset.x_true());
        out.corruption_rate_rmse = rmse(corr_est, corr_true);
        out.dropout_rate_rmse = rmse(drop_est, drop_true);
    } catch (const Error& err) {
        throw Error(point.name + " sweep point " + std::to_string(sweep_index) + " rep " + std::to_string(rep) +
                    " (seed " + std::to_string(out.dataset_seed) + "): " + err.what());
    }
    return out;
}

std::vector<RunResult> run_experiment(const ExperimentSpec& spec, std::size_t threads) {
    spec.validate();
    std::vector<ExperimentSpec> points;
    for (std::size_t s = 0; s < spec.sweep_points(); ++s) points.push_back(sweep_point(spec, s));
    for (const auto& p : points) p.scenario.validate();

    const std::size_t total = points.size() * spec.mc_reps;
    std::vector<RunResult> results(total);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_at = total;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t task = next++; task < total; task = next++) {
            const std::size_t s = task / spec.mc_reps;
            const std::size_t rep = task % spec.mc_reps;
            try {
                results[task] = run_replication(points[s], s, rep);
            } catch (...) {
                // Report the lowest failing task so the error does not depend on scheduling.
                std::lock_guard lock(failure_mutex);
                if (task < failed_at) {
                    failed_at = task;
                    failure = std::current_exception();
                }
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyInput("percentile of an empty set");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

SummaryTable summarize(const std::vector<RunResult>& results) {
    if (results.empty()) throw EmptyInput("summarize: no results");

    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return results[a].sweep_index < results[b].sweep_index; });

    SummaryTable table;
    auto emit = [&](std::optional<double> sweep_value, const std::string& metric, const std::vector<double>& v) {
        if (v.empty()) return;
        SummaryRow row;
        row.sweep_value = sweep_value;
        row.metric = metric;
        row.mean = mean_of(v);
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - row.mean) * (x - row.mean);
            row.sd = std::sqrt(ss / double(v.size() - 1));
        }
        row.p10 = percentile(v, 0.1);
        row.p90 = percentile(v, 0.9);
        table.push_back(std::move(row));
    };

    std::size_t i = 0;
    while (i < order.size()) {
        const std::size_t sweep_index = results[order[i]].sweep_index;
        const std::optional<double> sweep_value = results[order[i]].sweep_value;
        std::vector<double> vb, oracle, fixed, corruption, dropout;
        for (; i < order.size() && results[order[i]].sweep_index == sweep_index; ++i) {
            const RunResult& r = results[order[i]];
            vb.push_back(r.rmse_vb);
            if (r.rmse_oracle) oracle.push_back(*r.rmse_oracle);
            if (r.rmse_static) fixed.push_back(*r.rmse_static);
            corruption.push_back(r.corruption_rate_rmse);
            dropout.push_back(r.dropout_rate_rmse);
        }
        emit(sweep_value, "rmse_vb", vb);
        emit(sweep_value, "rmse_oracle", oracle);
        emit(sweep_value, "rmse_static", fixed);
        emit(sweep_value, "corruption_rate_rmse", corruption);
        emit(sweep_value, "dropout_rate_rmse", dropout);
    }
    return table;
}

} // namespace vbakf
