#include "oracles.hpp"

#include "vbakf/error.hpp"
#include "vbakf/experiment.hpp"
#include "vbakf/filter.hpp"
#include "vbakf/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace vbakf {
namespace {

double min_eigenvalue(const Matrix& m) { return oracle::symmetric_eigenvalues(m).front(); }

VbHyperParams scalar_hyper() {
    VbHyperParams h;
    h.q_prior = {4.0, Matrix::scalar(1.0)};
    h.r_prior = {4.0, Matrix::scalar(2.0)};
    h.e = Matrix::scalar(10.0);
    return h;
}

// ---------------------------------------------------------------- predict

TEST(Predict, IdentityDynamicsAddsProcessCovariance) {
    const GaussianBelief prev{Vector{1.0, -2.0}, Matrix(2, 2, {2.0, 0.5, 0.5, 1.0})};
    const GaussianBelief out = predict(prev, Matrix::identity(2), Matrix::identity(2));
    EXPECT_EQ(out.mean, prev.mean);
    EXPECT_EQ(out.cov, prev.cov + Matrix::identity(2));
}

TEST(Predict, ScalarArithmetic) {
    const GaussianBelief out = predict({Vector{1.0}, Matrix::scalar(2.0)}, Matrix::scalar(1.0), Matrix::scalar(10.0));
    EXPECT_EQ(out.mean[0], 1.0);
    EXPECT_NEAR(out.cov(0, 0), 2.1, 1e-15);
}

TEST(Predict, ProcessNoiseOnlyAddsUncertainty) {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 50; ++t) {
        Matrix f(3, 3);
        for (double& v : f.values()) v = normal(rng);
        const GaussianBelief prev{Vector{0, 0, 0}, oracle::random_spd(3, rng)};
        const GaussianBelief out = predict(prev, f, oracle::random_spd(3, rng));
        EXPECT_GT(min_eigenvalue(out.cov - sandwich(f, prev.cov)), -1e-10);
    }
}

// ---------------------------------------------------------------- deltas

TEST(DeltaClean, VanishingTerms) {
    const GaussianBelief pred{Vector{1.0}, Matrix::scalar(1e-12)};
    EXPECT_NEAR(delta_clean(Vector{1.0}, pred, Matrix::scalar(1.0), Matrix::scalar(1.0), 0.0, 0.0), 0.0, 1e-11);
}

TEST(DeltaClean, ScalarArithmetic) {
    const GaussianBelief pred{Vector{1.0}, Matrix::scalar(1.0)};
    EXPECT_DOUBLE_EQ(delta_clean(Vector{2.0}, pred, Matrix::scalar(1.0), Matrix::scalar(1.0), 0.0, -0.5), -1.5);
}

TEST(DeltaCorrupt, DifferenceWithZeroECancelsToLogOdds) {
    const GaussianBelief pred{Vector{0.3}, Matrix::scalar(0.7)};
    const BetaParams beta{3.0, 2.0};
    const Matrix er_inv = Matrix::scalar(1.0 / 1.7);
    const double logdet = std::log(1.7);
    const double d1 = delta_clean(Vector{1.2}, pred, Matrix::scalar(1.0), er_inv, logdet, beta_expected_log(beta));
    const double d0 =
        delta_corrupt(Vector{1.2}, pred, Matrix::scalar(1.0), er_inv, logdet, beta_expected_log_complement(beta));
    EXPECT_NEAR(d0 - d1, beta_expected_log_complement(beta) - beta_expected_log(beta), 1e-14);
}

TEST(DeltaCorrupt, ScalarArithmetic) {
    const GaussianBelief pred{Vector{1.0}, Matrix::scalar(1.0)};
    // -0.25 - 0.5 * ln 4 - 0.5 * 0.25 * 1 - 0.5 * 0.25 * 1
    EXPECT_NEAR(delta_corrupt(Vector{2.0}, pred, Matrix::scalar(1.0), Matrix::scalar(0.25), std::log(4.0), -0.25),
                -0.25 - 0.5 * std::log(4.0) - 0.25, 1e-15);
}

TEST(DeltaClean, MatchesMonteCarloExpectation) {
    const GaussianBelief pred{Vector{0.4}, Matrix::scalar(0.8)};
    const InverseWishartParams r{9.0, Matrix::scalar(6.0)};
    const BetaParams beta{4.0, 1.5};
    const double y = 1.7;

    std::mt19937_64 rng(52);
    std::normal_distribution<double> normal;
    std::gamma_distribution<double> precision(r.dof / 2.0, 2.0 / r.scale(0, 0));  // R^-1 ~ Wishart_1(u, 1/U)
    std::gamma_distribution<double> ga(beta.a, 1.0);
    std::gamma_distribution<double> gb(beta.b, 1.0);
    const std::size_t n = 1'000'000;
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double x = pred.mean[0] + std::sqrt(pred.cov(0, 0)) * normal(rng);
        const double lambda = precision(rng);
        const double a = ga(rng);
        const double b = gb(rng);
        acc += std::log(a / (a + b)) + 0.5 * std::log(lambda) - 0.5 * lambda * (y - x) * (y - x);
    }
    const double mc = acc / double(n);
    const double closed = delta_clean(Vector{y}, pred, Matrix::scalar(1.0), iw_mean_precision(r),
                                      iw_expected_logdet(r), beta_expected_log(beta));
    EXPECT_NEAR(closed, mc, 0.02 * std::abs(mc));
}

TEST(DeltaCorrupt, MatchesMonteCarloAtConcentratedR) {
    // With q(R) concentrated at its mean the plug-ins are exact expectations.
    const GaussianBelief pred{Vector{-0.2}, Matrix::scalar(1.3)};
    const double r_bar = 0.9;
    const double e = 10.0;
    const BetaParams beta{2.0, 3.0};
    const double y = 4.0;

    std::mt19937_64 rng(53);
    std::normal_distribution<double> normal;
    std::gamma_distribution<double> ga(beta.a, 1.0);
    std::gamma_distribution<double> gb(beta.b, 1.0);
    const std::size_t n = 1'000'000;
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double x = pred.mean[0] + std::sqrt(pred.cov(0, 0)) * normal(rng);
        const double a = ga(rng);
        const double b = gb(rng);
        acc += std::log(b / (a + b)) - 0.5 * std::log(r_bar + e) - 0.5 * (y - x) * (y - x) / (r_bar + e);
    }
    const double mc = acc / double(n);
    const double closed = delta_corrupt(Vector{y}, pred, Matrix::scalar(1.0), Matrix::scalar(1.0 / (r_bar + e)),
                                        std::log(r_bar + e), beta_expected_log_complement(beta));
    EXPECT_NEAR(closed, mc, 0.02 * std::abs(mc));
}

// ---------------------------------------------------------------- responsibility

TEST(Responsibility, Examples) {
    EXPECT_EQ(responsibility(0.3, 0.3), 0.5);
    EXPECT_NEAR(responsibility(std::log(9.0), 0.0), 0.9, 1e-15);
    const double tiny = responsibility(-1e4, 0.0);
    EXPECT_GE(tiny, 0.0);
    EXPECT_LT(tiny, 1e-300);
    EXPECT_EQ(responsibility(1e4, -1e4), 1.0);
}

TEST(Responsibility, PairSumsToOne) {
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> scale(-6.0, 6.0);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 100'000; ++t) {
        const double d1 = normal(rng) * std::pow(10.0, scale(rng));
        const double d0 = normal(rng) * std::pow(10.0, scale(rng));
        const double sum = responsibility(d1, d0) + responsibility(d0, d1);
        ASSERT_LE(std::abs(sum - 1.0), std::numeric_limits<double>::epsilon()) << d1 << " " << d0;
    }
}

// ---------------------------------------------------------------- effective precision, gated update

TEST(EffectivePrecision, EndpointsAndMidpoint) {
    const Matrix a(2, 2, {2.0, 0.3, 0.3, 1.0});
    const Matrix b(2, 2, {0.1, 0.01, 0.01, 0.2});
    EXPECT_EQ(effective_precision(1.0, a, b), a);
    EXPECT_EQ(effective_precision(0.0, a, b), b);
    EXPECT_NEAR(effective_precision(0.5, Matrix::scalar(1.0), Matrix::scalar(1.0 / 11.0))(0, 0), 6.0 / 11.0, 1e-15);
}

TEST(GatedUpdate, DropoutLeavesBeliefUnchanged) {
    const GaussianBelief inter{Vector{0.3, 1.0}, Matrix(2, 2, {1.0, 0.2, 0.2, 2.0})};
    const GaussianBelief out = gated_update(inter, std::nullopt, false, Matrix::identity(1), Matrix(1, 2, {1, 0}));
    EXPECT_EQ(out.mean, inter.mean);
    EXPECT_EQ(out.cov, inter.cov);
}

TEST(GatedUpdate, ScalarClosedForm) {
    const GaussianBelief out =
        gated_update({Vector{0.0}, Matrix::scalar(2.0)}, Vector{1.0}, true, Matrix::scalar(1.0), Matrix::scalar(1.0));
    EXPECT_NEAR(out.mean[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(out.cov(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(GatedUpdate, ReceivedWithoutObservationIsAnError) {
    EXPECT_THROW(gated_update({Vector{0.0}, Matrix::scalar(1.0)}, std::nullopt, true, Matrix::scalar(1.0),
                              Matrix::scalar(1.0)),
                 DomainError);
}

TEST(GatedUpdate, PosteriorCovarianceShrinks) {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 50; ++t) {
        Matrix h(2, 3);
        for (double& v : h.values()) v = normal(rng);
        const GaussianBelief inter{Vector{0, 0, 0}, oracle::random_spd(3, rng)};
        const GaussianBelief out = gated_update(inter, Vector{normal(rng), normal(rng)}, true,
                                                oracle::random_spd(2, rng), h);
        EXPECT_GT(min_eigenvalue(inter.cov - out.cov), -1e-10);
    }
}

TEST(GatedUpdate, SequentialTraceIsMonotone) {
    std::mt19937_64 rng(56);
    std::normal_distribution<double> normal;
    std::bernoulli_distribution received(0.7);
    for (int t = 0; t < 20; ++t) {
        Matrix h(1, 3);
        for (double& v : h.values()) v = normal(rng);
        GaussianBelief belief{Vector{0, 0, 0}, oracle::random_spd(3, rng)};
        for (int i = 0; i < 30; ++i) {
            const bool gamma = received(rng);
            const GaussianBelief next =
                gated_update(belief, gamma ? std::optional<Vector>(Vector{normal(rng)}) : std::nullopt, gamma,
                             oracle::random_spd(1, rng), h);
            EXPECT_LE(next.cov.trace(), belief.cov.trace());
            belief = next;
        }
    }
}

// ---------------------------------------------------------------- conjugate updates

TEST(UpdateRho, Examples) {
    const BetaParams all = update_rho({1.0, 1.0}, 10, 10);
    EXPECT_EQ(all.a, 11.0);
    EXPECT_DOUBLE_EQ(1.0 - beta_mean(all), 1.0 / 12.0);
    EXPECT_DOUBLE_EQ(1.0 - beta_mean(update_rho({1.0, 1.0}, 4, 10)), 7.0 / 12.0);
    const BetaParams none = update_rho({2.0, 3.0}, 0, 10);
    EXPECT_EQ(none.a, 2.0);
    EXPECT_EQ(none.b, 13.0);
    EXPECT_THROW(update_rho({1.0, 1.0}, 11, 10), DomainError);
}

TEST(UpdateBeta, Examples) {
    const std::vector<std::uint8_t> none{0, 0, 0};
    const std::vector<double> pi{0.2, 0.9, 0.4};
    const BetaParams unchanged = update_beta({1.5, 2.5}, none, pi);
    EXPECT_EQ(unchanged.a, 1.5);
    EXPECT_EQ(unchanged.b, 2.5);

    const std::vector<std::uint8_t> all(5, 1);
    const std::vector<double> ones(5, 1.0);
    const BetaParams clean = update_beta({1.0, 1.0}, all, ones);
    EXPECT_EQ(clean.a, 6.0);
    EXPECT_EQ(clean.b, 1.0);

    const BetaParams partial = update_beta({1.0, 1.0}, std::vector<std::uint8_t>{1, 1, 0}, std::vector{0.5, 0.5, 0.9});
    EXPECT_EQ(partial.a, 2.0);
    EXPECT_EQ(partial.b, 2.0);
}

TEST(UpdateR, ZeroResponsibilityContributesNothing) {
    const InverseWishartParams prior{4.0, Matrix::scalar(2.0)};
    const std::vector<std::optional<Vector>> ys{Vector{5.0}, Vector{-3.0}};
    const std::vector<std::uint8_t> gamma{1, 1};
    const std::vector<double> pi{0.0, 0.0};
    const InverseWishartParams out =
        update_r(prior, {Vector{0.0}, Matrix::scalar(1.0)}, ys, gamma, pi, Matrix::scalar(1.0));
    EXPECT_EQ(out.dof, prior.dof);
    EXPECT_EQ(out.scale, prior.scale);
}

TEST(UpdateR, ScalarArithmetic) {
    const std::vector<std::optional<Vector>> ys{Vector{3.0}};
    const InverseWishartParams out = update_r({3.0, Matrix::scalar(1.0)}, {Vector{1.0}, Matrix::scalar(0.5)}, ys,
                                              std::vector<std::uint8_t>{1}, std::vector<double>{1.0},
                                              Matrix::scalar(1.0));
    EXPECT_EQ(out.dof, 4.0);
    EXPECT_EQ(out.scale(0, 0), 5.5);
}

TEST(UpdateR, PlugInMeanTracksSampleCovarianceOfResiduals) {
    const std::size_t n = 200;
    std::mt19937_64 rng(57);
    std::normal_distribution<double> noise(0.0, std::sqrt(2.0));
    const GaussianBelief post{Vector{0.5}, Matrix::scalar(0.01)};
    std::vector<std::optional<Vector>> ys;
    double sample = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = 0.5 + noise(rng);
        ys.emplace_back(Vector{y});
        sample += (y - 0.5) * (y - 0.5);
    }
    sample /= double(n);
    const InverseWishartParams out = update_r({4.0, Matrix::scalar(2.0)}, post, ys, std::vector<std::uint8_t>(n, 1),
                                              std::vector<double>(n, 1.0), Matrix::scalar(1.0));
    EXPECT_NEAR(iw_mean(out)(0, 0), sample, 0.1 * sample);
}

TEST(UpdateQ, ScalarArithmetic) {
    const InverseWishartParams prior{3.0, Matrix::scalar(0.7)};
    bool dropped = true;
    const InverseWishartParams out = update_q(prior, {Vector{1.0}, Matrix::scalar(0.5)},
                                              {Vector{0.0}, Matrix::scalar(1.0)}, Matrix::scalar(2.0),
                                              Matrix::scalar(1.0), &dropped);
    EXPECT_FALSE(dropped);
    EXPECT_EQ(out.dof, 4.0);
    EXPECT_NEAR(out.scale(0, 0), 0.7 + 2.0, 1e-15);
}

TEST(UpdateQ, IdentityDynamicsInstance) {
    std::mt19937_64 rng(58);
    const Matrix p = oracle::random_spd(2, rng);
    const Matrix pred = oracle::random_spd(2, rng) + p;
    const Matrix v0 = Matrix::identity(2) * 0.3;
    const InverseWishartParams out =
        update_q({3.0, v0}, {Vector{0, 0}, p}, {Vector{0, 0}, p}, pred, Matrix::identity(2));
    const Matrix expected = v0 + p * 2.0 - p * spd_inverse(pred) * p * 2.0;
    EXPECT_LT((out.scale - symmetrize(expected)).max_abs(), 1e-12);
}

TEST(UpdateQ, SingularPredictionDropsCrossTerm) {
    const Matrix singular(2, 2, {1.0, 1.0, 1.0, 1.0});
    bool dropped = false;
    const InverseWishartParams out = update_q({3.0, Matrix::identity(2)}, {Vector{0, 0}, Matrix::identity(2)},
                                              {Vector{0, 0}, Matrix::identity(2)}, Matrix(2, 2, {1, 2, 2, 1}),
                                              Matrix::identity(2), &dropped);
    EXPECT_TRUE(dropped);
    EXPECT_EQ(out.scale, Matrix::identity(2) * 3.0);
    (void)singular;
}

// ---------------------------------------------------------------- vb_step

TEST(VbStep, TotalDropoutReturnsPrediction) {
    VbHyperParams hyper = scalar_hyper();
    hyper.n_iters = 1;
    const GaussianBelief prev{Vector{0.7}, Matrix::scalar(0.4)};
    const std::vector<std::optional<Vector>> ys(1);
    for (FusionPath path : {FusionPath::automatic, FusionPath::generic}) {
        VbOptions options;
        options.path = path;
        const VbPosterior out = vb_step(prev, ys, hyper, Matrix::scalar(1.0), Matrix::scalar(1.0), options);
        const GaussianBelief pred = predict(prev, Matrix::scalar(1.0), iw_mean_precision(hyper.q_prior));
        EXPECT_EQ(out.belief.mean, pred.mean);
        EXPECT_EQ(out.belief.cov, pred.cov);
        EXPECT_EQ(out.beta_post.a, hyper.beta_prior.a);
        EXPECT_EQ(out.beta_post.b, hyper.beta_prior.b);
        EXPECT_EQ(out.r_post.scale, hyper.r_prior.scale);
        EXPECT_EQ(out.r_post.dof, hyper.r_prior.dof);
    }
    hyper.n_iters = 20;
    const VbPosterior many = vb_step(prev, ys, hyper, Matrix::scalar(1.0), Matrix::scalar(1.0));
    EXPECT_EQ(many.belief.mean[0], 0.7);
    EXPECT_EQ(many.r_post.scale, hyper.r_prior.scale);
    EXPECT_DOUBLE_EQ(many.dropout_rate_est, 2.0 / 3.0);
}

TEST(VbStep, DegenerateOracleModeMatchesSequentialKalmanStep) {
    const ExperimentSpec spec = sweep_point(preset("exp1"), 4);
    const SensorDataset data = generate(spec.scenario, 59);
    VbHyperParams hyper = spec.hyper;
    hyper.n_iters = 1;
    hyper.model_corruption = false;
    VbOptions options;
    options.frozen_q_precision = Matrix::scalar(1.0 / 0.1);
    options.frozen_r_precision = Matrix::scalar(1.0);
    const VbPosterior step = vb_step(spec.x0, data.observations().step(0), hyper, data.config().f,
                                     data.config().h, options);
    ObservationSet first(data.config().n_sensors, 1, 1);
    for (std::size_t i = 0; i < data.config().n_sensors; ++i) {
        if (const auto& y = data.observations().y(0, i)) first.set(0, i, *y);
    }
    const std::vector<Matrix> q{Matrix::scalar(0.1)};
    const std::vector<Matrix> r{Matrix::scalar(1.0)};
    const auto kf = kalman_sequential(first, Matrix::scalar(1.0), Matrix::scalar(1.0), q, r, spec.x0);
    EXPECT_NEAR(step.belief.mean[0], kf[0].mean[0], 1e-8);
    EXPECT_NEAR(step.belief.cov(0, 0), kf[0].cov(0, 0), 1e-8);
}

// The light Q prior used by the transient and degradation studies; the
// heavier default prior floors the Q plug-in at 1/3.
VbHyperParams light_q_hyper(VbHyperParams h) {
    h.q_prior = {2.0, Matrix::scalar(0.02)};
    return h;
}

TEST(VbStep, CleanDataGivesHighResponsibilities) {
    // One step at a time from the oracle's calibrated belief, averaged over
    // the run. A cold start from the diffuse x0 is not representative: the
    // predictive variance then dwarfs R and the corrupt branch wins.
    const ExperimentSpec spec = sweep_point(preset("exp1"), 6);
    ASSERT_EQ(spec.scenario.n_sensors, 100u);
    VbHyperParams hyper = light_q_hyper(spec.hyper);
    hyper.model_corruption = true;
    const SensorDataset data = generate(spec.scenario, 60);
    const auto kf = kalman_oracle(data, spec.x0);
    double mean = 0.0;
    for (std::size_t k = 1; k < 120; ++k) {
        const VbPosterior step = vb_step(kf[k - 1], data.observations().step(k), hyper, data.config().f,
                                         data.config().h);
        for (double p : step.pi) mean += p / 100.0;
    }
    EXPECT_GT(mean / 119.0, 0.9);
}

TEST(VbStep, DroppingASensorEqualsSkippingIt) {
    const ExperimentSpec spec = preset("exp3");
    const SensorDataset data = generate(spec.scenario, 61);
    const GaussianBelief prev{Vector{0.2}, Matrix::scalar(0.3)};
    const auto step = data.observations().step(60);
    for (FusionPath path : {FusionPath::automatic, FusionPath::generic}) {
        VbOptions options;
        options.path = path;
        for (std::size_t drop : {0ul, 17ul, 199ul}) {
            if (!step[drop]) continue;
            std::vector<std::optional<Vector>> flipped(step.begin(), step.end());
            flipped[drop].reset();
            std::vector<std::optional<Vector>> skipped(step.begin(), step.end());
            skipped.erase(skipped.begin() + static_cast<long>(drop));
            const VbPosterior a = vb_step(prev, flipped, spec.hyper, data.config().f, data.config().h, options);
            const VbPosterior b = vb_step(prev, skipped, spec.hyper, data.config().f, data.config().h, options);
            EXPECT_EQ(a.belief.mean, b.belief.mean);
            EXPECT_EQ(a.belief.cov, b.belief.cov);
            EXPECT_EQ(a.r_post.scale, b.r_post.scale);
            EXPECT_EQ(a.beta_post.a, b.beta_post.a);
        }
    }
}

TEST(VbStep, ResponsibilitiesAreSensorOrderIndependent) {
    const ExperimentSpec spec = preset("exp3");
    const SensorDataset data = generate(spec.scenario, 62);
    const auto step = data.observations().step(70);
    std::vector<std::optional<Vector>> reversed(step.rbegin(), step.rend());
    VbHyperParams hyper = spec.hyper;
    hyper.n_iters = 1;
    const GaussianBelief prev{Vector{0.0}, Matrix::scalar(0.5)};
    const VbPosterior a = vb_step(prev, step, hyper, data.config().f, data.config().h);
    const VbPosterior b = vb_step(prev, reversed, hyper, data.config().f, data.config().h);
    for (std::size_t i = 0; i < step.size(); ++i) EXPECT_EQ(a.pi[i], b.pi[step.size() - 1 - i]);
}

TEST(VbStep, FilterErrorCarriesContext) {
    const FilterError err("not positive definite", 12, 3, 7);
    EXPECT_EQ(err.step(), 12);
    EXPECT_EQ(err.iteration(), 3);
    EXPECT_EQ(err.sensor(), 7);
    EXPECT_STREQ(err.what(), "filter failure at k=12 iteration=3 sensor=7: not positive definite");
}

// ---------------------------------------------------------------- run_filter

TEST(RunFilter, RejectsInconsistentInputs) {
    const ExperimentSpec spec = preset("exp1");
    const SensorDataset data = generate(spec.scenario, 63);
    VbHyperParams bad = spec.hyper;
    bad.r_prior.dof = 2.0;
    EXPECT_THROW(run_filter(data, bad, spec.x0), ConfigError);
    bad = spec.hyper;
    bad.n_iters = 0;
    EXPECT_THROW(run_filter(data, bad, spec.x0), ConfigError);
    EXPECT_THROW(run_filter(data, spec.hyper, {Vector{0.0, 0.0}, Matrix::identity(2)}), Error);
}

TEST(RunFilter, AllDroppedFollowsPurePrediction) {
    const double f = 0.9;
    ObservationSet none(3, 25, 1);
    const auto out = run_filter(none, scalar_hyper(), {Vector{2.0}, Matrix::scalar(1.0)}, Matrix::scalar(f),
                                Matrix::scalar(1.0));
    double expected = 2.0;
    for (std::size_t k = 0; k < 25; ++k) {
        expected *= f;
        EXPECT_EQ(out[k].belief.mean[0], expected);
    }
}

TEST(RunFilter, NearlyStaticStateErrorDecreasesOverTime) {
    ExperimentSpec spec = preset("exp1");
    spec.scenario.n_sensors = 20;
    spec.scenario.segments[0].q_true = Matrix::scalar(1e-6);
    spec.scenario.x0_cov = Matrix::scalar(4.0);
    spec.hyper.q_prior = {2.0, Matrix::scalar(1e-5)};
    spec.x0 = {Vector{0.0}, Matrix::scalar(4.0)};
    double early = 0.0;
    double late = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SensorDataset data = generate(spec.scenario, 700 + seed);
        const auto out = run_filter(data, spec.hyper, spec.x0);
        for (std::size_t k = 0; k < 10; ++k) early += std::pow(out[k].belief.mean[0] - data.x_true()[k][0], 2);
        for (std::size_t k = 110; k < 120; ++k) late += std::pow(out[k].belief.mean[0] - data.x_true()[k][0], 2);
    }
    EXPECT_LT(late, early);
}

TEST(RunFilter, DegenerateOracleModeMatchesKalmanTrajectory) {
    const ExperimentSpec spec = sweep_point(preset("exp1"), 3);
    VbHyperParams hyper = spec.hyper;
    hyper.n_iters = 1;
    hyper.model_corruption = false;
    VbOptions options;
    options.frozen_q_precision = Matrix::scalar(10.0);
    options.frozen_r_precision = Matrix::scalar(1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SensorDataset data = generate(spec.scenario, 800 + seed);
        const auto vb = run_filter(data, hyper, spec.x0, options);
        const auto kf = kalman_oracle(data, spec.x0);
        for (std::size_t k = 0; k < vb.size(); ++k) {
            ASSERT_NEAR(vb[k].belief.mean[0], kf[k].mean[0], 1e-8) << "k = " << k;
            ASSERT_NEAR(vb[k].belief.cov(0, 0), kf[k].cov(0, 0), 1e-8) << "k = " << k;
        }
    }
}

TEST(RunFilter, StationaryQuantitiesAreRecovered) {
    const ExperimentSpec spec = sweep_point(preset("exp1"), 6);
    const SensorDataset data = generate(spec.scenario, 64);
    const auto out = run_filter(data, light_q_hyper(spec.hyper), spec.x0);
    double q = 0.0;
    for (std::size_t k = 60; k < 120; ++k) q += iw_mean(out[k].q_post)(0, 0);
    q /= 60.0;
    EXPECT_NEAR(q, 0.1, 0.05);
}

TEST(RunFilter, DropoutEstimateIsUnbiased) {
    ExperimentSpec spec = preset("exp3");
    spec.scenario.horizon = 200;
    spec.scenario.segments = {{0, 200, Matrix::scalar(0.05), Matrix::scalar(1.0), 0.6, 0.0}};
    const SensorDataset data = generate(spec.scenario, 65);
    const auto out = run_filter(data, spec.hyper, spec.x0);
    double mean = 0.0;
    for (const auto& post : out) mean += post.dropout_rate_est;
    EXPECT_NEAR(mean / 200.0, 0.6, 0.01);
}

TEST(RunFilter, CovariancesStaySpd) {
    const ExperimentSpec spec = preset("exp3");
    const SensorDataset data = generate(spec.scenario, 66);
    for (const auto& post : run_filter(data, spec.hyper, spec.x0)) {
        EXPECT_TRUE(is_positive_definite(post.belief.cov));
        EXPECT_TRUE(is_positive_definite(post.q_post.scale));
        EXPECT_TRUE(is_positive_definite(post.r_post.scale));
        EXPECT_TRUE(is_positive_definite(post.eq_inv));
        EXPECT_TRUE(is_positive_definite(post.er_inv));
        EXPECT_GE(post.corruption_rate_est, 0.0);
        EXPECT_LE(post.corruption_rate_est, 1.0);
    }
}

TEST(RunFilter, MultivariateStateRuns) {
    ScenarioConfig c;
    c.d_x = 2;
    c.d_y = 1;
    c.f = Matrix(2, 2, {1.0, 0.1, 0.0, 1.0});
    c.h = Matrix(1, 2, {1.0, 0.0});
    c.e = Matrix::scalar(10.0);
    c.n_sensors = 10;
    c.horizon = 60;
    c.segments = {{0, 60, Matrix::diagonal({0.01, 0.01}), Matrix::scalar(1.0), 0.2, 0.1}};
    c.x0_mean = Vector{0.0, 0.0};
    c.x0_cov = Matrix::identity(2);
    VbHyperParams h;
    h.q_prior = {5.0, Matrix::identity(2)};
    h.r_prior = {4.0, Matrix::scalar(2.0)};
    h.e = Matrix::scalar(10.0);
    const SensorDataset data = generate(c, 67);
    VbOptions generic;
    generic.path = FusionPath::generic;
    const auto a = run_filter(data, h, {c.x0_mean, c.x0_cov});
    const auto b = run_filter(data, h, {c.x0_mean, c.x0_cov}, generic);
    ASSERT_EQ(a.size(), 60u);
    for (std::size_t k = 0; k < 60; ++k) {
        EXPECT_TRUE(is_positive_definite(a[k].belief.cov));
        EXPECT_LT((a[k].belief.mean - b[k].belief.mean).squared_norm(), 1e-18);
    }
}

// ---------------------------------------------------------------- baselines

TEST(Baselines, ScalarSingleStep) {
    ObservationSet obs(1, 1, 1);
    obs.set(0, 0, Vector{1.0});
    const std::vector<Matrix> q{Matrix::scalar(1.0)};
    const std::vector<Matrix> r{Matrix::scalar(1.0)};
    const auto out = kalman_sequential(obs, Matrix::scalar(1.0), Matrix::scalar(1.0), q, r,
                                       {Vector{0.0}, Matrix::scalar(1.0)});
    EXPECT_NEAR(out[0].mean[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(out[0].cov(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(Baselines, OracleReachesRiccatiFixedPoint) {
    ExperimentSpec spec = preset("exp1");
    spec.scenario.horizon = 101;
    spec.scenario.segments[0].end_k = 101;
    const SensorDataset data = generate(spec.scenario, 68);
    const auto out = kalman_oracle(data, spec.x0);
    EXPECT_NEAR(out[100].cov(0, 0), oracle::riccati_filtered_variance(1.0, 0.1, 1.0), 1e-6);
}

TEST(Baselines, IdenticalSensorsAddInformation) {
    const std::size_t n = 8;
    ObservationSet many(n, 1, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = 0.3 * double(i) - 1.0;
        many.set(0, i, Vector{y});
        sum += y;
    }
    ObservationSet one(1, 1, 1);
    one.set(0, 0, Vector{sum / double(n)});
    const GaussianBelief x0{Vector{0.5}, Matrix::scalar(2.0)};
    const std::vector<Matrix> q{Matrix::scalar(0.1)};
    const auto a = kalman_sequential(many, Matrix::scalar(1.0), Matrix::scalar(1.0), q,
                                     std::vector<Matrix>{Matrix::scalar(1.5)}, x0);
    const auto b = kalman_sequential(one, Matrix::scalar(1.0), Matrix::scalar(1.0), q,
                                     std::vector<Matrix>{Matrix::scalar(1.5 / double(n))}, x0);
    EXPECT_NEAR(a[0].mean[0], b[0].mean[0], 1e-8);
    EXPECT_NEAR(a[0].cov(0, 0), b[0].cov(0, 0), 1e-8);
}

TEST(Baselines, StaticWithTrueParametersEqualsOracleBitwise) {
    const ExperimentSpec spec = preset("exp1");
    const SensorDataset data = generate(spec.scenario, 69);
    const auto a = kalman_oracle(data, spec.x0);
    const auto b = kalman_static(data, Matrix::scalar(0.1), Matrix::scalar(1.0), spec.x0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].mean, b[k].mean);
        EXPECT_EQ(a[k].cov, b[k].cov);
    }
}

TEST(Baselines, ScheduleLengthMustMatchHorizon) {
    ObservationSet obs(1, 3, 1);
    const std::vector<Matrix> short_schedule(2, Matrix::scalar(1.0));
    EXPECT_THROW(kalman_sequential(obs, Matrix::scalar(1.0), Matrix::scalar(1.0), short_schedule, short_schedule,
                                   {Vector{0.0}, Matrix::scalar(1.0)}),
                 LengthMismatch);
}

} // namespace
} // namespace vbakf
