#include "vbakf/error.hpp"
#include "vbakf/filter.hpp"
#include "vbakf/linalg.hpp"

#include <string>

namespace vbakf {

namespace {

// Branch statistics shared by every sensor within one sweep.
struct BranchTerms {
    double e_log_beta = 0.0;
    double e_log_1mbeta = 0.0;
    double e_logdet_r = 0.0;
    Matrix r_plus_e_inv;
    double logdet_r_plus_e = 0.0;
};

BranchTerms branch_terms(const IterationState& state, const Matrix& e) {
    BranchTerms t;
    t.e_log_beta = beta_expected_log(state.beta_post);
    t.e_log_1mbeta = beta_expected_log_complement(state.beta_post);
    t.e_logdet_r = iw_expected_logdet(state.r_post);
    const Matrix r_plus_e = iw_mean(state.r_post) + e;
    t.r_plus_e_inv = spd_inverse(r_plus_e);
    t.logdet_r_plus_e = logdet_spd(r_plus_e);
    return t;
}

double rate_complement(const BetaParams& p) { return p.b / (p.a + p.b); }

// In-place update for a scalar observation y = h x + noise with precision omega.
// Same gain as gated_update, without temporaries.
void scalar_observation_update(GaussianBelief& belief, double y, double omega, const Matrix& h, Vector& ph) {
    const std::size_t n = belief.dim();
    double hph = 0.0;
    double hm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += belief.cov(r, c) * h(0, c);
        ph[r] = acc;
        hph += h(0, r) * acc;
        hm += h(0, r) * belief.mean[r];
    }
    const double s = 1.0 / omega + hph;
    const double innovation = y - hm;
    for (std::size_t r = 0; r < n; ++r) belief.mean[r] += ph[r] / s * innovation;
    for (std::size_t r = 0; r < n; ++r) {
        const double kr = ph[r] / s;
        for (std::size_t c = 0; c < n; ++c) belief.cov(r, c) -= kr * ph[c];
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) {
            const double avg = 0.5 * (belief.cov(r, c) + belief.cov(c, r));
            belief.cov(r, c) = avg;
            belief.cov(c, r) = avg;
        }
    }
}

class StepRunner {
public:
    StepRunner(const GaussianBelief& prev, std::span<const std::optional<Vector>> ys, const VbHyperParams& hyper,
               const Matrix& f, const Matrix& h, const VbOptions& options)
        : prev_(prev), ys_(ys), hyper_(hyper), f_(f), h_(h), options_(options) {
        gamma_.resize(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) {
            gamma_[i] = ys[i] ? 1 : 0;
            if (ys[i]) {
                received_.push_back(i);
            }
        }
        batched_ = options.path == FusionPath::automatic && h.rows() == 1;
        if (batched_) {
            kernels_ = options.kernels ? options.kernels : &kernels::active();
            y_packed_.reserve(received_.size());
            for (std::size_t i : received_) y_packed_.push_back((*ys[i])[0]);
            pi_packed_.assign(received_.size(), 1.0);
            clean_.resize(received_.size());
            corrupt_.resize(received_.size());
        }
    }

    VbPosterior run(long step) {
        VbPosterior out;
        out.rho_post = update_rho(hyper_.rho_prior, received_.size(), ys_.size());
        out.dropout_rate_est = rate_complement(out.rho_post);

        IterationState state;
        state.eq_inv = options_.frozen_q_precision ? *options_.frozen_q_precision : iw_mean_precision(hyper_.q_prior);
        state.er_inv = options_.frozen_r_precision ? *options_.frozen_r_precision : iw_mean_precision(hyper_.r_prior);
        state.q_post = hyper_.q_prior;
        state.r_post = hyper_.r_prior;
        state.beta_post = hyper_.beta_prior;
        state.pi.assign(ys_.size(), 0.0);

        GaussianBelief belief = prev_;
        for (std::size_t j = 0; j < hyper_.n_iters; ++j) {
            sensor_ = -1;
            try {
                belief = sweep(state, out.cross_term_fallbacks);
            } catch (const FilterError&) {
                throw;
            } catch (const Error& err) {
                throw FilterError(err.what(), step, static_cast<long>(j), sensor_);
            }
        }

        out.belief = std::move(belief);
        out.q_post = std::move(state.q_post);
        out.r_post = std::move(state.r_post);
        out.beta_post = state.beta_post;
        out.corruption_rate_est = rate_complement(state.beta_post);
        out.pi = std::move(state.pi);
        out.eq_inv = std::move(state.eq_inv);
        out.er_inv = std::move(state.er_inv);
        return out;
    }

private:
    GaussianBelief sweep(IterationState& state, std::size_t& fallbacks) {
        const GaussianBelief pred = predict(prev_, f_, state.eq_inv);
        GaussianBelief post = batched_ ? fuse_batched(state, pred) : fuse_generic(state, pred);
        sensor_ = -1;

        if (batched_) {
            update_globals_batched(state, post);
        } else {
            state.beta_post = update_beta(hyper_.beta_prior, gamma_, state.pi);
            state.r_post = update_r(hyper_.r_prior, post, ys_, gamma_, state.pi, h_);
        }
        bool dropped = false;
        state.q_post = update_q(hyper_.q_prior, post, prev_, pred.cov, f_, &dropped);
        if (dropped) ++fallbacks;

        if (!options_.frozen_q_precision) state.eq_inv = iw_mean_precision(state.q_post);
        if (!options_.frozen_r_precision) state.er_inv = iw_mean_precision(state.r_post);
        return post;
    }

    GaussianBelief fuse_generic(IterationState& state, const GaussianBelief& pred) {
        std::optional<BranchTerms> terms;
        if (hyper_.model_corruption) terms = branch_terms(state, hyper_.e);

        for (std::size_t i : received_) {
            sensor_ = static_cast<long>(i);
            if (terms) {
                const double d1 = delta_clean(*ys_[i], pred, h_, state.er_inv, terms->e_logdet_r, terms->e_log_beta);
                const double d0 = delta_corrupt(*ys_[i], pred, h_, terms->r_plus_e_inv, terms->logdet_r_plus_e,
                                                terms->e_log_1mbeta);
                state.pi[i] = responsibility(d1, d0);
            } else {
                state.pi[i] = 1.0;
            }
        }

        GaussianBelief belief = pred;
        for (std::size_t i = 0; i < ys_.size(); ++i) {
            sensor_ = static_cast<long>(i);
            const Matrix omega = terms ? effective_precision(state.pi[i], state.er_inv, terms->r_plus_e_inv)
                                       : state.er_inv;
            belief = gated_update(belief, ys_[i], gamma_[i] != 0, omega, h_);
        }
        return belief;
    }

    GaussianBelief fuse_batched(IterationState& state, const GaussianBelief& pred) {
        const double er_inv = state.er_inv(0, 0);
        double rpe_inv = er_inv;
        if (hyper_.model_corruption) {
            const BranchTerms terms = branch_terms(state, hyper_.e);
            rpe_inv = terms.r_plus_e_inv(0, 0);
            const double hph = sandwich(h_, pred.cov)(0, 0);
            const double center = (h_ * pred.mean)[0];
            kernels::EvidenceCoefficients c;
            c.clean_precision = er_inv;
            c.clean_offset = terms.e_log_beta - 0.5 * terms.e_logdet_r - 0.5 * er_inv * hph;
            c.corrupt_precision = rpe_inv;
            c.corrupt_offset = terms.e_log_1mbeta - 0.5 * terms.logdet_r_plus_e - 0.5 * rpe_inv * hph;
            kernels_->log_evidence(y_packed_, center, c, clean_, corrupt_);
            for (std::size_t m = 0; m < received_.size(); ++m) {
                pi_packed_[m] = responsibility(clean_[m], corrupt_[m]);
                state.pi[received_[m]] = pi_packed_[m];
            }
        } else {
            for (std::size_t i : received_) state.pi[i] = 1.0;
        }

        GaussianBelief belief = pred;
        Vector scratch(belief.dim());
        for (std::size_t m = 0; m < received_.size(); ++m) {
            sensor_ = static_cast<long>(received_[m]);
            const double pi = pi_packed_[m];
            double omega = er_inv;
            if (pi != 1.0) omega = pi == 0.0 ? rpe_inv : pi * er_inv + (1.0 - pi) * rpe_inv;
            scalar_observation_update(belief, y_packed_[m], omega, h_, scratch);
        }
        return belief;
    }

    void update_globals_batched(IterationState& state, const GaussianBelief& post) {
        const double center = (h_ * post.mean)[0];
        const double hph = sandwich(h_, post.cov)(0, 0);
        const kernels::SoftCounts counts = kernels_->soft_counts(y_packed_, pi_packed_, center);
        state.beta_post = beta_posterior(hyper_.beta_prior, counts.clean, std::max(counts.corrupt, 0.0));
        state.r_post.dof = hyper_.r_prior.dof + counts.clean;
        state.r_post.scale = Matrix::scalar(hyper_.r_prior.scale(0, 0) + counts.clean_squares + counts.clean * hph);
    }

    const GaussianBelief& prev_;
    std::span<const std::optional<Vector>> ys_;
    const VbHyperParams& hyper_;
    const Matrix& f_;
    const Matrix& h_;
    const VbOptions& options_;

    std::vector<std::uint8_t> gamma_;
    std::vector<std::size_t> received_;
    long sensor_ = -1;

    bool batched_ = false;
    const kernels::KernelTable* kernels_ = nullptr;
    std::vector<double> y_packed_;
    std::vector<double> pi_packed_;
    std::vector<double> clean_;
    std::vector<double> corrupt_;
};

} // namespace

VbPosterior vb_step(const GaussianBelief& prev, std::span<const std::optional<Vector>> ys, const VbHyperParams& hyper,
                    const Matrix& f, const Matrix& h, const VbOptions& options, long step) {
    return StepRunner(prev, ys, hyper, f, h, options).run(step);
}

std::vector<VbPosterior> run_filter(const ObservationSet& observations, const VbHyperParams& hyper,
                                    const GaussianBelief& x0, const Matrix& f, const Matrix& h,
                                    const VbOptions& options) {
    hyper.validate(f.rows(), h.rows());
    x0.validate();
    if (observations.d_y() != h.rows() || x0.dim() != f.rows() || h.cols() != f.rows()) {
        throw DimensionMismatch("run_filter: observation, state and model dimensions disagree");
    }
    std::vector<VbPosterior> out;
    out.reserve(observations.horizon());
    GaussianBelief belief = x0;
    for (std::size_t k = 0; k < observations.horizon(); ++k) {
        out.push_back(vb_step(belief, observations.step(k), hyper, f, h, options, static_cast<long>(k)));
        belief = out.back().belief;
    }
    return out;
}

std::vector<VbPosterior> run_filter(const SensorDataset& dataset, const VbHyperParams& hyper, const GaussianBelief& x0,
                                    const VbOptions& options) {
    return run_filter(dataset.observations(), hyper, x0, dataset.config().f, dataset.config().h, options);
}

} // namespace vbakf
