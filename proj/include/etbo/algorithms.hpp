#ifndef ETBO_ALGORITHMS_HPP
#define ETBO_ALGORITHMS_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "domain.hpp"
#include "errors.hpp"
#include "gp_posterior.hpp"
#include "trigger.hpp"

namespace etbo {

    /**
     * Exploration weight beta_t of the UCB acquisition.
     *
     * approximate: c1 ln(c2 t), the logarithmic schedule used in experiments.
     * exact:       2 ln(5 pi^2 t^2 / (3 delta))
     *              + 2 d ln(t^2 d b1 r sqrt(ln(5 d a1 pi^2 t^2 / (3 delta))))
     *
     * Both forms are clamped at zero from below.
     */
    struct BetaSchedule {
        enum class Kind { approximate, exact };

        Kind kind = Kind::approximate;
        double c1 = 0.8;
        double c2 = 4.0;
        double delta = 0.1;
        int d = 2;
        double r = 1.0;
        double a1 = 1.0;
        double b1 = 1.0;

        static BetaSchedule approximate(double c1, double c2) {
            BetaSchedule s;
            s.kind = Kind::approximate;
            s.c1 = c1;
            s.c2 = c2;
            return s;
        }

        static BetaSchedule exact(double delta, int d, double r, double a1, double b1) {
            BetaSchedule s;
            s.kind = Kind::exact;
            s.delta = delta;
            s.d = d;
            s.r = r;
            s.a1 = a1;
            s.b1 = b1;
            return s;
        }

        void validate() const {
            if (kind == Kind::approximate) {
                if (!(c1 > 0.0) || !(c2 > 0.0)) {
                    throw ConfigError("beta schedule: c1 and c2 must be positive");
                }
            } else {
                if (!(delta > 0.0 && delta < 1.0)) {
                    throw ConfigError("beta schedule: delta must lie in (0, 1)");
                }
                if (d < 1 || !(r > 0.0) || !(a1 > 0.0) || !(b1 > 0.0)) {
                    throw ConfigError("beta schedule: d, r, a1, b1 must be positive");
                }
            }
        }
    };

    [[nodiscard]] inline double beta(const BetaSchedule& schedule, long t) {
        if (t < 1) {
            throw std::invalid_argument("beta: t must be >= 1");
        }
        const double tt = static_cast<double>(t);
        double value = 0.0;
        if (schedule.kind == BetaSchedule::Kind::approximate) {
            value = schedule.c1 * std::log(schedule.c2 * tt);
        } else {
            constexpr double pi2 = std::numbers::pi * std::numbers::pi;
            const double dd = static_cast<double>(schedule.d);
            const double inner = std::log(5.0 * dd * schedule.a1 * pi2 * tt * tt / (3.0 * schedule.delta));
            value = 2.0 * std::log(5.0 * pi2 * tt * tt / (3.0 * schedule.delta)) +
                    2.0 * dd * std::log(tt * tt * dd * schedule.b1 * schedule.r * std::sqrt(std::max(inner, 0.0)));
        }
        return std::isfinite(value) ? std::max(value, 0.0) : 0.0;
    }

    /// Period of R-GP-UCB: ceil(min(T, 12 eps^(-1/4))); eps = 0 never resets inside the horizon.
    [[nodiscard]] inline long reset_period_for(double epsilon, long horizon) {
        check_rate_of_change(epsilon);
        if (horizon < 1) {
            throw ConfigError("horizon must be >= 1");
        }
        if (epsilon == 0.0) {
            return horizon;
        }
        const double n = std::min(static_cast<double>(horizon), 12.0 * std::pow(epsilon, -0.25));
        return static_cast<long>(std::ceil(n));
    }

    /// Index of max(mean + sqrt(beta) * std); ties go to the lowest index.
    [[nodiscard]] inline std::size_t select_query(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                                                  double beta_t) {
        if (mean.size() == 0 || mean.size() != variance.size()) {
            throw std::invalid_argument("select_query: need matching, non-empty mean and variance vectors");
        }
        const double scale = std::sqrt(std::max(beta_t, 0.0));
        std::size_t best = 0;
        double best_value = mean(0) + scale * std::sqrt(variance(0));
        for (Eigen::Index i = 1; i < mean.size(); ++i) {
            const double v = mean(i) + scale * std::sqrt(variance(i));
            if (v > best_value) {
                best_value = v;
                best = static_cast<std::size_t>(i);
            }
        }
        return best;
    }

    enum class PolicyKind { gp_ucb, tv_gp_ucb, r_gp_ucb, et_gp_ucb };

    [[nodiscard]] inline std::string to_string(PolicyKind k) {
        switch (k) {
            case PolicyKind::gp_ucb: return "GP-UCB";
            case PolicyKind::tv_gp_ucb: return "TV-GP-UCB";
            case PolicyKind::r_gp_ucb: return "R-GP-UCB";
            case PolicyKind::et_gp_ucb: return "ET-GP-UCB";
        }
        return "?";
    }

    [[nodiscard]] inline PolicyKind policy_kind_from_string(const std::string& s) {
        for (auto k : {PolicyKind::gp_ucb, PolicyKind::tv_gp_ucb, PolicyKind::r_gp_ucb, PolicyKind::et_gp_ucb}) {
            if (s == to_string(k)) {
                return k;
            }
        }
        throw ConfigError("unknown policy '" + s + "' (expected GP-UCB, TV-GP-UCB, R-GP-UCB or ET-GP-UCB)");
    }

    struct PolicySpec {
        PolicyKind kind = PolicyKind::et_gp_ucb;
        BetaSchedule beta;
        double epsilon = 0.0;  ///< TV-GP-UCB model rate of change
        long reset_period = 0; ///< R-GP-UCB period N_const
        double delta_B = 0.1;  ///< ET-GP-UCB trigger confidence
    };

    /// Per-run mutable state shared by all four policies.
    struct PolicyState {
        Dataset dataset;
        std::vector<std::size_t> data_index; ///< candidate index of each dataset entry
        std::vector<long> reset_log;

        [[nodiscard]] long reset_clock() const { return static_cast<long>(dataset.size()) + 1; }
    };

    struct PolicyContext {
        std::shared_ptr<const CandidateCovariance> candidates;
        NoiseModel noise;
        long horizon = 1;
    };

    struct Feedback {
        long t = 1;
        std::size_t x_index = 0;
        double y = 0.0;
    };

    struct Acquisition {
        std::size_t index = 0;
        double beta = 0.0;
        Eigen::VectorXd mean;
        Eigen::VectorXd variance;
    };

    struct StepResult {
        bool reset = false;
        std::optional<TriggerEvaluation> trigger;
        std::optional<Acquisition> next; ///< query for t + 1, absent after the last step
    };

    namespace detail {
        inline Eigen::MatrixXd gather(const Eigen::MatrixXd& g, const std::vector<std::size_t>& rows,
                                      const std::vector<std::size_t>& cols) {
            Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j) {
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        g(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
                }
            }
            return out;
        }

        inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& g, const std::vector<std::size_t>& rows) {
            Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), g.cols());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out.row(static_cast<Eigen::Index>(i)) = g.row(static_cast<Eigen::Index>(rows[i]));
            }
            return out;
        }

        /// Posterior over the whole candidate set; epsilon = 0 gives the static model.
        inline void candidate_posterior(const PolicyContext& ctx, const PolicyState& state, double epsilon,
                                        long t_query, Eigen::VectorXd& mean, Eigen::VectorXd& variance) {
            const auto& cand = *ctx.candidates;
            const Eigen::VectorXd prior = cand.prior_variance();
            if (state.dataset.empty()) {
                mean = Eigen::VectorXd::Zero(prior.size());
                variance = prior;
                return;
            }
            Eigen::MatrixXd k_data = gather(cand.gram(), state.data_index, state.data_index);
            Eigen::MatrixXd k_star = gather_rows(cand.gram(), state.data_index);
            if (epsilon != 0.0) {
                const auto times = state.dataset.times();
                k_data = k_data.cwiseProduct(temporal_gram(epsilon, times));
                k_star = temporal_weights(epsilon, times, t_query).asDiagonal() * k_star;
            }
            const GpPosterior post(k_data, state.dataset.targets(), ctx.noise);
            post.predict_batch(k_star, prior, mean, variance);
        }

        inline double model_epsilon(const PolicySpec& spec) {
            return spec.kind == PolicyKind::tv_gp_ucb ? spec.epsilon : 0.0;
        }

        inline void append(const PolicyContext& ctx, PolicyState& state, const Feedback& fb) {
            state.dataset.append(ctx.candidates->points()[fb.x_index], fb.y, fb.t);
            state.data_index.push_back(fb.x_index);
        }

        inline void clear(PolicyState& state, long t) {
            state.dataset.clear(t);
            state.data_index.clear();
        }

        inline void check_feedback(const PolicyContext& ctx, const Feedback& fb) {
            if (fb.x_index >= ctx.candidates->size()) {
                throw std::out_of_range("feedback query index outside the candidate set");
            }
        }
    } // namespace detail

    /// UCB maximizer at step t under the policy's posterior model.
    [[nodiscard]] inline Acquisition acquire(const PolicySpec& spec, const PolicyContext& ctx, const PolicyState& state,
                                             long t) {
        Acquisition acq;
        acq.beta = beta(spec.beta, t);
        detail::candidate_posterior(ctx, state, detail::model_epsilon(spec), t, acq.mean, acq.variance);
        acq.index = select_query(acq.mean, acq.variance, acq.beta);
        return acq;
    }

    namespace detail {
        inline StepResult finish(const PolicySpec& spec, const PolicyContext& ctx, const PolicyState& state, long t,
                                 StepResult result) {
            if (t < ctx.horizon) {
                result.next = acquire(spec, ctx, state, t + 1);
            }
            return result;
        }
    } // namespace detail

    /// Time-invariant GP-UCB: always appends.
    inline StepResult step_gp_ucb(const PolicySpec& spec, const PolicyContext& ctx, PolicyState& state,
                                  const Feedback& fb) {
        detail::check_feedback(ctx, fb);
        detail::append(ctx, state, fb);
        return detail::finish(spec, ctx, state, fb.t, {});
    }

    /// TV-GP-UCB: appends and forgets through the temporal kernel.
    inline StepResult step_tv_gp_ucb(const PolicySpec& spec, const PolicyContext& ctx, PolicyState& state,
                                     const Feedback& fb) {
        detail::check_feedback(ctx, fb);
        detail::append(ctx, state, fb);
        return detail::finish(spec, ctx, state, fb.t, {});
    }

    /// R-GP-UCB: appends, then empties the dataset after every reset_period-th step.
    inline StepResult step_r_gp_ucb(const PolicySpec& spec, const PolicyContext& ctx, PolicyState& state,
                                    const Feedback& fb) {
        detail::check_feedback(ctx, fb);
        if (spec.reset_period < 1) {
            throw ConfigError("R-GP-UCB reset period must be >= 1");
        }
        StepResult result;
        detail::append(ctx, state, fb);
        if (fb.t % spec.reset_period == 0) {
            detail::clear(state, fb.t);
            state.reset_log.push_back(fb.t);
            result.reset = true;
        }
        return detail::finish(spec, ctx, state, fb.t, std::move(result));
    }

    /**
     * ET-GP-UCB: tests the new observation against the static posterior of the
     * current dataset. When the trigger fires the dataset restarts from the
     * triggering pair alone; otherwise the pair is appended.
     */
    inline StepResult step_et_gp_ucb(const PolicySpec& spec, const PolicyContext& ctx, PolicyState& state,
                                     const Feedback& fb) {
        detail::check_feedback(ctx, fb);
        const auto& cand = *ctx.candidates;
        const auto xi = static_cast<Eigen::Index>(fb.x_index);
        PosteriorQueryResult at_x{0.0, cand.gram()(xi, xi)};
        if (!state.dataset.empty()) {
            const GpPosterior post(detail::gather(cand.gram(), state.data_index, state.data_index),
                                   state.dataset.targets(), ctx.noise);
            const Eigen::MatrixXd k = detail::gather(cand.gram(), state.data_index, {fb.x_index});
            at_x = post.predict(k.col(0), cand.gram()(xi, xi));
        }
        const TriggerConfig config(spec.delta_B, ctx.noise.sigma_n_sq);
        StepResult result;
        result.trigger = evaluate_trigger(config, at_x, fb.y, state.reset_clock());
        if (result.trigger->fired) {
            detail::clear(state, fb.t);
            state.reset_log.push_back(fb.t);
            result.reset = true;
        }
        detail::append(ctx, state, fb);
        return detail::finish(spec, ctx, state, fb.t, std::move(result));
    }

    inline StepResult step_policy(const PolicySpec& spec, const PolicyContext& ctx, PolicyState& state,
                                  const Feedback& fb) {
        switch (spec.kind) {
            case PolicyKind::gp_ucb: return step_gp_ucb(spec, ctx, state, fb);
            case PolicyKind::tv_gp_ucb: return step_tv_gp_ucb(spec, ctx, state, fb);
            case PolicyKind::r_gp_ucb: return step_r_gp_ucb(spec, ctx, state, fb);
            case PolicyKind::et_gp_ucb: return step_et_gp_ucb(spec, ctx, state, fb);
        }
        throw std::logic_error("unhandled policy kind");
    }

    inline void validate(const PolicySpec& spec) {
        spec.beta.validate();
        switch (spec.kind) {
            case PolicyKind::tv_gp_ucb: check_rate_of_change(spec.epsilon); break;
            case PolicyKind::r_gp_ucb:
                if (spec.reset_period < 1) {
                    throw ConfigError("R-GP-UCB reset period must be >= 1");
                }
                break;
            case PolicyKind::et_gp_ucb: (void)TriggerConfig(spec.delta_B, 1.0); break;
            case PolicyKind::gp_ucb: break;
        }
    }

} // namespace etbo

#endif // ETBO_ALGORITHMS_HPP
