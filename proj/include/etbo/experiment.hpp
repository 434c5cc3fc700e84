#ifndef ETBO_EXPERIMENT_HPP
#define ETBO_EXPERIMENT_HPP
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "algorithms.hpp"
#include "arms_replay.hpp"
#include "config.hpp"
#include "domain.hpp"
#include "errors.hpp"
#include "gp_posterior.hpp"
#include "kernels.hpp"
#include "random.hpp"
#include "synthetic.hpp"

namespace etbo {

    struct TraceRow {
        long t = 0;
        std::size_t x_index = 0;
        double y = 0.0;
        double f_xt = 0.0;
        double f_star = 0.0;
        double r_t = 0.0;
        double R_t = 0.0;
        bool reset = false;
        std::optional<double> psi;
        std::optional<double> kappa;
    };

    /// One (policy, seed) run.
    struct RegretTrace {
        std::string policy;
        std::size_t policy_index = 0;
        std::uint64_t seed = 0;
        std::vector<TraceRow> rows;

        [[nodiscard]] double cumulative_regret() const { return rows.empty() ? 0.0 : rows.back().R_t; }
        [[nodiscard]] std::size_t reset_count() const {
            return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.reset; }));
        }
    };

    struct PolicySummary {
        std::string policy;
        double mean_RT = 0.0;
        double std_RT = 0.0; ///< population standard deviation over seeds
        double mean_resets = 0.0;
        std::size_t runs = 0;
    };

    /**
     * Everything a run needs that does not depend on the seed: candidate set,
     * kernel, cached Gram matrix, prior sampler and resolved policy specs.
     * Built once per experiment and shared read-only by all workers.
     */
    class ExperimentSetup {
    public:
        explicit ExperimentSetup(const ExperimentConfig& config) : config_(config) {
            validate(config_);
            std::optional<AnyKernel> kernel;
            std::optional<Domain> domain;
            if (config_.domain.kind == "grid") {
                domain = Domain::grid(config_.domain.lower, config_.domain.upper, config_.domain.resolution);
                Eigen::VectorXd ls = Eigen::Map<const Eigen::VectorXd>(
                    config_.kernel.lengthscales.data(), static_cast<Eigen::Index>(config_.kernel.lengthscales.size()));
                kernel.emplace(SquaredExponentialKernel(ls, config_.kernel.signal_variance));
            } else {
                std::optional<EmpiricalKernel> empirical;
                if (config_.objective.kind == "arms_replay") {
                    auto data = ingest_arms_csv(config_.objective.csv_path, config_.objective.train,
                                                config_.objective.test);
                    replay_ = std::make_shared<const Eigen::MatrixXd>(data.replay);
                    if (config_.kernel.matrix_path.empty()) {
                        empirical.emplace(data.covariance);
                    }
                }
                if (!empirical) {
                    empirical.emplace(load_empirical_kernel_csv(config_.kernel.matrix_path));
                }
                const std::size_t arms = empirical->arm_count();
                if (config_.domain.arms != 0 && config_.domain.arms != arms) {
                    throw ConfigError("domain.arms = " + std::to_string(config_.domain.arms) +
                                      " but the kernel covers " + std::to_string(arms) + " arms");
                }
                if (replay_ && static_cast<std::size_t>(replay_->rows()) != arms) {
                    throw ConfigError("kernel matrix and replay data disagree on the number of arms");
                }
                domain = Domain::arms(arms);
                kernel.emplace(*empirical);
            }
            horizon_ = config_.horizon;
            if (replay_) {
                if (horizon_ == 0) {
                    horizon_ = static_cast<long>(replay_->cols());
                }
                if (horizon_ > replay_->cols()) {
                    throw ConfigError("horizon " + std::to_string(horizon_) + " exceeds the " +
                                      std::to_string(replay_->cols()) + " replay steps");
                }
            }
            kernel_ = std::make_shared<const AnyKernel>(*kernel);
            domain_ = std::make_shared<const Domain>(*domain);
            candidates_ = std::make_shared<const CandidateCovariance>(*kernel_, domain_->candidates());
            if (!replay_) {
                sampler_ = std::make_shared<const GpSampler>(candidates_->gram());
            }
            for (const auto& p : config_.policies) {
                PolicySpec spec;
                spec.kind = policy_kind_from_string(p.name);
                spec.beta = p.beta;
                spec.epsilon = p.epsilon;
                spec.delta_B = p.delta_B;
                spec.reset_period = p.reset_period;
                if (spec.kind == PolicyKind::r_gp_ucb && spec.reset_period == 0) {
                    spec.reset_period = reset_period_for(p.epsilon, horizon_);
                }
                validate(spec);
                specs_.push_back(spec);
                labels_.push_back(p.display_label());
            }
        }

        [[nodiscard]] Objective make_objective(std::uint64_t seed) const {
            if (replay_) {
                return ReplayObjective(replay_);
            }
            if (config_.objective.kind == "sudden") {
                return SuddenChangeObjective(sampler_, config_.objective.change_step, seed);
            }
            return MarkovChainObjective(sampler_, config_.objective.epsilon_schedule(), seed);
        }

        [[nodiscard]] PolicyContext context() const { return PolicyContext{candidates_, NoiseModel(config_.noise_variance), horizon_}; }

        [[nodiscard]] const ExperimentConfig& config() const { return config_; }
        [[nodiscard]] const std::vector<PolicySpec>& specs() const { return specs_; }
        [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
        [[nodiscard]] long horizon() const { return horizon_; }
        [[nodiscard]] const AnyKernel& kernel() const { return *kernel_; }
        [[nodiscard]] const Domain& domain() const { return *domain_; }
        [[nodiscard]] const CandidateCovariance& candidates() const { return *candidates_; }

    private:
        ExperimentConfig config_;
        long horizon_ = 0;
        std::shared_ptr<const AnyKernel> kernel_;
        std::shared_ptr<const Domain> domain_;
        std::shared_ptr<const CandidateCovariance> candidates_;
        std::shared_ptr<const GpSampler> sampler_;
        std::shared_ptr<const Eigen::MatrixXd> replay_;
        std::vector<PolicySpec> specs_;
        std::vector<std::string> labels_;
    };

    struct RunOptions {
        bool stop_at_first_reset = false;
    };

    /**
     * Sequential loop select -> observe -> policy step for one policy and seed.
     * The objective and the observation noise depend only on the seed, so all
     * policies of an experiment face the same realizations.
     */
    [[nodiscard]] inline RegretTrace run_single(const ExperimentSetup& setup, std::size_t policy_index,
                                                std::uint64_t seed, RunOptions options = {}) {
        const PolicySpec& spec = setup.specs().at(policy_index);
        const PolicyContext ctx = setup.context();
        const double sigma_n_sq = setup.config().noise_variance;
        Objective objective = setup.make_objective(seed);
        Rng noise_rng = make_rng(seed, Stream::noise);

        RegretTrace trace;
        trace.policy = setup.labels().at(policy_index);
        trace.policy_index = policy_index;
        trace.seed = seed;
        trace.rows.reserve(static_cast<std::size_t>(setup.horizon()));

        PolicyState state;
        Acquisition acq = acquire(spec, ctx, state, 1);
        double cumulative = 0.0;
        for (long t = 1; t <= setup.horizon(); ++t) {
            if (t > 1) {
                objective.advance(t);
            }
            const Eigen::VectorXd& f = objective.values();
            const std::size_t x = acq.index;
            const double y = observe(f, x, sigma_n_sq, noise_rng);
            const Optimum best = true_optimum(f);

            TraceRow row;
            row.t = t;
            row.x_index = x;
            row.y = y;
            row.f_xt = f(static_cast<Eigen::Index>(x));
            row.f_star = best.value;
            row.r_t = best.value - row.f_xt;
            cumulative += row.r_t;
            row.R_t = cumulative;

            StepResult step = step_policy(spec, ctx, state, Feedback{t, x, y});
            row.reset = step.reset;
            if (step.trigger) {
                row.psi = step.trigger->psi;
                row.kappa = step.trigger->kappa;
            }
            trace.rows.push_back(row);
            if (options.stop_at_first_reset && step.reset) {
                break;
            }
            if (step.next) {
                acq = std::move(*step.next);
            }
        }
        return trace;
    }

    /**
     * Runs `fn(i)` for i in [0, n) on at most `jobs` threads. Exceptions are
     * collected and the one from the lowest task index is rethrown.
     */
    template <typename Fn>
    void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
        if (jobs <= 1 || n <= 1) {
            for (std::size_t i = 0; i < n; ++i) {
                fn(i);
            }
            return;
        }
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::size_t error_index = std::numeric_limits<std::size_t>::max();
        std::exception_ptr error;
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::jthread> pool;
        const auto count = std::min<std::size_t>(jobs, n);
        for (std::size_t w = 0; w < count; ++w) {
            pool.emplace_back(worker);
        }
        pool.clear();
        if (error) {
            std::rethrow_exception(error);
        }
    }

    /// All (policy, seed) runs, ordered by policy (config order), then seed order.
    [[nodiscard]] inline std::vector<RegretTrace> run_experiment(const ExperimentSetup& setup, unsigned jobs = 1) {
        const auto& seeds = setup.config().seeds;
        const std::size_t n_pol = setup.specs().size();
        std::vector<RegretTrace> traces(n_pol * seeds.size());
        parallel_for(traces.size(), jobs, [&](std::size_t i) {
            traces[i] = run_single(setup, i / seeds.size(), seeds[i % seeds.size()]);
        });
        return traces;
    }

    [[nodiscard]] inline std::vector<RegretTrace> run_experiment(const ExperimentConfig& config, unsigned jobs = 1) {
        const ExperimentSetup setup(config);
        return run_experiment(setup, jobs);
    }

    /// Per-policy summary in order of first appearance.
    [[nodiscard]] inline std::vector<PolicySummary> summarize(const std::vector<RegretTrace>& traces) {
        std::vector<PolicySummary> out;
        std::vector<std::vector<const RegretTrace*>> groups;
        for (const auto& tr : traces) {
            auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.policy == tr.policy; });
            if (it == out.end()) {
                out.push_back(PolicySummary{tr.policy});
                groups.emplace_back();
                it = out.end() - 1;
            }
            groups[static_cast<std::size_t>(it - out.begin())].push_back(&tr);
        }
        for (std::size_t g = 0; g < out.size(); ++g) {
            const auto& runs = groups[g];
            const double n = static_cast<double>(runs.size());
            double sum = 0.0, resets = 0.0;
            for (const auto* r : runs) {
                sum += r->cumulative_regret();
                resets += static_cast<double>(r->reset_count());
            }
            const double mean = sum / n;
            double var = 0.0;
            for (const auto* r : runs) {
                var += (r->cumulative_regret() - mean) * (r->cumulative_regret() - mean);
            }
            out[g].mean_RT = mean;
            out[g].std_RT = std::sqrt(var / n);
            out[g].mean_resets = resets / n;
            out[g].runs = runs.size();
        }
        return out;
    }

    [[nodiscard]] inline const PolicySummary& summary_for(const std::vector<PolicySummary>& summaries,
                                                          const std::string& policy) {
        for (const auto& s : summaries) {
            if (s.policy == policy) {
                return s;
            }
        }
        throw std::out_of_range("no summary for policy '" + policy + "'");
    }

} // namespace etbo

#endif // ETBO_EXPERIMENT_HPP
