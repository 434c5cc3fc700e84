#ifndef ETBO_STOPPING_TIME_HPP
#define ETBO_STOPPING_TIME_HPP
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "experiment.hpp"

namespace etbo {

    /**
     * Distribution of the first trigger activation over independent runs.
     * Runs without a reset inside the horizon are censored; for the mean,
     * median and quantile check they count as tau = T + 1.
     */
    struct StoppingTimeResult {
        long horizon = 0;
        double delta = 0.2;
        std::vector<std::optional<long>> taus;  ///< per run, in seed order
        std::vector<std::size_t> counts;        ///< counts[tau - 1] for tau in 1..T
        std::size_t censored = 0;
        double mean_tau = 0.0;
        double median_tau = 0.0;
        double tau_bar = 0.0;                   ///< mean_tau / delta
        double prob_below_tau_bar = 0.0;        ///< empirical P{tau < tau_bar}
        long periodic_reset = 0;                ///< R-GP-UCB period for the objective's epsilon

        [[nodiscard]] double censored_fraction() const {
            return taus.empty() ? 0.0 : static_cast<double>(censored) / static_cast<double>(taus.size());
        }
    };

    [[nodiscard]] inline StoppingTimeResult summarize_stopping_times(std::vector<std::optional<long>> taus, long horizon,
                                                                     double delta) {
        StoppingTimeResult out;
        out.horizon = horizon;
        out.delta = delta;
        out.counts.assign(static_cast<std::size_t>(horizon), 0);
        std::vector<double> values;
        values.reserve(taus.size());
        for (const auto& tau : taus) {
            if (tau) {
                ++out.counts.at(static_cast<std::size_t>(*tau - 1));
                values.push_back(static_cast<double>(*tau));
            } else {
                ++out.censored;
                values.push_back(static_cast<double>(horizon + 1));
            }
        }
        out.taus = std::move(taus);
        if (values.empty()) {
            return out;
        }
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        out.mean_tau = sum / static_cast<double>(values.size());
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        out.median_tau = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        out.tau_bar = out.mean_tau / delta;
        const auto below = std::count_if(values.begin(), values.end(), [&](double v) { return v < out.tau_bar; });
        out.prob_below_tau_bar = static_cast<double>(below) / static_cast<double>(n);
        return out;
    }

    /**
     * Runs the config's first ET-GP-UCB policy until its first reset for
     * `n_runs` seeds 0..n_runs-1 (or the config's seeds when n_runs is 0).
     */
    [[nodiscard]] inline StoppingTimeResult stopping_time_histogram(const ExperimentConfig& config, std::size_t n_runs,
                                                                    unsigned jobs = 1) {
        ExperimentConfig cfg = config;
        if (n_runs > 0) {
            cfg.seeds = seed_range(0, n_runs);
        }
        auto et = std::find_if(cfg.policies.begin(), cfg.policies.end(),
                               [](const auto& p) { return p.name == to_string(PolicyKind::et_gp_ucb); });
        if (et == cfg.policies.end()) {
            throw ConfigError("stopping-time histogram needs an ET-GP-UCB policy in the config");
        }
        cfg.policies = {*et};
        const ExperimentSetup setup(cfg);
        std::vector<std::optional<long>> taus(cfg.seeds.size());
        parallel_for(taus.size(), jobs, [&](std::size_t i) {
            const RegretTrace tr = run_single(setup, 0, cfg.seeds[i], RunOptions{true});
            if (!tr.rows.empty() && tr.rows.back().reset) {
                taus[i] = tr.rows.back().t;
            }
        });
        auto out = summarize_stopping_times(std::move(taus), setup.horizon(), cfg.stopping.delta);
        if (cfg.objective.kind == "markov") {
            out.periodic_reset = reset_period_for(cfg.objective.epsilon_schedule().max_epsilon(), setup.horizon());
        }
        return out;
    }

} // namespace etbo

#endif // ETBO_STOPPING_TIME_HPP
