#ifndef ETBO_PRESETS_HPP
#define ETBO_PRESETS_HPP
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace etbo {

    struct Preset {
        std::string name;
        std::string description;
        ExperimentConfig config;
    };

    namespace detail {
        inline PolicyConfig policy(const std::string& name, double epsilon, const BetaSchedule& beta,
                                   double delta_B = 0.1, std::string label = {}) {
            PolicyConfig p;
            p.name = name;
            p.label = std::move(label);
            p.epsilon = epsilon;
            p.delta_B = delta_B;
            p.beta = beta;
            return p;
        }

        /// 2-D grid on [0,1]^2, SE kernel with l = 0.2, sigma_n^2 = 0.02.
        inline ExperimentConfig grid_base(const std::string& name, long horizon) {
            ExperimentConfig c;
            c.name = name;
            c.domain.kind = "grid";
            c.domain.lower = {0.0, 0.0};
            c.domain.upper = {1.0, 1.0};
            c.domain.resolution = {50, 50};
            c.kernel.kind = "squared_exponential";
            c.kernel.lengthscales = {0.2, 0.2};
            c.kernel.signal_variance = 1.0;
            c.noise_variance = 0.02;
            c.horizon = horizon;
            c.output = "out/" + name;
            return c;
        }

        inline ExperimentConfig within_model(const std::string& name, double true_eps, double model_eps) {
            ExperimentConfig c = grid_base(name, 400);
            c.objective.kind = "markov";
            c.objective.epsilon = true_eps;
            const auto beta = BetaSchedule::approximate(0.4, 4.0);
            c.policies = {policy("GP-UCB", 0.0, beta), policy("TV-GP-UCB", model_eps, beta),
                          policy("R-GP-UCB", model_eps, beta), policy("ET-GP-UCB", 0.0, beta, 0.1)};
            c.seeds = seed_range(0, 50);
            return c;
        }

        inline ExperimentConfig sensitivity(const std::string& name, double eps) {
            ExperimentConfig c = grid_base(name, 400);
            c.objective.kind = "markov";
            c.objective.epsilon = eps;
            const auto beta = BetaSchedule::approximate(0.4, 4.0);
            for (const char* d : {"0.005", "0.01", "0.05", "0.1", "0.5"}) {
                c.policies.push_back(
                    policy("ET-GP-UCB", 0.0, beta, std::stod(d), std::string("ET-GP-UCB(delta_B=") + d + ")"));
            }
            c.seeds = seed_range(0, 50);
            return c;
        }

        inline ExperimentConfig monte_carlo(const std::string& name, double eps) {
            ExperimentConfig c = grid_base(name, 200);
            c.objective.kind = "markov";
            c.objective.epsilon = eps;
            c.policies = {policy("ET-GP-UCB", 0.0, BetaSchedule::approximate(0.4, 4.0), 0.1)};
            c.stopping.runs = 1000;
            c.stopping.delta = 0.2;
            c.seeds = seed_range(0, c.stopping.runs);
            return c;
        }
    } // namespace detail

    [[nodiscard]] inline std::vector<Preset> presets() {
        using detail::policy;
        std::vector<Preset> out;
        for (const auto& [tag, eps] : {std::pair{"0.01", 0.01}, std::pair{"0.03", 0.03}, std::pair{"0.05", 0.05}}) {
            const std::string name = std::string("within-model-eps") + tag;
            out.push_back({name,
                           std::string("within-model comparison, eps = ") + tag +
                               ", T = 400, c1 = 0.4, c2 = 4, 50 seeds",
                           detail::within_model(name, eps, eps)});
        }
        out.push_back({"misspecified",
                       "true eps = 0.05, TV-GP-UCB and R-GP-UCB configured at eps = 0.001, 50 seeds",
                       detail::within_model("misspecified", 0.05, 0.001)});
        for (const auto& [tag, eps] : {std::pair{"0.01", 0.01}, std::pair{"0.03", 0.03}, std::pair{"0.05", 0.05}}) {
            const std::string name = std::string("sensitivity-eps") + tag;
            out.push_back({name,
                           std::string("ET-GP-UCB over delta_B in {0.005, 0.01, 0.05, 0.1, 0.5}, eps = ") + tag,
                           detail::sensitivity(name, eps)});
        }
        {
            ExperimentConfig c = detail::grid_base("sudden-change", 300);
            c.objective.kind = "sudden";
            c.objective.change_step = 100;
            const auto beta = BetaSchedule::approximate(0.8, 4.0);
            c.policies = {policy("GP-UCB", 0.0, beta), policy("TV-GP-UCB", 0.03, beta),
                          policy("R-GP-UCB", 0.03, beta), policy("ET-GP-UCB", 0.0, beta, 0.1)};
            c.seeds = seed_range(0, 50);
            out.push_back({"sudden-change", "objective redrawn at t = 100, T = 300, c1 = 0.8, c2 = 4, 50 seeds",
                           std::move(c)});
        }
        out.push_back({"mc-eps0.03", "stopping-time Monte Carlo, eps = 0.03, T = 200, 1000 runs",
                       detail::monte_carlo("mc-eps0.03", 0.03)});
        out.push_back({"mc-eps0.1", "stopping-time Monte Carlo, eps = 0.1, T = 200, 1000 runs",
                       detail::monte_carlo("mc-eps0.1", 0.1)});
        {
            ExperimentConfig c = detail::grid_base("static-eps0", 200);
            c.objective.kind = "markov";
            c.objective.epsilon = 0.0;
            c.policies = {policy("ET-GP-UCB", 0.0, BetaSchedule::approximate(0.4, 4.0), 0.1)};
            c.seeds = seed_range(0, 500);
            out.push_back({"static-eps0", "static objective, ET-GP-UCB false-positive check, T = 200, 500 seeds",
                           std::move(c)});
        }
        return out;
    }

    [[nodiscard]] inline std::optional<Preset> find_preset(const std::string& name) {
        for (auto& p : presets()) {
            if (p.name == name) {
                return p;
            }
        }
        return std::nullopt;
    }

    [[nodiscard]] inline ExperimentConfig preset_config(const std::string& name) {
        auto p = find_preset(name);
        if (!p) {
            std::string known;
            for (const auto& q : presets()) {
                known += (known.empty() ? "" : ", ") + q.name;
            }
            throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
        }
        return p->config;
    }

} // namespace etbo

#endif // ETBO_PRESETS_HPP
