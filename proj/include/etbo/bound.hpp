#ifndef ETBO_BOUND_HPP
#define ETBO_BOUND_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "config.hpp"
#include "experiment.hpp"

namespace etbo {

    // Regret-bound diagnostic for ET-GP-UCB under the Markov-chain model:
    //
    //   R_T <= sqrt(C1 T beta_T (T / tau_bar + 1) gamma_tau_bar) + 2 + T phi_T
    //
    //   phi_T = 3 sqrt(beta_T (3 s^-2 + s^-4) tau_bar^3 eps)
    //         + (s^-2 + s^-4) tau_bar^3 eps (b0 sqrt(ln(5 a0 pi^2 T^2 / (2 delta))) + w_bar)
    //
    // with s^2 the noise variance, C1 = 72 / ln(1 + s^-2) and
    // w_bar = sqrt(2 s^2 ln(5 pi^2 tau_bar^2 / (6 delta))).

    [[nodiscard]] inline double regret_constant_c1(double sigma_n_sq) {
        return 72.0 / std::log(1.0 + 1.0 / sigma_n_sq);
    }

    [[nodiscard]] inline double bound_noise_term(double tau_bar, double delta, double sigma_n_sq) {
        constexpr double pi2 = std::numbers::pi * std::numbers::pi;
        return std::sqrt(2.0 * sigma_n_sq * std::log(5.0 * pi2 * tau_bar * tau_bar / (6.0 * delta)));
    }

    [[nodiscard]] inline double phi_T(double epsilon, double delta, double tau_bar, double beta_T, double sigma_n_sq,
                                      double a0, double b0, long T) {
        if (epsilon == 0.0) {
            return 0.0;
        }
        constexpr double pi2 = std::numbers::pi * std::numbers::pi;
        const double inv = 1.0 / sigma_n_sq;
        const double inv2 = inv * inv;
        const double tau3 = tau_bar * tau_bar * tau_bar;
        const double tt = static_cast<double>(T);
        const double first = 3.0 * std::sqrt(beta_T * (3.0 * inv + inv2) * tau3 * epsilon);
        const double sup_term = b0 * std::sqrt(std::log(5.0 * a0 * pi2 * tt * tt / (2.0 * delta)));
        const double second = (inv + inv2) * tau3 * epsilon * (sup_term + bound_noise_term(tau_bar, delta, sigma_n_sq));
        return first + second;
    }

    [[nodiscard]] inline double regret_bound(long T, double beta_T, double tau_bar, double gamma, double epsilon,
                                             double sigma_n_sq, const BoundConstants& c) {
        const double tt = static_cast<double>(T);
        const double main =
            std::sqrt(regret_constant_c1(sigma_n_sq) * tt * beta_T * (tt / tau_bar + 1.0) * std::max(gamma, 0.0));
        return main + 2.0 + tt * phi_T(epsilon, c.delta, tau_bar, beta_T, sigma_n_sq, c.a0, c.b0, T);
    }

    struct BoundRow {
        long t = 0;
        double beta_t = 0.0;
        double gamma_surrogate = 0.0; ///< realized information gain of the largest block so far (a lower surrogate)
        double phi = 0.0;
        double bound = 0.0;
        double R_t = 0.0;
    };

    inline void check_bound_constants(const BoundConstants& c) {
        if (!(c.tau_bar > 0.0)) {
            throw ConfigError("bound evaluation needs tau_bar > 0 (set bound.tau_bar or estimate it)");
        }
        if (!(c.delta > 0.0 && c.delta < 1.0)) {
            throw ConfigError("bound.delta must lie in (0, 1)");
        }
        if (!(c.a0 > 0.0) || !(c.b0 >= 0.0)) {
            throw ConfigError("bound constants a0 > 0 and b0 >= 0 are required");
        }
    }

    /**
     * Bound values for every prefix 1..t of a trace. gamma is replaced by the
     * realized information gain 1/2 ln det(I + s^-2 K) of the longest block
     * between resets observed so far.
     */
    [[nodiscard]] inline std::vector<BoundRow> evaluate_bound(const ExperimentSetup& setup, const BoundConstants& c,
                                                              const RegretTrace& trace) {
        check_bound_constants(c);
        double epsilon = c.epsilon;
        if (epsilon < 0.0) {
            if (setup.config().objective.kind != "markov") {
                throw ConfigError("bound.epsilon must be given for non-Markov objectives");
            }
            epsilon = setup.config().objective.epsilon_schedule().max_epsilon();
        }
        check_rate_of_change(epsilon);
        const PolicySpec& spec = setup.specs().at(trace.policy_index);
        const NoiseModel noise(setup.config().noise_variance);
        const auto& points = setup.candidates().points();

        // Blocks: the ET reset keeps the triggering query, other policies start empty.
        std::vector<std::vector<std::size_t>> blocks(1);
        for (const auto& row : trace.rows) {
            if (row.reset) {
                if (spec.kind == PolicyKind::et_gp_ucb) {
                    blocks.emplace_back();
                    blocks.back().push_back(row.x_index);
                    continue;
                }
                blocks.back().push_back(row.x_index);
                blocks.emplace_back();
                continue;
            }
            blocks.back().push_back(row.x_index);
        }
        std::vector<Eigen::VectorXd> gains;
        for (const auto& b : blocks) {
            PointSet pts;
            for (auto i : b) {
                pts.push_back(points[i]);
            }
            gains.push_back(prefix_information_gain(setup.kernel(), pts, noise));
        }

        std::vector<BoundRow> out;
        out.reserve(trace.rows.size());
        double best_gain = 0.0;
        std::size_t block = 0, pos = 0;
        for (const auto& row : trace.rows) {
            if (row.reset && spec.kind == PolicyKind::et_gp_ucb) {
                ++block;
                pos = 0;
            }
            if (pos < static_cast<std::size_t>(gains[block].size())) {
                best_gain = std::max(best_gain, gains[block](static_cast<Eigen::Index>(pos)));
            }
            ++pos;
            if (row.reset && spec.kind != PolicyKind::et_gp_ucb) {
                ++block;
                pos = 0;
            }
            BoundRow br;
            br.t = row.t;
            br.beta_t = beta(spec.beta, row.t);
            br.gamma_surrogate = best_gain;
            br.phi = phi_T(epsilon, c.delta, c.tau_bar, br.beta_t, noise.sigma_n_sq, c.a0, c.b0, row.t);
            br.bound = regret_bound(row.t, br.beta_t, c.tau_bar, best_gain, epsilon, noise.sigma_n_sq, c);
            br.R_t = row.R_t;
            out.push_back(br);
        }
        return out;
    }

} // namespace etbo

#endif // ETBO_BOUND_HPP
