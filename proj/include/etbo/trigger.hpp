#ifndef ETBO_TRIGGER_HPP
#define ETBO_TRIGGER_HPP
#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "gp_posterior.hpp"

namespace etbo {

    // All quantities below are indexed by the reset clock t' (steps since the
    // most recent reset, starting at 1), never by absolute time.

    namespace detail {
        inline void check_clock(long t_prime) {
            if (t_prime < 1) {
                throw std::invalid_argument("reset clock t' must be >= 1, got " + std::to_string(t_prime));
            }
        }
        inline void check_confidence(double delta, const char* name) {
            if (!(delta > 0.0 && delta < 1.0)) {
                throw std::invalid_argument(std::string(name) + " must lie in (0, 1), got " + std::to_string(delta));
            }
        }
    } // namespace detail

    /// pi^2 t'^2 / 6; the reciprocals sum to one over t' >= 1.
    [[nodiscard]] inline double pi_t(long t_prime) {
        detail::check_clock(t_prime);
        const double t = static_cast<double>(t_prime);
        return std::numbers::pi * std::numbers::pi * t * t / 6.0;
    }

    /// Scale of the uniform error bound for a noise-free sample: 2 ln(pi_t' / delta).
    [[nodiscard]] inline double confidence_scale(long t_prime, double delta) {
        detail::check_confidence(delta, "delta");
        return 2.0 * std::log(pi_t(t_prime) / delta);
    }

    /// 2 ln(2 pi_t' / delta_B): the bound scale once half the budget goes to the noise.
    [[nodiscard]] inline double rho_t(long t_prime, double delta_B) {
        detail::check_confidence(delta_B, "delta_B");
        return 2.0 * std::log(2.0 * pi_t(t_prime) / delta_B);
    }

    /// sqrt(2 sigma_n^2 ln(2 pi_t' / delta_B)) = sigma_n sqrt(rho_t').
    [[nodiscard]] inline double noise_bound(long t_prime, double delta_B, double sigma_n_sq) {
        detail::check_confidence(delta_B, "delta_B");
        if (!(sigma_n_sq >= 0.0)) {
            throw std::invalid_argument("noise variance must be non-negative");
        }
        return std::sqrt(2.0 * sigma_n_sq * std::log(2.0 * pi_t(t_prime) / delta_B));
    }

    struct TriggerConfig {
        TriggerConfig(double delta_b, double noise_variance) : delta_B(delta_b), sigma_n_sq(noise_variance) {
            if (!(delta_B > 0.0 && delta_B < 1.0)) {
                throw ConfigError("delta_B must lie in (0, 1), got " + std::to_string(delta_B));
            }
            if (!(sigma_n_sq > 0.0)) {
                throw ConfigError("trigger noise variance must be positive");
            }
        }
        double delta_B;
        double sigma_n_sq;
    };

    struct TriggerEvaluation {
        double psi = 0.0;   ///< |y_t - mu(x_t)|
        double kappa = 0.0; ///< sqrt(rho_t') sigma(x_t) + w_bar_t'
        bool fired = false;
        long t_prime = 1;
    };

    /**
     * Compares the new observation against the posterior of the pre-update
     * dataset at the same location. `t_prime` is the clock position of the
     * incoming observation, i.e. |D_t| + 1.
     */
    [[nodiscard]] inline TriggerEvaluation evaluate_trigger(const TriggerConfig& config,
                                                            const PosteriorQueryResult& posterior_at_xt, double y_t,
                                                            long t_prime) {
        TriggerEvaluation ev;
        ev.t_prime = t_prime;
        ev.psi = std::abs(y_t - posterior_at_xt.mean);
        ev.kappa = std::sqrt(rho_t(t_prime, config.delta_B)) * std::sqrt(std::max(posterior_at_xt.variance, 0.0)) +
                   noise_bound(t_prime, config.delta_B, config.sigma_n_sq);
        ev.fired = ev.psi > ev.kappa;
        return ev;
    }

} // namespace etbo

#endif // ETBO_TRIGGER_HPP
