#ifndef ETBO_SYNTHETIC_HPP
#define ETBO_SYNTHETIC_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "domain.hpp"
#include "errors.hpp"
#include "gp_posterior.hpp"
#include "random.hpp"

namespace etbo {

    /// Piecewise-constant rate of change: eps(t) is the value of the last piece starting at or before t.
    class EpsilonSchedule {
    public:
        struct Piece {
            long start = 1;
            double epsilon = 0.0;
        };

        EpsilonSchedule(double constant = 0.0) : pieces_{{1, constant}} { check_rate_of_change(constant); }

        explicit EpsilonSchedule(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
            if (pieces_.empty() || pieces_.front().start != 1) {
                throw ConfigError("epsilon schedule must start at t = 1");
            }
            for (std::size_t i = 0; i < pieces_.size(); ++i) {
                check_rate_of_change(pieces_[i].epsilon);
                if (i > 0 && pieces_[i].start <= pieces_[i - 1].start) {
                    throw ConfigError("epsilon schedule start steps must strictly increase");
                }
            }
        }

        [[nodiscard]] double at(long t) const {
            double eps = pieces_.front().epsilon;
            for (const auto& p : pieces_) {
                if (p.start > t) {
                    break;
                }
                eps = p.epsilon;
            }
            return eps;
        }

        [[nodiscard]] double max_epsilon() const {
            double m = 0.0;
            for (const auto& p : pieces_) {
                m = std::max(m, p.epsilon);
            }
            return m;
        }

        [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }

    private:
        std::vector<Piece> pieces_;
    };

    /**
     * f_1 = g_1, f_t = sqrt(1 - eps) f_{t-1} + sqrt(eps) g_t with i.i.d. prior
     * draws g_t, all on a fixed grid. The marginal law of every f_t is the prior.
     */
    class MarkovChainObjective {
    public:
        MarkovChainObjective(std::shared_ptr<const GpSampler> sampler, EpsilonSchedule schedule, std::uint64_t seed)
            : sampler_(std::move(sampler)), schedule_(std::move(schedule)), rng_(make_rng(seed, Stream::objective)) {
            values_ = sampler_->draw(rng_);
        }

        void advance(long t) {
            if (t != t_ + 1) {
                throw std::invalid_argument("objective must advance one step at a time (at " + std::to_string(t_) +
                                            ", asked for " + std::to_string(t) + ")");
            }
            t_ = t;
            const double eps = schedule_.at(t);
            if (eps == 0.0) {
                return;
            }
            const Eigen::VectorXd g = sampler_->draw(rng_);
            values_ = std::sqrt(1.0 - eps) * values_ + std::sqrt(eps) * g;
        }

        [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
        [[nodiscard]] long time() const { return t_; }

    private:
        std::shared_ptr<const GpSampler> sampler_;
        EpsilonSchedule schedule_;
        Rng rng_;
        Eigen::VectorXd values_;
        long t_ = 1;
    };

    /// Two independent prior draws; the second replaces the first from change_step on.
    class SuddenChangeObjective {
    public:
        SuddenChangeObjective(const std::shared_ptr<const GpSampler>& sampler, long change_step, std::uint64_t seed)
            : change_step_(change_step) {
            if (change_step < 1) {
                throw ConfigError("change step must be >= 1");
            }
            Rng rng = make_rng(seed, Stream::objective);
            before_ = sampler->draw(rng);
            after_ = sampler->draw(rng);
        }

        void advance(long t) {
            if (t != t_ + 1) {
                throw std::invalid_argument("objective must advance one step at a time");
            }
            t_ = t;
        }

        [[nodiscard]] const Eigen::VectorXd& values() const { return t_ >= change_step_ ? after_ : before_; }
        [[nodiscard]] long time() const { return t_; }
        [[nodiscard]] long change_step() const { return change_step_; }

    private:
        long change_step_;
        Eigen::VectorXd before_, after_;
        long t_ = 1;
    };

    /// Recorded values: column t - 1 holds f_t over the arms.
    class ReplayObjective {
    public:
        explicit ReplayObjective(std::shared_ptr<const Eigen::MatrixXd> table) : table_(std::move(table)) {
            if (table_->cols() == 0 || table_->rows() == 0) {
                throw ConfigError("replay objective needs a non-empty table");
            }
            values_ = table_->col(0);
        }

        void advance(long t) {
            if (t != t_ + 1) {
                throw std::invalid_argument("objective must advance one step at a time");
            }
            if (t > table_->cols()) {
                throw std::out_of_range("replay objective exhausted at t = " + std::to_string(t));
            }
            t_ = t;
            values_ = table_->col(t - 1);
        }

        [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
        [[nodiscard]] long time() const { return t_; }

    private:
        std::shared_ptr<const Eigen::MatrixXd> table_;
        Eigen::VectorXd values_;
        long t_ = 1;
    };

    class Objective {
    public:
        Objective(MarkovChainObjective o) : impl_(std::move(o)) {}
        Objective(SuddenChangeObjective o) : impl_(std::move(o)) {}
        Objective(ReplayObjective o) : impl_(std::move(o)) {}

        void advance(long t) {
            std::visit([t](auto& o) { o.advance(t); }, impl_);
        }
        [[nodiscard]] const Eigen::VectorXd& values() const {
            return std::visit([](const auto& o) -> const Eigen::VectorXd& { return o.values(); }, impl_);
        }
        [[nodiscard]] long time() const {
            return std::visit([](const auto& o) { return o.time(); }, impl_);
        }

    private:
        std::variant<MarkovChainObjective, SuddenChangeObjective, ReplayObjective> impl_;
    };

    /// y = f_t(x) + w with w ~ N(0, sigma_n^2) drawn fresh from `rng`.
    [[nodiscard]] inline double observe(const Eigen::VectorXd& values, std::size_t index, double sigma_n_sq,
                                        Rng& rng) {
        if (index >= static_cast<std::size_t>(values.size())) {
            throw std::out_of_range("observe: index outside the objective grid");
        }
        if (!(sigma_n_sq >= 0.0)) {
            throw std::invalid_argument("observe: negative noise variance");
        }
        std::normal_distribution<double> normal(0.0, 1.0);
        const double w = normal(rng);
        return values(static_cast<Eigen::Index>(index)) + std::sqrt(sigma_n_sq) * w;
    }

    /// Off-grid queries are mapped to the nearest grid point first.
    [[nodiscard]] inline double observe(const Objective& objective, const Domain& domain, const Point& x,
                                        double sigma_n_sq, Rng& rng) {
        return observe(objective.values(), domain.nearest_index(x), sigma_n_sq, rng);
    }

    struct Optimum {
        std::size_t index = 0;
        double value = 0.0;
    };

    /// Exhaustive argmax over the grid; ties go to the lowest index.
    [[nodiscard]] inline Optimum true_optimum(const Eigen::VectorXd& values) {
        if (values.size() == 0) {
            throw std::invalid_argument("true_optimum: empty grid");
        }
        Optimum best{0, values(0)};
        for (Eigen::Index i = 1; i < values.size(); ++i) {
            if (values(i) > best.value) {
                best = {static_cast<std::size_t>(i), values(i)};
            }
        }
        return best;
    }

    [[nodiscard]] inline Optimum true_optimum(const Objective& objective) { return true_optimum(objective.values()); }

} // namespace etbo

#endif // ETBO_SYNTHETIC_HPP
