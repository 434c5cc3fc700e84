#ifndef ETBO_GP_POSTERIOR_HPP
#define ETBO_GP_POSTERIOR_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "errors.hpp"
#include "kernels.hpp"
#include "random.hpp"

namespace etbo {

    struct Observation {
        Point x;
        double y = 0.0;
        long t_abs = 0;
    };

    /**
     * Observations gathered since the most recent reset, in arrival order.
     * Absolute time stamps strictly increase, so the position of an entry
     * (1-based) is its reset clock.
     */
    class Dataset {
    public:
        void append(Point x, double y, long t_abs) {
            if (!entries_.empty() && t_abs <= entries_.back().t_abs) {
                throw std::invalid_argument("dataset time stamps must strictly increase (got " + std::to_string(t_abs) +
                                            " after " + std::to_string(entries_.back().t_abs) + ")");
            }
            entries_.push_back(Observation{std::move(x), y, t_abs});
        }

        /// Drops every entry; `t_abs` is recorded as the time of the reset.
        void clear(long t_abs) {
            entries_.clear();
            reset_time_ = t_abs;
        }

        [[nodiscard]] const std::vector<Observation>& entries() const { return entries_; }
        [[nodiscard]] std::size_t size() const { return entries_.size(); }
        [[nodiscard]] bool empty() const { return entries_.empty(); }
        [[nodiscard]] long reset_time() const { return reset_time_; }

        [[nodiscard]] PointSet points() const {
            PointSet out;
            out.reserve(entries_.size());
            for (const auto& e : entries_) {
                out.push_back(e.x);
            }
            return out;
        }

        [[nodiscard]] Eigen::VectorXd targets() const {
            Eigen::VectorXd y(static_cast<Eigen::Index>(entries_.size()));
            for (std::size_t i = 0; i < entries_.size(); ++i) {
                y(static_cast<Eigen::Index>(i)) = entries_[i].y;
            }
            return y;
        }

        [[nodiscard]] std::vector<long> times() const {
            std::vector<long> t;
            t.reserve(entries_.size());
            for (const auto& e : entries_) {
                t.push_back(e.t_abs);
            }
            return t;
        }

    private:
        std::vector<Observation> entries_;
        long reset_time_ = 0;
    };

    struct NoiseModel {
        explicit NoiseModel(double noise_variance) : sigma_n_sq(noise_variance) {
            if (!(sigma_n_sq > 0.0) || !std::isfinite(sigma_n_sq)) {
                throw ConfigError("noise variance must be positive, got " + std::to_string(sigma_n_sq));
            }
        }
        double sigma_n_sq;
    };

    struct PosteriorQueryResult {
        double mean = 0.0;
        double variance = 0.0;

        [[nodiscard]] double std_dev() const { return std::sqrt(variance); }
    };

    /// Cholesky factor of a symmetric matrix together with the diagonal jitter that made it succeed.
    struct JitteredCholesky {
        Eigen::MatrixXd lower;
        double jitter = 0.0;
    };

    /**
     * Factorizes `a`, retrying with diagonal jitter 1e-10, 1e-9, ..., 1e-4
     * when the plain factorization breaks down.
     */
    [[nodiscard]] inline JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& a) {
        constexpr double kFirstJitter = 1e-10;
        constexpr double kMaxJitter = 1e-4;
        const Eigen::Index n = a.rows();
        double jitter = 0.0;
        while (true) {
            Eigen::LLT<Eigen::MatrixXd> llt;
            if (jitter == 0.0) {
                llt.compute(a);
            } else {
                llt.compute(a + jitter * Eigen::MatrixXd::Identity(n, n));
            }
            if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
                return JitteredCholesky{llt.matrixL(), jitter};
            }
            jitter = jitter == 0.0 ? kFirstJitter : jitter * 10.0;
            if (jitter > kMaxJitter * 1.0000001) {
                throw NumericalError("Cholesky factorization failed for a " + std::to_string(n) + "x" +
                                     std::to_string(n) + " matrix even with jitter 1e-4");
            }
        }
    }

    /**
     * Exact GP posterior given an (optionally temporally weighted) Gram matrix of
     * the data. Factorizes K + sigma_n^2 I once; each prediction then takes the
     * cross-covariance vector between the data and the query point.
     */
    class GpPosterior {
    public:
        GpPosterior(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const NoiseModel& noise) {
            if (gram.rows() != gram.cols() || gram.rows() != y.size()) {
                throw std::invalid_argument("GpPosterior: Gram matrix and target sizes disagree");
            }
            if (y.size() == 0) {
                return;
            }
            Eigen::MatrixXd a = gram;
            a.diagonal().array() += noise.sigma_n_sq;
            auto chol = cholesky_with_jitter(a);
            lower_ = std::move(chol.lower);
            jitter_ = chol.jitter;
            alpha_ = lower_.triangularView<Eigen::Lower>().solve(y);
            lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
        }

        [[nodiscard]] PosteriorQueryResult predict(const Eigen::VectorXd& k_star, double prior_variance) const {
            if (size() == 0) {
                return {0.0, std::max(prior_variance, 0.0)};
            }
            const double mean = k_star.dot(alpha_);
            const Eigen::VectorXd v = lower_.triangularView<Eigen::Lower>().solve(k_star);
            return {mean, std::max(prior_variance - v.squaredNorm(), 0.0)};
        }

        /// Column j of `k_star` holds the data covariances of query point j.
        void predict_batch(const Eigen::MatrixXd& k_star, const Eigen::VectorXd& prior_variance, Eigen::VectorXd& mean,
                           Eigen::VectorXd& variance) const {
            if (size() == 0) {
                mean = Eigen::VectorXd::Zero(prior_variance.size());
                variance = prior_variance.cwiseMax(0.0);
                return;
            }
            mean.noalias() = k_star.transpose() * alpha_;
            Eigen::MatrixXd v = k_star;
            lower_.triangularView<Eigen::Lower>().solveInPlace(v);
            variance = (prior_variance - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
        }

        [[nodiscard]] Eigen::Index size() const { return alpha_.size(); }
        [[nodiscard]] double jitter() const { return jitter_; }

    private:
        Eigen::MatrixXd lower_;
        Eigen::VectorXd alpha_;
        double jitter_ = 0.0;
    };

    /// k_time entries (1 - eps)^(|t_query - t_i| / 2) for the data time stamps.
    [[nodiscard]] inline Eigen::VectorXd temporal_weights(double epsilon, const std::vector<long>& times, long t_query) {
        check_rate_of_change(epsilon);
        Eigen::VectorXd w(static_cast<Eigen::Index>(times.size()));
        for (std::size_t i = 0; i < times.size(); ++i) {
            w(static_cast<Eigen::Index>(i)) = temporal_factor(epsilon, t_query - times[i]);
        }
        return w;
    }

    namespace detail {
        template <CovarianceFunction K>
        Eigen::VectorXd data_covariances(const K& kernel, const Dataset& data, const Point& x) {
            Eigen::VectorXd k(static_cast<Eigen::Index>(data.size()));
            for (std::size_t i = 0; i < data.size(); ++i) {
                k(static_cast<Eigen::Index>(i)) = kernel(data.entries()[i].x, x);
            }
            return k;
        }
    } // namespace detail

    /// Posterior mean and variance at `x` under the time-invariant model.
    template <CovarianceFunction K>
    [[nodiscard]] PosteriorQueryResult posterior_static(const K& kernel, const Dataset& data, const NoiseModel& noise,
                                                        const Point& x) {
        const double prior = kernel(x, x);
        if (data.empty()) {
            return {0.0, prior};
        }
        const GpPosterior post(gram_matrix(kernel, data.points()), data.targets(), noise);
        return post.predict(detail::data_covariances(kernel, data, x), prior);
    }

    /**
     * Posterior at `x` and time `t_query` under the Markov-chain model: the Gram
     * matrix and the cross-covariances are multiplied entrywise by the
     * temporal forgetting factors.
     */
    template <CovarianceFunction K>
    [[nodiscard]] PosteriorQueryResult posterior_timevarying(const K& kernel, const Dataset& data,
                                                             const NoiseModel& noise, double epsilon, const Point& x,
                                                             long t_query) {
        check_rate_of_change(epsilon);
        const double prior = kernel(x, x);
        if (data.empty()) {
            return {0.0, prior};
        }
        const auto times = data.times();
        const Eigen::MatrixXd gram = gram_matrix(kernel, data.points()).cwiseProduct(temporal_gram(epsilon, times));
        const GpPosterior post(gram, data.targets(), noise);
        const Eigen::VectorXd k =
            detail::data_covariances(kernel, data, x).cwiseProduct(temporal_weights(epsilon, times, t_query));
        return post.predict(k, prior);
    }

    /**
     * Draws from N(0, G + jitter I) over a fixed point set, where G is the Gram
     * matrix. The factorization is computed once; draws are cheap.
     */
    class GpSampler {
    public:
        explicit GpSampler(const Eigen::MatrixXd& gram) {
            if (gram.rows() == 0 || gram.rows() != gram.cols()) {
                throw std::invalid_argument("GpSampler: Gram matrix must be square and non-empty");
            }
            auto chol = cholesky_with_jitter(gram);
            lower_ = std::move(chol.lower);
            jitter_ = chol.jitter;
        }

        template <CovarianceFunction K>
        GpSampler(const K& kernel, const PointSet& grid) : GpSampler(gram_matrix(kernel, grid)) {}

        [[nodiscard]] Eigen::VectorXd draw(Rng& rng) const {
            const Eigen::VectorXd z = standard_normal_vector(lower_.rows(), rng);
            return lower_.triangularView<Eigen::Lower>() * z;
        }

        [[nodiscard]] Eigen::Index size() const { return lower_.rows(); }
        [[nodiscard]] double jitter() const { return jitter_; }

    private:
        Eigen::MatrixXd lower_;
        double jitter_ = 0.0;
    };

    /// One GP prior draw over `grid`; a pure function of its arguments.
    template <CovarianceFunction K>
    [[nodiscard]] Eigen::VectorXd sample_gp_on_grid(const K& kernel, const PointSet& grid, std::uint64_t rng_seed) {
        if (grid.empty()) {
            throw std::invalid_argument("sample_gp_on_grid: empty grid");
        }
        const GpSampler sampler(kernel, grid);
        Rng rng = make_rng(rng_seed, Stream::sampling);
        return sampler.draw(rng);
    }

    /**
     * Realized information gain 1/2 ln det(I + sigma_n^-2 K) for each prefix of
     * `points`: entry m - 1 is the gain of the first m points.
     */
    template <CovarianceFunction K>
    [[nodiscard]] Eigen::VectorXd prefix_information_gain(const K& kernel, const PointSet& points,
                                                          const NoiseModel& noise) {
        if (points.empty()) {
            return {};
        }
        Eigen::MatrixXd a = gram_matrix(kernel, points) / noise.sigma_n_sq;
        a.diagonal().array() += 1.0;
        const auto chol = cholesky_with_jitter(a);
        Eigen::VectorXd gains(a.rows());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            acc += std::log(chol.lower(i, i));
            gains(i) = acc;
        }
        return gains;
    }

} // namespace etbo

#endif // ETBO_GP_POSTERIOR_HPP
