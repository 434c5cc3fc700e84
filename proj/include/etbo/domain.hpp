#ifndef ETBO_DOMAIN_HPP
#define ETBO_DOMAIN_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "kernels.hpp"

namespace etbo {

    /**
     * Finite candidate set an optimization run works on: either a regular grid
     * over a box or a set of discrete arms. Grid candidates are enumerated with
     * the last coordinate varying fastest.
     */
    class Domain {
    public:
        enum class Kind { grid, arms };

        static Domain grid(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> resolution) {
            const std::size_t d = lower.size();
            if (d == 0 || upper.size() != d || resolution.size() != d) {
                throw ConfigError("grid domain: lower, upper and resolution must have the same non-zero length");
            }
            std::size_t total = 1;
            for (std::size_t i = 0; i < d; ++i) {
                if (!(upper[i] >= lower[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
                    throw ConfigError("grid domain: need finite lower <= upper in every dimension");
                }
                if (resolution[i] == 0) {
                    throw ConfigError("grid domain: resolution must be positive");
                }
                total *= resolution[i];
            }
            Domain dom;
            dom.kind_ = Kind::grid;
            dom.lower_ = std::move(lower);
            dom.upper_ = std::move(upper);
            dom.resolution_ = std::move(resolution);
            dom.candidates_.reserve(total);
            std::vector<std::size_t> idx(d, 0);
            for (std::size_t c = 0; c < total; ++c) {
                Point p(static_cast<Eigen::Index>(d));
                for (std::size_t i = 0; i < d; ++i) {
                    p(static_cast<Eigen::Index>(i)) = dom.coordinate(i, idx[i]);
                }
                dom.candidates_.push_back(std::move(p));
                for (std::size_t i = d; i-- > 0;) {
                    if (++idx[i] < dom.resolution_[i]) {
                        break;
                    }
                    idx[i] = 0;
                }
            }
            return dom;
        }

        static Domain arms(std::size_t count) {
            if (count == 0) {
                throw ConfigError("arms domain needs at least one arm");
            }
            Domain dom;
            dom.kind_ = Kind::arms;
            dom.candidates_.reserve(count);
            for (std::size_t a = 0; a < count; ++a) {
                dom.candidates_.push_back(EmpiricalKernel::arm_point(a));
            }
            return dom;
        }

        [[nodiscard]] Kind kind() const { return kind_; }
        [[nodiscard]] const PointSet& candidates() const { return candidates_; }
        [[nodiscard]] std::size_t size() const { return candidates_.size(); }
        [[nodiscard]] std::size_t dimension() const { return kind_ == Kind::arms ? 1 : lower_.size(); }

        /// Index of the candidate nearest to `x` (per-coordinate rounding on grids).
        [[nodiscard]] std::size_t nearest_index(const Point& x) const {
            if (static_cast<std::size_t>(x.size()) != dimension()) {
                throw std::invalid_argument("point dimension does not match domain");
            }
            if (kind_ == Kind::arms) {
                const double a = std::round(x(0));
                if (a < 0.0 || a >= static_cast<double>(candidates_.size())) {
                    throw std::out_of_range("arm index out of range");
                }
                return static_cast<std::size_t>(a);
            }
            std::size_t index = 0;
            for (std::size_t i = 0; i < lower_.size(); ++i) {
                std::size_t k = 0;
                if (resolution_[i] > 1 && upper_[i] > lower_[i]) {
                    const double step = (upper_[i] - lower_[i]) / static_cast<double>(resolution_[i] - 1);
                    const double r = std::round((x(static_cast<Eigen::Index>(i)) - lower_[i]) / step);
                    k = r <= 0.0 ? 0 : std::min(static_cast<std::size_t>(r), resolution_[i] - 1);
                }
                index = index * resolution_[i] + k;
            }
            return index;
        }

    private:
        Domain() = default;

        [[nodiscard]] double coordinate(std::size_t dim, std::size_t k) const {
            if (resolution_[dim] == 1) {
                return lower_[dim];
            }
            const double frac = static_cast<double>(k) / static_cast<double>(resolution_[dim] - 1);
            return lower_[dim] + frac * (upper_[dim] - lower_[dim]);
        }

        Kind kind_ = Kind::grid;
        std::vector<double> lower_, upper_;
        std::vector<std::size_t> resolution_;
        PointSet candidates_;
    };

    /**
     * Candidate points together with their full Gram matrix. Queries always lie
     * on the candidate set, so every covariance a run needs is a lookup.
     */
    class CandidateCovariance {
    public:
        template <CovarianceFunction K>
        CandidateCovariance(const K& kernel, PointSet candidates)
            : points_(std::move(candidates)), gram_(gram_matrix(kernel, points_)) {}

        [[nodiscard]] const PointSet& points() const { return points_; }
        [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
        [[nodiscard]] std::size_t size() const { return points_.size(); }
        [[nodiscard]] Eigen::VectorXd prior_variance() const { return gram_.diagonal(); }

    private:
        PointSet points_;
        Eigen::MatrixXd gram_;
    };

} // namespace etbo

#endif // ETBO_DOMAIN_HPP
