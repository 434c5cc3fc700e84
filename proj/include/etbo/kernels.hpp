#ifndef ETBO_KERNELS_HPP
#define ETBO_KERNELS_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace etbo {

    using Point = Eigen::VectorXd;
    using PointSet = std::vector<Point>;

    /// Anything evaluable as a covariance function k(x, x').
    template <typename K>
    concept CovarianceFunction = requires(const K& k, const Point& a, const Point& b) {
        { k(a, b) } -> std::convertible_to<double>;
        { k.dimension() } -> std::convertible_to<std::size_t>;
    };

    /**
     * Squared-exponential kernel with one lengthscale per input dimension:
     *
     *   k(x, x') = s * exp(-1/2 * sum_d ((x_d - x'_d) / l_d)^2)
     *
     * With s = 1 the kernel is bounded by one, which the event-trigger bounds
     * rely on.
     */
    class SquaredExponentialKernel {
    public:
        explicit SquaredExponentialKernel(Eigen::VectorXd lengthscales, double signal_variance = 1.0)
            : lengthscales_(std::move(lengthscales)), signal_variance_(signal_variance) {
            if (lengthscales_.size() == 0) {
                throw ConfigError("squared-exponential kernel needs at least one lengthscale");
            }
            if ((lengthscales_.array() <= 0.0).any() || !lengthscales_.allFinite()) {
                throw ConfigError("squared-exponential lengthscales must be positive and finite");
            }
            if (!(signal_variance_ > 0.0) || !std::isfinite(signal_variance_)) {
                throw ConfigError("signal variance must be positive");
            }
        }

        /// Isotropic convenience constructor.
        SquaredExponentialKernel(std::size_t dimension, double lengthscale, double signal_variance = 1.0)
            : SquaredExponentialKernel(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dimension), lengthscale),
                                       signal_variance) {}

        [[nodiscard]] double operator()(const Point& a, const Point& b) const {
            if (a.size() != lengthscales_.size() || b.size() != lengthscales_.size()) {
                throw std::invalid_argument("squared-exponential kernel: point dimension " +
                                            std::to_string(a.size()) + "/" + std::to_string(b.size()) +
                                            " does not match " + std::to_string(lengthscales_.size()));
            }
            const double r2 = ((a - b).array() / lengthscales_.array()).square().sum();
            return signal_variance_ * std::exp(-0.5 * r2);
        }

        [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(lengthscales_.size()); }
        [[nodiscard]] const Eigen::VectorXd& lengthscales() const { return lengthscales_; }
        [[nodiscard]] double signal_variance() const { return signal_variance_; }

    private:
        Eigen::VectorXd lengthscales_;
        double signal_variance_;
    };

    /**
     * Covariance given as a matrix over a finite set of arms. Points are
     * one-dimensional and carry the arm index as their single coordinate.
     *
     * The input matrix is symmetrized and its eigenvalues are clamped at zero,
     * so the stored matrix is always positive semidefinite. Eigenvalues below
     * -kNegativeEigenTolerance are rejected as a malformed covariance.
     */
    class EmpiricalKernel {
    public:
        static constexpr double kNegativeEigenTolerance = 1e-10;

        explicit EmpiricalKernel(const Eigen::MatrixXd& covariance) {
            if (covariance.rows() == 0 || covariance.rows() != covariance.cols()) {
                throw ConfigError("empirical kernel needs a non-empty square matrix");
            }
            if (!covariance.allFinite()) {
                throw ConfigError("empirical kernel matrix has non-finite entries");
            }
            const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
            if (eig.info() != Eigen::Success) {
                throw NumericalError("eigen-decomposition of empirical kernel failed");
            }
            Eigen::VectorXd values = eig.eigenvalues();
            const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
            if (values.minCoeff() < -kNegativeEigenTolerance * scale) {
                throw ConfigError("empirical kernel matrix is not positive semidefinite (min eigenvalue " +
                                  std::to_string(values.minCoeff()) + ")");
            }
            if ((values.array() < 0.0).any()) {
                values = values.cwiseMax(0.0);
                matrix_ = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
                matrix_ = 0.5 * (matrix_ + matrix_.transpose()).eval();
            } else {
                matrix_ = sym;
            }
        }

        [[nodiscard]] double operator()(const Point& a, const Point& b) const {
            return matrix_(arm_of(a), arm_of(b));
        }

        [[nodiscard]] std::size_t dimension() const { return 1; }
        [[nodiscard]] std::size_t arm_count() const { return static_cast<std::size_t>(matrix_.rows()); }
        [[nodiscard]] const Eigen::MatrixXd& matrix() const { return matrix_; }

        [[nodiscard]] static Point arm_point(std::size_t arm) {
            return Point::Constant(1, static_cast<double>(arm));
        }

        [[nodiscard]] Eigen::Index arm_of(const Point& p) const {
            if (p.size() != 1) {
                throw std::invalid_argument("empirical kernel points are one-dimensional arm indices");
            }
            const double v = p(0);
            if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(matrix_.rows())) {
                throw std::out_of_range("arm index " + std::to_string(v) + " out of range [0, " +
                                        std::to_string(matrix_.rows()) + ")");
            }
            return static_cast<Eigen::Index>(v);
        }

    private:
        Eigen::MatrixXd matrix_;
    };

    /// Runtime-selected kernel used by configuration-driven code.
    class AnyKernel {
    public:
        AnyKernel(SquaredExponentialKernel k) : impl_(std::move(k)) {}
        AnyKernel(EmpiricalKernel k) : impl_(std::move(k)) {}

        [[nodiscard]] double operator()(const Point& a, const Point& b) const {
            return std::visit([&](const auto& k) { return k(a, b); }, impl_);
        }
        [[nodiscard]] std::size_t dimension() const {
            return std::visit([](const auto& k) { return k.dimension(); }, impl_);
        }

        template <typename K>
        [[nodiscard]] const K* get_if() const { return std::get_if<K>(&impl_); }

    private:
        std::variant<SquaredExponentialKernel, EmpiricalKernel> impl_;
    };

    static_assert(CovarianceFunction<SquaredExponentialKernel>);
    static_assert(CovarianceFunction<EmpiricalKernel>);
    static_assert(CovarianceFunction<AnyKernel>);

    template <CovarianceFunction K>
    [[nodiscard]] double eval_kernel(const K& kernel, const Point& a, const Point& b) {
        return kernel(a, b);
    }

    /// Pairwise covariances [k(a_i, b_j)].
    template <CovarianceFunction K>
    [[nodiscard]] Eigen::MatrixXd cross_covariance(const K& kernel, const PointSet& a, const PointSet& b) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
        for (std::size_t j = 0; j < b.size(); ++j) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel(a[i], b[j]);
            }
        }
        return out;
    }

    /// Symmetric Gram matrix [k(x_i, x_j)], ordered as the input.
    template <CovarianceFunction K>
    [[nodiscard]] Eigen::MatrixXd gram_matrix(const K& kernel, const PointSet& points) {
        if (points.empty()) {
            throw std::invalid_argument("gram_matrix: empty point list");
        }
        const auto n = static_cast<Eigen::Index>(points.size());
        Eigen::MatrixXd g(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j; i < n; ++i) {
                const double v = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
                g(i, j) = v;
                g(j, i) = v;
            }
        }
        return g;
    }

    inline void check_rate_of_change(double epsilon) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
            throw ConfigError("rate of change epsilon must lie in [0, 1], got " + std::to_string(epsilon));
        }
    }

    /// Forgetting factor (1 - eps)^(lag / 2) between two time steps `lag` apart.
    [[nodiscard]] inline double temporal_factor(double epsilon, long lag) {
        check_rate_of_change(epsilon);
        const long d = lag < 0 ? -lag : lag;
        if (d == 0) {
            return 1.0;
        }
        return std::pow(1.0 - epsilon, 0.5 * static_cast<double>(d));
    }

    /// Matrix of (1 - eps)^(|t_i - t_j| / 2) over strictly increasing time indices.
    [[nodiscard]] inline Eigen::MatrixXd temporal_gram(double epsilon, const std::vector<long>& time_indices) {
        check_rate_of_change(epsilon);
        for (std::size_t i = 1; i < time_indices.size(); ++i) {
            if (time_indices[i] <= time_indices[i - 1]) {
                throw std::invalid_argument("temporal_gram: time indices must be strictly increasing");
            }
        }
        const auto n = static_cast<Eigen::Index>(time_indices.size());
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                m(i, j) = temporal_factor(epsilon, time_indices[static_cast<std::size_t>(i)] -
                                                       time_indices[static_cast<std::size_t>(j)]);
            }
        }
        return m;
    }

    /**
     * Reads a header-free, comma-separated, row-major square matrix and wraps it
     * in an EmpiricalKernel.
     */
    [[nodiscard]] inline EmpiricalKernel load_empirical_kernel_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open kernel matrix file '" + path + "'");
        }
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.find_first_not_of(" \t") == std::string::npos) {
                continue;
            }
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                try {
                    std::size_t used = 0;
                    row.push_back(std::stod(cell, &used));
                    if (cell.find_first_not_of(" \t", used) != std::string::npos) {
                        throw std::invalid_argument(cell);
                    }
                } catch (const std::exception&) {
                    throw IoError("kernel matrix file '" + path + "': bad number '" + cell + "' on row " +
                                  std::to_string(rows.size() + 1));
                }
            }
            rows.push_back(std::move(row));
        }
        const std::size_t n = rows.size();
        if (n == 0) {
            throw IoError("kernel matrix file '" + path + "' is empty");
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != n) {
                throw IoError("kernel matrix file '" + path + "' is not square: row " + std::to_string(i + 1) +
                              " has " + std::to_string(rows[i].size()) + " entries, expected " + std::to_string(n));
            }
            for (std::size_t j = 0; j < n; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        return EmpiricalKernel(m);
    }

} // namespace etbo

#endif // ETBO_KERNELS_HPP
