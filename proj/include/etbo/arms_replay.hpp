#ifndef ETBO_ARMS_REPLAY_HPP
#define ETBO_ARMS_REPLAY_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "config.hpp"
#include "errors.hpp"

namespace etbo {

    /**
     * Sensor readings over discrete arms, z-scored with training-split
     * statistics, plus the training-split empirical covariance used as kernel.
     */
    struct ArmsReplayDataset {
        std::vector<long> arm_ids;     ///< arm index -> id from the file
        Eigen::VectorXd train_mean;    ///< per arm, raw units
        Eigen::VectorXd train_std;     ///< per arm, raw units (population)
        Eigen::MatrixXd train;         ///< normalized, arms x train steps
        Eigen::MatrixXd replay;        ///< normalized, arms x test steps
        Eigen::MatrixXd covariance;    ///< empirical covariance of `train`
        std::vector<long> test_times;  ///< time_index of each replay column

        [[nodiscard]] std::size_t arm_count() const { return arm_ids.size(); }
        [[nodiscard]] long horizon() const { return static_cast<long>(replay.cols()); }
    };

    namespace detail {
        inline long parse_long_cell(const std::string& cell, const std::string& path, std::size_t line) {
            try {
                std::size_t used = 0;
                const long v = std::stol(cell, &used);
                if (used != cell.size()) {
                    throw std::invalid_argument(cell);
                }
                return v;
            } catch (const std::exception&) {
                throw IoError(path + ":" + std::to_string(line) + ": expected an integer, got '" + cell + "'");
            }
        }

        inline double parse_double_cell(const std::string& cell, const std::string& path, std::size_t line) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size() || !std::isfinite(v)) {
                    throw std::invalid_argument(cell);
                }
                return v;
            } catch (const std::exception&) {
                throw IoError(path + ":" + std::to_string(line) + ": expected a number, got '" + cell + "'");
            }
        }
    } // namespace detail

    /**
     * Reads `arm_id,time_index,value` rows. Time steps span the contiguous range
     * between the smallest and largest time_index in the file. Gaps are
     * forward-filled per arm; leading steps where some arm has no reading yet
     * are dropped. Both ranges are half-open [begin, end) in time_index units
     * and must be fully covered after gap-filling.
     */
    [[nodiscard]] inline ArmsReplayDataset ingest_arms_csv(const std::string& path, TimeRange train_range,
                                                           TimeRange test_range) {
        if (train_range.end <= train_range.begin || test_range.end <= test_range.begin) {
            throw ConfigError("train and test ranges must be non-empty [begin, end) intervals");
        }
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open arms CSV '" + path + "'");
        }
        std::string line;
        if (!std::getline(in, line)) {
            throw IoError("arms CSV '" + path + "' is empty");
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
            line.erase(0, 3);
        }
        if (line != "arm_id,time_index,value") {
            throw IoError("arms CSV '" + path + "': header must be 'arm_id,time_index,value', got '" + line + "'");
        }

        std::map<long, std::map<long, double>> readings;
        long t_min = 0, t_max = 0;
        bool any = false;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                cells.push_back(cell);
            }
            if (cells.size() != 3) {
                throw IoError(path + ":" + std::to_string(lineno) + ": expected 3 columns");
            }
            const long arm = detail::parse_long_cell(cells[0], path, lineno);
            const long t = detail::parse_long_cell(cells[1], path, lineno);
            const double v = detail::parse_double_cell(cells[2], path, lineno);
            if (!readings[arm].emplace(t, v).second) {
                throw IoError(path + ":" + std::to_string(lineno) + ": duplicate reading for arm " +
                              std::to_string(arm) + " at time " + std::to_string(t));
            }
            t_min = any ? std::min(t_min, t) : t;
            t_max = any ? std::max(t_max, t) : t;
            any = true;
        }
        if (!any) {
            throw IoError("arms CSV '" + path + "' has no readings");
        }

        ArmsReplayDataset out;
        const auto n_arms = static_cast<Eigen::Index>(readings.size());
        const long n_steps = t_max - t_min + 1;
        Eigen::MatrixXd filled(n_arms, n_steps);
        long first_complete = t_min;
        Eigen::Index a = 0;
        for (const auto& [arm, series] : readings) {
            out.arm_ids.push_back(arm);
            std::optional<double> last;
            for (long t = t_min; t <= t_max; ++t) {
                if (auto it = series.find(t); it != series.end()) {
                    last = it->second;
                }
                filled(a, t - t_min) = last.value_or(std::numeric_limits<double>::quiet_NaN());
            }
            first_complete = std::max(first_complete, series.begin()->first);
            ++a;
        }

        auto columns = [&](TimeRange r, const char* what) {
            if (r.begin < first_complete || r.end - 1 > t_max) {
                throw IoError("arms CSV '" + path + "': " + what + " range [" + std::to_string(r.begin) + ", " +
                              std::to_string(r.end) + ") is not covered by complete time steps [" +
                              std::to_string(first_complete) + ", " + std::to_string(t_max + 1) + ")");
            }
            return filled.middleCols(r.begin - t_min, r.end - r.begin);
        };
        const Eigen::MatrixXd raw_train = columns(train_range, "train");
        const Eigen::MatrixXd raw_test = columns(test_range, "test");

        out.train_mean = raw_train.rowwise().mean();
        const Eigen::MatrixXd centered = raw_train.colwise() - out.train_mean;
        out.train_std = (centered.array().square().rowwise().sum() / static_cast<double>(raw_train.cols())).sqrt();
        for (Eigen::Index i = 0; i < n_arms; ++i) {
            if (!(out.train_std(i) > 1e-12 * std::max(1.0, std::abs(out.train_mean(i))))) {
                throw ConfigError("arm " + std::to_string(out.arm_ids[static_cast<std::size_t>(i)]) +
                                  " has zero variance on the training split");
            }
        }
        const Eigen::VectorXd inv_std = out.train_std.cwiseInverse();
        out.train = inv_std.asDiagonal() * centered;
        out.replay = inv_std.asDiagonal() * (raw_test.colwise() - out.train_mean);
        out.covariance = out.train * out.train.transpose() / static_cast<double>(out.train.cols());
        for (long t = test_range.begin; t < test_range.end; ++t) {
            out.test_times.push_back(t);
        }
        return out;
    }

} // namespace etbo

#endif // ETBO_ARMS_REPLAY_HPP
