#ifndef ETBO_CONFIG_HPP
#define ETBO_CONFIG_HPP
#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "algorithms.hpp"
#include "errors.hpp"
#include "synthetic.hpp"

namespace etbo {

    // Configuration schema. Every field has a default so a config file only
    // needs the keys it changes; unknown keys are rejected.

    struct DomainSpec {
        std::string kind = "grid"; // grid | arms
        std::vector<double> lower{0.0, 0.0};
        std::vector<double> upper{1.0, 1.0};
        std::vector<std::size_t> resolution{50, 50};
        std::size_t arms = 0; ///< arms domain; 0 = take the count from the data
    };

    struct KernelSpec {
        std::string kind = "squared_exponential"; // squared_exponential | empirical
        std::vector<double> lengthscales{0.2, 0.2};
        double signal_variance = 1.0;
        std::string matrix_path; ///< empirical: CSV matrix; empty = training covariance of the replay data
    };

    /// Half-open range [begin, end) of time_index values.
    struct TimeRange {
        long begin = 0;
        long end = 0;
    };

    struct ObjectiveSpec {
        std::string kind = "markov"; // markov | sudden | arms_replay
        double epsilon = 0.0;
        std::vector<EpsilonSchedule::Piece> schedule; ///< overrides `epsilon` when non-empty
        long change_step = 100;
        std::string csv_path;
        TimeRange train;
        TimeRange test;

        [[nodiscard]] EpsilonSchedule epsilon_schedule() const {
            return schedule.empty() ? EpsilonSchedule(epsilon) : EpsilonSchedule(schedule);
        }
    };

    struct PolicyConfig {
        std::string name = "ET-GP-UCB"; ///< GP-UCB | TV-GP-UCB | R-GP-UCB | ET-GP-UCB
        std::string label;              ///< trace label; defaults to `name`
        double epsilon = 0.0;           ///< TV model rate; for R-GP-UCB the rate its period is derived from
        long reset_period = 0;          ///< R-GP-UCB; 0 = derive from epsilon and the horizon
        double delta_B = 0.1;
        BetaSchedule beta = BetaSchedule::approximate(0.8, 4.0);

        [[nodiscard]] std::string display_label() const { return label.empty() ? name : label; }
    };

    struct StoppingSpec {
        std::size_t runs = 1000;
        double delta = 0.2; ///< confidence of the Markov-inequality quantile check
    };

    /// Smoothness constants and confidence for the regret-bound diagnostic.
    struct BoundConstants {
        double a0 = 1.0, b0 = 1.0, a1 = 1.0, b1 = 1.0;
        double L = 1.0, L_f = 1.0;
        double delta = 0.1;
        double tau_bar = 0.0;  ///< <= 0: estimate as mean(tau) / delta from stopping times
        double epsilon = -1.0; ///< < 0: take the rate of change from the objective
    };

    struct ExperimentConfig {
        std::string name = "experiment";
        DomainSpec domain;
        KernelSpec kernel;
        double noise_variance = 0.02;
        long horizon = 400;
        ObjectiveSpec objective;
        std::vector<PolicyConfig> policies;
        std::vector<std::uint64_t> seeds{0};
        std::string output = "out";
        StoppingSpec stopping;
        BoundConstants bound;
    };

    // ------------------------------------------------------------------ JSON --

    namespace detail {
        using nlohmann::json;

        class Reader {
        public:
            Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
                if (!j_.is_object()) {
                    throw ConfigError(where() + " must be an object");
                }
            }

            /// Rejects keys that were never asked for.
            void done() const {
                for (auto it = j_.begin(); it != j_.end(); ++it) {
                    if (!seen_.count(it.key())) {
                        throw ConfigError("unknown key '" + path_ + (path_.empty() ? "" : ".") + it.key() + "'");
                    }
                }
            }

            template <typename T>
            void get(const char* key, T& out) {
                seen_.insert(key);
                if (!j_.contains(key)) {
                    return;
                }
                read(j_.at(key), out, sub(key));
            }

            const json* child(const char* key) {
                seen_.insert(key);
                return j_.contains(key) ? &j_.at(key) : nullptr;
            }

            [[nodiscard]] std::string sub(const std::string& key) const {
                return path_.empty() ? key : path_ + "." + key;
            }

        private:
            [[nodiscard]] std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

            static void read(const json& v, double& out, const std::string& p) {
                if (!v.is_number()) {
                    throw ConfigError("'" + p + "' must be a number");
                }
                out = v.get<double>();
            }
            static void read(const json& v, long& out, const std::string& p) {
                if (!v.is_number_integer()) {
                    throw ConfigError("'" + p + "' must be an integer");
                }
                out = v.get<long>();
            }
            static void read(const json& v, int& out, const std::string& p) {
                if (!v.is_number_integer()) {
                    throw ConfigError("'" + p + "' must be an integer");
                }
                out = v.get<int>();
            }
            static void read(const json& v, std::size_t& out, const std::string& p) {
                if (!v.is_number_integer() || v.get<long long>() < 0) {
                    throw ConfigError("'" + p + "' must be a non-negative integer");
                }
                out = v.get<std::size_t>();
            }
            static void read(const json& v, std::string& out, const std::string& p) {
                if (!v.is_string()) {
                    throw ConfigError("'" + p + "' must be a string");
                }
                out = v.get<std::string>();
            }
            template <typename T>
            static void read(const json& v, std::vector<T>& out, const std::string& p) {
                if (!v.is_array()) {
                    throw ConfigError("'" + p + "' must be an array");
                }
                out.clear();
                for (std::size_t i = 0; i < v.size(); ++i) {
                    T x{};
                    read(v.at(i), x, p + "." + std::to_string(i));
                    out.push_back(x);
                }
            }

            const json& j_;
            std::string path_;
            std::set<std::string> seen_;
        };

        inline json beta_to_json(const BetaSchedule& b) {
            return json{{"kind", b.kind == BetaSchedule::Kind::approximate ? "approximate" : "exact"},
                        {"c1", b.c1},
                        {"c2", b.c2},
                        {"delta", b.delta},
                        {"d", b.d},
                        {"r", b.r},
                        {"a1", b.a1},
                        {"b1", b.b1}};
        }

        inline BetaSchedule beta_from_json(const json& j, const std::string& path) {
            BetaSchedule b;
            Reader r(j, path);
            std::string kind = "approximate";
            r.get("kind", kind);
            if (kind == "approximate") {
                b.kind = BetaSchedule::Kind::approximate;
            } else if (kind == "exact") {
                b.kind = BetaSchedule::Kind::exact;
            } else {
                throw ConfigError("'" + r.sub("kind") + "' must be 'approximate' or 'exact'");
            }
            r.get("c1", b.c1);
            r.get("c2", b.c2);
            r.get("delta", b.delta);
            r.get("d", b.d);
            r.get("r", b.r);
            r.get("a1", b.a1);
            r.get("b1", b.b1);
            r.done();
            return b;
        }
    } // namespace detail

    [[nodiscard]] inline nlohmann::json to_json(const ExperimentConfig& c) {
        using nlohmann::json;
        json policies = json::array();
        for (const auto& p : c.policies) {
            policies.push_back(json{{"name", p.name},
                                    {"label", p.label},
                                    {"epsilon", p.epsilon},
                                    {"reset_period", p.reset_period},
                                    {"delta_B", p.delta_B},
                                    {"beta", detail::beta_to_json(p.beta)}});
        }
        json schedule = json::array();
        for (const auto& piece : c.objective.schedule) {
            schedule.push_back(json{{"start", piece.start}, {"epsilon", piece.epsilon}});
        }
        return json{
            {"name", c.name},
            {"domain",
             {{"kind", c.domain.kind},
              {"lower", c.domain.lower},
              {"upper", c.domain.upper},
              {"resolution", c.domain.resolution},
              {"arms", c.domain.arms}}},
            {"kernel",
             {{"kind", c.kernel.kind},
              {"lengthscales", c.kernel.lengthscales},
              {"signal_variance", c.kernel.signal_variance},
              {"matrix_path", c.kernel.matrix_path}}},
            {"noise_variance", c.noise_variance},
            {"horizon", c.horizon},
            {"objective",
             {{"kind", c.objective.kind},
              {"epsilon", c.objective.epsilon},
              {"schedule", schedule},
              {"change_step", c.objective.change_step},
              {"csv_path", c.objective.csv_path},
              {"train", json::array({c.objective.train.begin, c.objective.train.end})},
              {"test", json::array({c.objective.test.begin, c.objective.test.end})}}},
            {"policies", policies},
            {"seeds", c.seeds},
            {"output", c.output},
            {"stopping", {{"runs", c.stopping.runs}, {"delta", c.stopping.delta}}},
            {"bound",
             {{"a0", c.bound.a0},
              {"b0", c.bound.b0},
              {"a1", c.bound.a1},
              {"b1", c.bound.b1},
              {"L", c.bound.L},
              {"L_f", c.bound.L_f},
              {"delta", c.bound.delta},
              {"tau_bar", c.bound.tau_bar},
              {"epsilon", c.bound.epsilon}}},
        };
    }

    /// Checks every cross-field constraint; throws ConfigError on the first violation.
    inline void validate(const ExperimentConfig& c) {
        if (c.domain.kind != "grid" && c.domain.kind != "arms") {
            throw ConfigError("domain.kind must be 'grid' or 'arms'");
        }
        if (c.kernel.kind != "squared_exponential" && c.kernel.kind != "empirical") {
            throw ConfigError("kernel.kind must be 'squared_exponential' or 'empirical'");
        }
        if (c.objective.kind != "markov" && c.objective.kind != "sudden" && c.objective.kind != "arms_replay") {
            throw ConfigError("objective.kind must be 'markov', 'sudden' or 'arms_replay'");
        }
        if (c.domain.kind == "grid") {
            if (c.kernel.kind != "squared_exponential") {
                throw ConfigError("grid domains need the squared_exponential kernel");
            }
            if (c.kernel.lengthscales.size() != c.domain.lower.size()) {
                throw ConfigError("kernel.lengthscales must have one entry per domain dimension");
            }
            (void)Domain::grid(c.domain.lower, c.domain.upper, c.domain.resolution);
            (void)SquaredExponentialKernel(
                Eigen::Map<const Eigen::VectorXd>(c.kernel.lengthscales.data(),
                                                  static_cast<Eigen::Index>(c.kernel.lengthscales.size())),
                c.kernel.signal_variance);
            if (c.objective.kind == "arms_replay") {
                throw ConfigError("arms_replay objectives need an arms domain");
            }
        } else {
            if (c.kernel.kind != "empirical") {
                throw ConfigError("arms domains need the empirical kernel");
            }
            if (c.objective.kind != "arms_replay" && c.kernel.matrix_path.empty()) {
                throw ConfigError("synthetic objectives on arms need kernel.matrix_path");
            }
        }
        if (c.objective.kind == "arms_replay") {
            if (c.objective.csv_path.empty()) {
                throw ConfigError("objective.csv_path is required for arms_replay");
            }
            if (c.objective.train.end <= c.objective.train.begin || c.objective.test.end <= c.objective.test.begin) {
                throw ConfigError("objective.train and objective.test must be non-empty [begin, end) ranges");
            }
        }
        (void)NoiseModel(c.noise_variance);
        if (c.horizon < 1 && c.objective.kind != "arms_replay") {
            throw ConfigError("horizon must be >= 1");
        }
        if (c.horizon < 0) {
            throw ConfigError("horizon must be >= 0");
        }
        (void)c.objective.epsilon_schedule();
        if (c.objective.change_step < 1) {
            throw ConfigError("objective.change_step must be >= 1");
        }
        if (c.policies.empty()) {
            throw ConfigError("at least one policy is required");
        }
        std::set<std::string> labels;
        for (const auto& p : c.policies) {
            PolicySpec spec;
            spec.kind = policy_kind_from_string(p.name);
            spec.beta = p.beta;
            spec.epsilon = p.epsilon;
            spec.delta_B = p.delta_B;
            spec.reset_period = p.reset_period;
            check_rate_of_change(p.epsilon);
            if (p.reset_period < 0) {
                throw ConfigError("reset_period must be >= 0");
            }
            if (spec.kind == PolicyKind::r_gp_ucb && spec.reset_period == 0) {
                spec.reset_period = 1;
            }
            validate(spec);
            if (!labels.insert(p.display_label()).second) {
                throw ConfigError("duplicate policy label '" + p.display_label() + "'");
            }
            if (p.display_label().find_first_of(",\"\n") != std::string::npos) {
                throw ConfigError("policy labels may not contain commas, quotes or newlines");
            }
        }
        if (c.seeds.empty()) {
            throw ConfigError("seeds must be non-empty");
        }
        if (!(c.stopping.delta > 0.0 && c.stopping.delta < 1.0)) {
            throw ConfigError("stopping.delta must lie in (0, 1)");
        }
        if (!(c.bound.delta > 0.0 && c.bound.delta < 1.0)) {
            throw ConfigError("bound.delta must lie in (0, 1)");
        }
    }

    [[nodiscard]] inline ExperimentConfig config_from_json(const nlohmann::json& j) {
        using detail::Reader;
        ExperimentConfig c;
        {
            Reader r(j, "");
            r.get("name", c.name);
            if (const auto* d = r.child("domain")) {
                Reader rd(*d, "domain");
                rd.get("kind", c.domain.kind);
                rd.get("lower", c.domain.lower);
                rd.get("upper", c.domain.upper);
                rd.get("resolution", c.domain.resolution);
                rd.get("arms", c.domain.arms);
                rd.done();
            }
            if (const auto* k = r.child("kernel")) {
                Reader rk(*k, "kernel");
                rk.get("kind", c.kernel.kind);
                rk.get("lengthscales", c.kernel.lengthscales);
                rk.get("signal_variance", c.kernel.signal_variance);
                rk.get("matrix_path", c.kernel.matrix_path);
                rk.done();
            }
            r.get("noise_variance", c.noise_variance);
            r.get("horizon", c.horizon);
            if (const auto* o = r.child("objective")) {
                Reader ro(*o, "objective");
                ro.get("kind", c.objective.kind);
                ro.get("epsilon", c.objective.epsilon);
                if (const auto* s = ro.child("schedule")) {
                    if (!s->is_array()) {
                        throw ConfigError("'objective.schedule' must be an array");
                    }
                    for (std::size_t i = 0; i < s->size(); ++i) {
                        Reader rp(s->at(i), "objective.schedule." + std::to_string(i));
                        EpsilonSchedule::Piece piece;
                        rp.get("start", piece.start);
                        rp.get("epsilon", piece.epsilon);
                        rp.done();
                        c.objective.schedule.push_back(piece);
                    }
                }
                ro.get("change_step", c.objective.change_step);
                ro.get("csv_path", c.objective.csv_path);
                std::vector<long> train, test;
                ro.get("train", train);
                ro.get("test", test);
                if (!train.empty()) {
                    if (train.size() != 2) {
                        throw ConfigError("'objective.train' must be [begin, end]");
                    }
                    c.objective.train = {train[0], train[1]};
                }
                if (!test.empty()) {
                    if (test.size() != 2) {
                        throw ConfigError("'objective.test' must be [begin, end]");
                    }
                    c.objective.test = {test[0], test[1]};
                }
                ro.done();
            }
            if (const auto* ps = r.child("policies")) {
                if (!ps->is_array()) {
                    throw ConfigError("'policies' must be an array");
                }
                for (std::size_t i = 0; i < ps->size(); ++i) {
                    const std::string path = "policies." + std::to_string(i);
                    Reader rp(ps->at(i), path);
                    PolicyConfig p;
                    rp.get("name", p.name);
                    rp.get("label", p.label);
                    rp.get("epsilon", p.epsilon);
                    rp.get("reset_period", p.reset_period);
                    rp.get("delta_B", p.delta_B);
                    if (const auto* b = rp.child("beta")) {
                        p.beta = detail::beta_from_json(*b, path + ".beta");
                    }
                    rp.done();
                    c.policies.push_back(p);
                }
            }
            r.get("seeds", c.seeds);
            r.get("output", c.output);
            if (const auto* s = r.child("stopping")) {
                Reader rs(*s, "stopping");
                rs.get("runs", c.stopping.runs);
                rs.get("delta", c.stopping.delta);
                rs.done();
            }
            if (const auto* b = r.child("bound")) {
                Reader rb(*b, "bound");
                rb.get("a0", c.bound.a0);
                rb.get("b0", c.bound.b0);
                rb.get("a1", c.bound.a1);
                rb.get("b1", c.bound.b1);
                rb.get("L", c.bound.L);
                rb.get("L_f", c.bound.L_f);
                rb.get("delta", c.bound.delta);
                rb.get("tau_bar", c.bound.tau_bar);
                rb.get("epsilon", c.bound.epsilon);
                rb.done();
            }
            r.done();
        }
        validate(c);
        return c;
    }

    [[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot open config file '" + path + "'");
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
        }
        return config_from_json(j);
    }

    /**
     * Applies `key=value` to the JSON form of a config. The key is a dotted
     * path (array elements by index) that must already exist; the new value
     * must have the same JSON type as the old one (integers are accepted where
     * floating-point numbers are expected).
     */
    inline void apply_override(nlohmann::json& j, const std::string& assignment) {
        using nlohmann::json;
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + assignment + "' is not of the form key=value");
        }
        const std::string key = assignment.substr(0, eq);
        const std::string raw = assignment.substr(eq + 1);
        json* node = &j;
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, '.')) {
            if (node->is_object()) {
                if (!node->contains(part)) {
                    throw ConfigError("unknown config key '" + key + "'");
                }
                node = &node->at(part);
            } else if (node->is_array()) {
                std::size_t idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stoul(part, &used);
                    if (used != part.size()) {
                        throw std::invalid_argument(part);
                    }
                } catch (const std::exception&) {
                    throw ConfigError("override '" + key + "': '" + part + "' is not an array index");
                }
                if (idx >= node->size()) {
                    throw ConfigError("override '" + key + "': index " + part + " out of range");
                }
                node = &node->at(idx);
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        if (node->is_string()) {
            *node = raw;
            return;
        }
        const bool ok = (node->is_number_float() && value.is_number()) ||
                        (node->is_number_integer() && value.is_number_integer()) ||
                        (node->is_boolean() && value.is_boolean()) || (node->is_array() && value.is_array()) ||
                        (node->is_object() && value.is_object());
        if (!ok) {
            throw ConfigError("override '" + key + "': value '" + raw + "' has the wrong type (expected " +
                              std::string(node->type_name()) + ")");
        }
        *node = value;
    }

    [[nodiscard]] inline ExperimentConfig with_overrides(const ExperimentConfig& c,
                                                         const std::vector<std::string>& overrides) {
        if (overrides.empty()) {
            return c;
        }
        nlohmann::json j = to_json(c);
        for (const auto& o : overrides) {
            apply_override(j, o);
        }
        return config_from_json(j);
    }

    /// Parses "a..b" (inclusive), "a,b,c" or a single integer.
    [[nodiscard]] inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
        auto to_u64 = [&](const std::string& s) -> std::uint64_t {
            try {
                std::size_t used = 0;
                const auto v = std::stoull(s, &used);
                if (used != s.size() || s.empty() || s[0] == '-') {
                    throw std::invalid_argument(s);
                }
                return v;
            } catch (const std::exception&) {
                throw ConfigError("bad seed specification '" + text + "'");
            }
        };
        std::vector<std::uint64_t> seeds;
        if (const auto dots = text.find(".."); dots != std::string::npos) {
            const auto lo = to_u64(text.substr(0, dots));
            const auto hi = to_u64(text.substr(dots + 2));
            if (hi < lo) {
                throw ConfigError("bad seed range '" + text + "'");
            }
            for (auto s = lo; s <= hi; ++s) {
                seeds.push_back(s);
            }
            return seeds;
        }
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) {
            seeds.push_back(to_u64(part));
        }
        if (seeds.empty()) {
            throw ConfigError("empty seed specification");
        }
        return seeds;
    }

    [[nodiscard]] inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
        std::vector<std::uint64_t> s(count);
        for (std::size_t i = 0; i < count; ++i) {
            s[i] = first + i;
        }
        return s;
    }

} // namespace etbo

#endif // ETBO_CONFIG_HPP
