#ifndef ETBO_CSV_IO_HPP
#define ETBO_CSV_IO_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bound.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "stopping_time.hpp"

namespace etbo {

    inline constexpr const char* trace_csv_header = "policy,seed,t,x_index,y,f_xt,f_star,r_t,R_t,reset,psi,kappa";
    inline constexpr const char* summary_csv_header = "policy,mean_RT,std_RT,mean_resets";
    inline constexpr const char* normalized_csv_header = "policy,t,mean_Rt_over_t,std_Rt_over_t";

    /// Floating-point cell with 9 significant digits.
    [[nodiscard]] inline std::string format_real(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    }

    namespace detail {
        inline std::ofstream open_output(const std::filesystem::path& path) {
            std::error_code ec;
            if (path.has_parent_path()) {
                std::filesystem::create_directories(path.parent_path(), ec);
                if (ec) {
                    throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
                }
            }
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                throw IoError("cannot write '" + path.string() + "'");
            }
            return out;
        }

        inline void finish(std::ofstream& out, const std::filesystem::path& path) {
            out.flush();
            if (!out) {
                throw IoError("write to '" + path.string() + "' failed");
            }
        }

        /// Traces sorted by (policy, seed); t is already increasing inside a trace.
        inline std::vector<const RegretTrace*> sorted(const std::vector<RegretTrace>& traces) {
            std::vector<const RegretTrace*> out;
            for (const auto& t : traces) {
                out.push_back(&t);
            }
            std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
                if (a->policy_index != b->policy_index) {
                    return a->policy_index < b->policy_index;
                }
                if (a->policy != b->policy) {
                    return a->policy < b->policy;
                }
                return a->seed < b->seed;
            });
            return out;
        }
    } // namespace detail

    inline void write_trace_csv(std::ostream& out, const std::vector<RegretTrace>& traces) {
        out << trace_csv_header << '\n';
        for (const auto* tr : detail::sorted(traces)) {
            for (const auto& r : tr->rows) {
                out << tr->policy << ',' << tr->seed << ',' << r.t << ',' << r.x_index << ',' << format_real(r.y) << ','
                    << format_real(r.f_xt) << ',' << format_real(r.f_star) << ',' << format_real(r.r_t) << ','
                    << format_real(r.R_t) << ',' << (r.reset ? 1 : 0) << ','
                    << (r.psi ? format_real(*r.psi) : std::string()) << ','
                    << (r.kappa ? format_real(*r.kappa) : std::string()) << '\n';
            }
        }
    }

    inline void write_summary_csv(std::ostream& out, const std::vector<PolicySummary>& summaries) {
        out << summary_csv_header << '\n';
        for (const auto& s : summaries) {
            out << s.policy << ',' << format_real(s.mean_RT) << ',' << format_real(s.std_RT) << ','
                << format_real(s.mean_resets) << '\n';
        }
    }

    /// Per-policy mean and population std of R_t / t over seeds, for every t.
    inline void write_normalized_csv(std::ostream& out, const std::vector<RegretTrace>& traces) {
        out << normalized_csv_header << '\n';
        std::vector<std::string> order;
        std::map<std::string, std::vector<const RegretTrace*>> groups;
        for (const auto* tr : detail::sorted(traces)) {
            if (!groups.count(tr->policy)) {
                order.push_back(tr->policy);
            }
            groups[tr->policy].push_back(tr);
        }
        for (const auto& name : order) {
            const auto& runs = groups[name];
            std::size_t len = 0;
            for (const auto* r : runs) {
                len = std::max(len, r->rows.size());
            }
            for (std::size_t i = 0; i < len; ++i) {
                double sum = 0.0, sq = 0.0, n = 0.0;
                long t = 0;
                for (const auto* r : runs) {
                    if (i < r->rows.size()) {
                        t = r->rows[i].t;
                        const double v = r->rows[i].R_t / static_cast<double>(t);
                        sum += v;
                        sq += v * v;
                        n += 1.0;
                    }
                }
                const double mean = sum / n;
                const double var = std::max(0.0, sq / n - mean * mean);
                out << name << ',' << t << ',' << format_real(mean) << ',' << format_real(std::sqrt(var)) << '\n';
            }
        }
    }

    struct EmittedFiles {
        std::filesystem::path trace, summary, normalized;
    };

    /// Writes trace.csv, summary.csv and normalized.csv into `dir`.
    inline EmittedFiles emit_csv(const std::vector<RegretTrace>& traces, const std::filesystem::path& dir) {
        EmittedFiles files{dir / "trace.csv", dir / "summary.csv", dir / "normalized.csv"};
        {
            auto out = detail::open_output(files.trace);
            write_trace_csv(out, traces);
            detail::finish(out, files.trace);
        }
        {
            auto out = detail::open_output(files.summary);
            write_summary_csv(out, summarize(traces));
            detail::finish(out, files.summary);
        }
        {
            auto out = detail::open_output(files.normalized);
            write_normalized_csv(out, traces);
            detail::finish(out, files.normalized);
        }
        return files;
    }

    /// Parses a trace CSV written by write_trace_csv. policy_index is the order of first appearance.
    [[nodiscard]] inline std::vector<RegretTrace> read_trace_csv(std::istream& in) {
        std::string line;
        if (!std::getline(in, line) || line != trace_csv_header) {
            throw IoError("trace CSV header mismatch");
        }
        std::vector<RegretTrace> out;
        std::vector<std::string> policies;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) {
                continue;
            }
            std::vector<std::string> c;
            std::size_t start = 0;
            for (;;) {
                const auto comma = line.find(',', start);
                c.push_back(line.substr(start, comma - start));
                if (comma == std::string::npos) {
                    break;
                }
                start = comma + 1;
            }
            if (c.size() != 12) {
                throw IoError("trace CSV line " + std::to_string(lineno) + ": expected 12 columns");
            }
            const std::uint64_t seed = std::stoull(c[1]);
            if (out.empty() || out.back().policy != c[0] || out.back().seed != seed) {
                auto it = std::find(policies.begin(), policies.end(), c[0]);
                if (it == policies.end()) {
                    policies.push_back(c[0]);
                    it = policies.end() - 1;
                }
                RegretTrace tr;
                tr.policy = c[0];
                tr.policy_index = static_cast<std::size_t>(it - policies.begin());
                tr.seed = seed;
                out.push_back(std::move(tr));
            }
            TraceRow r;
            r.t = std::stol(c[2]);
            r.x_index = std::stoul(c[3]);
            r.y = std::stod(c[4]);
            r.f_xt = std::stod(c[5]);
            r.f_star = std::stod(c[6]);
            r.r_t = std::stod(c[7]);
            r.R_t = std::stod(c[8]);
            r.reset = c[9] == "1";
            if (!c[10].empty()) {
                r.psi = std::stod(c[10]);
            }
            if (!c[11].empty()) {
                r.kappa = std::stod(c[11]);
            }
            out.back().rows.push_back(r);
        }
        return out;
    }

    inline void write_stopping_times_csv(std::ostream& out, const StoppingTimeResult& r) {
        out << "tau,count\n";
        for (std::size_t i = 0; i < r.counts.size(); ++i) {
            out << (i + 1) << ',' << r.counts[i] << '\n';
        }
        out << "censored," << r.censored << '\n';
    }

    inline void write_stopping_summary_csv(std::ostream& out, const StoppingTimeResult& r) {
        out << "runs,horizon,censored,mean_tau,median_tau,delta,tau_bar,prob_tau_below_tau_bar,required_prob,"
               "markov_check,periodic_reset\n";
        const double required = 1.0 - r.delta;
        out << r.taus.size() << ',' << r.horizon << ',' << r.censored << ',' << format_real(r.mean_tau) << ','
            << format_real(r.median_tau) << ',' << format_real(r.delta) << ',' << format_real(r.tau_bar) << ','
            << format_real(r.prob_below_tau_bar) << ',' << format_real(required) << ','
            << (r.prob_below_tau_bar >= required ? "pass" : "fail") << ',' << r.periodic_reset << '\n';
    }

    inline void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
        out << "t,beta_t,gamma_surrogate_lower,phi_T,bound,R_t\n";
        for (const auto& b : rows) {
            out << b.t << ',' << format_real(b.beta_t) << ',' << format_real(b.gamma_surrogate) << ','
                << format_real(b.phi) << ',' << format_real(b.bound) << ',' << format_real(b.R_t) << '\n';
        }
    }

    /// Writes `fn(stream)` to `path`, creating parent directories.
    template <typename Fn>
    void write_file(const std::filesystem::path& path, Fn&& fn) {
        auto out = detail::open_output(path);
        fn(out);
        detail::finish(out, path);
    }

} // namespace etbo

#endif // ETBO_CSV_IO_HPP
