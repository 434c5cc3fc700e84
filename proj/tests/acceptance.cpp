// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "etbo/etbo.hpp"
#include "oracles.hpp"

namespace {

    namespace fs = std::filesystem;

    int failures = 0;

    unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

    void report(const std::string& id, bool pass, const std::string& detail) {
        std::printf("%s criterion %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!pass) {
            ++failures;
        }
    }

    std::string fmt(const char* f, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    /// Runs `fn` and reports an exception as a failed criterion.
    void guarded(const std::string& id, const std::function<void()>& fn) {
        const auto start = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "  [criterion %s took %.1f s]\n", id.c_str(), secs);
    }

    etbo::ExperimentConfig only(etbo::ExperimentConfig c, const std::vector<std::string>& names) {
        std::vector<etbo::PolicyConfig> kept;
        for (const auto& p : c.policies) {
            if (std::find(names.begin(), names.end(), p.name) != names.end()) {
                kept.push_back(p);
            }
        }
        c.policies = kept;
        return c;
    }

    etbo::Dataset to_dataset(const oracle::Instance& in) {
        etbo::Dataset d;
        for (std::size_t i = 0; i < in.x.size(); ++i) {
            d.append(in.x[i], in.y(static_cast<Eigen::Index>(i)), in.t[i]);
        }
        return d;
    }

    std::string csv_of(const std::vector<etbo::RegretTrace>& traces) {
        std::ostringstream out;
        etbo::write_trace_csv(out, traces);
        etbo::write_summary_csv(out, etbo::summarize(traces));
        etbo::write_normalized_csv(out, traces);
        return out.str();
    }

    bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

    void criterion_posterior_oracle() {
        std::mt19937_64 rng(2024);
        const auto start = std::chrono::steady_clock::now();
        double worst_mean = 0.0, worst_var = 0.0;
        for (int i = 0; i < 200; ++i) {
            const auto in = oracle::random_instance(rng);
            const etbo::SquaredExponentialKernel k(in.lengthscales, in.signal_variance);
            const etbo::NoiseModel noise(in.noise_variance);
            const auto data = to_dataset(in);
            for (double eps : {0.0, 0.1, 0.5}) {
                const auto ref = oracle::dense_posterior(in, eps);
                const auto got = eps == 0.0 ? etbo::posterior_static(k, data, noise, in.query)
                                            : etbo::posterior_timevarying(k, data, noise, eps, in.query, in.t_query);
                worst_mean = std::max(worst_mean, std::abs(got.mean - ref.mean));
                worst_var = std::max(worst_var, std::abs(got.variance - std::max(ref.variance, 0.0)));
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report("1 (posterior oracle)", worst_mean <= 1e-8 && worst_var <= 1e-8 && secs < 10.0,
               fmt("200 instances x eps {0, 0.1, 0.5}: max |dmean| %.2e, max |dvar| %.2e (tol 1e-8), %.2f s (< 10 s)",
                   worst_mean, worst_var, secs));
    }

    void criterion_tv_identity() {
        std::mt19937_64 rng(7);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto in = oracle::random_instance(rng);
            const etbo::SquaredExponentialKernel k(in.lengthscales, in.signal_variance);
            const etbo::NoiseModel noise(in.noise_variance);
            const auto data = to_dataset(in);
            const auto a = etbo::posterior_static(k, data, noise, in.query);
            const auto b = etbo::posterior_timevarying(k, data, noise, 0.0, in.query, in.t_query);
            worst = std::max({worst, std::abs(a.mean - b.mean), std::abs(a.variance - b.variance)});
        }
        report("2 (TV/static identity)", worst <= 1e-10, fmt("100 instances: max deviation %.2e (tol 1e-10)", worst));
    }

    void criterion_reset_period() {
        const long a = etbo::reset_period_for(0.01, 400);
        const long b = etbo::reset_period_for(0.03, 400);
        const long c = etbo::reset_period_for(0.05, 400);
        report("3 (R-GP-UCB reset period)", a == 38 && b == 29 && c == 26,
               fmt("N(0.01, 0.03, 0.05; T=400) = %ld, %ld, %ld (expected 38, 29, 26)", a, b, c));
    }

    void criterion_false_positive() {
        const auto cfg = etbo::preset_config("static-eps0");
        const auto r = etbo::stopping_time_histogram(cfg, cfg.seeds.size(), jobs());
        const double frac = 1.0 - r.censored_fraction();
        report("4 (trigger false positives)", frac <= 0.15,
               fmt("eps = 0, T = %ld, %zu seeds: fraction of runs with a reset %.3f (<= 0.15)", r.horizon,
                   r.taus.size(), frac));
    }

    struct WithinModel {
        double eps;
        double paper_RT;
        double paper_resets;
        std::vector<etbo::RegretTrace> traces;
    };

    void criteria_table_and_ordering(std::vector<WithinModel>& rows) {
        for (auto& row : rows) {
            const auto preset = fmt("within-model-eps%.2f", row.eps);
            guarded("5/6 run " + preset, [&] {
                row.traces = etbo::run_experiment(only(etbo::preset_config(preset), {"R-GP-UCB", "ET-GP-UCB"}), jobs());
            });
        }
        for (const auto& row : rows) {
            if (row.traces.empty()) {
                report(fmt("5 (Table 2, eps = %.2f)", row.eps), false, "runs failed");
                continue;
            }
            const auto s = etbo::summarize(row.traces);
            const auto& et = etbo::summary_for(s, "ET-GP-UCB");
            const bool ok = within(et.mean_RT, row.paper_RT, 0.20) && within(et.mean_resets, row.paper_resets, 0.25);
            report(fmt("5 (Table 2, eps = %.2f)", row.eps), ok,
                   fmt("ET-GP-UCB over %zu seeds: mean R_T %.2f (target %.2f +-20%%), mean resets %.2f "
                       "(target %.2f +-25%%)",
                       et.runs, et.mean_RT, row.paper_RT, et.mean_resets, row.paper_resets));
        }
        for (const auto& row : rows) {
            if (row.traces.empty()) {
                report(fmt("6 (ordering, eps = %.2f)", row.eps), false, "runs failed");
                continue;
            }
            const auto s = etbo::summarize(row.traces);
            const auto& et = etbo::summary_for(s, "ET-GP-UCB");
            const auto& r = etbo::summary_for(s, "R-GP-UCB");
            report(fmt("6 (ordering, eps = %.2f)", row.eps), et.mean_RT < r.mean_RT,
                   fmt("mean R_T: ET-GP-UCB %.2f < R-GP-UCB %.2f", et.mean_RT, r.mean_RT));
        }
    }

    void criterion_misspecified() {
        const auto cfg = only(etbo::preset_config("misspecified"), {"TV-GP-UCB", "R-GP-UCB", "ET-GP-UCB"});
        const auto s = etbo::summarize(etbo::run_experiment(cfg, jobs()));
        const auto& et = etbo::summary_for(s, "ET-GP-UCB");
        const auto& tv = etbo::summary_for(s, "TV-GP-UCB");
        const auto& r = etbo::summary_for(s, "R-GP-UCB");
        report("6 (ordering, misspecified)", et.mean_RT < tv.mean_RT && et.mean_RT < r.mean_RT,
               fmt("true eps 0.05, models at 0.001, %zu seeds: mean R_T ET-GP-UCB %.2f < TV-GP-UCB %.2f and "
                   "< R-GP-UCB %.2f",
                   et.runs, et.mean_RT, tv.mean_RT, r.mean_RT));
    }

    void criterion_sudden_change() {
        const auto cfg = etbo::preset_config("sudden-change");
        const auto traces = etbo::run_experiment(cfg, jobs());
        const auto change = static_cast<std::size_t>(cfg.objective.change_step);
        std::vector<std::string> names;
        std::vector<double> after;
        for (const auto& tr : traces) {
            const double before = change >= 2 ? tr.rows[change - 2].R_t : 0.0;
            const double gain = tr.rows.back().R_t - before;
            auto it = std::find(names.begin(), names.end(), tr.policy);
            if (it == names.end()) {
                names.push_back(tr.policy);
                after.push_back(0.0);
                it = names.end() - 1;
            }
            after[static_cast<std::size_t>(it - names.begin())] += gain / static_cast<double>(cfg.seeds.size());
        }
        const auto at = [&](const std::string& n) {
            return after[static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin())];
        };
        const double et = at("ET-GP-UCB");
        const bool ok = et < at("GP-UCB") && et < at("TV-GP-UCB") && et < at("R-GP-UCB");
        report("6b (sudden change)", ok,
               fmt("regret accumulated from t = %zu over %zu seeds: ET-GP-UCB %.2f vs GP-UCB %.2f, TV-GP-UCB %.2f, "
                   "R-GP-UCB %.2f",
                   change, cfg.seeds.size(), et, at("GP-UCB"), at("TV-GP-UCB"), at("R-GP-UCB")));
    }

    void criterion_chain_statistics() {
        const etbo::SquaredExponentialKernel k(2, 0.2);
        const auto dom = etbo::Domain::grid({0.0, 0.0}, {1.0, 1.0}, {10, 10});
        const auto sampler = std::make_shared<const etbo::GpSampler>(k, dom.candidates());
        bool ok = true;
        std::string detail;
        for (double eps : {0.03, 0.1}) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            const int seeds = 10000;
            for (int s = 0; s < seeds; ++s) {
                etbo::MarkovChainObjective f(sampler, eps, static_cast<std::uint64_t>(s));
                for (long t = 2; t <= 10; ++t) {
                    f.advance(t);
                }
                const double a = f.values()(45);
                f.advance(11);
                const double b = f.values()(45);
                sa += a;
                sb += b;
                saa += a * a;
                sbb += b * b;
                sab += a * b;
            }
            const double n = seeds;
            const double va = saa / n - (sa / n) * (sa / n);
            const double vb = sbb / n - (sb / n) * (sb / n);
            const double corr = (sab / n - (sa / n) * (sb / n)) / std::sqrt(va * vb);
            const double target = std::sqrt(1.0 - eps);
            ok = ok && std::abs(corr - target) <= 0.02 && vb >= 0.9 && vb <= 1.1;
            detail += fmt("eps %.2f: lag-1 corr %.4f (target %.4f +-0.02), variance %.4f (in [0.9, 1.1]); ", eps, corr,
                          target, vb);
        }
        report("7 (Markov-chain statistics)", ok, detail + "10^4 seeds");
    }

    void criterion_stopping_times() {
        const auto fast_cfg = etbo::preset_config("mc-eps0.1");
        const auto slow_cfg = etbo::preset_config("mc-eps0.03");
        const auto fast = etbo::stopping_time_histogram(fast_cfg, fast_cfg.stopping.runs, jobs());
        const auto slow = etbo::stopping_time_histogram(slow_cfg, slow_cfg.stopping.runs, jobs());
        report("8a (stopping-time ordering)", fast.median_tau < slow.median_tau,
               fmt("median first reset: eps 0.1 -> %.1f < eps 0.03 -> %.1f (%zu runs each)", fast.median_tau,
                   slow.median_tau, fast.taus.size()));
        const double need = 1.0 - 0.2 - 0.03;
        report("8b (stopping-time quantile)", fast.prob_below_tau_bar >= need && slow.prob_below_tau_bar >= need,
               fmt("P{tau < mean/0.2}: eps 0.1 -> %.4f, eps 0.03 -> %.4f (>= %.2f)", fast.prob_below_tau_bar,
                   slow.prob_below_tau_bar, need));
    }

    void criterion_bound() {
        const etbo::BoundConstants defaults;
        const double zero = etbo::phi_T(0.0, 0.1, 25.0, 3.0, 0.02, defaults.a0, defaults.b0, 400);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            oracle::BoundInputs in;
            in.T = 1 + static_cast<long>(u(rng) * 500);
            in.tau_bar = 1.0 + u(rng) * 60.0;
            in.eps = u(rng) * 0.1;
            in.sigma_sq = 0.005 + u(rng) * 0.2;
            in.beta = 0.1 + u(rng) * 5.0;
            in.delta = 0.01 + u(rng) * 0.5;
            in.a0 = 0.1 + u(rng) * 3.0;
            in.b0 = u(rng) * 3.0;
            in.gamma = u(rng) * 40.0;
            etbo::BoundConstants c;
            c.delta = in.delta;
            c.a0 = in.a0;
            c.b0 = in.b0;
            const double got = etbo::regret_bound(in.T, in.beta, in.tau_bar, in.gamma, in.eps, in.sigma_sq, c);
            const double ref = static_cast<double>(oracle::bound(in));
            worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
        }
        report("9 (bound evaluator)", zero == 0.0 && worst <= 1e-9,
               fmt("phi_T(eps = 0) = %g; 20 random tuples: max relative deviation %.2e (tol 1e-9)", zero, worst));
    }

    void criterion_determinism(const std::vector<WithinModel>& rows) {
        // Re-run a preset's stored experiment with a different worker count and compare bytes.
        const auto& ref = rows.back();
        bool ok = !ref.traces.empty();
        std::string detail;
        if (ok) {
            const auto preset = fmt("within-model-eps%.2f", ref.eps);
            const auto again = etbo::run_experiment(only(etbo::preset_config(preset), {"R-GP-UCB", "ET-GP-UCB"}),
                                                    std::max(3u, jobs() + 1));
            ok = csv_of(again) == csv_of(ref.traces);
            detail += preset + " re-run with more workers: " + (ok ? "identical" : "DIFFERENT") + "; ";
        }
        auto cfg = etbo::preset_config("within-model-eps0.03");
        cfg.seeds = {0, 1};
        const auto dir = fs::temp_directory_path() / "etbo_acceptance_determinism";
        fs::remove_all(dir);
        etbo::emit_csv(etbo::run_experiment(cfg, 1), dir / "a");
        etbo::emit_csv(etbo::run_experiment(cfg, 4), dir / "b");
        bool files_equal = true;
        for (const char* f : {"trace.csv", "summary.csv", "normalized.csv"}) {
            std::ifstream a(dir / "a" / f, std::ios::binary), b(dir / "b" / f, std::ios::binary);
            std::stringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            files_equal = files_equal && sa.str() == sb.str() && !sa.str().empty();
        }
        detail += std::string("within-model-eps0.03 (all policies, seeds 0,1) --jobs 1 vs 4: ") +
                  (files_equal ? "identical" : "DIFFERENT");
        report("10 (determinism)", ok && files_equal, detail);
    }

} // namespace

int main() {
    std::printf("acceptance suite (%u worker threads)\n", jobs());
    guarded("1", criterion_posterior_oracle);
    guarded("2", criterion_tv_identity);
    guarded("3", criterion_reset_period);
    guarded("7", criterion_chain_statistics);
    guarded("9", criterion_bound);
    guarded("4", criterion_false_positive);
    std::vector<WithinModel> rows{{0.01, 200.33, 3.38, {}}, {0.03, 271.59, 8.04, {}}, {0.05, 332.04, 11.88, {}}};
    guarded("5/6", [&] { criteria_table_and_ordering(rows); });
    guarded("6 misspecified", criterion_misspecified);
    guarded("6b", criterion_sudden_change);
    guarded("8", criterion_stopping_times);
    guarded("10", [&] { criterion_determinism(rows); });
    std::printf("%s: %d criterion check(s) failed\n", failures == 0 ? "ALL PASSED" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
