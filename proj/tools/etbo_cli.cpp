// etbo command-line entry point.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etbo/etbo.hpp"

namespace {

    namespace fs = std::filesystem;

    struct Common {
        std::string preset;
        std::string config;
        std::vector<std::string> overrides;
        std::string seeds;
        std::string out;
        unsigned jobs = 1;
    };

    void add_common(CLI::App& sub, Common& c) {
        sub.add_option("--preset", c.preset, "built-in configuration (see list-presets)");
        sub.add_option("--config", c.config, "JSON configuration file");
        sub.add_option("--set", c.overrides, "override a config value, key=value (repeatable)");
        sub.add_option("--seeds", c.seeds, "seed list: a..b or a,b,c");
        sub.add_option("--out", c.out, "output directory");
        sub.add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    }

    etbo::ExperimentConfig resolve(const Common& c) {
        if (!c.preset.empty() && !c.config.empty()) {
            throw etbo::ConfigError("give either --preset or --config, not both");
        }
        if (c.preset.empty() && c.config.empty()) {
            throw etbo::ConfigError("one of --preset or --config is required");
        }
        etbo::ExperimentConfig cfg = c.preset.empty() ? etbo::load_config(c.config) : etbo::preset_config(c.preset);
        cfg = etbo::with_overrides(cfg, c.overrides);
        if (!c.seeds.empty()) {
            cfg.seeds = etbo::parse_seed_list(c.seeds);
        }
        if (!c.out.empty()) {
            cfg.output = c.out;
        }
        etbo::validate(cfg);
        return cfg;
    }

    void echo_config(const etbo::ExperimentConfig& cfg) {
        etbo::write_file(fs::path(cfg.output) / "config.json",
                         [&](std::ostream& o) { o << etbo::to_json(cfg).dump(2) << '\n'; });
    }

    int cmd_run(const Common& c) {
        const auto cfg = resolve(c);
        const etbo::ExperimentSetup setup(cfg);
        const auto traces = etbo::run_experiment(setup, c.jobs);
        echo_config(cfg);
        const auto files = etbo::emit_csv(traces, cfg.output);
        for (const auto& s : etbo::summarize(traces)) {
            std::printf("%-28s mean R_T %10.3f  std %9.3f  mean resets %7.3f  (%zu runs)\n", s.policy.c_str(),
                        s.mean_RT, s.std_RT, s.mean_resets, s.runs);
        }
        std::printf("wrote %s\n", files.trace.string().c_str());
        return 0;
    }

    int cmd_stopping(const Common& c, std::size_t runs) {
        auto cfg = resolve(c);
        if (runs == 0 && c.seeds.empty()) {
            runs = cfg.stopping.runs;
        }
        const auto r = etbo::stopping_time_histogram(cfg, runs, c.jobs);
        if (runs > 0) {
            cfg.seeds = etbo::seed_range(0, runs);
        }
        echo_config(cfg);
        const fs::path dir = cfg.output;
        etbo::write_file(dir / "stopping_times.csv", [&](std::ostream& o) { etbo::write_stopping_times_csv(o, r); });
        etbo::write_file(dir / "stopping_summary.csv",
                         [&](std::ostream& o) { etbo::write_stopping_summary_csv(o, r); });
        std::printf("runs %zu  censored %zu  mean tau %.3f  median tau %.1f\n", r.taus.size(), r.censored,
                    r.mean_tau, r.median_tau);
        std::printf("tau_bar = mean/delta = %.3f  P{tau < tau_bar} = %.4f (need >= %.2f)\n", r.tau_bar,
                    r.prob_below_tau_bar, 1.0 - r.delta);
        if (r.periodic_reset > 0) {
            std::printf("R-GP-UCB reset period for this eps: %ld\n", r.periodic_reset);
        }
        return 0;
    }

    int cmd_bound(const Common& c, std::size_t tau_runs) {
        auto cfg = resolve(c);
        if (!(cfg.bound.tau_bar > 0.0)) {
            if (tau_runs == 0) {
                throw etbo::ConfigError("bound.tau_bar is not set; set it or pass --estimate-tau RUNS");
            }
            const auto st = etbo::stopping_time_histogram(cfg, tau_runs, c.jobs);
            cfg.bound.tau_bar = st.tau_bar;
            std::printf("estimated tau_bar = %.3f from %zu runs\n", st.tau_bar, st.taus.size());
        }
        const etbo::ExperimentSetup setup(cfg);
        std::size_t index = 0;
        for (; index < setup.specs().size(); ++index) {
            if (setup.specs()[index].kind == etbo::PolicyKind::et_gp_ucb) {
                break;
            }
        }
        if (index == setup.specs().size()) {
            throw etbo::ConfigError("bound diagnostic needs an ET-GP-UCB policy");
        }
        const auto trace = etbo::run_single(setup, index, cfg.seeds.front());
        const auto rows = etbo::evaluate_bound(setup, cfg.bound, trace);
        echo_config(cfg);
        etbo::write_file(fs::path(cfg.output) / "bound.csv", [&](std::ostream& o) { etbo::write_bound_csv(o, rows); });
        const auto& last = rows.back();
        std::printf("T = %ld  R_T = %.3f  bound = %.6g  phi_T = %.6g  gamma surrogate (lower) = %.4f\n", last.t,
                    last.R_t, last.bound, last.phi, last.gamma_surrogate);
        return 0;
    }

    etbo::TimeRange parse_range(const std::string& text) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw etbo::ConfigError("time range '" + text + "' must be BEGIN:END (END exclusive)");
        }
        try {
            return {std::stol(text.substr(0, colon)), std::stol(text.substr(colon + 1))};
        } catch (const std::exception&) {
            throw etbo::ConfigError("time range '" + text + "' must be BEGIN:END (END exclusive)");
        }
    }

    int cmd_ingest(const std::string& csv, const std::string& train, const std::string& test, const std::string& out) {
        const auto data = etbo::ingest_arms_csv(csv, parse_range(train), parse_range(test));
        std::printf("arms %zu  train steps %ld  test steps %ld\n", data.arm_count(),
                    static_cast<long>(data.train.cols()), data.horizon());
        for (std::size_t i = 0; i < data.arm_count(); ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            std::printf("arm %ld  mean %.6g  std %.6g\n", data.arm_ids[i], data.train_mean(e), data.train_std(e));
        }
        if (!out.empty()) {
            etbo::write_file(fs::path(out) / "covariance.csv", [&](std::ostream& o) {
                for (Eigen::Index r = 0; r < data.covariance.rows(); ++r) {
                    for (Eigen::Index k = 0; k < data.covariance.cols(); ++k) {
                        o << (k ? "," : "") << etbo::format_real(data.covariance(r, k));
                    }
                    o << '\n';
                }
            });
        }
        return 0;
    }

    int cmd_list(const std::string& show, const std::string& out) {
        if (!show.empty()) {
            std::cout << etbo::to_json(etbo::preset_config(show)).dump(2) << '\n';
            return 0;
        }
        for (const auto& p : etbo::presets()) {
            std::printf("%-20s %s\n", p.name.c_str(), p.description.c_str());
            if (!out.empty()) {
                etbo::write_file(fs::path(out) / (p.name + ".json"),
                                 [&](std::ostream& o) { o << etbo::to_json(p.config).dump(2) << '\n'; });
            }
        }
        return 0;
    }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered time-varying Bayesian optimization"};
    app.require_subcommand(1);

    Common run_opts, stop_opts, bound_opts;
    std::size_t runs = 0, tau_runs = 0;
    std::string csv, train, test, ingest_out, show, list_out;

    auto* run = app.add_subcommand("run", "run every (policy, seed) pair and write trace/summary CSVs");
    add_common(*run, run_opts);
    auto* stop = app.add_subcommand("stopping-times", "first-reset histogram of ET-GP-UCB over independent runs");
    add_common(*stop, stop_opts);
    stop->add_option("--runs", runs, "number of runs (seeds 0..runs-1)");
    auto* bound = app.add_subcommand("bound", "regret-bound diagnostic along one ET-GP-UCB trace");
    add_common(*bound, bound_opts);
    bound->add_option("--estimate-tau", tau_runs, "estimate tau_bar from this many stopping-time runs");
    auto* ingest = app.add_subcommand("ingest-check", "load an arms CSV and report normalization statistics");
    ingest->add_option("--csv", csv, "arm_id,time_index,value file")->required();
    ingest->add_option("--train", train, "training range BEGIN:END")->required();
    ingest->add_option("--test", test, "replay range BEGIN:END")->required();
    ingest->add_option("--out", ingest_out, "write covariance.csv here");
    auto* list = app.add_subcommand("list-presets", "list built-in configurations");
    list->add_option("--show", show, "print one preset as JSON");
    list->add_option("--out", list_out, "write every preset as NAME.json into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            return cmd_run(run_opts);
        }
        if (*stop) {
            return cmd_stopping(stop_opts, runs);
        }
        if (*bound) {
            return cmd_bound(bound_opts, tau_runs);
        }
        if (*ingest) {
            return cmd_ingest(csv, train, test, ingest_out);
        }
        return cmd_list(show, list_out);
    } catch (const etbo::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
