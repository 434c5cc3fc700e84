#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "etbo/etbo.hpp"

namespace fs = std::filesystem;

namespace {

    fs::path scratch(const std::string& name) {
        const auto p = fs::temp_directory_path() / ("etbo_config_" + name);
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }

    std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int cli(const std::string& args, const fs::path& log) {
        const std::string cmd = std::string(ETBO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    etbo::ExperimentConfig tiny(const etbo::ExperimentConfig& base) {
        return etbo::with_overrides(base, {"horizon=6", "domain.resolution=[6,6]"});
    }

} // namespace

TEST(Config, JsonRoundTrip) {
    for (const auto& p : etbo::presets()) {
        const auto j = etbo::to_json(p.config);
        const auto back = etbo::config_from_json(j);
        EXPECT_EQ(etbo::to_json(back), j) << p.name;
    }
}

TEST(Config, DefaultsFillMissingKeys) {
    const auto c = etbo::config_from_json(nlohmann::json::parse(R"({"policies": [{"name": "GP-UCB"}]})"));
    EXPECT_EQ(c.horizon, 400);
    EXPECT_EQ(c.noise_variance, 0.02);
    EXPECT_EQ(c.policies.at(0).name, "GP-UCB");
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_THROW((void)etbo::config_from_json(nlohmann::json::parse(R"({"horizn": 3, "policies": [{}]})")),
                 etbo::ConfigError);
    EXPECT_THROW((void)etbo::config_from_json(nlohmann::json::parse(R"({"policies": [{"nmae": "GP-UCB"}]})")),
                 etbo::ConfigError);
    EXPECT_THROW((void)etbo::config_from_json(nlohmann::json::parse(R"({"kernel": {"ls": [1]}, "policies": [{}]})")),
                 etbo::ConfigError);
}

TEST(Config, TypesAreChecked) {
    EXPECT_THROW((void)etbo::config_from_json(nlohmann::json::parse(R"({"horizon": "long", "policies": [{}]})")),
                 etbo::ConfigError);
    EXPECT_THROW((void)etbo::config_from_json(nlohmann::json::parse(R"({"horizon": 2.5, "policies": [{}]})")),
                 etbo::ConfigError);
}

TEST(Config, ValidationCatchesBadValues) {
    auto c = etbo::preset_config("within-model-eps0.01");
    c.noise_variance = 0.0;
    EXPECT_THROW(etbo::validate(c), etbo::ConfigError);
    c = etbo::preset_config("within-model-eps0.01");
    c.seeds.clear();
    EXPECT_THROW(etbo::validate(c), etbo::ConfigError);
    c = etbo::preset_config("within-model-eps0.01");
    c.objective.epsilon = 1.2;
    EXPECT_THROW(etbo::validate(c), etbo::ConfigError);
    c = etbo::preset_config("within-model-eps0.01");
    c.policies.push_back(c.policies.front());
    EXPECT_THROW(etbo::validate(c), etbo::ConfigError);
}

TEST(Config, LoadMissingFileMentionsPath) {
    try {
        (void)etbo::load_config("/nonexistent/missing.toml");
        FAIL();
    } catch (const etbo::ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/missing.toml"), std::string::npos);
    }
}

TEST(Overrides, ApplyAndTypeCheck) {
    const auto base = etbo::preset_config("within-model-eps0.03");
    const auto c = etbo::with_overrides(base, {"horizon=50", "policies.3.delta_B=0.5", "objective.epsilon=0.1",
                                               "name=renamed", "kernel.lengthscales=[0.3,0.3]"});
    EXPECT_EQ(c.horizon, 50);
    EXPECT_EQ(c.policies[3].delta_B, 0.5);
    EXPECT_EQ(c.objective.epsilon, 0.1);
    EXPECT_EQ(c.name, "renamed");
    EXPECT_EQ(c.kernel.lengthscales[0], 0.3);
    EXPECT_EQ(etbo::with_overrides(base, {"noise_variance=1"}).noise_variance, 1.0);
    EXPECT_THROW((void)etbo::with_overrides(base, {"horizon=abc"}), etbo::ConfigError);
    EXPECT_THROW((void)etbo::with_overrides(base, {"horizon=2.5"}), etbo::ConfigError);
    EXPECT_THROW((void)etbo::with_overrides(base, {"nope=1"}), etbo::ConfigError);
    EXPECT_THROW((void)etbo::with_overrides(base, {"policies.9.epsilon=1"}), etbo::ConfigError);
    EXPECT_THROW((void)etbo::with_overrides(base, {"horizon"}), etbo::ConfigError);
    EXPECT_THROW((void)etbo::with_overrides(base, {"objective.epsilon=2"}), etbo::ConfigError);
}

TEST(Seeds, Parsing) {
    EXPECT_EQ(etbo::parse_seed_list("0..3"), (std::vector<std::uint64_t>{0, 1, 2, 3}));
    EXPECT_EQ(etbo::parse_seed_list("5,2,9"), (std::vector<std::uint64_t>{5, 2, 9}));
    EXPECT_EQ(etbo::parse_seed_list("7"), (std::vector<std::uint64_t>{7}));
    EXPECT_THROW((void)etbo::parse_seed_list("3..1"), etbo::ConfigError);
    EXPECT_THROW((void)etbo::parse_seed_list("a"), etbo::ConfigError);
    EXPECT_THROW((void)etbo::parse_seed_list("-1"), etbo::ConfigError);
}

TEST(Presets, EncodeTheExperimentTables) {
    const auto w = etbo::preset_config("within-model-eps0.03");
    EXPECT_EQ(w.horizon, 400);
    EXPECT_EQ(w.noise_variance, 0.02);
    EXPECT_EQ(w.kernel.lengthscales, (std::vector<double>{0.2, 0.2}));
    EXPECT_EQ(w.seeds.size(), 50u);
    const etbo::ExperimentSetup setup(etbo::with_overrides(w, {"domain.resolution=[4,4]"}));
    EXPECT_EQ(setup.specs()[2].reset_period, 29);
    EXPECT_EQ(setup.specs()[0].beta.c1, 0.4);
    EXPECT_EQ(setup.specs()[0].beta.c2, 4.0);
    const auto m = etbo::preset_config("misspecified");
    EXPECT_EQ(m.objective.epsilon, 0.05);
    EXPECT_EQ(m.policies[1].epsilon, 0.001);
    const etbo::ExperimentSetup ms(etbo::with_overrides(m, {"domain.resolution=[4,4]"}));
    EXPECT_EQ(ms.specs()[2].reset_period, 68);
    EXPECT_EQ(etbo::preset_config("sensitivity-eps0.05").policies.size(), 5u);
    EXPECT_EQ(etbo::preset_config("mc-eps0.1").horizon, 200);
    EXPECT_THROW((void)etbo::preset_config("nope"), etbo::ConfigError);
}

TEST(Presets, SavedJsonReproducesPresetRun) {
    const auto dir = scratch("preset_rt");
    const auto c = tiny(etbo::preset_config("within-model-eps0.05"));
    {
        std::ofstream out(dir / "c.json");
        out << etbo::to_json(c).dump(2);
    }
    auto a = c;
    a.seeds = {0, 1};
    auto b = etbo::load_config((dir / "c.json").string());
    b.seeds = {0, 1};
    std::ostringstream sa, sb;
    etbo::write_trace_csv(sa, etbo::run_experiment(a));
    etbo::write_trace_csv(sb, etbo::run_experiment(b));
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const auto log = dir / "log.txt";
    EXPECT_EQ(cli("run --config " + (dir / "missing.toml").string(), log), 1);
    EXPECT_NE(slurp(log).find("missing.toml"), std::string::npos);
    EXPECT_EQ(cli("run --preset no-such-preset", log), 1);
    EXPECT_EQ(cli("run --preset within-model-eps0.01 --set horizon=abc", log), 1);
    EXPECT_EQ(cli("run --preset within-model-eps0.01 --set unknown.key=1", log), 1);
    EXPECT_EQ(cli("frobnicate", log), 1);
    EXPECT_EQ(cli("list-presets", log), 0);
    EXPECT_NE(slurp(log).find("within-model-eps0.03"), std::string::npos);
    EXPECT_NE(slurp(log).find("sudden-change"), std::string::npos);
    {
        std::ofstream bad(dir / "kernel.csv");
        bad << "1,2\n2,1\n"; // indefinite
    }
    const std::string arms = "run --preset within-model-eps0.01 --seeds 0 --out " + (dir / "arms").string() +
                             " --set domain.kind=arms --set kernel.kind=empirical --set kernel.matrix_path=" +
                             (dir / "kernel.csv").string();
    EXPECT_EQ(cli(arms, log), 1);
    EXPECT_NE(slurp(log).find("positive semidefinite"), std::string::npos);
    const std::string unwritable = "run --preset within-model-eps0.01 --seeds 0 --set horizon=2 "
                                   "--set domain.resolution=[3,3] --out /dev/null/sub";
    EXPECT_EQ(cli(unwritable, log), 2);
}

TEST(Cli, RunWritesOutputsAndEchoesConfig) {
    const auto dir = scratch("cli_run");
    const auto log = dir / "log.txt";
    const std::string args = "run --preset within-model-eps0.05 --seeds 0..1 --set horizon=8 "
                             "--set domain.resolution=[6,6] --out " +
                             (dir / "a").string();
    ASSERT_EQ(cli(args, log), 0) << slurp(log);
    for (const char* f : {"trace.csv", "summary.csv", "normalized.csv", "config.json"}) {
        EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
    }
    // The echoed config reproduces the run.
    ASSERT_EQ(cli("run --config " + (dir / "a" / "config.json").string() + " --out " + (dir / "b").string(), log), 0)
        << slurp(log);
    EXPECT_EQ(slurp(dir / "a" / "trace.csv"), slurp(dir / "b" / "trace.csv"));
    EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "b" / "summary.csv"));
}

TEST(Cli, ListPresetsRoundTrips) {
    const auto dir = scratch("cli_list");
    const auto log = dir / "log.txt";
    ASSERT_EQ(cli("list-presets --out " + (dir / "presets").string(), log), 0);
    for (const auto& p : etbo::presets()) {
        const auto loaded = etbo::load_config((dir / "presets" / (p.name + ".json")).string());
        EXPECT_EQ(etbo::to_json(loaded), etbo::to_json(p.config)) << p.name;
    }
    ASSERT_EQ(cli("list-presets --show mc-eps0.1", log), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(log)), etbo::to_json(etbo::preset_config("mc-eps0.1")));
}

TEST(Cli, StoppingTimesAndBound) {
    const auto dir = scratch("cli_stop");
    const auto log = dir / "log.txt";
    const std::string common = " --set horizon=20 --set domain.resolution=[6,6] --set objective.epsilon=0.3";
    ASSERT_EQ(cli("stopping-times --preset mc-eps0.1 --runs 15" + common + " --out " + (dir / "st").string(), log), 0)
        << slurp(log);
    EXPECT_TRUE(fs::exists(dir / "st" / "stopping_times.csv"));
    EXPECT_TRUE(fs::exists(dir / "st" / "stopping_summary.csv"));
    EXPECT_EQ(cli("bound --preset mc-eps0.1 --seeds 0" + common + " --out " + (dir / "b").string(), log), 1);
    ASSERT_EQ(cli("bound --preset mc-eps0.1 --seeds 0 --estimate-tau 10" + common + " --out " + (dir / "b").string(),
                  log),
              0)
        << slurp(log);
    EXPECT_EQ(slurp(dir / "b" / "bound.csv").rfind("t,beta_t,gamma_surrogate_lower,phi_T,bound,R_t\n", 0), 0u);
}

TEST(Cli, IngestCheck) {
    const auto dir = scratch("cli_ingest");
    const auto log = dir / "log.txt";
    {
        std::ofstream out(dir / "arms.csv");
        out << "arm_id,time_index,value\n";
        for (int t = 0; t < 10; ++t) {
            out << "0," << t << ',' << (t % 3) << "\n1," << t << ',' << (t * t % 5) << '\n';
        }
    }
    EXPECT_EQ(cli("ingest-check --csv " + (dir / "arms.csv").string() + " --train 0:6 --test 6:10 --out " +
                      dir.string(),
                  log),
              0)
        << slurp(log);
    EXPECT_TRUE(fs::exists(dir / "covariance.csv"));
    EXPECT_EQ(cli("ingest-check --csv " + (dir / "arms.csv").string() + " --train 0-6 --test 6:10", log), 1);
}
