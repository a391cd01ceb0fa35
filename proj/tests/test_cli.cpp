#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rrl/cli.hpp"

using namespace rrl;
namespace fs = std::filesystem;

namespace {

int run_cli(std::initializer_list<std::string> args, std::string* out = nullptr) {
    std::vector<std::string> storage = {"rrl"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());

    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    const int rc = cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    if (out) *out = captured.str();
    return rc;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// small but real run: two short episodes, tiny nets
std::string tiny_config_text() {
    return "[agent]\n"
           "hidden1 = 8\n"
           "hidden2 = 8\n"
           "minibatch = 8\n"
           "buffer_capacity = 4096\n"
           "[experiment]\n"
           "episodes = 2\n"
           "periods_per_episode = 100\n"
           "switch_period = 50\n"
           "post_switch_episodes = 1\n"
           "seeds = 1, 2\n";
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const auto path = dir / "config.ini";
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("train writes checkpoints, trajectories, and a summary") {
    const auto dir = fresh_dir("rrl_cli_train");
    const auto cfg = write_config(dir, tiny_config_text());
    const auto out = dir / "run";

    const int rc = run_cli({"train", "--config", cfg.string(), "--out",
                            out.string()});
    REQUIRE(rc == kExitOk);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "train_seed1.csv"));
    CHECK(fs::exists(out / "train_seed2.csv"));
    CHECK(fs::exists(out / "checkpoint_seed1" / "actor.bin"));
    CHECK(fs::exists(out / "checkpoint_seed1" / "manifest.json"));
    CHECK(fs::exists(out / "summary_train.json"));
}

TEST_CASE("unknown config keys abort a run") {
    const auto dir = fresh_dir("rrl_cli_badkey");
    const auto cfg = write_config(dir, "[agent]\nlearning_rate = 1\n");
    const int rc = run_cli({"train", "--config", cfg.string(), "--out",
                            (dir / "run").string()});
    CHECK(rc == kExitBadConfig);
}

TEST_CASE("lambda = -1 in a config is rejected with the degenerate exponent") {
    const auto dir = fresh_dir("rrl_cli_lambda");
    const auto cfg = write_config(dir, "[economy]\nlambda = -1\n");
    const int rc = run_cli({"train", "--config", cfg.string(), "--out",
                            (dir / "run").string()});
    CHECK(rc == kExitBadConfig);
}

TEST_CASE("a missing config file exits with the io code") {
    const int rc = run_cli({"train", "--config", "/no/such/config.ini",
                            "--out", "/tmp/never"});
    CHECK(rc == kExitIoFailure);
}

TEST_CASE("switch produces both arms from one set of checkpoints") {
    const auto dir = fresh_dir("rrl_cli_switch");
    const auto cfg = write_config(dir, tiny_config_text());
    const auto train_out = dir / "train";
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--out",
                     train_out.string()}) == kExitOk);

    const auto explore_out = dir / "explore";
    REQUIRE(run_cli({"switch", "--config", cfg.string(), "--checkpoint",
                     train_out.string(), "--out", explore_out.string()}) ==
            kExitOk);
    CHECK(fs::exists(explore_out / "explore_seed1.csv"));
    CHECK(fs::exists(explore_out / "summary_explore.json"));

    const auto frozen_out = dir / "frozen";
    REQUIRE(run_cli({"switch", "--config", cfg.string(), "--checkpoint",
                     train_out.string(), "--out", frozen_out.string(),
                     "--no-exploration"}) == kExitOk);
    CHECK(fs::exists(frozen_out / "frozen_seed1.csv"));

    // identical pre-switch prefix, byte for byte
    auto read_lines = [](const fs::path& p) {
        std::ifstream in(p);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        return lines;
    };
    const auto e = read_lines(explore_out / "explore_seed1.csv");
    const auto f = read_lines(frozen_out / "frozen_seed1.csv");
    REQUIRE(e.size() == f.size());
    for (int k = 1; k <= 50; ++k) CHECK(e[k] == f[k]);
    bool diverged = false;
    for (std::size_t k = 51; k < e.size(); ++k) diverged = diverged || e[k] != f[k];
    CHECK(diverged);
}

TEST_CASE("switch with a mismatched architecture is a config error") {
    const auto dir = fresh_dir("rrl_cli_mismatch");
    const auto cfg = write_config(dir, tiny_config_text());
    const auto train_out = dir / "train";
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--out",
                     train_out.string()}) == kExitOk);

    const auto other = write_config(fresh_dir("rrl_cli_mismatch2"),
                                    "[agent]\nhidden1 = 16\nhidden2 = 16\n"
                                    "minibatch = 8\n"
                                    "[experiment]\nepisodes = 2\n"
                                    "periods_per_episode = 100\n"
                                    "switch_period = 50\n"
                                    "post_switch_episodes = 1\nseeds = 1\n");
    const int rc = run_cli({"switch", "--config", other.string(),
                            "--checkpoint", train_out.string(), "--out",
                            (dir / "sw").string()});
    CHECK(rc == kExitBadConfig);
}

TEST_CASE("switch without checkpoints reports missing outputs") {
    const auto dir = fresh_dir("rrl_cli_nockpt");
    const auto cfg = write_config(dir, tiny_config_text());
    const int rc = run_cli({"switch", "--config", cfg.string(), "--checkpoint",
                            (dir / "nothing").string(), "--out",
                            (dir / "sw").string()});
    CHECK(rc == kExitIoFailure);
}

TEST_CASE("verify passes a synthetic steady-state trajectory") {
    const auto dir = fresh_dir("rrl_cli_verify_synth");

    // manifest with an empty config (defaults)
    nlohmann::json man;
    man["command"] = "train";
    man["config_path"] = "<synthetic>";
    man["config_text"] = "";
    man["out_dir"] = dir.string();
    man["tool_version"] = kToolVersion;
    man["seeds"] = {1};
    man["timestamp_unix"] = 0;
    std::ofstream(dir / "manifest.json") << man.dump(2);

    ExperimentConfig cfg;  // defaults
    const SteadyState ss = steady_state(cfg.regime_before);
    std::vector<TrajectoryRecord> rows;
    for (int k = 0; k < 300; ++k) {
        TrajectoryRecord r;
        r.seed = 1;
        r.episode = 0;
        r.period = k;
        r.regime_id = 0;
        r.belief = cfg.regime_before.pi_hat;
        r.pi = ss.pi;
        r.i = ss.i;
        r.m = ss.m;
        r.reward = 0.0;
        rows.push_back(r);
    }
    write_trajectory_csv(dir / "train_seed1.csv", rows);

    std::string out;
    const int rc = run_cli({"verify", dir.string()}, &out);
    CHECK(rc == kExitOk);
    CHECK(out.find("[PASS] closed-form transition identities") !=
          std::string::npos);
    CHECK(out.find("[PASS] training settles at the target") !=
          std::string::npos);
    CHECK(out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("verify pinpoints a corrupted value") {
    const auto dir = fresh_dir("rrl_cli_verify_corrupt");

    nlohmann::json man;
    man["command"] = "train";
    man["config_path"] = "<synthetic>";
    man["config_text"] = "";
    man["out_dir"] = dir.string();
    man["tool_version"] = kToolVersion;
    man["seeds"] = {1};
    man["timestamp_unix"] = 0;
    std::ofstream(dir / "manifest.json") << man.dump(2);

    ExperimentConfig cfg;
    const SteadyState ss = steady_state(cfg.regime_before);
    std::vector<TrajectoryRecord> rows;
    for (int k = 0; k < 100; ++k) {
        TrajectoryRecord r;
        r.seed = 1;
        r.period = k;
        r.belief = 1.0;
        r.pi = k == 42 ? ss.pi + 0.01 : ss.pi;  // one corrupted inflation value
        r.i = ss.i;
        r.m = ss.m;
        r.reward = k == 0 ? 0.0 : -std::abs(1.0 - r.pi);
        rows.push_back(r);
    }
    write_trajectory_csv(dir / "train_seed1.csv", rows);

    std::string out;
    const int rc = run_cli({"verify", dir.string()}, &out);
    CHECK(rc == kExitBadConfig);
    CHECK(out.find("[FAIL] closed-form transition identities") !=
          std::string::npos);
    CHECK(out.find("row 42") != std::string::npos);
}

TEST_CASE("verify on an empty directory reports missing outputs") {
    const auto dir = fresh_dir("rrl_cli_verify_empty");
    const int rc = run_cli({"verify", dir.string()});
    CHECK(rc == kExitIoFailure);
}

TEST_CASE("train twice with one seed gives byte-identical trajectories") {
    const auto dir = fresh_dir("rrl_cli_repro");
    const auto cfg = write_config(dir, tiny_config_text());
    const auto out1 = dir / "run1";
    const auto out2 = dir / "run2";
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--out",
                     out1.string()}) == kExitOk);
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--out",
                     out2.string()}) == kExitOk);

    for (const char* name : {"train_seed1.csv", "train_seed2.csv"}) {
        std::ifstream a(out1 / name), b(out2 / name);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());
        CHECK(!sa.str().empty());
    }
}
