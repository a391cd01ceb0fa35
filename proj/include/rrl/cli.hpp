#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrl/checkpoint.hpp"
#include "rrl/config.hpp"
#include "rrl/csv.hpp"
#include "rrl/errors.hpp"
#include "rrl/harness.hpp"

namespace rrl {

inline constexpr const char* kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadConfig = 1;  // also: verification failure
inline constexpr int kExitIoFailure = 2;
inline constexpr int kExitInternal = 3;

namespace cli_detail {

inline int thread_budget(std::size_t tasks) {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("RRL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<std::size_t>(v);
    }
    return static_cast<int>(std::min(n, tasks));
}

// Runs fn(k) for k in [0, tasks) across a small worker pool. Exceptions are
// captured per task and the lowest-index one is rethrown after the join, so
// error reporting stays deterministic.
template <class F>
void parallel_tasks(std::size_t tasks, F&& fn) {
    if (tasks == 0) return;
    const int workers = thread_budget(tasks);
    if (workers <= 1) {
        for (std::size_t k = 0; k < tasks; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= tasks) return;
                try {
                    fn(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Written atomically (temp file + rename) before any simulation output.
inline void write_manifest(const std::filesystem::path& out_dir,
                           const std::string& command,
                           const std::string& config_path,
                           const std::string& config_text,
                           const std::vector<std::uint64_t>& seeds) {
    nlohmann::json man;
    man["command"] = command;
    man["config_path"] = config_path;
    man["config_text"] = config_text;
    man["out_dir"] = out_dir.string();
    man["tool_version"] = kToolVersion;
    man["seeds"] = seeds;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    man["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();

    const auto tmp = out_dir / "manifest.json.tmp";
    const auto final_path = out_dir / "manifest.json";
    {
        std::ofstream out(tmp);
        if (!out) throw IoFailure("cannot write '" + tmp.string() + "'");
        out << man.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, final_path);
}

inline ExperimentConfig apply_overrides(ExperimentConfig cfg,
                                        const std::vector<std::uint64_t>& seeds,
                                        bool no_exploration,
                                        bool paper_literal) {
    if (!seeds.empty()) cfg.seeds = seeds;
    if (no_exploration) {
        cfg.exploration = false;
        cfg.learning_after_switch = false;
    }
    if (paper_literal) cfg.agent.use_target_networks = false;
    cfg.validate();
    return cfg;
}

}  // namespace cli_detail

// --- train -----------------------------------------------------------------

inline void cmd_train_impl(const ExperimentConfig& cfg,
                           const std::string& config_path,
                           const std::string& config_text,
                           const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    cli_detail::write_manifest(out_dir, "train", config_path, config_text,
                               cfg.seeds);

    std::vector<ArmSummary> summaries(cfg.seeds.size());
    cli_detail::parallel_tasks(cfg.seeds.size(), [&](std::size_t k) {
        const std::uint64_t seed = cfg.seeds[k];
        Agent agent = make_agent(cfg, seed);
        const RunResult res = run_training(cfg, seed, agent);
        write_trajectory_csv(
            out_dir / ("train_seed" + std::to_string(seed) + ".csv"),
            res.records);
        save_checkpoint(agent, out_dir / ("checkpoint_seed" +
                                          std::to_string(seed)));
        summaries[k] = summarize_arm("train", seed, res.records, cfg);
    });
    write_summary(out_dir / "summary_train.json", summaries);
}

// --- switch ------------------------------------------------------------------

inline void cmd_switch_impl(const ExperimentConfig& cfg,
                            const std::string& config_path,
                            const std::string& config_text,
                            const std::filesystem::path& checkpoint_root,
                            const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    const std::string arm = cfg.exploration ? "explore" : "frozen";
    fs::create_directories(out_dir);
    cli_detail::write_manifest(out_dir, "switch", config_path, config_text,
                               cfg.seeds);

    std::vector<ArmSummary> summaries(cfg.seeds.size());
    cli_detail::parallel_tasks(cfg.seeds.size(), [&](std::size_t k) {
        const std::uint64_t seed = cfg.seeds[k];
        const auto ckpt =
            checkpoint_root / ("checkpoint_seed" + std::to_string(seed));
        if (!fs::exists(ckpt / "manifest.json"))
            throw MissingOutputs("switch: no checkpoint at '" +
                                 ckpt.string() + "'");
        Agent agent = load_checkpoint(ckpt, cfg.agent);
        const RunResult res = run_regime_switch(cfg, seed, agent);
        write_trajectory_csv(
            out_dir / (arm + "_seed" + std::to_string(seed) + ".csv"),
            res.records);
        summaries[k] = summarize_arm(arm, seed, res.records, cfg);
    });
    write_summary(out_dir / ("summary_" + arm + ".json"), summaries);
}

// --- compare-experience ------------------------------------------------------

inline void cmd_compare_impl(const ExperimentConfig& cfg,
                             const std::string& config_path,
                             const std::string& config_text,
                             const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    cli_detail::write_manifest(out_dir, "compare-experience", config_path,
                               config_text, cfg.seeds);

    std::vector<std::vector<ArmSummary>> per_seed(cfg.seeds.size());
    cli_detail::parallel_tasks(cfg.seeds.size(), [&](std::size_t k) {
        const std::uint64_t seed = cfg.seeds[k];
        const auto runs = run_experience_comparison(cfg, seed);
        for (const auto& run : runs) {
            const std::string tag = "ep" + std::to_string(run.level);
            write_trajectory_csv(out_dir / (tag + "_train_seed" +
                                            std::to_string(seed) + ".csv"),
                                 run.training.records);
            write_trajectory_csv(out_dir / (tag + "_switch_seed" +
                                            std::to_string(seed) + ".csv"),
                                 run.switching.records);
            per_seed[k].push_back(summarize_arm(tag + "_switch", seed,
                                                run.switching.records, cfg));
        }
    });
    std::vector<ArmSummary> summaries;
    for (const auto& rows : per_seed)
        summaries.insert(summaries.end(), rows.begin(), rows.end());
    write_summary(out_dir / "summary_experience.json", summaries);
}

// --- verify ------------------------------------------------------------------

struct CriterionLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace cli_detail {

inline void report(std::vector<CriterionLine>& lines, const std::string& name,
                   bool pass, const std::string& detail) {
    lines.push_back({name, pass, detail});
}

// majority helper: at least `need` of the entries true (and at least one
// entry present)
inline bool majority(const std::vector<bool>& oks, int need) {
    int yes = 0;
    for (bool b : oks) yes += b ? 1 : 0;
    return !oks.empty() &&
           yes >= std::min<int>(need, static_cast<int>(oks.size()));
}

}  // namespace cli_detail

// Re-reads every trajectory CSV under `out_dir`, cross-checks the closed-form
// identities row by row, recomputes each stored summary from scratch, and
// evaluates the acceptance thresholds for whichever arms are present.
inline std::vector<CriterionLine> verify_run_dir(
    const std::filesystem::path& out_dir,
    const AcceptanceThresholds& thr = {}) {
    namespace fs = std::filesystem;
    std::vector<CriterionLine> lines;

    if (!fs::exists(out_dir / "manifest.json"))
        throw MissingOutputs("verify: no manifest.json under '" +
                             out_dir.string() + "'");
    nlohmann::json man;
    {
        std::ifstream in(out_dir / "manifest.json");
        in >> man;
    }
    std::istringstream cfg_text(man.at("config_text").get<std::string>());
    ExperimentConfig cfg = parse_config(cfg_text, "manifest:config_text");

    // collect trajectory files by arm
    std::map<std::string, std::map<std::uint64_t, fs::path>> arms;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        const std::string name = entry.path().filename().string();
        const auto pos = name.rfind("_seed");
        if (entry.path().extension() != ".csv" || pos == std::string::npos)
            continue;
        const std::string arm = name.substr(0, pos);
        const std::string seed_str =
            name.substr(pos + 5, name.size() - pos - 5 - 4);
        arms[arm][std::stoull(seed_str)] = entry.path();
    }
    if (arms.empty())
        throw MissingOutputs("verify: no trajectory CSVs under '" +
                             out_dir.string() + "'");

    // 1. closed-form identities on every row of every file
    bool identities_ok = true;
    std::string identity_detail = "every row satisfies the closed forms";
    for (const auto& [arm, files] : arms) {
        for (const auto& [seed, path] : files) {
            const auto rows = read_trajectory_csv(path);
            std::string msg;
            const long bad = cross_check_rows(rows, cfg, &msg);
            if (bad >= 0) {
                identities_ok = false;
                identity_detail = path.filename().string() + ": " + msg;
                break;
            }
        }
        if (!identities_ok) break;
    }
    cli_detail::report(lines, "closed-form transition identities",
                       identities_ok, identity_detail);

    // 2. stored summaries match an independent recomputation
    bool summaries_ok = true;
    std::string summary_detail = "stored summaries match recomputation";
    int summaries_seen = 0;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("summary_", 0) != 0 ||
            entry.path().extension() != ".json")
            continue;
        for (const auto& stored : read_summary(entry.path())) {
            ++summaries_seen;
            const auto it = arms.find(stored.arm);
            if (it == arms.end() || !it->second.count(stored.seed)) {
                summaries_ok = false;
                summary_detail = "summary row for missing CSV: " + stored.arm;
                continue;
            }
            const auto rows = read_trajectory_csv(it->second.at(stored.seed));
            const ArmSummary fresh =
                summarize_arm(stored.arm, stored.seed, rows, cfg);
            const double tol = 1e-9;
            const bool same =
                std::abs(fresh.terminal_belief - stored.terminal_belief) <= tol &&
                std::abs(fresh.terminal_pi - stored.terminal_pi) <= tol &&
                std::abs(fresh.terminal_i - stored.terminal_i) <= tol &&
                std::abs(fresh.terminal_m - stored.terminal_m) <= tol &&
                std::abs(fresh.forecast_rmse - stored.forecast_rmse) <= tol &&
                std::abs(fresh.dist_pi - stored.dist_pi) <= tol &&
                std::abs(fresh.dist_i - stored.dist_i) <= tol &&
                std::abs(fresh.dist_m - stored.dist_m) <= tol &&
                std::abs(fresh.mean_abs_belief_gap -
                         stored.mean_abs_belief_gap) <= tol &&
                std::abs(fresh.max_belief_drift_post_switch -
                         stored.max_belief_drift_post_switch) <= tol &&
                fresh.periods_to_cross_midpoint ==
                    stored.periods_to_cross_midpoint &&
                fresh.rows == stored.rows;
            if (!same) {
                summaries_ok = false;
                summary_detail = "summary mismatch for " + stored.arm +
                                 " seed " + std::to_string(stored.seed);
            }
        }
    }
    if (summaries_seen > 0)
        cli_detail::report(lines, "summary recomputation", summaries_ok,
                           summary_detail);

    // 3. threshold criteria for whichever arms exist
    auto load_arm = [&](const std::string& arm) {
        std::vector<std::pair<std::uint64_t, std::vector<TrajectoryRecord>>>
            out;
        if (!arms.count(arm)) return out;
        for (const auto& [seed, path] : arms.at(arm))
            out.emplace_back(seed, read_trajectory_csv(path));
        return out;
    };

    if (const auto train = load_arm("train"); !train.empty()) {
        std::vector<bool> oks;
        std::ostringstream detail;
        for (const auto& [seed, rows] : train) {
            const ArmSummary s = summarize_arm("train", seed, rows, cfg,
                                               thr.terminal_window);
            const bool ok = s.mean_abs_belief_gap < thr.training_belief_gap;
            oks.push_back(ok);
            detail << "seed " << seed << " gap "
                   << format_double(s.mean_abs_belief_gap) << (ok ? " ok" : " FAIL")
                   << "; ";
        }
        cli_detail::report(lines, "training settles at the target",
                           cli_detail::majority(oks, thr.majority),
                           detail.str());
    }

    if (const auto explore = load_arm("explore"); !explore.empty()) {
        std::vector<bool> oks;
        std::ostringstream detail;
        for (const auto& [seed, rows] : explore) {
            std::vector<double> pi, i, m;
            for (const auto& r : rows) {
                if (r.regime_id != 1) continue;
                pi.push_back(r.pi);
                i.push_back(r.i);
                m.push_back(r.m);
            }
            const bool ok =
                rolling_mean_band(pi, thr.terminal_window, thr.switch_pi_lo,
                                  thr.switch_pi_hi, thr.tail_fraction) &&
                rolling_mean_band(i, thr.terminal_window, thr.switch_i_lo,
                                  thr.switch_i_hi, thr.tail_fraction) &&
                rolling_mean_band(m, thr.terminal_window, thr.switch_m_lo,
                                  thr.switch_m_hi, thr.tail_fraction);
            oks.push_back(ok);
            detail << "seed " << seed << (ok ? " in band" : " FAIL") << "; ";
        }
        cli_detail::report(lines, "exploring arm adapts to the new target",
                           cli_detail::majority(oks, thr.majority),
                           detail.str());
    }

    if (const auto frozen = load_arm("frozen"); !frozen.empty()) {
        std::vector<bool> oks;
        std::ostringstream detail;
        const double pi_frozen = realized_inflation(
            euler_rate(cfg.regime_before.pi_hat, cfg.regime_after),
            cfg.regime_after);
        for (const auto& [seed, rows] : frozen) {
            const ArmSummary s = summarize_arm("frozen", seed, rows, cfg,
                                               thr.terminal_window);
            const bool ok =
                s.max_belief_drift_post_switch < thr.frozen_drift_max &&
                std::abs(s.terminal_pi - pi_frozen) < thr.frozen_pi_tol;
            oks.push_back(ok);
            detail << "seed " << seed << " drift "
                   << format_double(s.max_belief_drift_post_switch) << " pi "
                   << format_double(s.terminal_pi) << (ok ? " ok" : " FAIL")
                   << "; ";
        }
        cli_detail::report(lines, "frozen arm neither adapts nor drifts",
                           cli_detail::majority(oks, thr.majority),
                           detail.str());
    }

    // experience arms: ep<L>_switch
    {
        std::vector<int> levels;
        for (const auto& [arm, files] : arms) {
            if (arm.rfind("ep", 0) == 0 && arm.size() > 2 &&
                arm.find("_switch") != std::string::npos)
                levels.push_back(std::stoi(arm.substr(2)));
        }
        std::sort(levels.begin(), levels.end());
        if (!levels.empty()) {
            std::vector<bool> ordered_ok, low_ok, all_ok;
            std::ostringstream detail;
            for (const auto& [seed, unused] :
                 arms.at("ep" + std::to_string(levels.front()) + "_switch")) {
                (void)unused;
                std::vector<double> gaps, beliefs;
                for (int lvl : levels) {
                    const auto& path =
                        arms.at("ep" + std::to_string(lvl) + "_switch")
                            .at(seed);
                    const auto rows = read_trajectory_csv(path);
                    const ArmSummary s =
                        summarize_arm("ep", seed, rows, cfg,
                                      thr.terminal_window);
                    gaps.push_back(std::abs(s.terminal_belief -
                                            cfg.regime_after.pi_hat));
                    beliefs.push_back(s.terminal_belief);
                }
                bool mono = true;
                for (std::size_t k = 1; k < gaps.size(); ++k)
                    mono = mono && gaps[k] <= gaps[k - 1] + 1e-12;
                ordered_ok.push_back(mono);
                low_ok.push_back(beliefs.front() >= thr.exp_low_band_lo &&
                                 beliefs.front() <= thr.exp_low_band_hi);
                bool all_in = true;
                for (double b : beliefs)
                    all_in = all_in && b >= thr.exp_all_band_lo &&
                             b <= thr.exp_all_band_hi;
                all_ok.push_back(all_in);
                detail << "seed " << seed << " gaps ";
                for (double g : gaps) detail << format_double(g) << " ";
                detail << "; ";
            }
            cli_detail::report(lines,
                               "experience ordering (gap weakly decreasing)",
                               cli_detail::majority(ordered_ok, thr.majority),
                               detail.str());
            cli_detail::report(
                lines, "least-experienced agent lands in the low band",
                cli_detail::majority(low_ok, thr.majority), "");
            cli_detail::report(lines,
                               "all experience levels end near the new target",
                               cli_detail::majority(all_ok, thr.majority), "");
        }
    }
    return lines;
}

// --- entry point --------------------------------------------------------------

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"closed-form monetary economy with a DDPG learner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("rrl ") + kToolVersion);

    std::string config_path, out_dir, checkpoint_dir;
    std::vector<std::uint64_t> seed_override;
    bool no_exploration = false, paper_literal = false;

    auto add_common = [&](CLI::App* sub, bool with_checkpoint) {
        sub->add_option("--config", config_path, "experiment config file")
            ->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seeds", seed_override,
                        "override the config's seed list");
        sub->add_flag("--paper-literal", paper_literal,
                      "bootstrap TD targets from the live networks instead "
                      "of target networks");
        if (with_checkpoint)
            sub->add_option("--checkpoint", checkpoint_dir,
                            "training output directory holding "
                            "checkpoint_seed<S>/")
                ->required();
    };

    CLI::App* train = app.add_subcommand("train", "train under the first target");
    add_common(train, false);

    CLI::App* sw = app.add_subcommand(
        "switch", "continue from a checkpoint through the target change");
    add_common(sw, true);
    sw->add_flag("--no-exploration", no_exploration,
                 "freeze exploration and learning after the switch");

    CLI::App* cmp = app.add_subcommand(
        "compare-experience",
        "train agents of different experience and apply the same switch");
    add_common(cmp, false);

    std::string verify_dir;
    CLI::App* ver = app.add_subcommand("verify", "check a finished run directory");
    ver->add_option("out_dir", verify_dir, "run directory to verify")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(train)) {
            const std::string text = cli_detail::read_file(config_path);
            std::istringstream in(text);
            ExperimentConfig cfg = cli_detail::apply_overrides(
                parse_config(in, config_path), seed_override, false,
                paper_literal);
            cmd_train_impl(cfg, config_path, text, out_dir);
        } else if (app.got_subcommand(sw)) {
            const std::string text = cli_detail::read_file(config_path);
            std::istringstream in(text);
            ExperimentConfig cfg = cli_detail::apply_overrides(
                parse_config(in, config_path), seed_override, no_exploration,
                paper_literal);
            cmd_switch_impl(cfg, config_path, text, checkpoint_dir, out_dir);
        } else if (app.got_subcommand(cmp)) {
            const std::string text = cli_detail::read_file(config_path);
            std::istringstream in(text);
            ExperimentConfig cfg = cli_detail::apply_overrides(
                parse_config(in, config_path), seed_override, false,
                paper_literal);
            cmd_compare_impl(cfg, config_path, text, out_dir);
        } else if (app.got_subcommand(ver)) {
            const auto lines = verify_run_dir(verify_dir);
            bool all = true;
            for (const auto& l : lines) {
                std::cout << (l.pass ? "[PASS] " : "[FAIL] ") << l.name;
                if (!l.detail.empty()) std::cout << " — " << l.detail;
                std::cout << "\n";
                all = all && l.pass;
            }
            return all ? kExitOk : kExitBadConfig;
        }
        return kExitOk;
    } catch (const IoFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoFailure;
    } catch (const MissingOutputs& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace rrl
