#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrl/agent.hpp"
#include "rrl/config.hpp"
#include "rrl/csv.hpp"
#include "rrl/economy.hpp"
#include "rrl/errors.hpp"

namespace rrl {

// Stream tags for deriving the independent RNG streams of one run from one
// master seed. The environment streams are shared across experience levels
// so that every level sees identical initial conditions; the agent stream is
// level-specific so the agents learn independently.
inline constexpr std::uint64_t kStreamTrainEnv = 1;
inline constexpr std::uint64_t kStreamAgent = 2;
inline constexpr std::uint64_t kStreamSwitchEnv = 3;
inline constexpr std::uint64_t kStreamLevelBase = 100;

inline std::uint64_t agent_seed_for(std::uint64_t seed) {
    return mix_seed(seed, kStreamAgent);
}

inline std::uint64_t agent_seed_for_level(std::uint64_t seed, int level) {
    return mix_seed(seed, kStreamLevelBase + static_cast<std::uint64_t>(level));
}

// Episode start: the active regime's steady state with pi_prev and
// belief_prev perturbed by uniform +-perturb. Money starts at its steady
// value.
inline MacroState initial_state(const Regime& regime, double perturb,
                                Rng& env_rng) {
    const SteadyState ss = steady_state(regime);
    MacroState s;
    s.pi_prev = ss.pi + env_rng.uniform(-perturb, perturb);
    s.belief_prev = ss.pi + env_rng.uniform(-perturb, perturb);
    s.m_prev = ss.m;
    return s;
}

struct RunResult {
    std::vector<TrajectoryRecord> records;
};

inline Agent make_agent(const ExperimentConfig& cfg, std::uint64_t seed) {
    return Agent(cfg.agent, agent_seed_for(seed));
}

namespace detail {

// One simulated period: act, step the economy, store the transition, train
// when allowed, and log the row. Advances the state in place.
inline TrajectoryRecord simulate_period(Agent& agent, MacroState& state,
                                        const Regime& regime, int regime_id,
                                        std::uint64_t seed, int episode,
                                        int period) {
    const double action = agent.act(state);
    const StepOutcome out = step(state, action, regime);
    agent.observe(Transition{state, action, out.reward, out.next_state});

    double critic_loss = 0.0, actor_objective = 0.0;
    if (agent.learning_enabled && agent.ready_to_train()) {
        const auto r = agent.train_step();
        critic_loss = r.critic_loss;
        actor_objective = r.actor_objective;
        if (!std::isfinite(critic_loss) || !std::isfinite(actor_objective))
            throw Error("non-finite loss at seed " + std::to_string(seed) +
                        ", episode " + std::to_string(episode) + ", period " +
                        std::to_string(period));
    }

    state = out.next_state;
    return TrajectoryRecord{seed,      episode,       period,
                            regime_id, action,        out.pi,
                            out.i,     out.m,         out.reward,
                            agent.noise().sigma(),    critic_loss,
                            actor_objective};
}

}  // namespace detail

// Training under regime_before: episodes x periods, each episode restarted
// from a perturbed steady state. The agent's exploration/learning flags are
// honored as given (a frozen rollout is a valid training run).
inline RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                              Agent& agent) {
    cfg.validate();
    Rng env(mix_seed(seed, kStreamTrainEnv));
    RunResult out;
    out.records.reserve(static_cast<std::size_t>(cfg.episodes) *
                        static_cast<std::size_t>(cfg.periods_per_episode));
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        agent.begin_episode();
        MacroState state =
            initial_state(cfg.regime_before, cfg.init_perturb, env);
        for (int t = 0; t < cfg.periods_per_episode; ++t)
            out.records.push_back(detail::simulate_period(
                agent, state, cfg.regime_before, 0, seed, ep, t));
        agent.end_episode();
    }
    return out;
}

// Continuation run around an unannounced target change. The simulation is
// continuous (no state resets; episode boundaries only drive the noise
// schedule). Both arms explore and learn up to switch_period, so two arms
// started from one checkpoint stay identical until the switch; at the switch
// the regime swaps and the configured exploration/learning flags take
// effect. The agent is never told about the change.
inline RunResult run_regime_switch(const ExperimentConfig& cfg,
                                   std::uint64_t seed, Agent& agent) {
    cfg.validate();
    Rng env(mix_seed(seed, kStreamSwitchEnv));
    agent.exploration_enabled = true;
    agent.learning_enabled = true;

    const int total = cfg.total_switch_periods();
    const int T = cfg.periods_per_episode;
    RunResult out;
    out.records.reserve(static_cast<std::size_t>(total));
    MacroState state = initial_state(cfg.regime_before, cfg.init_perturb, env);
    for (int p = 0; p < total; ++p) {
        if (p == cfg.switch_period) {
            agent.exploration_enabled = cfg.exploration;
            agent.learning_enabled = cfg.learning_after_switch;
        }
        const bool after = p >= cfg.switch_period;
        const Regime& regime = after ? cfg.regime_after : cfg.regime_before;
        if (p % T == 0) agent.begin_episode();
        out.records.push_back(detail::simulate_period(
            agent, state, regime, after ? 1 : 0, seed, p / T, p % T));
        if ((p + 1) % T == 0) agent.end_episode();
    }
    return out;
}

struct ExperienceRun {
    int level = 0;
    RunResult training;
    RunResult switching;
};

// Trains one agent per experience level under identical environment streams
// and applies the same switch to each. Agent streams differ per level.
inline std::vector<ExperienceRun> run_experience_comparison(
    const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::vector<ExperienceRun> out;
    for (int level : cfg.experience_levels) {
        ExperimentConfig level_cfg = cfg;
        level_cfg.episodes = level;
        Agent agent(cfg.agent, agent_seed_for_level(seed, level));
        ExperienceRun run;
        run.level = level;
        run.training = run_training(level_cfg, seed, agent);
        run.switching = run_regime_switch(level_cfg, seed, agent);
        out.push_back(std::move(run));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

// Mean of the final `window` entries (fewer if the series is shorter).
inline double tail_mean(std::span<const double> v, int window) {
    if (v.empty()) throw EmptyInput("tail_mean: empty series");
    const std::size_t n = std::min<std::size_t>(v.size(), window);
    double s = 0.0;
    for (std::size_t k = v.size() - n; k < v.size(); ++k) s += v[k];
    return s / static_cast<double>(n);
}

// True iff every rolling-`window` mean fully contained in the final
// `tail_fraction` of the series lies inside [lo, hi].
inline bool rolling_mean_band(std::span<const double> v, int window, double lo,
                              double hi, double tail_fraction) {
    if (v.size() < static_cast<std::size_t>(window)) return false;
    const std::size_t tail_start = static_cast<std::size_t>(
        std::floor(static_cast<double>(v.size()) * (1.0 - tail_fraction)));
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) prefix[k + 1] = prefix[k] + v[k];
    bool any = false;
    for (std::size_t start = tail_start; start + window <= v.size(); ++start) {
        const double mean =
            (prefix[start + window] - prefix[start]) / window;
        if (mean < lo || mean > hi) return false;
        any = true;
    }
    return any;
}

// Per-arm, per-seed summary over one trajectory file.
struct ArmSummary {
    std::string arm;
    std::uint64_t seed = 0;
    long rows = 0;
    int final_regime_id = 0;
    // means over the final `window` periods
    double terminal_belief = 0.0;
    double terminal_pi = 0.0;
    double terminal_i = 0.0;
    double terminal_m = 0.0;
    double mean_abs_belief_gap = 0.0;  // |belief - active pi_hat|, final window
    double forecast_rmse = 0.0;        // over the whole series
    // distance of the terminal means to the active regime's steady state
    double dist_pi = 0.0;
    double dist_i = 0.0;
    double dist_m = 0.0;
    // switch-run statistics (zero / -1 when the run never switched)
    double max_belief_drift_post_switch = 0.0;
    int periods_to_cross_midpoint = -1;
};

inline ArmSummary summarize_arm(const std::string& arm, std::uint64_t seed,
                                std::span<const TrajectoryRecord> rows,
                                const ExperimentConfig& cfg, int window = 100) {
    if (rows.empty()) throw EmptyInput("summarize_arm: no rows for " + arm);
    ArmSummary s;
    s.arm = arm;
    s.seed = seed;
    s.rows = static_cast<long>(rows.size());
    s.final_regime_id = rows.back().regime_id;
    const Regime& active =
        s.final_regime_id == 1 ? cfg.regime_after : cfg.regime_before;

    std::vector<double> belief, pi, i, m;
    belief.reserve(rows.size());
    pi.reserve(rows.size());
    i.reserve(rows.size());
    m.reserve(rows.size());
    double sq = 0.0;
    for (const auto& r : rows) {
        belief.push_back(r.belief);
        pi.push_back(r.pi);
        i.push_back(r.i);
        m.push_back(r.m);
        sq += r.reward * r.reward;
    }
    s.terminal_belief = tail_mean(belief, window);
    s.terminal_pi = tail_mean(pi, window);
    s.terminal_i = tail_mean(i, window);
    s.terminal_m = tail_mean(m, window);
    s.forecast_rmse = std::sqrt(sq / static_cast<double>(rows.size()));

    const std::size_t n = std::min<std::size_t>(rows.size(), window);
    double gap = 0.0;
    for (std::size_t k = rows.size() - n; k < rows.size(); ++k)
        gap += std::abs(rows[k].belief - active.pi_hat);
    s.mean_abs_belief_gap = gap / static_cast<double>(n);

    const SteadyState ss = steady_state(active);
    s.dist_pi = std::abs(s.terminal_pi - ss.pi);
    s.dist_i = std::abs(s.terminal_i - ss.i);
    s.dist_m = std::abs(s.terminal_m - ss.m);

    // post-switch drift relative to the first post-switch belief
    double ref = 0.0;
    bool have_ref = false;
    for (const auto& r : rows) {
        if (r.regime_id != 1) continue;
        if (!have_ref) {
            ref = r.belief;
            have_ref = true;
        }
        s.max_belief_drift_post_switch = std::max(
            s.max_belief_drift_post_switch, std::abs(r.belief - ref));
    }

    // measured delay statistic: periods after the switch until the belief
    // first crosses the midpoint between the two targets
    const double midpoint =
        0.5 * (cfg.regime_before.pi_hat + cfg.regime_after.pi_hat);
    int since_switch = 0;
    for (const auto& r : rows) {
        if (r.regime_id != 1) continue;
        ++since_switch;
        if (r.belief > midpoint) {
            s.periods_to_cross_midpoint = since_switch;
            break;
        }
    }
    return s;
}

inline nlohmann::json summary_to_json(const ArmSummary& s) {
    return nlohmann::json{
        {"arm", s.arm},
        {"seed", s.seed},
        {"rows", s.rows},
        {"final_regime_id", s.final_regime_id},
        {"terminal_belief", s.terminal_belief},
        {"terminal_pi", s.terminal_pi},
        {"terminal_i", s.terminal_i},
        {"terminal_m", s.terminal_m},
        {"mean_abs_belief_gap", s.mean_abs_belief_gap},
        {"forecast_rmse", s.forecast_rmse},
        {"dist_pi", s.dist_pi},
        {"dist_i", s.dist_i},
        {"dist_m", s.dist_m},
        {"max_belief_drift_post_switch", s.max_belief_drift_post_switch},
        {"periods_to_cross_midpoint", s.periods_to_cross_midpoint}};
}

inline ArmSummary summary_from_json(const nlohmann::json& j) {
    ArmSummary s;
    s.arm = j.at("arm").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.rows = j.at("rows").get<long>();
    s.final_regime_id = j.at("final_regime_id").get<int>();
    s.terminal_belief = j.at("terminal_belief").get<double>();
    s.terminal_pi = j.at("terminal_pi").get<double>();
    s.terminal_i = j.at("terminal_i").get<double>();
    s.terminal_m = j.at("terminal_m").get<double>();
    s.mean_abs_belief_gap = j.at("mean_abs_belief_gap").get<double>();
    s.forecast_rmse = j.at("forecast_rmse").get<double>();
    s.dist_pi = j.at("dist_pi").get<double>();
    s.dist_i = j.at("dist_i").get<double>();
    s.dist_m = j.at("dist_m").get<double>();
    s.max_belief_drift_post_switch =
        j.at("max_belief_drift_post_switch").get<double>();
    s.periods_to_cross_midpoint = j.at("periods_to_cross_midpoint").get<int>();
    return s;
}

inline void write_summary(const std::filesystem::path& path,
                          const std::vector<ArmSummary>& rows) {
    if (rows.empty()) throw EmptyInput("write_summary: no rows");
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : rows) j.push_back(summary_to_json(s));
    std::ofstream out(path);
    if (!out) throw IoFailure("summary: cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

inline std::vector<ArmSummary> read_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("summary: cannot read '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw BadConfig("summary: malformed JSON in '" + path.string() +
                        "': " + e.what());
    }
    std::vector<ArmSummary> out;
    for (const auto& row : j) out.push_back(summary_from_json(row));
    return out;
}

// Closed-form cross-check of every emitted row: i = belief/beta,
// m = gamma*c*i/(i-1), pi from the rate-rule inversion, and (where the
// previous row is in the same episode) r = -|belief_prev - pi|. Returns -1
// when every row checks out, else the first offending zero-based row index
// with a message.
inline long cross_check_rows(std::span<const TrajectoryRecord> rows,
                             const ExperimentConfig& cfg, std::string* msg,
                             double tol = 1e-9) {
    auto fail = [&](long idx, const std::string& what) {
        if (msg) *msg = "row " + std::to_string(idx) + ": " + what;
        return idx;
    };
    auto close = [&](double a, double b) {
        return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
    };
    for (long k = 0; k < static_cast<long>(rows.size()); ++k) {
        const auto& r = rows[k];
        const Regime& regime =
            r.regime_id == 1 ? cfg.regime_after : cfg.regime_before;
        if (!close(r.i, r.belief / regime.beta))
            return fail(k, "i != belief/beta");
        if (!close(r.m, regime.gamma * regime.consumption * r.i / (r.i - 1.0)))
            return fail(k, "m != gamma*c*i/(i-1)");
        const double want_pi =
            std::pow(r.i * regime.beta / regime.pi_hat,
                     1.0 / (1.0 + regime.lambda)) *
            regime.pi_hat;
        if (!close(r.pi, want_pi)) return fail(k, "pi off the rate rule");
        if (r.reward > tol) return fail(k, "positive reward");
        if (k > 0 && r.period > 0) {
            const double want_r = -std::abs(rows[k - 1].belief - r.pi);
            if (!close(r.reward, want_r))
                return fail(k, "reward != -|previous belief - pi|");
        }
    }
    return -1;
}

// Acceptance thresholds, pinned once here and used by both the acceptance
// suite and the verify command.
struct AcceptanceThresholds {
    int terminal_window = 100;
    double training_belief_gap = 0.03;  // mean |belief - target| after training
    double switch_pi_lo = 1.07, switch_pi_hi = 1.13;
    double switch_i_lo = 1.345, switch_i_hi = 1.405;
    double switch_m_lo = 3.52, switch_m_hi = 3.82;
    double tail_fraction = 0.25;
    double frozen_drift_max = 0.02;
    double frozen_pi_tol = 0.02;
    double exp_low_band_lo = 1.06, exp_low_band_hi = 1.10;
    double exp_all_band_lo = 1.05, exp_all_band_hi = 1.13;
    int majority = 3;  // of 5 seeds
};

}  // namespace rrl
