#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rrl/agent.hpp"
#include "rrl/economy.hpp"
#include "rrl/errors.hpp"

namespace rrl {

// A full experiment description: both regimes, run lengths, seeds, and every
// agent hyperparameter. Defaults reproduce the baseline setup (lambda = -0.5,
// beta = 0.8, exploration level 0.2, targets 1.0 -> 1.1).
struct ExperimentConfig {
    Regime regime_before{1.0, -0.5, 0.8, 1.0, 1.0};
    Regime regime_after{1.1, -0.5, 0.8, 1.0, 1.0};
    int episodes = 20;
    int periods_per_episode = 500;
    int switch_period = 500;        // regime_before periods at the start of a switch run
    int post_switch_episodes = 10;  // episodes after the switch
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    bool exploration = true;          // post-switch exploration in switch runs
    bool learning_after_switch = true;
    double init_perturb = 0.05;  // uniform +- band on initial pi_prev, belief_prev
    std::vector<int> experience_levels = {5, 10, 15, 20};
    AgentConfig agent;

    void validate() const {
        regime_before.validate();
        regime_after.validate();
        agent.validate();
        if (regime_before.beta != regime_after.beta)
            throw BadConfig("config: both regimes must share one beta");
        if (agent.discount != regime_before.beta)
            throw BadConfig("config: agent discount must equal the regime beta");
        if (episodes < 1) throw BadConfig("config: episodes must be >= 1");
        if (periods_per_episode < 1)
            throw BadConfig("config: periods_per_episode must be >= 1");
        if (post_switch_episodes < 1)
            throw BadConfig("config: post_switch_episodes must be >= 1");
        if (switch_period < 0)
            throw BadConfig("config: switch_period must be nonnegative");
        if (seeds.empty()) throw BadConfig("config: at least one seed");
        if (!(agent.action_lo > regime_before.beta))
            throw BadConfig(
                "config: action_lo must exceed beta so the nominal rate stays "
                "above one");
        if (!(init_perturb >= 0.0))
            throw BadConfig("config: init_perturb must be nonnegative");
        for (const Regime* r : {&regime_before, &regime_after}) {
            if (r->pi_hat - init_perturb < agent.action_lo ||
                r->pi_hat + init_perturb > agent.action_hi)
                throw BadConfig(
                    "config: perturbed initial beliefs would leave the action "
                    "bounds");
        }
        if (experience_levels.empty())
            throw BadConfig("config: experience_levels must not be empty");
        for (int lvl : experience_levels)
            if (lvl < 1) throw BadConfig("config: experience levels must be >= 1");
    }

    int total_switch_periods() const {
        return switch_period + post_switch_episodes * periods_per_episode;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw BadConfig("config: key '" + key + "' has non-numeric value '" +
                        v + "'");
    }
    if (pos != v.size())
        throw BadConfig("config: key '" + key + "' has trailing junk in '" +
                        v + "'");
    return out;
}

inline long to_long(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    const long l = static_cast<long>(d);
    if (static_cast<double>(l) != d)
        throw BadConfig("config: key '" + key + "' must be an integer, got '" +
                        v + "'");
    return l;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw BadConfig("config: key '" + key + "' must be true/false, got '" + v +
                    "'");
}

template <class T>
std::vector<T> to_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw BadConfig("config: key '" + key + "' has an empty list item");
        out.push_back(static_cast<T>(to_long(key, item)));
    }
    if (out.empty())
        throw BadConfig("config: key '" + key + "' has an empty list");
    return out;
}

}  // namespace detail

// Parses the flat key = value section format:
//
//     [economy]
//     beta = 0.8
//     ...
//
// '#' and ';' start comments. Unknown sections or keys are hard errors so a
// typo can never silently fall back to a default.
inline ExperimentConfig parse_config(std::istream& in,
                                     const std::string& origin = "<stream>") {
    using detail::to_bool;
    using detail::to_double;
    using detail::to_list;
    using detail::to_long;
    using detail::trim;

    static const std::set<std::string> known = {
        "economy.beta", "economy.lambda", "economy.gamma",
        "economy.consumption", "economy.pi_hat_before", "economy.pi_hat_after",
        "economy.action_lo", "economy.action_hi", "economy.init_perturb",
        "agent.actor_lr", "agent.critic_lr", "agent.adam_beta1",
        "agent.adam_beta2", "agent.adam_eps", "agent.minibatch",
        "agent.buffer_capacity", "agent.tau_soft", "agent.use_target_networks",
        "agent.hidden1", "agent.hidden2",
        "noise.theta", "noise.sigma", "noise.dt", "noise.decay", "noise.floor",
        "noise.reset_each_episode",
        "experiment.episodes", "experiment.periods_per_episode",
        "experiment.switch_period", "experiment.post_switch_episodes",
        "experiment.seeds", "experiment.exploration",
        "experiment.learning_after_switch", "experiment.experience_levels"};

    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw BadConfig(origin + ":" + std::to_string(lineno) +
                                ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "economy" && section != "agent" &&
                section != "noise" && section != "experiment")
                throw BadConfig(origin + ":" + std::to_string(lineno) +
                                ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": expected key = value, got '" + line + "'");
        if (section.empty())
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": key outside any [section]");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!known.count(key))
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": unknown key '" + key + "'");
        if (kv.count(key))
            throw BadConfig(origin + ":" + std::to_string(lineno) +
                            ": duplicate key '" + key + "'");
        kv[key] = val;
    }

    ExperimentConfig cfg;
    auto take = [&](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (const auto* v = take("economy.beta")) {
        cfg.regime_before.beta = to_double("economy.beta", *v);
        cfg.regime_after.beta = cfg.regime_before.beta;
        cfg.agent.discount = cfg.regime_before.beta;
    }
    if (const auto* v = take("economy.lambda")) {
        cfg.regime_before.lambda = to_double("economy.lambda", *v);
        cfg.regime_after.lambda = cfg.regime_before.lambda;
    }
    if (const auto* v = take("economy.gamma")) {
        cfg.regime_before.gamma = to_double("economy.gamma", *v);
        cfg.regime_after.gamma = cfg.regime_before.gamma;
    }
    if (const auto* v = take("economy.consumption")) {
        cfg.regime_before.consumption = to_double("economy.consumption", *v);
        cfg.regime_after.consumption = cfg.regime_before.consumption;
    }
    if (const auto* v = take("economy.pi_hat_before"))
        cfg.regime_before.pi_hat = to_double("economy.pi_hat_before", *v);
    if (const auto* v = take("economy.pi_hat_after"))
        cfg.regime_after.pi_hat = to_double("economy.pi_hat_after", *v);
    if (const auto* v = take("economy.action_lo"))
        cfg.agent.action_lo = to_double("economy.action_lo", *v);
    if (const auto* v = take("economy.action_hi"))
        cfg.agent.action_hi = to_double("economy.action_hi", *v);
    if (const auto* v = take("economy.init_perturb"))
        cfg.init_perturb = to_double("economy.init_perturb", *v);

    if (const auto* v = take("agent.actor_lr"))
        cfg.agent.actor_lr = to_double("agent.actor_lr", *v);
    if (const auto* v = take("agent.critic_lr"))
        cfg.agent.critic_lr = to_double("agent.critic_lr", *v);
    if (const auto* v = take("agent.adam_beta1"))
        cfg.agent.adam_beta1 = to_double("agent.adam_beta1", *v);
    if (const auto* v = take("agent.adam_beta2"))
        cfg.agent.adam_beta2 = to_double("agent.adam_beta2", *v);
    if (const auto* v = take("agent.adam_eps"))
        cfg.agent.adam_eps = to_double("agent.adam_eps", *v);
    if (const auto* v = take("agent.minibatch"))
        cfg.agent.minibatch =
            static_cast<std::size_t>(to_long("agent.minibatch", *v));
    if (const auto* v = take("agent.buffer_capacity"))
        cfg.agent.buffer_capacity =
            static_cast<std::size_t>(to_long("agent.buffer_capacity", *v));
    if (const auto* v = take("agent.tau_soft"))
        cfg.agent.tau_soft = to_double("agent.tau_soft", *v);
    if (const auto* v = take("agent.use_target_networks"))
        cfg.agent.use_target_networks =
            to_bool("agent.use_target_networks", *v);
    if (const auto* v = take("agent.hidden1"))
        cfg.agent.hidden[0] =
            static_cast<std::size_t>(to_long("agent.hidden1", *v));
    if (const auto* v = take("agent.hidden2"))
        cfg.agent.hidden[1] =
            static_cast<std::size_t>(to_long("agent.hidden2", *v));

    if (const auto* v = take("noise.theta"))
        cfg.agent.noise.theta = to_double("noise.theta", *v);
    if (const auto* v = take("noise.sigma"))
        cfg.agent.noise.sigma = to_double("noise.sigma", *v);
    if (const auto* v = take("noise.dt"))
        cfg.agent.noise.dt = to_double("noise.dt", *v);
    if (const auto* v = take("noise.decay"))
        cfg.agent.noise.decay = to_double("noise.decay", *v);
    if (const auto* v = take("noise.floor"))
        cfg.agent.noise.floor = to_double("noise.floor", *v);
    if (const auto* v = take("noise.reset_each_episode"))
        cfg.agent.noise.reset_x_each_episode =
            to_bool("noise.reset_each_episode", *v);

    if (const auto* v = take("experiment.episodes"))
        cfg.episodes = static_cast<int>(to_long("experiment.episodes", *v));
    if (const auto* v = take("experiment.periods_per_episode"))
        cfg.periods_per_episode =
            static_cast<int>(to_long("experiment.periods_per_episode", *v));
    if (const auto* v = take("experiment.switch_period"))
        cfg.switch_period =
            static_cast<int>(to_long("experiment.switch_period", *v));
    if (const auto* v = take("experiment.post_switch_episodes"))
        cfg.post_switch_episodes =
            static_cast<int>(to_long("experiment.post_switch_episodes", *v));
    if (const auto* v = take("experiment.seeds"))
        cfg.seeds = to_list<std::uint64_t>("experiment.seeds", *v);
    if (const auto* v = take("experiment.exploration"))
        cfg.exploration = to_bool("experiment.exploration", *v);
    if (const auto* v = take("experiment.learning_after_switch"))
        cfg.learning_after_switch =
            to_bool("experiment.learning_after_switch", *v);
    if (const auto* v = take("experiment.experience_levels"))
        cfg.experience_levels =
            to_list<int>("experiment.experience_levels", *v);

    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("config: cannot read '" + path + "'");
    return parse_config(in, path);
}

}  // namespace rrl
