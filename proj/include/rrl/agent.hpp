#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rrl/economy.hpp"
#include "rrl/errors.hpp"
#include "rrl/mlp.hpp"
#include "rrl/optimizer.hpp"
#include "rrl/ou_noise.hpp"
#include "rrl/replay_buffer.hpp"
#include "rrl/rng.hpp"

namespace rrl {

// Affine maps that bring the raw macro quantities, which cluster near 1
// (inflation, beliefs) and 4-5 (money), onto unit-ish scales before they
// enter a network. Invertible and fixed; actions pass through the same map
// as beliefs on the critic's action input. Realized inflation spans
// [lo^2, hi^2/pi_hat] under exploration, roughly [0.8, 2.0], so it gets a
// gentler slope than beliefs.
inline double normalize_pi(double pi) { return (pi - 1.0) * 1.0; }
inline double normalize_belief(double b) { return (b - 1.0) * 10.0; }
inline double normalize_money(double m) { return (m - 4.0) / 2.0; }
inline double normalize_action(double a) { return (a - 1.0) * 10.0; }
inline constexpr double kActionNormSlope = 10.0;

inline std::array<double, 3> normalize_state(const MacroState& s) {
    return {normalize_pi(s.pi_prev), normalize_belief(s.belief_prev),
            normalize_money(s.m_prev)};
}

struct AgentConfig {
    std::vector<std::size_t> hidden = {64, 64};
    double action_lo = 0.9;
    double action_hi = 1.4;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t minibatch = 64;
    std::size_t buffer_capacity = 50000;
    double discount = 0.8;  // matches the regime's beta
    double tau_soft = 0.01;
    bool use_target_networks = true;
    OuConfig noise;

    void validate() const {
        if (hidden.empty()) throw BadConfig("agent: at least one hidden layer");
        for (std::size_t h : hidden)
            if (h == 0) throw BadConfig("agent: zero-width hidden layer");
        if (!(action_lo < action_hi))
            throw BadConfig("agent: action_lo must be below action_hi");
        if (!(discount > 0.0 && discount < 1.0))
            throw BadConfig("agent: discount must lie in (0,1)");
        if (minibatch == 0) throw BadConfig("agent: minibatch must be positive");
        if (buffer_capacity < minibatch)
            throw BadConfig("agent: buffer capacity below minibatch size");
        if (!(tau_soft > 0.0 && tau_soft <= 1.0))
            throw BadConfig("agent: tau_soft must lie in (0,1]");
        if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
            throw BadConfig("agent: learning rates must be positive");
        noise.validate();
    }

    std::vector<LayerSpec> actor_specs() const {
        std::vector<LayerSpec> s;
        std::size_t in = 3;
        for (std::size_t h : hidden) {
            s.push_back({in, h, Activation::Tanh});
            in = h;
        }
        s.push_back({in, 1, Activation::ScaledSigmoid, action_lo, action_hi});
        return s;
    }

    std::vector<LayerSpec> critic_specs() const {
        std::vector<LayerSpec> s;
        std::size_t in = 4;  // state + action
        for (std::size_t h : hidden) {
            s.push_back({in, h, Activation::Tanh});
            in = h;
        }
        s.push_back({in, 1, Activation::Linear});
        return s;
    }
};

// The DDPG learner: deterministic actor plus action-value critic, an
// exploration noise process, a replay memory, and slowly tracking target
// copies of both networks for stable TD targets.
class Agent {
public:
    bool exploration_enabled = true;
    bool learning_enabled = true;

    Agent(const AgentConfig& cfg, std::uint64_t seed)
        : Agent(cfg, make_random_nets(cfg, seed), seed) {}

    // Injected networks (rigged critics in tests, checkpoint restores).
    Agent(const AgentConfig& cfg, std::pair<Mlp, Mlp> actor_critic,
          std::uint64_t seed)
        : cfg_(cfg),
          actor_(std::move(actor_critic.first)),
          critic_(std::move(actor_critic.second)),
          actor_target_(actor_),
          critic_target_(critic_),
          actor_opt_({cfg.actor_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps}),
          critic_opt_({cfg.critic_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps}),
          buffer_(cfg.buffer_capacity),
          noise_(cfg.noise),
          rng_(seed) {
        cfg_.validate();
        if (actor_.input_size() != 3 || actor_.output_size() != 1)
            throw DimensionMismatch("Agent: actor must map 3 -> 1");
        if (critic_.input_size() != 4 || critic_.output_size() != 1)
            throw DimensionMismatch("Agent: critic must map 4 -> 1");
    }

    // Clean policy output, no noise, no clamp beyond the actor's own range.
    double policy(const MacroState& s) {
        const auto in = normalize_state(s);
        return actor_.forward(in)[0];
    }

    // The action actually taken: actor output plus OU noise when exploring,
    // clamped to the action bounds. The clamped value is what the
    // environment sees and what gets stored.
    double act(const MacroState& s) {
        double a = policy(s);
        if (exploration_enabled) a += noise_.sample(rng_);
        return std::clamp(a, cfg_.action_lo, cfg_.action_hi);
    }

    void observe(const Transition& t) { buffer_.push(t); }

    // y = r + beta * Q(s', mu(s')) evaluated on the target networks when
    // enabled, else on the live networks (the paper-literal bootstrap).
    double td_target(const Transition& t) {
        Mlp& actor_eval = cfg_.use_target_networks ? actor_target_ : actor_;
        Mlp& critic_eval = cfg_.use_target_networks ? critic_target_ : critic_;
        const auto sn = normalize_state(t.s_next);
        const double a_next = actor_eval.forward(sn)[0];
        const std::array<double, 4> qin = {sn[0], sn[1], sn[2],
                                           normalize_action(a_next)};
        return t.r + cfg_.discount * critic_eval.forward(qin)[0];
    }

    struct TrainResult {
        double critic_loss = 0.0;
        double actor_objective = 0.0;
    };

    // One minibatch update: critic against the squared TD error, then actor
    // up the critic's action gradient with critic parameters held fixed,
    // then a soft update of the targets. Returns the pre-update critic loss
    // and actor objective.
    TrainResult train_step() {
        if (!learning_enabled) return {};
        const std::size_t n = cfg_.minibatch;
        if (buffer_.size() < n)
            throw BufferTooSmall("train_step: buffer holds " +
                                 std::to_string(buffer_.size()) +
                                 " transitions, minibatch needs " +
                                 std::to_string(n));
        minibatch_.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            minibatch_[k] = buffer_.sample_index(rng_);

        // Critic: L = mean((y - Q(s,a))^2)
        double critic_loss = 0.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t idx : minibatch_) {
            const Transition& t = buffer_[idx];
            const double y = td_target(t);
            const auto sn = normalize_state(t.s);
            const std::array<double, 4> qin = {sn[0], sn[1], sn[2],
                                               normalize_action(t.a)};
            const double q = critic_.forward(qin)[0];
            const double e = q - y;
            critic_loss += e * e * inv_n;
            const std::array<double, 1> up = {2.0 * e * inv_n};
            critic_.backward(up);
        }
        critic_opt_.step(critic_);

        // Actor: maximize J = mean(Q(s, mu(s))) by minimizing -J. The chain
        // runs through the critic's action input, whose normalization slope
        // has to be applied before entering the actor.
        double actor_objective = 0.0;
        for (std::size_t idx : minibatch_) {
            const Transition& t = buffer_[idx];
            const auto sn = normalize_state(t.s);
            const double a = actor_.forward(sn)[0];
            const std::array<double, 4> qin = {sn[0], sn[1], sn[2],
                                               normalize_action(a)};
            actor_objective += critic_.forward(qin)[0] * inv_n;
            const std::array<double, 1> up = {-inv_n};
            const auto dq_din = critic_.backward(up);
            const std::array<double, 1> da = {dq_din[3] * kActionNormSlope};
            actor_.backward(da);
        }
        actor_opt_.step(actor_);
        critic_.zero_gradients();  // critic grads from the chain rule are not applied

        if (cfg_.use_target_networks) {
            soft_update(actor_, actor_target_, cfg_.tau_soft);
            soft_update(critic_, critic_target_, cfg_.tau_soft);
        }
        return {critic_loss, actor_objective};
    }

    bool ready_to_train() const { return buffer_.size() >= cfg_.minibatch; }

    void begin_episode() { noise_.begin_episode(); }
    void end_episode() { noise_.end_episode(); }

    const AgentConfig& config() const { return cfg_; }
    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    Mlp& actor_target() { return actor_target_; }
    Mlp& critic_target() { return critic_target_; }
    ReplayBuffer& buffer() { return buffer_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    OuNoise& noise() { return noise_; }
    const OuNoise& noise() const { return noise_; }
    Rng& rng() { return rng_; }

    void set_targets(Mlp actor_t, Mlp critic_t) {
        actor_target_ = std::move(actor_t);
        critic_target_ = std::move(critic_t);
    }

private:
    static std::pair<Mlp, Mlp> make_random_nets(const AgentConfig& cfg,
                                                std::uint64_t seed) {
        cfg.validate();
        Rng init(mix_seed(seed, 0));
        Mlp actor = Mlp::random(cfg.actor_specs(), init);
        Mlp critic = Mlp::random(cfg.critic_specs(), init);
        return {std::move(actor), std::move(critic)};
    }

    AgentConfig cfg_;
    Mlp actor_;
    Mlp critic_;
    Mlp actor_target_;
    Mlp critic_target_;
    AdamOptimizer actor_opt_;
    AdamOptimizer critic_opt_;
    ReplayBuffer buffer_;
    OuNoise noise_;
    Rng rng_;
    std::vector<std::size_t> minibatch_;
};

}  // namespace rrl
