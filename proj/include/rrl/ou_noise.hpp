#pragma once

#include <algorithm>
#include <cmath>

#include "rrl/errors.hpp"
#include "rrl/rng.hpp"

namespace rrl {

struct OuConfig {
    double theta = 0.15;   // mean reversion rate
    double sigma = 0.2;    // initial volatility (the paper's exploration level)
    double dt = 1.0;       // step size of the discretised process
    double decay = 0.85;   // per-episode multiplier on sigma
    double floor = 0.01;   // sigma never drops below this
    bool reset_x_each_episode = true;

    void validate() const {
        if (!(theta > 0.0)) throw BadConfig("noise: theta must be positive");
        if (!(dt > 0.0)) throw BadConfig("noise: dt must be positive");
        if (!(floor > 0.0))
            throw BadConfig("noise: floor must be positive (exploration "
                            "never disappears)");
        if (!(sigma >= floor))
            throw BadConfig("noise: sigma must start at or above the floor");
        if (!(decay > 0.0 && decay <= 1.0))
            throw BadConfig("noise: decay must lie in (0,1]");
    }
};

// Discretised Ornstein-Uhlenbeck process around zero:
//     x <- x + theta * (0 - x) * dt + sigma * sqrt(dt) * N(0,1)
// sigma shrinks by `decay` at each episode end but never below `floor`, so
// exploration fades without ever disappearing.
class OuNoise {
public:
    OuNoise() : OuNoise(OuConfig{}) {}
    explicit OuNoise(OuConfig cfg) : cfg_(cfg), sigma_(cfg.sigma) {
        cfg_.validate();
    }

    double sample(Rng& rng) {
        x_ += cfg_.theta * (0.0 - x_) * cfg_.dt +
              sigma_ * std::sqrt(cfg_.dt) * rng.normal();
        return x_;
    }

    void begin_episode() {
        if (cfg_.reset_x_each_episode) x_ = 0.0;
    }

    void end_episode() { sigma_ = std::max(sigma_ * cfg_.decay, cfg_.floor); }

    double sigma() const { return sigma_; }
    double x() const { return x_; }
    const OuConfig& config() const { return cfg_; }

    // checkpoint restore
    void set_state(double x, double sigma) {
        if (!(sigma >= cfg_.floor))
            throw BadConfig("OuNoise: restored sigma below floor");
        x_ = x;
        sigma_ = sigma;
    }

private:
    OuConfig cfg_;
    double sigma_ = 0.2;
    double x_ = 0.0;
};

}  // namespace rrl
