#pragma once

#include <cmath>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

// Monetary policy regime. The central bank sets the gross nominal rate by
//
//     i = (pi_hat / beta) * (pi / pi_hat)^(1 + lambda)
//
// lambda < 0 is a passive policy, lambda > 0 an active one. gamma weights
// money in the household's log utility; consumption is pinned at
// c = y = 1 in the baseline but kept configurable.
struct Regime {
    double pi_hat = 1.0;       // gross inflation target
    double lambda = -0.5;      // rate-rule responsiveness exponent offset
    double beta = 0.8;         // discount factor
    double gamma = 1.0;        // money-utility weight
    double consumption = 1.0;  // per-period consumption level

    void validate() const {
        if (!(beta > 0.0 && beta < 1.0))
            throw BadConfig("regime: beta must lie in (0,1), got " +
                            std::to_string(beta));
        if (!(pi_hat > 0.0))
            throw BadConfig("regime: pi_hat must be positive, got " +
                            std::to_string(pi_hat));
        if (1.0 + lambda == 0.0)
            throw BadConfig(
                "regime: lambda = -1 makes the rate-rule exponent 1/(1+lambda) "
                "degenerate");
        if (!(gamma > 0.0))
            throw BadConfig("regime: gamma must be positive");
        if (!(consumption > 0.0))
            throw BadConfig("regime: consumption must be positive");
    }
};

// The RL state triple: everything the agent observes at the start of a
// period (previous realized inflation, its own previous belief, previous
// real money balances).
struct MacroState {
    double pi_prev = 1.0;
    double belief_prev = 1.0;
    double m_prev = 5.0;
};

// One environment period. tau is the balanced-budget transfer, logged as a
// diagnostic and never fed back into the state.
struct StepOutcome {
    double i = 0.0;       // gross nominal interest rate
    double m = 0.0;       // real money balances
    double pi = 0.0;      // realized gross inflation
    double reward = 0.0;  // minus the absolute forecast error, <= 0
    double tau = 0.0;     // government transfer m - m_prev / pi
    MacroState next_state;
};

// Euler-consistent gross nominal rate: beta * i = belief, so i = belief/beta.
// Requires belief > beta so that i > 1 and money demand stays defined.
inline double euler_rate(double belief, const Regime& regime) {
    if (!(belief > regime.beta))
        throw BeliefTooLow("euler_rate: belief " + std::to_string(belief) +
                           " <= beta " + std::to_string(regime.beta) +
                           " implies i <= 1");
    return belief / regime.beta;
}

// Money demand under log utility: gamma*c/m = 1 - 1/i, i.e.
// m = gamma*c*i/(i-1). Only defined for i > 1.
inline double money_demand(double i, double c = 1.0, double gamma = 1.0) {
    if (!(i > 1.0))
        throw RateNotAboveUnity("money_demand: rate " + std::to_string(i) +
                                " <= 1");
    return gamma * c * i / (i - 1.0);
}

// Inversion of the interest rate rule: the realized inflation consistent
// with the bank having set rate i is pi = (i*beta/pi_hat)^(1/(1+lambda)) * pi_hat.
inline double realized_inflation(double i, const Regime& regime) {
    if (1.0 + regime.lambda == 0.0)
        throw DegenerateExponent(
            "realized_inflation: 1 + lambda = 0, exponent undefined");
    return std::pow(i * regime.beta / regime.pi_hat,
                    1.0 / (1.0 + regime.lambda)) *
           regime.pi_hat;
}

// Reward: minus the absolute one-period-ahead forecast error. Zero only on
// an exact forecast.
inline double forecast_reward(double belief_prev, double pi_realized) {
    return -std::abs(belief_prev - pi_realized);
}

// One full environment transition given the agent's new belief (the action).
// The next state is (pi, action, m).
inline StepOutcome step(const MacroState& state, double action,
                        const Regime& regime) {
    StepOutcome out;
    out.i = euler_rate(action, regime);
    out.m = money_demand(out.i, regime.consumption, regime.gamma);
    out.pi = realized_inflation(out.i, regime);
    out.reward = forecast_reward(state.belief_prev, out.pi);
    out.tau = out.m - state.m_prev / out.pi;
    out.next_state = MacroState{out.pi, action, out.m};
    return out;
}

// The rational-expectations fixed point of a regime.
struct SteadyState {
    double pi = 0.0;
    double i = 0.0;
    double m = 0.0;
};

inline SteadyState steady_state(const Regime& regime) {
    const double i = euler_rate(regime.pi_hat, regime);
    return {regime.pi_hat, i, money_demand(i, regime.consumption, regime.gamma)};
}

}  // namespace rrl
