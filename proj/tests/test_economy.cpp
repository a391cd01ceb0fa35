#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rrl/economy.hpp"
#include "rrl/rng.hpp"

using namespace rrl;

namespace {

Regime target_one() { return Regime{1.0, -0.5, 0.8, 1.0, 1.0}; }
Regime target_two() { return Regime{1.1, -0.5, 0.8, 1.0, 1.0}; }

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("euler rate inverts the consumption Euler equation") {
    CHECK(euler_rate(1.0, target_one()) == Catch::Approx(1.25).epsilon(1e-14));
    CHECK(euler_rate(1.1, target_two()) == Catch::Approx(1.375).epsilon(1e-14));
    CHECK_THROWS_AS(euler_rate(0.8, target_one()), BeliefTooLow);
    CHECK_THROWS_AS(euler_rate(0.5, target_one()), BeliefTooLow);
}

TEST_CASE("money demand under log utility") {
    CHECK(money_demand(1.25) == Catch::Approx(5.0).epsilon(1e-14));
    CHECK(money_demand(1.375) == Catch::Approx(11.0 / 3.0).epsilon(1e-14));
    CHECK(money_demand(2.0) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(money_demand(1.0), RateNotAboveUnity);
    CHECK_THROWS_AS(money_demand(0.9), RateNotAboveUnity);
    // scales linearly in c and gamma
    CHECK(money_demand(1.25, 2.0, 3.0) == Catch::Approx(30.0).epsilon(1e-14));
}

TEST_CASE("realized inflation inverts the rate rule") {
    CHECK(realized_inflation(1.25, target_one()) ==
          Catch::Approx(1.0).epsilon(1e-14));
    // (1.375*0.8/1.0)^(1/0.5) = 1.1^2 = 1.21
    CHECK(realized_inflation(1.375, target_one()) ==
          Catch::Approx(1.21).epsilon(1e-12));
    // (1.25*0.8/1.1)^2 * 1.1 = (10/11)^2 * 1.1 = 110/121
    CHECK(realized_inflation(1.25, target_two()) ==
          Catch::Approx(110.0 / 121.0).epsilon(1e-12));

    Regime degenerate = target_one();
    degenerate.lambda = -1.0;
    CHECK_THROWS_AS(realized_inflation(1.25, degenerate), DegenerateExponent);
}

TEST_CASE("reward is minus the absolute forecast error") {
    CHECK(forecast_reward(1.0, 1.0) == 0.0);
    CHECK(forecast_reward(1.0, 1.21) == Catch::Approx(-0.21).epsilon(1e-14));
    CHECK(forecast_reward(1.1, 1.0) == Catch::Approx(-0.1).epsilon(1e-14));
}

TEST_CASE("step composes the closed-form transition") {
    const MacroState s{1.0, 1.0, 5.0};

    SECTION("target I column") {
        const StepOutcome out = step(s, 1.0, target_one());
        CHECK(out.i == Catch::Approx(1.25).epsilon(1e-14));
        CHECK(out.m == Catch::Approx(5.0).epsilon(1e-14));
        CHECK(out.pi == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(out.reward == Catch::Approx(0.0).margin(1e-14));
        CHECK(out.next_state.pi_prev == out.pi);
        CHECK(out.next_state.belief_prev == 1.0);
        CHECK(out.next_state.m_prev == out.m);
    }

    SECTION("target II column") {
        const StepOutcome out = step(s, 1.1, target_two());
        CHECK(out.i == Catch::Approx(1.375).epsilon(1e-14));
        CHECK(out.m == Catch::Approx(11.0 / 3.0).epsilon(1e-14));
        CHECK(out.pi == Catch::Approx(1.1).epsilon(1e-12));
    }

    SECTION("off-equilibrium belief under target I") {
        const StepOutcome out = step(s, 1.1, target_one());
        CHECK(out.pi == Catch::Approx(1.21).epsilon(1e-12));
        CHECK(out.reward == Catch::Approx(-0.21).epsilon(1e-12));
    }

    SECTION("tau satisfies the balanced-budget identity") {
        const StepOutcome out = step(MacroState{1.05, 1.02, 4.4}, 1.07,
                                     target_one());
        CHECK(out.tau == Catch::Approx(out.m - 4.4 / out.pi).epsilon(1e-14));
    }
}

TEST_CASE("steady state reproduces the two-target table") {
    const SteadyState one = steady_state(target_one());
    CHECK(rel_err(one.pi, 1.0) <= 1e-12);
    CHECK(rel_err(one.i, 1.25) <= 1e-12);
    CHECK(rel_err(one.m, 5.0) <= 1e-12);

    const SteadyState two = steady_state(target_two());
    CHECK(rel_err(two.pi, 1.1) <= 1e-12);
    CHECK(rel_err(two.i, 1.375) <= 1e-12);
    CHECK(std::abs(two.m - 3.67) <= 0.005);

    // beta = 0.99: i = 1/0.99, m = i/(i-1) = 1/(1-0.99) = 100 exactly
    Regime patient = target_one();
    patient.beta = 0.99;
    const SteadyState ss = steady_state(patient);
    CHECK(rel_err(ss.i, 1.0 / 0.99) <= 1e-12);
    CHECK(rel_err(ss.m, 100.0) <= 1e-12);

    Regime bad = target_one();
    bad.pi_hat = 0.7;  // pi_hat <= beta
    CHECK_THROWS_AS(steady_state(bad), BeliefTooLow);
}

TEST_CASE("fixed point: playing the target reaches the steady state in one step") {
    Rng rng(20240601);
    for (int trial = 0; trial < 200; ++trial) {
        Regime r;
        r.beta = rng.uniform(0.5, 0.95);
        r.pi_hat = rng.uniform(r.beta + 0.1, 1.4);
        r.lambda = (trial % 3 == 0) ? 0.2 : rng.uniform(-0.9, -0.1);
        const MacroState s{rng.uniform(0.9, 1.3), rng.uniform(0.9, 1.3),
                           rng.uniform(2.0, 8.0)};
        const StepOutcome out = step(s, r.pi_hat, r);
        const SteadyState ss = steady_state(r);
        CHECK(rel_err(out.pi, ss.pi) <= 1e-12);
        CHECK(rel_err(out.i, ss.i) <= 1e-12);
        CHECK(rel_err(out.m, ss.m) <= 1e-12);
    }
}

TEST_CASE("realized inflation is strictly increasing in the action") {
    Rng rng(77);
    const Regime r = target_one();
    for (int k = 0; k < 1000; ++k) {
        const double a1 = rng.uniform(0.9, 1.4);
        const double a2 = rng.uniform(0.9, 1.4);
        const double lo = std::min(a1, a2);
        const double hi = std::max(a1, a2);
        if (lo == hi) continue;
        const double pi_lo = step(MacroState{}, lo, r).pi;
        const double pi_hi = step(MacroState{}, hi, r).pi;
        CHECK(pi_lo < pi_hi);
    }
}

TEST_CASE("reward is nonpositive and zero only on exact forecasts") {
    Rng rng(31415);
    for (int k = 0; k < 1000; ++k) {
        const double belief = rng.uniform(0.8, 1.5);
        const double pi = rng.uniform(0.8, 1.5);
        const double r = forecast_reward(belief, pi);
        CHECK(r <= 0.0);
        if (belief != pi) CHECK(r < 0.0);
        CHECK(forecast_reward(pi, pi) == 0.0);
    }
}

TEST_CASE("regime validation") {
    Regime r = target_one();
    r.lambda = -1.0;
    CHECK_THROWS_AS(r.validate(), BadConfig);
    r = target_one();
    r.beta = 1.0;
    CHECK_THROWS_AS(r.validate(), BadConfig);
    r = target_one();
    r.pi_hat = 0.0;
    CHECK_THROWS_AS(r.validate(), BadConfig);
    CHECK_NOTHROW(target_one().validate());
    CHECK_NOTHROW(target_two().validate());
}
