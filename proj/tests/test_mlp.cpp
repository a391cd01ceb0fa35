#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rrl/mlp.hpp"
#include "rrl/rng.hpp"

using namespace rrl;

namespace {

// Reference forward pass: plain matrix arithmetic over the net's stored
// weights, written independently of Mlp::forward.
std::vector<double> chain_forward(const Mlp& net, std::vector<double> v) {
    for (const auto& l : net.layers()) {
        std::vector<double> z(l.out, 0.0);
        for (std::size_t j = 0; j < l.out; ++j) {
            z[j] = l.b[j];
            for (std::size_t i = 0; i < l.in; ++i)
                z[j] += l.w[j * l.in + i] * v[i];
        }
        for (std::size_t j = 0; j < l.out; ++j) {
            switch (l.act) {
                case Activation::Linear: break;
                case Activation::Relu: z[j] = std::max(0.0, z[j]); break;
                case Activation::Tanh: z[j] = std::tanh(z[j]); break;
                case Activation::ScaledSigmoid:
                    z[j] = l.lo + (l.hi - l.lo) / (1.0 + std::exp(-z[j]));
                    break;
            }
        }
        v = std::move(z);
    }
    return v;
}

LossProbe quadratic_probe() {
    return {
        [](std::span<const double> y) {
            double s = 0.0;
            for (double v : y) s += 0.5 * v * v;
            return s;
        },
        [](std::span<const double> y) {
            return std::vector<double>(y.begin(), y.end());
        }};
}

LossProbe sum_probe() {
    return {
        [](std::span<const double> y) {
            double s = 0.0;
            for (double v : y) s += v;
            return s;
        },
        [](std::span<const double> y) {
            return std::vector<double>(y.size(), 1.0);
        }};
}

}  // namespace

TEST_CASE("forward: affine identity on a single linear layer") {
    Mlp net({{1, 1, Activation::Linear}});
    net.layers()[0].w[0] = 2.0;
    net.layers()[0].b[0] = 0.5;
    const std::vector<double> in = {1.0};
    CHECK(net.forward(in)[0] == Catch::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("forward: zero-weight tanh net outputs zero") {
    Mlp net({{3, 8, Activation::Tanh}, {8, 1, Activation::Tanh}});
    const std::vector<double> in = {0.3, -1.2, 7.0};
    CHECK(net.forward(in)[0] == 0.0);
}

TEST_CASE("forward matches an independent matrix chain") {
    Rng rng(42);
    Mlp net = Mlp::random({{3, 16, Activation::Tanh},
                           {16, 8, Activation::Relu},
                           {8, 2, Activation::Linear}},
                          rng);
    for (int k = 0; k < 20; ++k) {
        const std::vector<double> in = {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                        rng.uniform(-2, 2)};
        const auto got = net.forward(in);
        const auto want = chain_forward(net, in);
        REQUIRE(got.size() == want.size());
        for (std::size_t j = 0; j < got.size(); ++j)
            CHECK(got[j] == Catch::Approx(want[j]).epsilon(1e-13).margin(1e-15));
    }
}

TEST_CASE("forward dimension mismatch throws") {
    Mlp net({{3, 4, Activation::Tanh}, {4, 1, Activation::Linear}});
    const std::vector<double> wrong = {1.0, 2.0};
    CHECK_THROWS_AS(net.forward(wrong), DimensionMismatch);
    CHECK_THROWS_AS(Mlp({{3, 4, Activation::Tanh}, {5, 1, Activation::Linear}}),
                    DimensionMismatch);
}

TEST_CASE("backward: scalar affine product rule") {
    Mlp net({{1, 1, Activation::Linear}});
    net.layers()[0].w[0] = 3.0;
    const std::vector<double> in = {2.0};
    net.forward(in);
    const std::vector<double> up = {1.0};
    const auto dx = net.backward(up);
    CHECK(net.layers()[0].w_grad[0] == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(net.layers()[0].b_grad[0] == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(dx[0] == Catch::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("backward: zero upstream leaves all gradients zero") {
    Rng rng(7);
    Mlp net = Mlp::random({{3, 8, Activation::Tanh}, {8, 2, Activation::Linear}},
                          rng);
    const std::vector<double> in = {0.5, -0.5, 1.5};
    net.forward(in);
    const std::vector<double> up = {0.0, 0.0};
    const auto dx = net.backward(up);
    for (double v : dx) CHECK(v == 0.0);
    net.for_each_param([&](double&, double& g) { CHECK(g == 0.0); });
}

TEST_CASE("backward requires a cached forward") {
    Mlp net({{2, 1, Activation::Linear}});
    const std::vector<double> up = {1.0};
    CHECK_THROWS_AS(net.backward(up), NoCachedForward);
}

TEST_CASE("gradient check: seeded tanh net within 1e-4") {
    Rng rng(123);
    Mlp net = Mlp::random({{3, 16, Activation::Tanh}, {16, 1, Activation::Linear}},
                          rng);
    const std::vector<double> in = {0.4, -0.9, 1.1};
    CHECK(gradient_check(net, quadratic_probe(), in) <= 1e-4);
}

TEST_CASE("gradient check: linear net with quadratic probe is near exact") {
    Rng rng(321);
    Mlp net = Mlp::random({{3, 4, Activation::Linear}, {4, 1, Activation::Linear}},
                          rng);
    const std::vector<double> in = {1.0, -2.0, 0.5};
    CHECK(gradient_check(net, quadratic_probe(), in) <= 1e-8);
}

TEST_CASE("gradient check: relu net probed away from kinks") {
    Rng rng(5150);
    Mlp net = Mlp::random({{3, 12, Activation::Relu}, {12, 1, Activation::Linear}},
                          rng);
    const std::vector<double> in = {0.8, -0.6, 1.3};
    // recompute first-layer preactivations by hand and keep clear of kinks
    const auto& l0 = net.layers()[0];
    for (std::size_t j = 0; j < l0.out; ++j) {
        double z = l0.b[j];
        for (std::size_t i = 0; i < 3; ++i) z += l0.w[j * 3 + i] * in[i];
        REQUIRE(std::abs(z) > 1e-3);
    }
    CHECK(gradient_check(net, sum_probe(), in) <= 1e-4);
}

TEST_CASE("scaled sigmoid maps onto the open action interval, increasing") {
    Mlp net({{1, 1, Activation::ScaledSigmoid, 0.9, 1.4}});
    net.layers()[0].w[0] = 1.0;
    double prev = -1.0;
    for (double z = -30.0; z <= 30.0; z += 0.25) {
        const std::vector<double> in = {z};
        const double y = net.forward(in)[0];
        CHECK(y > 0.9);
        CHECK(y < 1.4);
        CHECK(y > prev);
        prev = y;
    }
    // saturation approaches the bounds
    const std::vector<double> big = {30.0}, small = {-30.0};
    CHECK(net.forward(big)[0] == Catch::Approx(1.4).margin(1e-9));
    CHECK(net.forward(small)[0] == Catch::Approx(0.9).margin(1e-9));
}

TEST_CASE("gradient check covers the scaled-sigmoid output layer") {
    Rng rng(2718);
    Mlp net = Mlp::random(
        {{3, 8, Activation::Tanh}, {8, 1, Activation::ScaledSigmoid, 0.9, 1.4}},
        rng);
    const std::vector<double> in = {0.2, 0.7, -0.4};
    CHECK(gradient_check(net, sum_probe(), in) <= 1e-4);
}

TEST_CASE("random init: deterministic per seed, ranged per layer kind") {
    const std::vector<LayerSpec> spec = {{3, 64, Activation::Tanh},
                                         {64, 64, Activation::Tanh},
                                         {64, 1, Activation::ScaledSigmoid, 0.9,
                                          1.4}};
    Rng a(99), b(99), c(100);
    Mlp na = Mlp::random(spec, a);
    Mlp nb = Mlp::random(spec, b);
    Mlp nc = Mlp::random(spec, c);

    bool identical = true, differs = false;
    na.for_each_param([&](double&, double&) {});
    const auto& la = na.layers();
    const auto& lb = nb.layers();
    const auto& lc = nc.layers();
    for (std::size_t k = 0; k < la.size(); ++k) {
        for (std::size_t i = 0; i < la[k].w.size(); ++i) {
            identical = identical && la[k].w[i] == lb[k].w[i];
            differs = differs || la[k].w[i] != lc[k].w[i];
        }
    }
    CHECK(identical);
    CHECK(differs);

    for (double v : la[0].w) CHECK(std::abs(v) <= 1.0 / std::sqrt(3.0));
    for (double v : la[1].w) CHECK(std::abs(v) <= 1.0 / 8.0);
    for (double v : la[2].w) CHECK(std::abs(v) <= 3e-3);
}

TEST_CASE("soft update blends parameters") {
    Mlp live({{1, 1, Activation::Linear}});
    Mlp target({{1, 1, Activation::Linear}});
    live.layers()[0].w[0] = 2.0;
    target.layers()[0].w[0] = 0.0;

    Mlp t1 = target;
    soft_update(live, t1, 1.0);
    CHECK(t1.layers()[0].w[0] == 2.0);

    Mlp t0 = target;
    soft_update(live, t0, 0.0);
    CHECK(t0.layers()[0].w[0] == 0.0);

    Mlp th = target;
    soft_update(live, th, 0.5);
    CHECK(th.layers()[0].w[0] == Catch::Approx(1.0).epsilon(1e-15));

    Mlp other({{2, 1, Activation::Linear}});
    CHECK_THROWS_AS(soft_update(live, other, 0.5), DimensionMismatch);
}
