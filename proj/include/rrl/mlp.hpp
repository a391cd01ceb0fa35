#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rrl/errors.hpp"
#include "rrl/rng.hpp"

namespace rrl {

enum class Activation { Linear, Relu, Tanh, ScaledSigmoid };

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::ScaledSigmoid: return "scaled_sigmoid";
    }
    throw Error("unknown activation tag");
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    if (s == "scaled_sigmoid") return Activation::ScaledSigmoid;
    throw BadConfig("unknown activation tag '" + s + "'");
}

// Shape and activation of one dense layer. lo/hi give the output range of a
// ScaledSigmoid layer and are ignored otherwise.
struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act = Activation::Linear;
    double lo = 0.0;
    double hi = 1.0;
};

// Dense feed-forward network with explicit gradient buffers. forward()
// caches per-layer inputs and pre-activations; backward() consumes the most
// recent cache and *accumulates* parameter gradients, so minibatch gradients
// are built by looping forward/backward per sample. zero_gradients() (or an
// optimizer step) clears the buffers between training steps.
class Mlp {
public:
    struct Layer {
        std::size_t in = 0;
        std::size_t out = 0;
        Activation act = Activation::Linear;
        double lo = 0.0;  // ScaledSigmoid range
        double hi = 1.0;
        std::vector<double> w;  // out x in, row-major
        std::vector<double> b;  // out
        std::vector<double> w_grad;
        std::vector<double> b_grad;
        // forward cache
        std::vector<double> x;  // layer input
        std::vector<double> y;  // post-activation output
        std::vector<double> dz; // backward scratch
    };

    Mlp() = default;

    explicit Mlp(const std::vector<LayerSpec>& specs) {
        if (specs.empty()) throw DimensionMismatch("Mlp: no layers");
        layers_.reserve(specs.size());
        for (std::size_t k = 0; k < specs.size(); ++k) {
            const auto& s = specs[k];
            if (s.in == 0 || s.out == 0)
                throw DimensionMismatch("Mlp: zero-sized layer");
            if (k > 0 && s.in != specs[k - 1].out)
                throw DimensionMismatch(
                    "Mlp: layer " + std::to_string(k) + " expects input " +
                    std::to_string(s.in) + " but previous layer outputs " +
                    std::to_string(specs[k - 1].out));
            Layer l;
            l.in = s.in;
            l.out = s.out;
            l.act = s.act;
            l.lo = s.lo;
            l.hi = s.hi;
            l.w.assign(s.out * s.in, 0.0);
            l.b.assign(s.out, 0.0);
            l.w_grad.assign(s.out * s.in, 0.0);
            l.b_grad.assign(s.out, 0.0);
            l.x.assign(s.in, 0.0);
            l.y.assign(s.out, 0.0);
            l.dz.assign(s.out, 0.0);
            layers_.push_back(std::move(l));
        }
    }

    // Random initialization: hidden layers uniform +-1/sqrt(fan_in), the
    // final layer uniform +-3e-3 (the usual DDPG convention for placing the
    // initial outputs near the middle of the activation).
    static Mlp random(const std::vector<LayerSpec>& specs, Rng& rng) {
        Mlp net(specs);
        for (std::size_t k = 0; k < net.layers_.size(); ++k) {
            Layer& l = net.layers_[k];
            const bool last = (k + 1 == net.layers_.size());
            const double bound =
                last ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(l.in));
            for (double& w : l.w) w = rng.uniform(-bound, bound);
            for (double& b : l.b) b = rng.uniform(-bound, bound);
        }
        return net;
    }

    std::size_t input_size() const { return layers_.front().in; }
    std::size_t output_size() const { return layers_.back().out; }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::vector<LayerSpec> specs() const {
        std::vector<LayerSpec> out;
        out.reserve(layers_.size());
        for (const Layer& l : layers_)
            out.push_back({l.in, l.out, l.act, l.lo, l.hi});
        return out;
    }

    const std::vector<double>& forward(std::span<const double> input) {
        if (input.size() != input_size())
            throw DimensionMismatch("Mlp::forward: input size " +
                                    std::to_string(input.size()) +
                                    " != " + std::to_string(input_size()));
        const double* cur = input.data();
        std::size_t cur_n = input.size();
        for (Layer& l : layers_) {
            std::copy(cur, cur + cur_n, l.x.begin());
            for (std::size_t j = 0; j < l.out; ++j) {
                const double* wr = &l.w[j * l.in];
                double z = l.b[j];
                for (std::size_t i = 0; i < l.in; ++i) z += wr[i] * l.x[i];
                l.y[j] = activate(l, z);
            }
            cur = l.y.data();
            cur_n = l.out;
        }
        has_forward_ = true;
        return layers_.back().y;
    }

    // Accumulates d(output . upstream)/d(params) into the gradient buffers
    // and returns d(output . upstream)/d(input). Needs a cached forward.
    std::vector<double> backward(std::span<const double> upstream) {
        if (!has_forward_)
            throw NoCachedForward("Mlp::backward: no cached forward pass");
        if (upstream.size() != output_size())
            throw DimensionMismatch("Mlp::backward: upstream size " +
                                    std::to_string(upstream.size()) +
                                    " != " + std::to_string(output_size()));
        std::vector<double> up(upstream.begin(), upstream.end());
        for (std::size_t k = layers_.size(); k-- > 0;) {
            Layer& l = layers_[k];
            for (std::size_t j = 0; j < l.out; ++j)
                l.dz[j] = up[j] * activate_grad(l, l.y[j]);
            for (std::size_t j = 0; j < l.out; ++j) {
                const double d = l.dz[j];
                double* wg = &l.w_grad[j * l.in];
                for (std::size_t i = 0; i < l.in; ++i) wg[i] += d * l.x[i];
                l.b_grad[j] += d;
            }
            std::vector<double> down(l.in, 0.0);
            for (std::size_t j = 0; j < l.out; ++j) {
                const double d = l.dz[j];
                const double* wr = &l.w[j * l.in];
                for (std::size_t i = 0; i < l.in; ++i) down[i] += d * wr[i];
            }
            up = std::move(down);
        }
        return up;
    }

    void zero_gradients() {
        for (Layer& l : layers_) {
            std::fill(l.w_grad.begin(), l.w_grad.end(), 0.0);
            std::fill(l.b_grad.begin(), l.b_grad.end(), 0.0);
        }
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const Layer& l : layers_) n += l.w.size() + l.b.size();
        return n;
    }

    // Visits every (parameter, gradient) pair in a fixed order: per layer,
    // weights row-major, then biases. Serialization and the optimizer share
    // this order.
    template <class F>
    void for_each_param(F&& f) {
        for (Layer& l : layers_) {
            for (std::size_t i = 0; i < l.w.size(); ++i) f(l.w[i], l.w_grad[i]);
            for (std::size_t i = 0; i < l.b.size(); ++i) f(l.b[i], l.b_grad[i]);
        }
    }

    template <class F>
    void for_each_param(F&& f) const {
        for (const Layer& l : layers_) {
            for (std::size_t i = 0; i < l.w.size(); ++i) f(l.w[i], l.w_grad[i]);
            for (std::size_t i = 0; i < l.b.size(); ++i) f(l.b[i], l.b_grad[i]);
        }
    }

private:
    static double activate(const Layer& l, double z) {
        switch (l.act) {
            case Activation::Linear: return z;
            case Activation::Relu: return z > 0.0 ? z : 0.0;
            case Activation::Tanh: return std::tanh(z);
            case Activation::ScaledSigmoid: {
                const double s = 1.0 / (1.0 + std::exp(-z));
                return l.lo + (l.hi - l.lo) * s;
            }
        }
        throw Error("unknown activation tag");
    }

    // Derivative expressed through the cached output value.
    static double activate_grad(const Layer& l, double y) {
        switch (l.act) {
            case Activation::Linear: return 1.0;
            case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
            case Activation::Tanh: return 1.0 - y * y;
            case Activation::ScaledSigmoid: {
                const double s = (y - l.lo) / (l.hi - l.lo);
                return (l.hi - l.lo) * s * (1.0 - s);
            }
        }
        throw Error("unknown activation tag");
    }

    std::vector<Layer> layers_;
    bool has_forward_ = false;
};

// target <- tau * live + (1 - tau) * target, elementwise.
inline void soft_update(const Mlp& live, Mlp& target, double tau) {
    const auto& a = live.layers();
    auto& b = target.layers();
    if (a.size() != b.size())
        throw DimensionMismatch("soft_update: layer counts differ");
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].w.size() != b[k].w.size() || a[k].b.size() != b[k].b.size())
            throw DimensionMismatch("soft_update: layer " + std::to_string(k) +
                                    " shapes differ");
        for (std::size_t i = 0; i < a[k].w.size(); ++i)
            b[k].w[i] = tau * a[k].w[i] + (1.0 - tau) * b[k].w[i];
        for (std::size_t i = 0; i < a[k].b.size(); ++i)
            b[k].b[i] = tau * a[k].b[i] + (1.0 - tau) * b[k].b[i];
    }
}

// A differentiable scalar probe over a network's output, used by the
// finite-difference gradient checker.
struct LossProbe {
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> grad;
};

// Checks every parameter's analytic gradient against a central finite
// difference of the probe loss. Returns the max relative error
// |analytic - numeric| / max(1, |numeric|). Restores parameters and leaves
// the gradient buffers zeroed.
inline double gradient_check(Mlp& net, const LossProbe& probe,
                             std::span<const double> input, double h = 1e-5) {
    net.zero_gradients();
    const auto& out = net.forward(input);
    const std::vector<double> upstream = probe.grad(out);
    net.backward(upstream);

    std::vector<double> analytic;
    analytic.reserve(net.parameter_count());
    net.for_each_param([&](double&, double& g) { analytic.push_back(g); });

    double max_err = 0.0;
    std::size_t k = 0;
    net.for_each_param([&](double& p, double&) {
        const double saved = p;
        p = saved + h;
        const double up = probe.value(net.forward(input));
        p = saved - h;
        const double dn = probe.value(net.forward(input));
        p = saved;
        const double numeric = (up - dn) / (2.0 * h);
        const double err = std::abs(analytic[k] - numeric) /
                           std::max(1.0, std::abs(numeric));
        if (err > max_err) max_err = err;
        ++k;
    });
    net.zero_gradients();
    net.forward(input);  // leave a consistent cache behind
    return max_err;
}

}  // namespace rrl
