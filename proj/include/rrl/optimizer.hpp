#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rrl/errors.hpp"
#include "rrl/mlp.hpp"

namespace rrl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adaptive-moment estimation with bias correction. One optimizer instance
// per network; moment buffers mirror the network's flat parameter order.
// step() consumes and zeroes the network's gradient buffers.
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    explicit AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {}

    void step(Mlp& net) {
        const std::size_t n = net.parameter_count();
        if (m_.empty()) {
            m_.assign(n, 0.0);
            v_.assign(n, 0.0);
        } else if (m_.size() != n) {
            throw DimensionMismatch(
                "AdamOptimizer::step: parameter count changed");
        }
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        std::size_t k = 0;
        net.for_each_param([&](double& p, double& g) {
            m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
            v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[k] / c1;
            const double vhat = v_[k] / c2;
            p -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            ++k;
        });
        net.zero_gradients();
    }

    void reset() {
        m_.clear();
        v_.clear();
        t_ = 0;
    }

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

}  // namespace rrl
