#pragma once

#include <cmath>
#include <cstdint>

#include "setdetect/network.hpp"

namespace setdetect {

/// Adaptive-moment gradient descent with bias correction. Moments live in the
/// network's parameter entries; the optimizer only holds the step counter and
/// the constants.
template <typename T>
class Adam {
  public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    std::uint64_t step_count() const { return step_; }

    void step(Network<T>& net) {
        ++step_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
        for (auto& e : net.param_store()) {
            if (!e.trainable) continue;
            auto& value = *e.value;
            const auto& grad = *e.grad;
            for (std::size_t i = 0; i < value.size(); ++i) {
                const double g = static_cast<double>(grad[i]);
                const double m = beta1_ * static_cast<double>(e.m[i]) + (1.0 - beta1_) * g;
                const double v = beta2_ * static_cast<double>(e.v[i]) + (1.0 - beta2_) * g * g;
                e.m[i] = static_cast<T>(m);
                e.v[i] = static_cast<T>(v);
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                value[i] = static_cast<T>(static_cast<double>(value[i]) - lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

  private:
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t step_ = 0;
};

}  // namespace setdetect
