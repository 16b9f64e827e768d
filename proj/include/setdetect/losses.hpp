#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "setdetect/errors.hpp"

namespace setdetect {

template <typename T>
struct LossResult {
    double value;
    std::vector<T> grad;  ///< d(loss)/d(prediction), one per sample
};

/// Mean binary cross entropy with optional positive-class weight:
/// -(1/n) sum [ w*y*ln(p) + (1-y)*ln(1-p) ], p clamped to [1e-7, 1-1e-7]
/// before the log. The gradient is the exact derivative of the computed
/// expression (zero where the clamp is active).
template <typename T>
LossResult<T> bce_loss(const std::vector<T>& p, const std::vector<T>& y, double pos_weight = 1.0) {
    if (p.size() != y.size()) throw LengthMismatch("bce_loss: prediction/target size mismatch");
    constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
    const double n = static_cast<double>(p.size());
    LossResult<T> r;
    r.grad.assign(p.size(), T(0));
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = static_cast<double>(p[i]);
        const double pc = std::min(std::max(pi, lo), hi);
        const double yi = static_cast<double>(y[i]);
        acc += -(pos_weight * yi * std::log(pc) + (1.0 - yi) * std::log(1.0 - pc));
        if (pi > lo && pi < hi)
            r.grad[i] = static_cast<T>((-pos_weight * yi / pc + (1.0 - yi) / (1.0 - pc)) / n);
    }
    r.value = acc / n;
    return r;
}

/// Mean squared error; gradient 2*(pred - target)/n.
template <typename T>
LossResult<T> mse_loss(const std::vector<T>& pred, const std::vector<T>& target) {
    if (pred.size() != target.size()) throw LengthMismatch("mse_loss: prediction/target size mismatch");
    const double n = static_cast<double>(pred.size());
    LossResult<T> r;
    r.grad.assign(pred.size(), T(0));
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
        acc += d * d;
        r.grad[i] = static_cast<T>(2.0 * d / n);
    }
    r.value = acc / n;
    return r;
}

}  // namespace setdetect
