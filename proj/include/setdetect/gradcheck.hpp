#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "setdetect/losses.hpp"
#include "setdetect/network.hpp"

namespace setdetect {

/// Scalar loss over the flattened network output. The checker differentiates
/// loss(forward(x)) with respect to the parameters.
using GradCheckLoss = std::function<LossResult<double>(const std::vector<double>&)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;  ///< probes whose FD step crossed a relu/pool branch
};

namespace detail {

inline double fd_loss(Network<double>& net, const Tensor3<double>& x, const GradCheckLoss& loss,
                      std::uint64_t& signature) {
    Tensor3<double> out = net.forward(x, Mode::train);
    signature = net.decision_signature();
    return loss(out.data()).value;
}

}  // namespace detail

/// Central-difference gradient verification on a double-precision network.
///
/// Runs the network in train mode with dropout masks frozen, so the function
/// under test is deterministic and differentiable. Probes whose finite step
/// flips a relu sign or a pool argmax are retried with a smaller step and
/// skipped if the branch still moves; finite differences are meaningless on
/// those points. per_tensor bounds the number of probed entries per parameter
/// array (SIZE_MAX = all of them).
///
/// order 2 is the plain (L(+h)-L(-h))/2h stencil. order 4 adds the +/-2h
/// points, cancelling the h^2 truncation term; deep normalization stacks
/// carry enough curvature that the second-order stencil alone cannot resolve
/// 1e-4 at h=1e-4.
inline GradCheckReport grad_check(Network<double>& net, const Tensor3<double>& x,
                                  const GradCheckLoss& loss, double h = 1e-4,
                                  std::size_t per_tensor = std::numeric_limits<std::size_t>::max(),
                                  std::uint64_t sample_seed = 1, int order = 2) {
    net.set_reuse_dropout_masks(true);

    // analytic pass: masks get drawn here and reused by every probe below
    Tensor3<double> out = net.forward(x, Mode::train);
    const std::uint64_t base_sig = net.decision_signature();
    LossResult<double> base = loss(out.data());
    Tensor3<double> grad_out(out.batch(), out.time(), out.channels());
    grad_out.data() = base.grad;
    net.backward(grad_out);

    // Relative errors are measured against a floor tied to the network's
    // dominant gradient: differencing a deep forward pass leaves an absolute
    // noise floor, so a coefficient four orders below the dominant one cannot
    // be resolved relatively and is compared on that scale instead.
    double grad_scale = 0.0;
    for (const auto& entry : net.param_store())
        if (entry.trainable)
            for (double a : *entry.grad) grad_scale = std::max(grad_scale, std::abs(a));
    const double floor = std::max(1e-4 * grad_scale, 1e-12);

    GradCheckReport report;
    Rng rng(derive_seed(sample_seed, "gradcheck"));
    for (auto& entry : net.param_store()) {
        if (!entry.trainable) continue;
        auto& value = *entry.value;
        const auto& analytic = *entry.grad;

        std::vector<std::size_t> probes;
        if (value.size() <= per_tensor) {
            probes.resize(value.size());
            for (std::size_t i = 0; i < value.size(); ++i) probes[i] = i;
        } else {
            for (std::size_t i = 0; i < per_tensor; ++i)
                probes.push_back(static_cast<std::size_t>(rng.uniform_int(value.size())));
        }

        for (std::size_t j : probes) {
            const double theta = value[j];
            double step = h;
            bool measured = false;
            double numeric = 0.0;
            for (int attempt = 0; attempt < 3 && !measured; ++attempt, step *= 0.1) {
                bool crossed = false;
                auto probe = [&](double offset) {
                    std::uint64_t sig = 0;
                    value[j] = theta + offset;
                    const double l = detail::fd_loss(net, x, loss, sig);
                    if (sig != base_sig) crossed = true;
                    return l;
                };
                if (order == 4) {
                    const double lp2 = probe(2.0 * step);
                    const double lp1 = probe(step);
                    const double lm1 = probe(-step);
                    const double lm2 = probe(-2.0 * step);
                    value[j] = theta;
                    if (crossed) continue;
                    numeric = (8.0 * (lp1 - lm1) - (lp2 - lm2)) / (12.0 * step);
                } else {
                    const double lp = probe(step);
                    const double lm = probe(-step);
                    value[j] = theta;
                    if (crossed) continue;
                    numeric = (lp - lm) / (2.0 * step);
                }
                measured = true;
            }
            if (!measured) {
                ++report.skipped_kinks;
                continue;
            }
            const double a = analytic[j];
            const double denom = std::max({std::abs(a), std::abs(numeric), floor});
            report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
            ++report.checked;
        }
    }
    return report;
}

/// Loss adapters for the two heads.
inline GradCheckLoss bce_check_loss(std::vector<double> targets, double pos_weight = 1.0) {
    return [targets = std::move(targets), pos_weight](const std::vector<double>& p) {
        return bce_loss<double>(p, targets, pos_weight);
    };
}

inline GradCheckLoss mse_check_loss(std::vector<double> targets) {
    return [targets = std::move(targets)](const std::vector<double>& p) {
        return mse_loss<double>(p, targets);
    };
}

}  // namespace setdetect
