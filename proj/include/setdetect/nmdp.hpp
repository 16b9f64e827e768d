#pragma once

#include <string>
#include <vector>

#include "setdetect/featurize.hpp"
#include "setdetect/layers.hpp"

namespace setdetect {

/// Classifier topology knobs: N conv blocks of m filters, D dense blocks of
/// p neurons. Defaults are the best sweep configuration.
struct ArchConfig {
    int n_conv = 6;        ///< N
    int filters = 256;     ///< m
    int n_dense = 6;       ///< D
    int neurons = 256;     ///< p
    int kernel_size = 10;
    double dropout_rate = 0.25;
};

enum class HeadKind { sigmoid, capped_relu };

/// Builds the layer stack:
///   batchnorm
///   N x [conv1d(m, kernel) -> relu -> batchnorm -> dropout -> maxpool(2)]
///   flatten
///   D x [dense(p) -> relu -> batchnorm -> dropout]
///   dense(1) -> head
/// Pooling halves the 2048-step axis per block, so the flatten width is
/// (2048 / 2^N) * m; N is capped where the axis stops dividing evenly.
inline std::vector<LayerSpec> build_nmdp(const ArchConfig& arch, HeadKind head, double cap = 2047.0) {
    if (arch.n_conv < 1 || arch.n_dense < 1)
        throw InvalidArch("build_nmdp: need at least one conv and one dense block");
    if (arch.n_conv > 11)
        throw InvalidArch("build_nmdp: " + std::to_string(kTimeSteps) + " steps are not divisible by 2^" +
                          std::to_string(arch.n_conv));
    if (arch.filters < 1 || arch.neurons < 1 || arch.kernel_size < 1)
        throw InvalidArch("build_nmdp: filters, neurons and kernel size must be positive");
    if (arch.dropout_rate < 0.0 || arch.dropout_rate >= 1.0)
        throw InvalidArch("build_nmdp: dropout rate must be in [0, 1)");

    std::vector<LayerSpec> specs;
    specs.push_back({LayerKind::batchnorm});
    for (int i = 0; i < arch.n_conv; ++i) {
        specs.push_back({LayerKind::conv1d, arch.filters, arch.kernel_size});
        specs.push_back({LayerKind::relu});
        specs.push_back({LayerKind::batchnorm});
        specs.push_back({LayerKind::dropout, 0, 0, 0, 0, arch.dropout_rate});
        specs.push_back({LayerKind::maxpool1d, 0, 0, 2});
    }
    specs.push_back({LayerKind::flatten});
    for (int i = 0; i < arch.n_dense; ++i) {
        specs.push_back({LayerKind::dense, 0, 0, 0, arch.neurons});
        specs.push_back({LayerKind::relu});
        specs.push_back({LayerKind::batchnorm});
        specs.push_back({LayerKind::dropout, 0, 0, 0, 0, arch.dropout_rate});
    }
    specs.push_back({LayerKind::dense, 0, 0, 0, 1});
    if (head == HeadKind::sigmoid) specs.push_back({LayerKind::sigmoid});
    else specs.push_back({LayerKind::capped_relu, 0, 0, 0, 0, 0, cap});
    return specs;
}

}  // namespace setdetect
