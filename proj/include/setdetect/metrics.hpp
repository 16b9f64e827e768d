#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "setdetect/errors.hpp"

namespace setdetect {

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
    double f1() const {
        const double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

/// Decision rule: score >= threshold predicts positive.
inline Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
    if (scores.size() != labels.size()) throw LengthMismatch("confusion_at: scores/labels size mismatch");
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (pred && labels[i] == 1) ++c.tp;
        else if (pred && labels[i] == 0) ++c.fp;
        else if (!pred && labels[i] == 1) ++c.fn;
        else ++c.tn;
    }
    return c;
}

/// Mean absolute error.
inline double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("mae: size mismatch");
    if (pred.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

/// Mean (signed) error: positive means over-prediction on average.
inline double mean_error(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("mean_error: size mismatch");
    if (pred.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += pred[i] - truth[i];
    return acc / static_cast<double>(pred.size());
}

/// Population standard deviation of a per-sample error series.
inline double population_sd(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace setdetect
