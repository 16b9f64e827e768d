#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "setdetect/metrics.hpp"
#include "setdetect/train.hpp"

namespace setdetect {

enum class StartMethod { nominal, train_mean, regression };

inline const char* start_method_name(StartMethod m) {
    switch (m) {
        case StartMethod::nominal: return "nominal";
        case StartMethod::train_mean: return "train_mean";
        case StartMethod::regression: return "regression";
    }
    return "?";
}

/// How to place the engine-shutdown second once a flight is classified SET.
struct StartEstimatorConfig {
    StartMethod method = StartMethod::nominal;
    int nominal_offset_s = 180;                ///< fixed cooldown after runway exit
    std::optional<int> learned_mean_s;         ///< fit_mean output, required for train_mean
};

/// Mean shutdown second over the training positives, rounded to the nearest
/// whole second.
inline int fit_mean(const std::vector<SetAnnotation>& train_annotations) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& a : train_annotations)
        if (a.label == 1) {
            acc += static_cast<double>(a.start_index);
            ++n;
        }
    if (n == 0) throw NoPositives("fit_mean: no positive annotations in the training partition");
    return static_cast<int>(std::lround(acc / static_cast<double>(n)));
}

/// Regression-head defaults from the second hyperparameter search.
struct RegressorConfig {
    ArchConfig arch;       ///< same topology as the classifier by default
    TrainConfig train;

    RegressorConfig() {
        arch.dropout_rate = 0.6;
        train.batch_size = 16;
        train.epochs = 3000;
        train.learning_rate = 5e-5;
    }
};

/// Trains the capped-head start regressor on positive flights only, with MSE
/// loss and validation-MSE checkpointing. `data` must already be restricted
/// to positives with start-index targets; `split` is index-aligned with it.
inline TrainResult train_regressor(const Dataset& positives, const SplitAssignment& split,
                                   const RegressorConfig& cfg) {
    const auto train_idx = partition_indices(split, Partition::train);
    if (train_idx.size() < 2 * static_cast<std::size_t>(cfg.train.batch_size))
        throw TooFewPositives("train_regressor: need at least " + std::to_string(2 * cfg.train.batch_size) +
                              " training positives, got " + std::to_string(train_idx.size()));
    const auto specs = build_nmdp(cfg.arch, HeadKind::capped_relu, static_cast<double>(kTimeSteps - 1));
    return train_network(specs, positives, split, cfg.train, LossKind::mse);
}

/// Start estimate for one flight, clamped into the real (unpadded) sample
/// range. The regression method needs a loaded artifact network.
inline int estimate_start(const FeatureMatrix& features, const StartEstimatorConfig& cfg,
                          Network<float>* regressor = nullptr) {
    const int limit = static_cast<int>(features.valid_len) - 1;
    switch (cfg.method) {
        case StartMethod::nominal:
            return std::min(cfg.nominal_offset_s, limit);
        case StartMethod::train_mean:
            if (!cfg.learned_mean_s) throw InvalidConfig("train_mean estimator has no fitted mean");
            return std::min(*cfg.learned_mean_s, limit);
        case StartMethod::regression: {
            if (regressor == nullptr) throw MissingArtifact("regression estimator needs a model artifact");
            Dataset one;
            one.flight_ids.push_back("");
            one.features.push_back(features);
            one.labels.push_back(1);
            one.targets.push_back(0.0f);
            const double out = predict_scores(*regressor, one, {0}, 1)[0];
            const int rounded = static_cast<int>(std::lround(out));
            return std::min(std::max(rounded, 0), limit);
        }
    }
    throw InvalidConfig("unknown start method");
}

/// MAE/ME rows of the estimator-comparison table.
struct EstimatorScore {
    std::string method;
    double mae_val = 0.0, mae_test = 0.0;
    double me_val = 0.0, me_test = 0.0;
};

inline EstimatorScore compare_estimator(const std::string& method, const std::vector<double>& pred_val,
                                        const std::vector<double>& truth_val,
                                        const std::vector<double>& pred_test,
                                        const std::vector<double>& truth_test) {
    EstimatorScore s;
    s.method = method;
    s.mae_val = mae(pred_val, truth_val);
    s.me_val = mean_error(pred_val, truth_val);
    s.mae_test = mae(pred_test, truth_test);
    s.me_test = mean_error(pred_test, truth_test);
    return s;
}

inline void write_estimator_csv(std::ostream& out, const std::vector<EstimatorScore>& rows) {
    out << "method,mae_val,mae_test,me_val,me_test\n";
    for (const auto& r : rows)
        out << r.method << ',' << csv::fmt(r.mae_val) << ',' << csv::fmt(r.mae_test) << ','
            << csv::fmt(r.me_val) << ',' << csv::fmt(r.me_test) << "\n";
}

/// Per-flight truth/prediction pairs for the start-distribution histogram.
inline void write_start_histogram_csv(std::ostream& out, const std::vector<std::string>& flight_ids,
                                      const std::vector<double>& truths,
                                      const std::vector<std::pair<std::string, std::vector<double>>>& predictions) {
    out << "flight_id,truth";
    for (const auto& [method, _] : predictions) out << ',' << method;
    out << "\n";
    for (std::size_t i = 0; i < flight_ids.size(); ++i) {
        out << flight_ids[i] << ',' << csv::fmt(truths[i]);
        for (const auto& [_, preds] : predictions) out << ',' << csv::fmt(preds[i]);
        out << "\n";
    }
}

}  // namespace setdetect
