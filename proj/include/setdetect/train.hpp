#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "setdetect/artifact.hpp"
#include "setdetect/featurize.hpp"
#include "setdetect/labeler.hpp"
#include "setdetect/losses.hpp"
#include "setdetect/metrics.hpp"
#include "setdetect/nmdp.hpp"
#include "setdetect/optim.hpp"
#include "setdetect/split.hpp"

namespace setdetect {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 100;
    double class1_weight = 1.0;  ///< 1 = unweighted
    std::uint64_t seed = 42;
    SplitFractions fractions;

    void validate() const {
        if (batch_size < 2) throw InvalidConfig("batch_size must be >= 2 (batch-norm constraint)");
        if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
        if (learning_rate < 0) throw InvalidConfig("learning_rate must be >= 0");
        if (class1_weight < 1.0) throw InvalidConfig("class1_weight must be >= 1");
    }
};

/// In-memory training table: one row per flight, features plus both targets
/// (class label and, for positives, the shutdown second).
struct Dataset {
    std::vector<std::string> flight_ids;
    std::vector<FeatureMatrix> features;
    std::vector<int> labels;       ///< ground-truth class per flight
    std::vector<float> targets;    ///< training target (label or start index)

    std::size_t size() const { return features.size(); }
};

enum class TargetKind { classification, start_index };

inline Dataset make_dataset(const std::vector<GroundTrack>& tracks,
                            const std::vector<SetAnnotation>& annotations, TargetKind kind) {
    if (tracks.size() != annotations.size()) throw LengthMismatch("make_dataset: tracks/annotations mismatch");
    Dataset d;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        d.flight_ids.push_back(tracks[i].flight_id);
        d.features.push_back(build_features(tracks[i]));
        d.labels.push_back(annotations[i].label);
        if (kind == TargetKind::classification) {
            d.targets.push_back(static_cast<float>(annotations[i].label));
        } else {
            const int start = annotations[i].label == 1 ? annotations[i].start_index : 0;
            d.targets.push_back(static_cast<float>(std::min(start, static_cast<int>(kTimeSteps) - 1)));
        }
    }
    return d;
}

/// Copies feature rows into the engine's channel-major batch layout.
inline Tensor3<float> assemble_batch(const Dataset& data, const std::vector<std::size_t>& indices) {
    Tensor3<float> x(indices.size(), kTimeSteps, kNumChannels);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const FeatureMatrix& fm = data.features[indices[b]];
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            float* row = x.row(b, c);
            for (std::size_t t = 0; t < kTimeSteps; ++t) row[t] = fm.values[t * kNumChannels + c];
        }
    }
    return x;
}

/// Scores a set of flights in infer mode, batched for memory.
inline std::vector<double> predict_scores(Network<float>& net, const Dataset& data,
                                          const std::vector<std::size_t>& indices, int batch_size = 32) {
    std::vector<double> scores;
    scores.reserve(indices.size());
    for (std::size_t at = 0; at < indices.size(); at += static_cast<std::size_t>(batch_size)) {
        std::vector<std::size_t> chunk(indices.begin() + at,
                                       indices.begin() + std::min(indices.size(), at + batch_size));
        Tensor3<float> x = assemble_batch(data, chunk);
        Tensor3<float> out = net.forward(x, Mode::infer);
        for (std::size_t b = 0; b < chunk.size(); ++b) scores.push_back(static_cast<double>(out.data()[b]));
    }
    return scores;
}

inline std::vector<std::size_t> partition_indices(const SplitAssignment& split, Partition p) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == p) out.push_back(i);
    return out;
}

enum class LossKind { bce, mse };

struct EpochStats {
    int epoch;
    double train_loss;
    double val_loss;
};

struct TrainResult {
    ModelArtifact artifact;  ///< parameters of the lowest-validation-loss epoch
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_loss = 0.0;
};

namespace detail {

inline double eval_loss(Network<float>& net, const Dataset& data, const std::vector<std::size_t>& indices,
                        LossKind kind, double pos_weight, int batch_size) {
    std::vector<double> scores = predict_scores(net, data, indices, batch_size);
    std::vector<float> pred(scores.begin(), scores.end());
    std::vector<float> target;
    target.reserve(indices.size());
    for (std::size_t i : indices) target.push_back(data.targets[i]);
    return kind == LossKind::bce ? bce_loss<float>(pred, target, pos_weight).value
                                 : mse_loss<float>(pred, target).value;
}

}  // namespace detail

/// Runs the training protocol: per-epoch seeded shuffles into mini-batches of
/// gradient descent, validation loss in infer mode after every epoch, and a
/// checkpoint of the parameters whenever the validation loss improves.
///
/// A trailing batch of a single sample is folded into the previous batch;
/// batch normalization cannot train on one sample.
inline TrainResult train_network(const std::vector<LayerSpec>& specs, const Dataset& data,
                                 const SplitAssignment& split, const TrainConfig& cfg, LossKind loss_kind) {
    cfg.validate();
    const auto train_idx_base = partition_indices(split, Partition::train);
    const auto val_idx = partition_indices(split, Partition::val);
    if (train_idx_base.size() < 2) throw ClassTooSmall("train: need at least 2 training samples");
    if (val_idx.empty()) throw ClassTooSmall("train: empty validation partition");

    Network<float> net(specs, {kTimeSteps, kNumChannels}, cfg.seed);
    Adam<float> opt(cfg.learning_rate);

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<std::vector<float>> best_snapshot;

    std::vector<std::size_t> order = train_idx_base;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle = stream_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_int(i)]);

        double loss_sum = 0.0;
        std::size_t at = 0;
        int batch_no = 0;
        while (at < order.size()) {
            std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
            if (order.size() - end == 1) end = order.size();  // fold trailing singleton
            std::vector<std::size_t> batch(order.begin() + at, order.begin() + end);
            at = end;
            ++batch_no;

            Tensor3<float> x = assemble_batch(data, batch);
            Tensor3<float> out = net.forward(x, Mode::train);
            std::vector<float> target;
            target.reserve(batch.size());
            for (std::size_t i : batch) target.push_back(data.targets[i]);
            LossResult<float> loss = loss_kind == LossKind::bce
                                         ? bce_loss<float>(out.data(), target, cfg.class1_weight)
                                         : mse_loss<float>(out.data(), target);
            if (!std::isfinite(loss.value))
                throw NonFiniteLoss("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_no));
            loss_sum += loss.value * static_cast<double>(batch.size());

            Tensor3<float> grad(out.batch(), out.time(), out.channels());
            grad.data() = loss.grad;
            net.backward(grad);
            opt.step(net);
        }

        const double train_loss = loss_sum / static_cast<double>(order.size());
        const double val_loss = detail::eval_loss(net, data, val_idx, loss_kind, cfg.class1_weight, cfg.batch_size);
        if (!std::isfinite(val_loss))
            throw NonFiniteLoss("validation loss diverged at epoch " + std::to_string(epoch));
        result.history.push_back({epoch, train_loss, val_loss});
        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            best_snapshot = net.snapshot();
        }
    }

    net.restore(best_snapshot);
    result.artifact = ModelArtifact::from_network(net, cfg.seed, 0.5);
    return result;
}

inline void write_history_csv(std::ostream& out, const std::vector<EpochStats>& history) {
    out << "epoch,train_loss,val_loss\n";
    for (const auto& e : history)
        out << e.epoch << ',' << csv::fmt(e.train_loss) << ',' << csv::fmt(e.val_loss) << "\n";
}

/// F1-optimal decision threshold from the validation scores.
///
/// Evaluates F1 on the grid k/100, k = 1..99 (prediction rule: score >=
/// threshold), takes the longest contiguous run of grid points attaining the
/// maximum, and returns the run's midpoint (lower median). This formalizes
/// picking the middle of the flat region of the F1 curve.
inline double select_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    bool has_pos = false, has_neg = false;
    for (int l : labels) (l == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DegenerateLabels("select_threshold: need at least one positive and one negative");

    double f1[100];
    double best_f1 = -1.0;
    for (int k = 1; k <= 99; ++k) {
        f1[k] = confusion_at(scores, labels, static_cast<double>(k) / 100.0).f1();
        best_f1 = std::max(best_f1, f1[k]);
    }
    int run_start = 0, run_len = 0;
    int cur_start = 0, cur_len = 0;
    for (int k = 1; k <= 99; ++k) {
        if (f1[k] == best_f1) {
            if (cur_len == 0) cur_start = k;
            ++cur_len;
            if (cur_len > run_len) {
                run_len = cur_len;
                run_start = cur_start;
            }
        } else {
            cur_len = 0;
        }
    }
    const int mid = run_start + (run_len - 1) / 2;
    return static_cast<double>(mid) / 100.0;
}

/// threshold,f1 curve export for plotting the plateau.
inline void write_f1_curve_csv(std::ostream& out, const std::vector<double>& scores,
                               const std::vector<int>& labels) {
    out << "threshold,f1\n";
    for (int k = 1; k <= 99; ++k) {
        const double th = static_cast<double>(k) / 100.0;
        out << csv::fmt(th) << ',' << csv::fmt(confusion_at(scores, labels, th).f1()) << "\n";
    }
}

// ---------------------------------------------------------------------------
// hyperparameter sweep

struct SweepRow {
    std::string param;
    double value = 0.0;
    int batch_size = 0;
    int epochs = 0;
    double threshold = 0.0;
    double val_f1 = 0.0, test_f1 = 0.0;
    double val_precision = 0.0, test_precision = 0.0;
    double val_recall = 0.0, test_recall = 0.0;
    bool best = false;
    std::string error;
};

namespace detail {

inline void apply_sweep_param(const std::string& param, double value, ArchConfig& arch, TrainConfig& cfg,
                              const TrainConfig& base) {
    if (param == "learning_rate") cfg.learning_rate = value;
    else if (param == "batch_size") {
        cfg.batch_size = static_cast<int>(value);
        // fixed total gradient steps: steps/epoch shrinks with batch size, so
        // epochs scale proportionally (16 -> 50 pairs with 32 -> 100)
        cfg.epochs = std::max(1, static_cast<int>(static_cast<long>(base.epochs) * cfg.batch_size / base.batch_size));
    } else if (param == "dropout") arch.dropout_rate = value;
    else if (param == "depth") arch.n_conv = arch.n_dense = static_cast<int>(value);
    else if (param == "width") arch.filters = arch.neurons = static_cast<int>(value);
    else if (param == "kernel_size") arch.kernel_size = static_cast<int>(value);
    else if (param == "class1_weight") cfg.class1_weight = value;
    else throw InvalidConfig("unknown sweep parameter: " + param);
}

}  // namespace detail

/// Model-selection ordering: validation F1 first, validation recall breaks
/// ties. Failed rows never win.
inline void mark_best_row(std::vector<SweepRow>& rows) {
    std::size_t best = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].error.empty()) continue;
        if (best == rows.size() || rows[r].val_f1 > rows[best].val_f1 ||
            (rows[r].val_f1 == rows[best].val_f1 && rows[r].val_recall > rows[best].val_recall))
            best = r;
    }
    for (auto& r : rows) r.best = false;
    if (best < rows.size()) rows[best].best = true;
}

/// One-parameter-at-a-time sweep: trains one model per grid value, selects a
/// threshold on validation, and reports val/test precision, recall and F1.
/// The best row is flagged by validation F1 with recall as tie-break. A row
/// that fails records its error and the sweep continues.
inline std::vector<SweepRow> sweep(const ArchConfig& base_arch, const TrainConfig& base_cfg,
                                   const std::string& param, const std::vector<double>& values,
                                   const Dataset& data, const SplitAssignment& split, int threads = 1) {
    std::vector<SweepRow> rows(values.size());
    const auto val_idx = partition_indices(split, Partition::val);
    const auto test_idx = partition_indices(split, Partition::test);

    auto run_row = [&](std::size_t r) {
        SweepRow& row = rows[r];
        row.param = param;
        row.value = values[r];
        try {
            ArchConfig arch = base_arch;
            TrainConfig cfg = base_cfg;
            detail::apply_sweep_param(param, values[r], arch, cfg, base_cfg);
            row.batch_size = cfg.batch_size;
            row.epochs = cfg.epochs;

            TrainResult tr = train_network(build_nmdp(arch, HeadKind::sigmoid), data, split, cfg, LossKind::bce);
            Network<float> net = tr.artifact.to_network();
            std::vector<double> val_scores = predict_scores(net, data, val_idx, cfg.batch_size);
            std::vector<double> test_scores = predict_scores(net, data, test_idx, cfg.batch_size);
            std::vector<int> val_labels, test_labels;
            for (std::size_t i : val_idx) val_labels.push_back(data.labels[i]);
            for (std::size_t i : test_idx) test_labels.push_back(data.labels[i]);

            row.threshold = select_threshold(val_scores, val_labels);
            const Confusion cv = confusion_at(val_scores, val_labels, row.threshold);
            const Confusion ct = confusion_at(test_scores, test_labels, row.threshold);
            row.val_f1 = cv.f1();
            row.val_precision = cv.precision();
            row.val_recall = cv.recall();
            row.test_f1 = ct.f1();
            row.test_precision = ct.precision();
            row.test_recall = ct.recall();
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    if (threads <= 1) {
        for (std::size_t r = 0; r < rows.size(); ++r) run_row(r);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&run_row, &rows, w, threads]() {
                for (std::size_t r = static_cast<std::size_t>(w); r < rows.size(); r += static_cast<std::size_t>(threads))
                    run_row(r);
            });
        for (auto& t : pool) t.join();
    }

    mark_best_row(rows);
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "param,value,batch_size,epochs,threshold,f1_val,f1_test,precision_val,precision_test,"
           "recall_val,recall_test,best,error\n";
    for (const auto& r : rows)
        out << r.param << ',' << csv::fmt(r.value) << ',' << r.batch_size << ',' << r.epochs << ','
            << csv::fmt(r.threshold) << ',' << csv::fmt(r.val_f1) << ',' << csv::fmt(r.test_f1) << ','
            << csv::fmt(r.val_precision) << ',' << csv::fmt(r.test_precision) << ',' << csv::fmt(r.val_recall)
            << ',' << csv::fmt(r.test_recall) << ',' << (r.best ? 1 : 0) << ',' << r.error << "\n";
}

}  // namespace setdetect
