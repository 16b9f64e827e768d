#include <gtest/gtest.h>

#include <sstream>

#include "setdetect/nmdp.hpp"
#include "setdetect/split.hpp"
#include "setdetect/train.hpp"

using namespace setdetect;

namespace {

GroundTrack const_speed_track(const std::string& id, std::size_t n, double speed) {
    GroundTrack tr;
    tr.flight_id = id;
    for (std::size_t i = 0; i < n; ++i) {
        TrackPoint p;
        p.t = static_cast<int>(i);
        p.altitude_ft = 300;
        p.groundspeed_kt = speed;
        p.track_deg = 90;
        tr.points.push_back(p);
    }
    return tr;
}

/// Separable toy set: positives taxi fast, negatives slow.
Dataset toy_dataset(std::size_t n_pos, std::size_t n_neg) {
    std::vector<GroundTrack> tracks;
    std::vector<SetAnnotation> anns;
    Rng rng(17);
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
        const bool pos = i < n_pos;
        const double speed = pos ? rng.uniform(18.0, 24.0) : rng.uniform(4.0, 8.0);
        tracks.push_back(const_speed_track("T" + std::to_string(i), 64, speed));
        SetAnnotation a;
        a.label = pos ? 1 : 0;
        if (pos) {
            a.start_index = 10;
            a.segment_len = 54;
        }
        anns.push_back(a);
    }
    return make_dataset(tracks, anns, TargetKind::classification);
}

ArchConfig tiny_arch() {
    ArchConfig a;
    a.n_conv = 1;
    a.filters = 2;
    a.n_dense = 1;
    a.neurons = 4;
    a.kernel_size = 3;
    a.dropout_rate = 0.0;
    return a;
}

}  // namespace

TEST(StratifiedSplit, PaperScaleCounts) {
    std::vector<int> labels(12445 + 714, 0);
    for (std::size_t i = 0; i < 714; ++i) labels[12445 + i] = 1;
    SplitAssignment split = stratified_split(labels, {}, 42);

    std::size_t train_pos = 0, train_neg = 0, val_pos = 0, val_neg = 0, test_pos = 0, test_neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (split[i] == Partition::train) (labels[i] ? train_pos : train_neg)++;
        if (split[i] == Partition::val) (labels[i] ? val_pos : val_neg)++;
        if (split[i] == Partition::test) (labels[i] ? test_pos : test_neg)++;
    }
    EXPECT_EQ(train_neg, 9956u);  // floor(12445 * 0.8)
    EXPECT_EQ(train_pos, 571u);   // floor(714 * 0.8)
    EXPECT_EQ(train_pos + val_pos + test_pos, 714u);
    EXPECT_EQ(train_neg + val_neg + test_neg, 12445u);

    // class proportion within one percentage point of global in every split
    const double global = 714.0 / (12445.0 + 714.0);
    EXPECT_NEAR(static_cast<double>(train_pos) / (train_pos + train_neg), global, 0.01);
    EXPECT_NEAR(static_cast<double>(val_pos) / (val_pos + val_neg), global, 0.01);
    EXPECT_NEAR(static_cast<double>(test_pos) / (test_pos + test_neg), global, 0.01);
}

TEST(StratifiedSplit, OneClassOnlyThrows) {
    std::vector<int> labels(50, 0);
    EXPECT_THROW(stratified_split(labels, {}, 1), ClassTooSmall);
}

TEST(StratifiedSplit, SameSeedSameAssignment) {
    std::vector<int> labels(200, 0);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = 1;
    EXPECT_EQ(stratified_split(labels, {}, 9), stratified_split(labels, {}, 9));
    EXPECT_NE(stratified_split(labels, {}, 9), stratified_split(labels, {}, 10));
}

TEST(StratifiedSplit, PartitionsCoverAllFlights) {
    std::vector<int> labels(137, 0);
    for (std::size_t i = 0; i < 31; ++i) labels[i * 4] = 1;
    SplitAssignment split = stratified_split(labels, {}, 3);
    EXPECT_EQ(split.size(), labels.size());  // every flight tagged exactly once by construction
}

TEST(StratifiedSplit, BadFractionsThrow) {
    std::vector<int> labels(40, 0);
    for (std::size_t i = 0; i < 20; ++i) labels[i] = 1;
    EXPECT_THROW(stratified_split(labels, {0.8, 0.3, 0.1}, 1), InvalidConfig);
}

TEST(BuildNmdp, LayerStackShape) {
    ArchConfig arch;
    arch.n_conv = 3;
    arch.filters = 32;
    arch.n_dense = 2;
    arch.neurons = 16;
    auto specs = build_nmdp(arch, HeadKind::sigmoid);
    // batchnorm + 3*5 conv-block layers + flatten + 2*4 dense-block layers + dense + head
    EXPECT_EQ(specs.size(), 1u + 15u + 1u + 8u + 2u);
    EXPECT_EQ(specs.front().kind, LayerKind::batchnorm);
    EXPECT_EQ(specs.back().kind, LayerKind::sigmoid);

    // materialize: flatten width must be (2048 / 2^3) * 32 = 8192
    Network<float> net(specs, {kTimeSteps, kNumChannels}, 1);
    EXPECT_EQ(net.output_shape().channels, 1u);
    bool found_dense_in = false;
    for (const auto& e : net.param_store())
        if (e.name.find("dense.weight") != std::string::npos && !found_dense_in) {
            EXPECT_EQ(e.value->size(), 8192u * 16u);
            found_dense_in = true;
        }
    EXPECT_TRUE(found_dense_in);
}

TEST(BuildNmdp, DefaultArchFlattenWidth) {
    // defaults: six pool-halvings leave 2048/64 = 32 steps of 256 channels,
    // so the first dense block sees 8192 inputs
    Network<float> net(build_nmdp(ArchConfig{}, HeadKind::sigmoid), {kTimeSteps, kNumChannels}, 1);
    for (const auto& e : net.param_store())
        if (e.name.find("dense.weight") != std::string::npos) {
            EXPECT_EQ(e.value->size(), 8192u * 256u);
            break;
        }
}

TEST(BuildNmdp, TooDeepThrows) {
    ArchConfig arch;
    arch.n_conv = 12;
    EXPECT_THROW(build_nmdp(arch, HeadKind::sigmoid), InvalidArch);
}

TEST(BuildNmdp, CappedHeadCarriesCap) {
    auto specs = build_nmdp(tiny_arch(), HeadKind::capped_relu, 2047.0);
    EXPECT_EQ(specs.back().kind, LayerKind::capped_relu);
    EXPECT_DOUBLE_EQ(specs.back().cap, 2047.0);
}

TEST(Train, SeparableToySetLearns) {
    Dataset data = toy_dataset(10, 10);
    SplitAssignment split = stratified_split(data.labels, {}, 42);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 30;
    cfg.learning_rate = 1e-3;
    TrainResult r = train_network(build_nmdp(tiny_arch(), HeadKind::sigmoid), data, split, cfg, LossKind::bce);
    ASSERT_EQ(r.history.size(), 30u);
    EXPECT_LT(r.best_val_loss, r.history.front().val_loss);
    EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
}

TEST(Train, ZeroLearningRateLeavesParametersAtInit) {
    Dataset data = toy_dataset(10, 10);
    SplitAssignment split = stratified_split(data.labels, {}, 42);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 3;
    cfg.learning_rate = 0.0;
    auto specs = build_nmdp(tiny_arch(), HeadKind::sigmoid);
    TrainResult r = train_network(specs, data, split, cfg, LossKind::bce);

    Network<float> fresh(specs, {kTimeSteps, kNumChannels}, cfg.seed);
    const auto& fresh_store = fresh.param_store();
    ASSERT_EQ(r.artifact.params.size(), fresh_store.size());
    for (std::size_t i = 0; i < fresh_store.size(); ++i)
        if (fresh_store[i].trainable)
            EXPECT_EQ(r.artifact.params[i].second, *fresh_store[i].value) << fresh_store[i].name;
}

TEST(Train, SameSeedSameHistory) {
    Dataset data = toy_dataset(10, 10);
    SplitAssignment split = stratified_split(data.labels, {}, 42);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 5;
    cfg.learning_rate = 1e-3;
    auto specs = build_nmdp(tiny_arch(), HeadKind::sigmoid);
    TrainResult a = train_network(specs, data, split, cfg, LossKind::bce);
    TrainResult b = train_network(specs, data, split, cfg, LossKind::bce);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
        EXPECT_EQ(a.history[i].val_loss, b.history[i].val_loss);
    }
    for (std::size_t i = 0; i < a.artifact.params.size(); ++i)
        EXPECT_EQ(a.artifact.params[i].second, b.artifact.params[i].second);
}

TEST(SelectThreshold, WorkedPlateauExample) {
    // F1 = 1 on grid points 21..80; the midpoint (lower median) is 0.50
    const double th = select_threshold({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1});
    EXPECT_DOUBLE_EQ(th, 50.0 / 100.0);
    EXPECT_DOUBLE_EQ(confusion_at({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}, th).f1(), 1.0);
}

TEST(SelectThreshold, AllScoresEqualReturnsMaximizer) {
    // every grid threshold classifies everything positive; any grid point
    // attains the maximum and the plateau rule must return one of them
    std::vector<double> scores(6, 0.99);
    std::vector<int> labels = {1, 1, 0, 1, 0, 1};
    const double th = select_threshold(scores, labels);
    double best = 0.0;
    for (int k = 1; k <= 99; ++k) best = std::max(best, confusion_at(scores, labels, k / 100.0).f1());
    EXPECT_DOUBLE_EQ(confusion_at(scores, labels, th).f1(), best);
}

TEST(SelectThreshold, PerfectSeparationGivesF1One) {
    const std::vector<double> scores = {0.9, 0.1, 0.2};
    const std::vector<int> labels = {1, 0, 0};
    const double th = select_threshold(scores, labels);
    EXPECT_DOUBLE_EQ(confusion_at(scores, labels, th).f1(), 1.0);
    // plateau is 21..90, lower median at k=55
    EXPECT_DOUBLE_EQ(th, 55.0 / 100.0);
}

TEST(SelectThreshold, DegenerateLabelsThrow) {
    EXPECT_THROW(select_threshold({0.5, 0.6}, {1, 1}), DegenerateLabels);
    EXPECT_THROW(select_threshold({0.5, 0.6}, {0, 0}), DegenerateLabels);
}

TEST(SelectThreshold, InvariantUnderCellPreservingTransform) {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 40; ++i) {
            scores.push_back(rng.uniform(0.001, 0.999));
            labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
        }
        bool pos = false, neg = false;
        for (int l : labels) (l ? pos : neg) = true;
        if (!pos || !neg) continue;

        // strictly increasing within each 0.01 grid cell, cell preserved
        std::vector<double> warped;
        for (double s : scores) {
            const double cell = std::floor(s * 100.0) / 100.0;
            const double frac = s * 100.0 - std::floor(s * 100.0);
            warped.push_back(cell + 0.01 * frac * frac);
        }
        EXPECT_DOUBLE_EQ(select_threshold(scores, labels), select_threshold(warped, labels)) << "trial " << trial;
    }
}

TEST(Sweep, BatchSizeGridScalesEpochsForFixedSteps) {
    Dataset data = toy_dataset(16, 16);
    SplitAssignment split = stratified_split(data.labels, {}, 42);
    TrainConfig base;
    base.batch_size = 4;
    base.epochs = 4;
    base.learning_rate = 1e-3;
    auto rows = sweep(tiny_arch(), base, "batch_size", {2, 4, 8}, data, split);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].epochs, 2);
    EXPECT_EQ(rows[1].epochs, 4);
    EXPECT_EQ(rows[2].epochs, 8);
    for (const auto& r : rows) EXPECT_TRUE(r.error.empty()) << r.error;
    int best_count = 0;
    for (const auto& r : rows) best_count += r.best ? 1 : 0;
    EXPECT_EQ(best_count, 1);
}

TEST(Sweep, EmptyGridGivesEmptyTable) {
    Dataset data = toy_dataset(10, 10);
    SplitAssignment split = stratified_split(data.labels, {}, 42);
    auto rows = sweep(tiny_arch(), TrainConfig{}, "learning_rate", {}, data, split);
    EXPECT_TRUE(rows.empty());
}

TEST(Sweep, RowErrorIsCapturedAndSweepContinues) {
    Dataset data = toy_dataset(10, 10);
    SplitAssignment split = stratified_split(data.labels, {}, 42);
    TrainConfig base;
    base.batch_size = 4;
    base.epochs = 2;
    base.learning_rate = 1e-3;
    // depth 12 is invalid; the other row still trains
    auto rows = sweep(tiny_arch(), base, "depth", {12, 1}, data, split);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].error.empty());
    EXPECT_TRUE(rows[1].error.empty()) << rows[1].error;
    EXPECT_FALSE(rows[0].best);
}

TEST(Sweep, BestRowOrderingIsValF1ThenRecall) {
    std::vector<SweepRow> rows(3);
    rows[0].val_f1 = 0.7;
    rows[0].val_recall = 0.9;
    rows[1].val_f1 = 0.8;
    rows[1].val_recall = 0.5;
    rows[2].val_f1 = 0.8;
    rows[2].val_recall = 0.6;
    mark_best_row(rows);
    EXPECT_FALSE(rows[0].best);
    EXPECT_FALSE(rows[1].best);
    EXPECT_TRUE(rows[2].best);  // F1 tie broken by recall
}

TEST(Sweep, CsvHasTableLayout) {
    std::vector<SweepRow> rows(1);
    rows[0].param = "learning_rate";
    rows[0].value = 1e-4;
    rows[0].best = true;
    std::ostringstream os;
    write_sweep_csv(os, rows);
    const std::string s = os.str();
    EXPECT_NE(s.find("f1_val,f1_test,precision_val,precision_test,recall_val,recall_test"), std::string::npos);
    EXPECT_NE(s.find("learning_rate,0.0001"), std::string::npos);
}

TEST(TrainConfig, BatchSizeOneRejected) {
    TrainConfig cfg;
    cfg.batch_size = 1;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}
