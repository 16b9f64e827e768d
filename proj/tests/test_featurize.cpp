#include <gtest/gtest.h>

#include "setdetect/featurize.hpp"
#include "setdetect/rng.hpp"

using namespace setdetect;

TEST(DiffK, ConstantSeriesGivesZeros) {
    std::vector<double> x(20, 10.0);
    auto d = diff_k(x, 5, false);
    for (double v : d) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(DiffK, LinearRampGivesUnitSlopeAfterWarmup) {
    std::vector<double> x(30);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = static_cast<double>(t);
    auto d = diff_k(x, 5, false);
    for (std::size_t t = 0; t < 5; ++t) EXPECT_DOUBLE_EQ(d[t], 0.0);
    for (std::size_t t = 5; t < x.size(); ++t) EXPECT_DOUBLE_EQ(d[t], 1.0);
}

TEST(DiffK, AngularWrapsThroughNorth) {
    // +2 deg/s through 360: 350,352,...,358,0,2
    std::vector<double> x = {350, 352, 354, 356, 358, 0, 2};
    auto d = diff_k(x, 5, true);
    EXPECT_DOUBLE_EQ(d.back(), 2.0);  // (2 - 352) wraps to +10, /5
    EXPECT_DOUBLE_EQ(d[5], 2.0);
}

TEST(DiffK, SeriesTooShort) {
    std::vector<double> x(5, 1.0);
    EXPECT_THROW(diff_k(x, 5, false), SeriesTooShort);
    EXPECT_THROW(diff_k(x, 10, false), SeriesTooShort);
}

TEST(DiffK, AngularMagnitudeBounded) {
    Rng rng(7);
    for (int k : {5, 10}) {
        std::vector<double> x(200);
        for (auto& v : x) v = rng.uniform(0.0, 360.0);
        auto d = diff_k(x, k, true);
        for (double v : d) EXPECT_LE(std::abs(v), 180.0 / k + 1e-12);
    }
}

namespace {

GroundTrack make_track(std::size_t n, double speed = 15.0, double heading = 90.0) {
    GroundTrack tr;
    tr.flight_id = "f";
    for (std::size_t i = 0; i < n; ++i) {
        TrackPoint p;
        p.t = static_cast<int>(i);
        p.altitude_ft = 250.0;
        p.groundspeed_kt = speed;
        p.track_deg = heading;
        tr.points.push_back(p);
    }
    return tr;
}

}  // namespace

TEST(BuildFeatures, PadsShortTrackWithZeros) {
    GroundTrack tr = make_track(100);
    FeatureMatrix fm = build_features(tr);
    EXPECT_EQ(fm.valid_len, 100u);
    double tail = 0.0;
    for (std::size_t t = fm.valid_len; t < kTimeSteps; ++t)
        for (std::size_t c = 0; c < kNumChannels; ++c) tail += std::abs(fm.at(t, c));
    EXPECT_EQ(tail, 0.0);
    EXPECT_FLOAT_EQ(fm.at(0, 0), 250.0f);
    EXPECT_FLOAT_EQ(fm.at(99, 1), 15.0f);
}

TEST(BuildFeatures, TruncatesLongTrackToHead) {
    GroundTrack tr = make_track(3000);
    for (std::size_t i = 0; i < tr.points.size(); ++i) tr.points[i].groundspeed_kt = static_cast<double>(i % 30);
    FeatureMatrix fm = build_features(tr);
    EXPECT_EQ(fm.valid_len, kTimeSteps);
    // the kept samples are the first 2048
    EXPECT_FLOAT_EQ(fm.at(2047, 1), static_cast<float>(2047 % 30));
}

TEST(BuildFeatures, StationaryTrackHasZeroDerivativeChannels) {
    GroundTrack tr = make_track(64, 0.0, 180.0);
    FeatureMatrix fm = build_features(tr);
    for (std::size_t t = 0; t < fm.valid_len; ++t)
        for (std::size_t c = 3; c < kNumChannels; ++c) EXPECT_EQ(fm.at(t, c), 0.0f);
}

TEST(BuildFeatures, RejectsTooShortTrack) {
    GroundTrack tr = make_track(10);
    EXPECT_THROW(build_features(tr), SeriesTooShort);
}

TEST(BuildFeatures, ChannelOrderIsFrozen) {
    GroundTrack tr = make_track(30);
    tr.points[20].groundspeed_kt = 25.0;
    FeatureMatrix fm = build_features(tr);
    EXPECT_FLOAT_EQ(fm.at(20, 0), 250.0f);                 // altitude
    EXPECT_FLOAT_EQ(fm.at(20, 1), 25.0f);                  // groundspeed
    EXPECT_FLOAT_EQ(fm.at(20, 2), 90.0f);                  // track
    EXPECT_FLOAT_EQ(fm.at(20, 3), (25.0f - 15.0f) / 5.0f); // d5 speed
    EXPECT_FLOAT_EQ(fm.at(20, 4), (25.0f - 15.0f) / 10.0f);// d10 speed
    EXPECT_EQ(fm.at(20, 5), 0.0f);
    EXPECT_EQ(fm.at(20, 6), 0.0f);
}

TEST(BuildFeatures, Deterministic) {
    GroundTrack tr = make_track(500);
    Rng rng(3);
    for (auto& p : tr.points) {
        p.groundspeed_kt = rng.uniform(0.0, 25.0);
        p.track_deg = rng.uniform(0.0, 360.0);
    }
    FeatureMatrix a = build_features(tr);
    FeatureMatrix b = build_features(tr);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.valid_len, b.valid_len);
}

TEST(BuildFeatures, DebugCsvHasExpectedShape) {
    GroundTrack tr = make_track(20);
    FeatureMatrix fm = build_features(tr);
    std::ostringstream os;
    write_features_csv(os, fm);
    std::size_t lines = 0;
    for (char ch : os.str())
        if (ch == '\n') ++lines;
    EXPECT_EQ(lines, kTimeSteps + 1);  // header + 2048 rows
}
