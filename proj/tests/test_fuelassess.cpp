#include <gtest/gtest.h>

#include "setdetect/fuelassess.hpp"
#include "setdetect/synthgen.hpp"

using namespace setdetect;

TEST(IntegrateFuel, UnitCases) {
    EXPECT_NEAR(integrate_fuel(std::vector<double>(600, 600.0)), 100.0, 1e-9);
    EXPECT_DOUBLE_EQ(integrate_fuel({}), 0.0);
    EXPECT_DOUBLE_EQ(integrate_fuel({3600.0}), 1.0);
    EXPECT_THROW(integrate_fuel({100.0, -1.0}), NegativeFlow);
}

TEST(ApplySetCorrection, HalvesTailFromStart) {
    std::vector<double> flow(600, 600.0);
    auto corrected = apply_set_correction(flow, true, 300);
    EXPECT_NEAR(integrate_fuel(corrected), 75.0, 1e-9);  // 50 + 25
    EXPECT_DOUBLE_EQ(corrected[299], 600.0);
    EXPECT_DOUBLE_EQ(corrected[300], 300.0);
}

TEST(ApplySetCorrection, NotPredictedIsIdentity) {
    std::vector<double> flow = {10, 20, 30};
    EXPECT_EQ(apply_set_correction(flow, false, 1), flow);
}

TEST(ApplySetCorrection, StartZeroHalvesWholeTaxi) {
    std::vector<double> flow(100, 400.0);
    EXPECT_DOUBLE_EQ(integrate_fuel(apply_set_correction(flow, true, 0)),
                     integrate_fuel(flow) / 2.0);
}

TEST(ApplySetCorrection, StartOutOfRangeThrows) {
    std::vector<double> flow(10, 100.0);
    EXPECT_THROW(apply_set_correction(flow, true, 10), StartOutOfRange);
    EXPECT_THROW(apply_set_correction(flow, true, -1), StartOutOfRange);
}

TEST(ApplySetCorrection, NeverIncreasesAnySample) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> flow;
        for (int i = 0; i < 120; ++i) flow.push_back(rng.uniform(0.0, 900.0));
        const int start = static_cast<int>(rng.uniform_int(120));
        auto corrected = apply_set_correction(flow, true, start);
        for (std::size_t i = 0; i < flow.size(); ++i) EXPECT_LE(corrected[i], flow[i]);
        EXPECT_LE(integrate_fuel(corrected), integrate_fuel(flow));
    }
}

TEST(Mape, UnitCases) {
    EXPECT_DOUBLE_EQ(mape({100.0}, {100.0}), 0.0);
    EXPECT_DOUBLE_EQ(mape({110.0}, {100.0}), 10.0);
    EXPECT_THROW(mape({1.0}, {0.0}), ZeroTruth);
}

namespace {

GenConfig exactness_config(int n) {
    GenConfig cfg;
    cfg.n_flights = n;
    cfg.set_rate = 0.5;
    cfg.symmetric_engines = true;
    cfg.flow_noise_sd_kgph = 0.0;
    cfg.shutdown_flow_min_kgph = 0.0;
    cfg.shutdown_flow_max_kgph = 0.0;
    cfg.duration_max_s = 700;
    cfg.seed = 11;
    return cfg;
}

std::vector<AssessmentInput> inputs_for(const std::vector<SynthFlight>& flights,
                                        const std::vector<FeatureMatrix>& features,
                                        const std::vector<double>& scores) {
    std::vector<AssessmentInput> in;
    for (std::size_t i = 0; i < flights.size(); ++i)
        in.push_back({&flights[i].track, &features[i], scores[i]});
    return in;
}

}  // namespace

TEST(Assess, OracleClassifierWithTrueStartsMatchesTruthExactly) {
    auto flights = generate(exactness_config(30));
    FuelFlowEstimator model = oracle_flow_model(flights);

    // perfect classification + exact starts, applied with the correction
    // primitive directly
    for (const auto& fl : flights) {
        std::vector<double> recorded;
        for (const auto& p : fl.track.points) recorded.push_back(*p.ff_eng1_kgph + *p.ff_eng2_kgph);
        const double truth = integrate_fuel(recorded);
        const double uncorrected = integrate_fuel(model(fl.track));
        const double corrected =
            integrate_fuel(apply_set_correction(model(fl.track), fl.is_set, fl.is_set ? fl.start_index : 0));
        EXPECT_NEAR(corrected, truth, 1e-6) << fl.track.flight_id;
        if (fl.is_set) EXPECT_GT(uncorrected, truth) << fl.track.flight_id;
        else EXPECT_NEAR(uncorrected, truth, 1e-9);
    }
}

TEST(Assess, ReportRowsAndDegenerateThreshold) {
    auto flights = generate(exactness_config(20));
    std::vector<FeatureMatrix> features;
    std::vector<double> scores;
    for (const auto& f : flights) {
        features.push_back(build_features(f.track));
        scores.push_back(f.is_set ? 0.95 : 0.05);
    }
    StartEstimatorConfig nominal;
    nominal.method = StartMethod::nominal;

    AssessmentReport report = assess(inputs_for(flights, features, scores), oracle_flow_model(flights),
                                     {0.5, 1.01}, {{"nominal", nominal}});
    ASSERT_EQ(report.rows.size(), 3u);  // baseline + one per threshold
    EXPECT_EQ(report.rows[0].model, "no_set");

    // with a perfect classifier the corrected estimate cannot be worse
    EXPECT_LE(report.rows[1].mae_kg, report.rows[0].mae_kg + 1e-12);

    // threshold above any score: identical to the baseline
    const auto& degenerate = report.rows[2];
    for (std::size_t i = 0; i < degenerate.flights.size(); ++i) {
        EXPECT_FALSE(degenerate.flights[i].set_predicted);
        EXPECT_DOUBLE_EQ(degenerate.flights[i].corrected_kg, report.rows[0].flights[i].corrected_kg);
    }
}

TEST(Assess, FalsePositiveUnderestimatesThatFlight) {
    auto flights = generate(exactness_config(10));
    std::vector<FeatureMatrix> features;
    std::vector<double> scores;
    int fp_index = -1;
    for (std::size_t i = 0; i < flights.size(); ++i) {
        features.push_back(build_features(flights[i].track));
        if (!flights[i].is_set && fp_index < 0) {
            fp_index = static_cast<int>(i);
            scores.push_back(0.95);  // classifier wrongly fires
        } else {
            scores.push_back(flights[i].is_set ? 0.95 : 0.05);
        }
    }
    ASSERT_GE(fp_index, 0);
    StartEstimatorConfig nominal;
    nominal.method = StartMethod::nominal;
    AssessmentReport report =
        assess(inputs_for(flights, features, scores), oracle_flow_model(flights), {0.5}, {{"nominal", nominal}});
    const auto& fa = report.rows[1].flights[fp_index];
    EXPECT_TRUE(fa.set_predicted);
    EXPECT_LT(fa.corrected_kg, fa.uncorrected_kg);
    EXPECT_LT(fa.corrected_kg, fa.truth_kg);  // the underestimation bias mechanism
}

TEST(Assess, RaisingThresholdNeverCorrectsMoreFlights) {
    auto flights = generate(exactness_config(40));
    std::vector<FeatureMatrix> features;
    std::vector<double> scores;
    Rng rng(9);
    for (const auto& f : flights) {
        features.push_back(build_features(f.track));
        scores.push_back(f.is_set ? rng.uniform(0.3, 1.0) : rng.uniform(0.0, 0.7));
    }
    StartEstimatorConfig nominal;
    nominal.method = StartMethod::nominal;
    AssessmentReport report = assess(inputs_for(flights, features, scores), oracle_flow_model(flights),
                                     {0.42, 0.6, 0.9}, {{"nominal", nominal}});
    auto corrected_count = [](const AssessmentRow& row) {
        std::size_t n = 0;
        for (const auto& f : row.flights) n += f.set_predicted ? 1 : 0;
        return n;
    };
    EXPECT_GE(corrected_count(report.rows[1]), corrected_count(report.rows[2]));
    EXPECT_GE(corrected_count(report.rows[2]), corrected_count(report.rows[3]));
}

TEST(Assess, MissingFuelDataThrows) {
    auto flights = generate(exactness_config(5));
    flights[0].track.has_qar = false;
    std::vector<FeatureMatrix> features;
    std::vector<double> scores(flights.size(), 0.0);
    for (const auto& f : flights) features.push_back(build_features(f.track));
    StartEstimatorConfig nominal;
    EXPECT_THROW(assess(inputs_for(flights, features, scores), constant_flow_model(), {0.5},
                        {{"nominal", nominal}}),
                 NoFuelData);
}

TEST(Assess, CsvLayouts) {
    auto flights = generate(exactness_config(6));
    std::vector<FeatureMatrix> features;
    std::vector<double> scores;
    for (const auto& f : flights) {
        features.push_back(build_features(f.track));
        scores.push_back(f.is_set ? 1.0 : 0.0);
    }
    StartEstimatorConfig nominal;
    nominal.method = StartMethod::nominal;
    AssessmentReport report =
        assess(inputs_for(flights, features, scores), constant_flow_model(), {0.5}, {{"nominal", nominal}});

    std::ostringstream table, detail;
    write_assessment_csv(table, report);
    write_assessment_detail_csv(detail, report);
    EXPECT_NE(table.str().find("model,mape_pct,mape_sd,mae_kg,mae_sd,me_kg,me_sd"), std::string::npos);
    EXPECT_NE(table.str().find("no_set,"), std::string::npos);
    EXPECT_NE(table.str().find("set(0.5,nominal)"), std::string::npos);
    EXPECT_NE(detail.str().find("truth_kg,uncorrected_kg,corrected_kg"), std::string::npos);
}
