#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "setdetect/labeler.hpp"
#include "setdetect/locnet.hpp"
#include "setdetect/metrics.hpp"
#include "setdetect/trackdata.hpp"

namespace setdetect {

/// Pluggable taxi fuel-flow estimator: per-second total flow in kg/h for the
/// whole track, both engines assumed running. External models plug in behind
/// this contract.
using FuelFlowEstimator = std::function<std::vector<double>(const GroundTrack&)>;

/// Reference stub: constant total flow.
inline FuelFlowEstimator constant_flow_model(double total_kgph = 600.0) {
    return [total_kgph](const GroundTrack& track) {
        return std::vector<double>(track.points.size(), total_kgph);
    };
}

/// Speed-affine stub for tests: idle + gain * groundspeed, per engine, twice.
inline FuelFlowEstimator affine_flow_model(double idle_per_engine_kgph, double gain_kgph_per_kt) {
    return [idle_per_engine_kgph, gain_kgph_per_kt](const GroundTrack& track) {
        std::vector<double> flow;
        flow.reserve(track.points.size());
        for (const auto& p : track.points)
            flow.push_back(2.0 * (idle_per_engine_kgph + gain_kgph_per_kt * p.groundspeed_kt));
        return flow;
    };
}

/// Integrates a 1 Hz kg/h series into kilograms.
inline double integrate_fuel(const std::vector<double>& flow_kgph) {
    double acc = 0.0;
    for (double f : flow_kgph) {
        if (f < 0) throw NegativeFlow("integrate_fuel: negative flow sample");
        acc += f / 3600.0;
    }
    return acc;
}

/// Halves the two-engine estimate from the shutdown second onward; identity
/// when the flight is not flagged.
inline std::vector<double> apply_set_correction(const std::vector<double>& flow_kgph, bool set_predicted,
                                                int start_s) {
    if (!set_predicted) return flow_kgph;
    if (start_s < 0 || static_cast<std::size_t>(start_s) >= flow_kgph.size())
        throw StartOutOfRange("apply_set_correction: start " + std::to_string(start_s) +
                              " outside series of length " + std::to_string(flow_kgph.size()));
    std::vector<double> out = flow_kgph;
    for (std::size_t t = static_cast<std::size_t>(start_s); t < out.size(); ++t) out[t] *= 0.5;
    return out;
}

/// Mean absolute percentage error; every truth must be positive.
inline double mape(const std::vector<double>& estimates, const std::vector<double>& truths) {
    if (estimates.size() != truths.size()) throw LengthMismatch("mape: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (truths[i] <= 0.0) throw ZeroTruth("mape: non-positive truth at index " + std::to_string(i));
        acc += 100.0 * std::abs(estimates[i] - truths[i]) / truths[i];
    }
    return estimates.empty() ? 0.0 : acc / static_cast<double>(estimates.size());
}

struct FlightAssessment {
    std::string flight_id;
    double truth_kg = 0.0;
    double uncorrected_kg = 0.0;
    double corrected_kg = 0.0;
    bool set_predicted = false;
    int start_used = -1;
};

/// One report row: a correction configuration and its aggregate errors
/// (dispersion = population standard deviation, shown in parentheses in the
/// rendered table).
struct AssessmentRow {
    std::string model;  ///< "no_set" or "set(<threshold>,<estimator>)"
    double mape_pct = 0.0, mape_sd = 0.0;
    double mae_kg = 0.0, mae_sd = 0.0;
    double me_kg = 0.0, me_sd = 0.0;
    std::vector<FlightAssessment> flights;
};

struct AssessmentReport {
    std::vector<AssessmentRow> rows;
};

namespace detail {

inline void finalize_row(AssessmentRow& row) {
    std::vector<double> est, truth, abs_err, err, pct_err;
    for (const auto& f : row.flights) {
        est.push_back(f.corrected_kg);
        truth.push_back(f.truth_kg);
        err.push_back(f.corrected_kg - f.truth_kg);
        abs_err.push_back(std::abs(f.corrected_kg - f.truth_kg));
        pct_err.push_back(100.0 * std::abs(f.corrected_kg - f.truth_kg) / f.truth_kg);
    }
    row.mape_pct = mape(est, truth);
    row.mape_sd = population_sd(pct_err);
    row.mae_kg = mae(est, truth);
    row.mae_sd = population_sd(abs_err);
    row.me_kg = mean_error(est, truth);
    row.me_sd = population_sd(err);
}

}  // namespace detail

/// Per-flight inputs of the assessment: the QAR track (truth), its features,
/// and the classifier score already computed for it.
struct AssessmentInput {
    const GroundTrack* track;
    const FeatureMatrix* features;
    double score;
};

/// Builds the Table X-style report: a no-correction baseline plus one row per
/// (threshold, estimator) pair. Truth comes from the recorded per-engine
/// flows; estimates come from the pluggable flow model, halved after the
/// estimated start on flights the classifier flags at the row's threshold.
inline AssessmentReport assess(const std::vector<AssessmentInput>& flights, const FuelFlowEstimator& ff_model,
                               const std::vector<double>& thresholds,
                               const std::vector<std::pair<std::string, StartEstimatorConfig>>& estimators,
                               Network<float>* regressor = nullptr) {
    AssessmentReport report;

    std::vector<double> truth_total(flights.size());
    std::vector<std::vector<double>> est_flow(flights.size());
    for (std::size_t i = 0; i < flights.size(); ++i) {
        const GroundTrack& tr = *flights[i].track;
        if (!tr.has_qar) throw NoFuelData("assess: flight " + tr.flight_id + " has no recorded fuel flow");
        std::vector<double> recorded;
        recorded.reserve(tr.points.size());
        for (const auto& p : tr.points) recorded.push_back(*p.ff_eng1_kgph + *p.ff_eng2_kgph);
        truth_total[i] = integrate_fuel(recorded);
        est_flow[i] = ff_model(tr);
        if (est_flow[i].size() != tr.points.size())
            throw LengthMismatch("assess: flow model returned wrong length for " + tr.flight_id);
    }

    AssessmentRow baseline;
    baseline.model = "no_set";
    for (std::size_t i = 0; i < flights.size(); ++i) {
        FlightAssessment fa;
        fa.flight_id = flights[i].track->flight_id;
        fa.truth_kg = truth_total[i];
        fa.uncorrected_kg = integrate_fuel(est_flow[i]);
        fa.corrected_kg = fa.uncorrected_kg;
        baseline.flights.push_back(fa);
    }
    detail::finalize_row(baseline);
    report.rows.push_back(std::move(baseline));

    for (double th : thresholds)
        for (const auto& [name, est_cfg] : estimators) {
            AssessmentRow row;
            row.model = "set(" + csv::fmt(th) + "," + name + ")";
            for (std::size_t i = 0; i < flights.size(); ++i) {
                FlightAssessment fa;
                fa.flight_id = flights[i].track->flight_id;
                fa.truth_kg = truth_total[i];
                fa.uncorrected_kg = integrate_fuel(est_flow[i]);
                fa.set_predicted = flights[i].score >= th;
                if (fa.set_predicted) {
                    fa.start_used = estimate_start(*flights[i].features, est_cfg, regressor);
                    fa.corrected_kg = integrate_fuel(apply_set_correction(est_flow[i], true, fa.start_used));
                } else {
                    fa.corrected_kg = fa.uncorrected_kg;
                }
                row.flights.push_back(fa);
            }
            detail::finalize_row(row);
            report.rows.push_back(std::move(row));
        }
    return report;
}

inline void write_assessment_csv(std::ostream& out, const AssessmentReport& report) {
    out << "model,mape_pct,mape_sd,mae_kg,mae_sd,me_kg,me_sd\n";
    for (const auto& r : report.rows)
        out << r.model << ',' << csv::fmt(r.mape_pct) << ',' << csv::fmt(r.mape_sd) << ',' << csv::fmt(r.mae_kg)
            << ',' << csv::fmt(r.mae_sd) << ',' << csv::fmt(r.me_kg) << ',' << csv::fmt(r.me_sd) << "\n";
}

inline void write_assessment_detail_csv(std::ostream& out, const AssessmentReport& report) {
    out << "model,flight_id,truth_kg,uncorrected_kg,corrected_kg,set_predicted,start_used\n";
    for (const auto& r : report.rows)
        for (const auto& f : r.flights)
            out << r.model << ',' << f.flight_id << ',' << csv::fmt(f.truth_kg) << ','
                << csv::fmt(f.uncorrected_kg) << ',' << csv::fmt(f.corrected_kg) << ',' << (f.set_predicted ? 1 : 0)
                << ',' << f.start_used << "\n";
}

/// Per-second flow traces (truth, raw estimate, corrected) for one flight.
inline void write_flow_trace_csv(std::ostream& out, const GroundTrack& track,
                                 const std::vector<double>& est_flow, const std::vector<double>& corrected) {
    out << "t,true_flow_kgph,estimated_flow_kgph,corrected_flow_kgph\n";
    for (std::size_t t = 0; t < track.points.size(); ++t)
        out << track.points[t].t << ',' << csv::fmt(*track.points[t].ff_eng1_kgph + *track.points[t].ff_eng2_kgph)
            << ',' << csv::fmt(est_flow[t]) << ',' << csv::fmt(corrected[t]) << "\n";
}

}  // namespace setdetect
