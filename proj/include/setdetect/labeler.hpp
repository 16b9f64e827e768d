#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "setdetect/errors.hpp"
#include "setdetect/trackdata.hpp"

namespace setdetect {

/// Thresholds of the fuel-flow labeling oracle.
struct LabelConfig {
    double low_ff_threshold_kgph = 5.0;
    int min_duration_s = 60;
};

/// Ground truth for one flight. start_index and segment_len are meaningful
/// only when label == 1.
struct SetAnnotation {
    int label = 0;          ///< 1 = single-engine taxi observed, 0 = not
    int start_index = -1;   ///< seconds from taxi-in start
    int segment_len = 0;    ///< length of the qualifying run
};

/// One engine strictly below the threshold while the other is strictly above.
/// A flow exactly at the threshold matches neither side.
inline bool is_set_point(double ff1_kgph, double ff2_kgph, const LabelConfig& cfg = {}) {
    const double th = cfg.low_ff_threshold_kgph;
    return (ff1_kgph < th && ff2_kgph > th) || (ff2_kgph < th && ff1_kgph > th);
}

/// Scans the taxi-in series for the earliest run of consecutive single-engine
/// samples lasting at least min_duration_s. Runs are broken by any single
/// non-qualifying second.
inline SetAnnotation annotate(const GroundTrack& track, const LabelConfig& cfg = {}) {
    if (!track.has_qar)
        throw NoFuelData("annotate: flight " + track.flight_id + " has no fuel flow channels");

    SetAnnotation ann;
    const std::size_t n = track.points.size();
    std::size_t i = 0;
    while (i < n) {
        const auto& p = track.points[i];
        if (!is_set_point(*p.ff_eng1_kgph, *p.ff_eng2_kgph, cfg)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_set_point(*track.points[j].ff_eng1_kgph, *track.points[j].ff_eng2_kgph, cfg)) ++j;
        if (j - i >= static_cast<std::size_t>(cfg.min_duration_s)) {
            ann.label = 1;
            ann.start_index = static_cast<int>(i);
            ann.segment_len = static_cast<int>(j - i);
            return ann;
        }
        i = j;
    }
    return ann;
}

/// Label table export: flight_id,label,start_index,segment_len with empty
/// cells for negative flights.
inline void write_labels_csv(std::ostream& out, const std::vector<std::string>& flight_ids,
                             const std::vector<SetAnnotation>& annotations) {
    out << "flight_id,label,start_index,segment_len\n";
    for (std::size_t i = 0; i < flight_ids.size(); ++i) {
        const auto& a = annotations[i];
        out << flight_ids[i] << ',' << a.label << ',';
        if (a.label == 1) out << a.start_index << ',' << a.segment_len;
        else out << ',';
        out << "\n";
    }
}

struct LabeledFlight {
    std::string flight_id;
    SetAnnotation annotation;
};

inline std::vector<LabeledFlight> read_labels_csv(std::istream& in) {
    csv::Reader reader(in);
    const std::size_t c_id = reader.column("flight_id");
    const std::size_t c_label = reader.column("label");
    const std::size_t c_start = reader.column("start_index");
    const std::size_t c_len = reader.column("segment_len");
    std::vector<LabeledFlight> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        LabeledFlight f;
        f.flight_id = row.at(c_id);
        f.annotation.label = static_cast<int>(csv::parse_long(row.at(c_label), "label"));
        if (f.annotation.label == 1) {
            f.annotation.start_index = static_cast<int>(csv::parse_long(row.at(c_start), "start_index"));
            f.annotation.segment_len = static_cast<int>(csv::parse_long(row.at(c_len), "segment_len"));
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace setdetect
