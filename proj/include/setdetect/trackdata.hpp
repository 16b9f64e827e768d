#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "setdetect/csv.hpp"
#include "setdetect/errors.hpp"

namespace setdetect {

/// One 1 Hz sample of a ground trajectory. Fuel flows are present only for
/// QAR-derived data; surveillance-like data carries kinematics only.
struct TrackPoint {
    int t = 0;                  ///< seconds since the flight's first sample
    double altitude_ft = 0.0;
    double groundspeed_kt = 0.0;
    double track_deg = 0.0;     ///< [0, 360)
    std::optional<double> ff_eng1_kgph;
    std::optional<double> ff_eng2_kgph;
};

/// A single flight's taxi-in series. Invariants: non-empty, length >= 11,
/// consecutive t differ by exactly 1, fuel flows all-or-nothing.
struct GroundTrack {
    std::string flight_id;
    std::vector<TrackPoint> points;
    bool has_qar = false;

    std::size_t size() const { return points.size(); }
};

enum class ParseMode { qar, surveillance };

/// Why a flight was dropped during parsing. Parsing continues with the
/// remaining flights; diagnostics are reported alongside the good tracks.
struct ParseDiagnostic {
    enum class Kind { gap_too_large, non_monotonic_time, too_short, mixed_fuel_data, invalid_value };
    Kind kind;
    std::string flight_id;
    std::string detail;
};

struct ParseResult {
    std::vector<GroundTrack> tracks;
    std::vector<ParseDiagnostic> diagnostics;
};

namespace detail {

/// Shortest-arc difference a-b wrapped to (-180, 180].
inline double wrap_angle_diff(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

inline double normalize_track(double deg) {
    double d = std::fmod(deg, 360.0);
    if (d < 0) d += 360.0;
    if (d >= 360.0) d = 0.0;
    return d;
}

}  // namespace detail

inline constexpr int kMaxGapSeconds = 5;   ///< missing seconds repairable by interpolation
inline constexpr std::size_t kMinTrackLen = 11;  ///< longest derivative window + 1

/// Parses a line-oriented CSV stream into per-flight tracks.
///
/// Required columns: flight_id, t_s, altitude_ft, groundspeed_kt, track_deg;
/// qar mode additionally requires ff_eng1_kgph and ff_eng2_kgph. Rows are
/// grouped by flight_id (first-appearance order) and sorted by t. Gaps of at
/// most kMaxGapSeconds missing samples are filled by linear interpolation on
/// every channel, with shortest-arc interpolation for the track angle. Flights
/// violating any invariant are dropped with a diagnostic; a missing column
/// fails the whole stream.
inline ParseResult parse_tracks(std::istream& in, ParseMode mode) {
    csv::Reader reader(in);
    const std::size_t c_id = reader.column("flight_id");
    const std::size_t c_t = reader.column("t_s");
    const std::size_t c_alt = reader.column("altitude_ft");
    const std::size_t c_gs = reader.column("groundspeed_kt");
    const std::size_t c_trk = reader.column("track_deg");
    std::optional<std::size_t> c_ff1, c_ff2;
    if (mode == ParseMode::qar) {
        c_ff1 = reader.column("ff_eng1_kgph");
        c_ff2 = reader.column("ff_eng2_kgph");
    } else {
        if (reader.has_column("ff_eng1_kgph")) c_ff1 = reader.column("ff_eng1_kgph");
        if (reader.has_column("ff_eng2_kgph")) c_ff2 = reader.column("ff_eng2_kgph");
    }

    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<TrackPoint>> rows;

    std::vector<std::string> row;
    while (reader.next(row)) {
        const std::string& id = row.at(c_id);
        TrackPoint p;
        p.t = static_cast<int>(csv::parse_long(row.at(c_t), "t_s"));
        p.altitude_ft = csv::parse_double(row.at(c_alt), "altitude_ft");
        p.groundspeed_kt = csv::parse_double(row.at(c_gs), "groundspeed_kt");
        p.track_deg = detail::normalize_track(csv::parse_double(row.at(c_trk), "track_deg"));
        if (c_ff1 && !row.at(*c_ff1).empty()) p.ff_eng1_kgph = csv::parse_double(row.at(*c_ff1), "ff_eng1_kgph");
        if (c_ff2 && !row.at(*c_ff2).empty()) p.ff_eng2_kgph = csv::parse_double(row.at(*c_ff2), "ff_eng2_kgph");
        if (rows.find(id) == rows.end()) order.push_back(id);
        rows[id].push_back(p);
    }

    ParseResult result;
    for (const auto& id : order) {
        auto& pts = rows[id];
        std::stable_sort(pts.begin(), pts.end(), [](const TrackPoint& a, const TrackPoint& b) { return a.t < b.t; });

        GroundTrack track;
        track.flight_id = id;
        bool bad = false;

        // value sanity
        for (const auto& p : pts) {
            if (p.groundspeed_kt < 0 || (p.ff_eng1_kgph && *p.ff_eng1_kgph < 0) ||
                (p.ff_eng2_kgph && *p.ff_eng2_kgph < 0)) {
                result.diagnostics.push_back({ParseDiagnostic::Kind::invalid_value, id, "negative speed or fuel flow"});
                bad = true;
                break;
            }
        }
        if (bad) continue;

        // fuel flow all-or-nothing
        std::size_t n_ff = 0;
        for (const auto& p : pts)
            if (p.ff_eng1_kgph && p.ff_eng2_kgph) ++n_ff;
        if (n_ff != 0 && n_ff != pts.size()) {
            result.diagnostics.push_back({ParseDiagnostic::Kind::mixed_fuel_data, id, "fuel flow present on some rows only"});
            continue;
        }
        track.has_qar = (n_ff == pts.size()) && !pts.empty() && pts.front().ff_eng1_kgph.has_value();

        // monotonic time + gap repair
        for (std::size_t i = 0; i + 1 < pts.size() && !bad; ++i) {
            int dt = pts[i + 1].t - pts[i].t;
            if (dt <= 0) {
                result.diagnostics.push_back({ParseDiagnostic::Kind::non_monotonic_time, id,
                                              "duplicate timestamp t=" + std::to_string(pts[i].t)});
                bad = true;
            } else if (dt - 1 > kMaxGapSeconds) {
                result.diagnostics.push_back({ParseDiagnostic::Kind::gap_too_large, id,
                                              "gap of " + std::to_string(dt - 1) + " s"});
                bad = true;
            }
        }
        if (bad) continue;

        track.points.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            track.points.push_back(pts[i]);
            if (i + 1 == pts.size()) break;
            const TrackPoint& a = pts[i];
            const TrackPoint& b = pts[i + 1];
            for (int t = a.t + 1; t < b.t; ++t) {
                double w = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
                TrackPoint q;
                q.t = t;
                q.altitude_ft = a.altitude_ft + w * (b.altitude_ft - a.altitude_ft);
                q.groundspeed_kt = a.groundspeed_kt + w * (b.groundspeed_kt - a.groundspeed_kt);
                q.track_deg = detail::normalize_track(a.track_deg + w * detail::wrap_angle_diff(b.track_deg, a.track_deg));
                if (track.has_qar) {
                    q.ff_eng1_kgph = *a.ff_eng1_kgph + w * (*b.ff_eng1_kgph - *a.ff_eng1_kgph);
                    q.ff_eng2_kgph = *a.ff_eng2_kgph + w * (*b.ff_eng2_kgph - *a.ff_eng2_kgph);
                }
                track.points.push_back(q);
            }
        }

        if (track.points.size() < kMinTrackLen) {
            result.diagnostics.push_back({ParseDiagnostic::Kind::too_short, id,
                                          "only " + std::to_string(track.points.size()) + " samples"});
            continue;
        }
        result.tracks.push_back(std::move(track));
    }
    return result;
}

/// Rollout-exit heuristic thresholds. The paper's data carries a precomputed
/// taxi phase flag; these stand in for it and are exposed in the config file.
struct TaxiInConfig {
    double speed_threshold_kt = 40.0;
    int sustain_s = 5;
    double elevation_tolerance_ft = 50.0;
    int stop_extension_s = 10;
};

/// Extracts the taxi-in suffix of a landing track: starts at the first window
/// of sustain_s consecutive samples below speed_threshold_kt at field
/// elevation, ends stop_extension_s after the last moving sample.
inline GroundTrack truncate_taxi_in(const GroundTrack& track, double field_elevation_ft,
                                    const TaxiInConfig& cfg = {}) {
    const auto& pts = track.points;
    const std::size_t n = pts.size();
    const std::size_t window = static_cast<std::size_t>(cfg.sustain_s);

    std::size_t start = n;
    for (std::size_t i = 0; i + window <= n; ++i) {
        bool ok = true;
        for (std::size_t j = i; j < i + window; ++j) {
            if (pts[j].groundspeed_kt >= cfg.speed_threshold_kt ||
                std::abs(pts[j].altitude_ft - field_elevation_ft) > cfg.elevation_tolerance_ft) {
                ok = false;
                break;
            }
        }
        if (ok) {
            start = i;
            break;
        }
    }
    if (start == n) throw NoTaxiPhase("flight " + track.flight_id + ": no taxi-in start found");

    std::size_t last_moving = start;
    for (std::size_t i = start; i < n; ++i)
        if (pts[i].groundspeed_kt > 0) last_moving = i;
    std::size_t end = std::min(n - 1, last_moving + static_cast<std::size_t>(cfg.stop_extension_s));

    GroundTrack out;
    out.flight_id = track.flight_id;
    out.has_qar = track.has_qar;
    out.points.assign(pts.begin() + static_cast<std::ptrdiff_t>(start),
                      pts.begin() + static_cast<std::ptrdiff_t>(end) + 1);
    return out;
}

/// Writes tracks in the same CSV schema parse_tracks reads.
inline void write_tracks_csv(std::ostream& out, const std::vector<GroundTrack>& tracks) {
    bool qar = !tracks.empty() && tracks.front().has_qar;
    out << "flight_id,t_s,altitude_ft,groundspeed_kt,track_deg";
    if (qar) out << ",ff_eng1_kgph,ff_eng2_kgph";
    out << "\n";
    for (const auto& tr : tracks) {
        for (const auto& p : tr.points) {
            out << tr.flight_id << ',' << p.t << ',' << csv::fmt(p.altitude_ft) << ','
                << csv::fmt(p.groundspeed_kt) << ',' << csv::fmt(p.track_deg);
            if (qar) out << ',' << csv::fmt(p.ff_eng1_kgph.value_or(0.0)) << ',' << csv::fmt(p.ff_eng2_kgph.value_or(0.0));
            out << "\n";
        }
    }
}

}  // namespace setdetect
