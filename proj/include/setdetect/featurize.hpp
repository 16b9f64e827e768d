#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "setdetect/errors.hpp"
#include "setdetect/trackdata.hpp"

namespace setdetect {

inline constexpr std::size_t kTimeSteps = 2048;
inline constexpr std::size_t kNumChannels = 7;

/// Frozen channel ordering; written into every model artifact so a permuted
/// feature table cannot be scored silently.
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "altitude_ft", "groundspeed_kt", "track_deg",
    "d5_groundspeed_ktps", "d10_groundspeed_ktps",
    "d5_track_degps", "d10_track_degps"};

inline std::string channel_order_string() {
    std::string s;
    for (std::size_t i = 0; i < kNumChannels; ++i) {
        if (i) s += ';';
        s += kChannelNames[i];
    }
    return s;
}

/// Fixed-shape 2048 x 7 input block. Rows past valid_len are all zero.
/// Stored row-major (time major), matching the debug CSV layout.
struct FeatureMatrix {
    std::vector<float> values;  ///< kTimeSteps * kNumChannels, [t * 7 + c]
    std::size_t valid_len = 0;

    FeatureMatrix() : values(kTimeSteps * kNumChannels, 0.0f) {}

    float at(std::size_t t, std::size_t c) const { return values[t * kNumChannels + c]; }
    float& at(std::size_t t, std::size_t c) { return values[t * kNumChannels + c]; }
};

/// Backward k-second difference with zero-filled warm-up:
/// out[t] = (x[t] - x[t-k]) / k for t >= k, else 0. In angular mode the
/// numerator is wrapped to (-180, 180] first, so a 359->1 degree step reads
/// as +2 degrees, not -358.
inline std::vector<double> diff_k(const std::vector<double>& series, int k, bool angular) {
    if (series.size() <= static_cast<std::size_t>(k))
        throw SeriesTooShort("diff_k: series length " + std::to_string(series.size()) +
                             " <= window " + std::to_string(k));
    std::vector<double> out(series.size(), 0.0);
    for (std::size_t t = static_cast<std::size_t>(k); t < series.size(); ++t) {
        double num = angular ? detail::wrap_angle_diff(series[t], series[t - k])
                             : series[t] - series[t - k];
        out[t] = num / static_cast<double>(k);
    }
    return out;
}

/// Assembles the seven-channel padded matrix for one track. Tracks longer
/// than kTimeSteps keep their first kTimeSteps samples; shutdown decisions
/// concentrate early in the taxi, so the head carries the signal.
inline FeatureMatrix build_features(const GroundTrack& track) {
    if (track.points.size() < kMinTrackLen)
        throw SeriesTooShort("build_features: track " + track.flight_id + " has " +
                             std::to_string(track.points.size()) + " samples");

    const std::size_t n = std::min(track.points.size(), kTimeSteps);
    std::vector<double> alt(n), gs(n), trk(n);
    for (std::size_t t = 0; t < n; ++t) {
        alt[t] = track.points[t].altitude_ft;
        gs[t] = track.points[t].groundspeed_kt;
        trk[t] = track.points[t].track_deg;
    }
    const auto d5gs = diff_k(gs, 5, false);
    const auto d10gs = diff_k(gs, 10, false);
    const auto d5trk = diff_k(trk, 5, true);
    const auto d10trk = diff_k(trk, 10, true);

    FeatureMatrix fm;
    fm.valid_len = n;
    for (std::size_t t = 0; t < n; ++t) {
        fm.at(t, 0) = static_cast<float>(alt[t]);
        fm.at(t, 1) = static_cast<float>(gs[t]);
        fm.at(t, 2) = static_cast<float>(trk[t]);
        fm.at(t, 3) = static_cast<float>(d5gs[t]);
        fm.at(t, 4) = static_cast<float>(d10gs[t]);
        fm.at(t, 5) = static_cast<float>(d5trk[t]);
        fm.at(t, 6) = static_cast<float>(d10trk[t]);
    }
    return fm;
}

/// Debug export: 2048 rows x 7 columns, header = channel names.
inline void write_features_csv(std::ostream& out, const FeatureMatrix& fm) {
    for (std::size_t c = 0; c < kNumChannels; ++c) out << (c ? "," : "") << kChannelNames[c];
    out << "\n";
    for (std::size_t t = 0; t < kTimeSteps; ++t) {
        for (std::size_t c = 0; c < kNumChannels; ++c)
            out << (c ? "," : "") << csv::fmt(fm.at(t, c));
        out << "\n";
    }
}

}  // namespace setdetect
