#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "setdetect/fuelassess.hpp"
#include "setdetect/rng.hpp"
#include "setdetect/trackdata.hpp"

namespace setdetect {

/// Synthetic taxi-in corpus knobs. Class balance and the shutdown-time
/// distribution default to the real-world working points; the kinematic
/// signature strength (accel/speed factors) controls how visible a shutdown
/// is in the trajectory alone.
struct GenConfig {
    int n_flights = 1000;
    double set_rate = 0.054;  ///< ~714 / 13159
    int duration_min_s = 240;
    int duration_max_s = 1500;

    double cooldown_mean_s = 255.0;
    double cooldown_sd_s = 60.0;
    int cooldown_min_s = 60;
    int cooldown_end_margin_s = 90;

    double idle_flow_min_kgph = 100.0;
    double idle_flow_max_kgph = 160.0;
    double flow_speed_gain_kgph_per_kt = 6.0;
    double flow_noise_sd_kgph = 2.0;
    double shutdown_flow_min_kgph = 0.0;
    double shutdown_flow_max_kgph = 4.0;
    bool symmetric_engines = false;

    double stop_rate_per_s = 1.0 / 45.0;
    double turn_rate_per_s = 1.0 / 60.0;
    /// single-engine thrust: acceleration peaks and cruise targets shrink
    /// after the shutdown second
    double set_accel_factor = 0.25;
    double set_speed_factor = 0.65;

    double field_elevation_ft = 300.0;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_flights < 0) throw InvalidConfig("n_flights must be >= 0");
        if (set_rate < 0.0 || set_rate > 1.0) throw InvalidConfig("set_rate must be in [0, 1]");
        if (duration_min_s < 240) throw InvalidConfig("duration_min_s must be >= 240");
        if (duration_min_s >= duration_max_s) throw InvalidConfig("duration range is degenerate");
        if (idle_flow_min_kgph >= idle_flow_max_kgph) throw InvalidConfig("idle flow range is degenerate");
        if (shutdown_flow_min_kgph > shutdown_flow_max_kgph) throw InvalidConfig("shutdown flow range inverted");
        if (shutdown_flow_min_kgph < 0.0) throw InvalidConfig("shutdown flow must be >= 0");
        if (shutdown_flow_max_kgph >= 5.0)
            throw InvalidConfig("shutdown flow must stay below the 5 kg/h labeling threshold");
        if (flow_noise_sd_kgph < 0.0) throw InvalidConfig("flow noise sd must be >= 0");
        if (cooldown_min_s < 60) throw InvalidConfig("cooldown_min_s must be >= 60");
        if (cooldown_end_margin_s < 60) throw InvalidConfig("cooldown_end_margin_s must be >= 60");
        if (set_accel_factor <= 0.0 || set_accel_factor > 1.0) throw InvalidConfig("set_accel_factor in (0, 1]");
        if (set_speed_factor <= 0.0 || set_speed_factor > 1.0) throw InvalidConfig("set_speed_factor in (0, 1]");
    }
};

/// Distribution-shift knobs for cross-fleet generalization experiments.
struct ShiftSpec {
    double speed_scale = 1.0;  ///< scales cruise targets and accel peaks
    std::optional<double> cooldown_mean_s;
};

/// Per-flight fuel model drawn by the generator; exposed so tests can build
/// an exact two-engine reference estimator.
struct FlowParams {
    double idle1_kgph = 0.0;
    double idle2_kgph = 0.0;
    double gain_kgph_per_kt = 0.0;
    double shutdown_flow_kgph = 0.0;
    int shut_engine = 0;  ///< 1 or 2, meaningful when is_set
};

struct SynthFlight {
    GroundTrack track;
    bool is_set = false;
    int start_index = -1;  ///< drawn shutdown second (ground truth)
    FlowParams flow;
};

namespace detail {

/// Nominal both-engines-running total flow for one sample, the same
/// expression the generator records, so an oracle estimator can match the
/// truth bit for bit on noiseless configs.
inline double nominal_two_engine_flow(const FlowParams& fp, double speed_kt) {
    return (fp.idle1_kgph + fp.gain_kgph_per_kt * speed_kt) + (fp.idle2_kgph + fp.gain_kgph_per_kt * speed_kt);
}

}  // namespace detail

inline std::vector<SynthFlight> generate_shifted(const GenConfig& cfg, const ShiftSpec& shift) {
    cfg.validate();
    if (shift.speed_scale <= 0.0) throw InvalidConfig("speed_scale must be positive");
    const double cooldown_mean = shift.cooldown_mean_s.value_or(cfg.cooldown_mean_s);

    std::vector<SynthFlight> flights;
    flights.reserve(static_cast<std::size_t>(cfg.n_flights));

    for (int fi = 0; fi < cfg.n_flights; ++fi) {
        Rng rng = stream_rng(cfg.seed, "flight", static_cast<std::uint64_t>(fi));
        SynthFlight fl;
        char id[16];
        std::snprintf(id, sizeof(id), "SYN%05d", fi);
        fl.track.flight_id = id;
        fl.track.has_qar = true;

        const int duration = cfg.duration_min_s + static_cast<int>(rng.uniform_int(
                                 static_cast<std::uint64_t>(cfg.duration_max_s - cfg.duration_min_s + 1)));

        fl.is_set = rng.bernoulli(cfg.set_rate);
        if (fl.is_set) {
            const int lo = cfg.cooldown_min_s;
            const int hi = duration - cfg.cooldown_end_margin_s;
            int start = lo;
            for (int tries = 0; tries < 100; ++tries) {
                const double draw = rng.normal(cooldown_mean, cfg.cooldown_sd_s);
                start = static_cast<int>(std::lround(draw));
                if (start >= lo && start <= hi) break;
                start = std::min(std::max(start, lo), hi);
            }
            fl.start_index = start;
        }

        fl.flow.idle1_kgph = rng.uniform(cfg.idle_flow_min_kgph, cfg.idle_flow_max_kgph);
        fl.flow.idle2_kgph = cfg.symmetric_engines ? fl.flow.idle1_kgph
                                                   : rng.uniform(cfg.idle_flow_min_kgph, cfg.idle_flow_max_kgph);
        fl.flow.gain_kgph_per_kt = cfg.flow_speed_gain_kgph_per_kt;
        fl.flow.shutdown_flow_kgph = rng.uniform(cfg.shutdown_flow_min_kgph, cfg.shutdown_flow_max_kgph);
        fl.flow.shut_engine = rng.bernoulli(0.5) ? 1 : 2;

        // piecewise taxi speed profile: cruise with jitter, stop-and-go
        // events, final braking to the stand
        enum class Phase { cruise, decel, stopped, accel };
        Phase phase = Phase::cruise;
        const double base_target = rng.uniform(8.0, 25.0) * shift.speed_scale;
        double v = std::min(rng.uniform(10.0, 30.0) * shift.speed_scale, base_target + 5.0);
        double decel_rate = 1.0, accel_rate = 1.0;
        int stop_timer = 0;

        double heading = rng.uniform(0.0, 360.0);
        double turn_rate = 0.0;
        int turn_timer = 0;

        fl.track.points.reserve(static_cast<std::size_t>(duration));
        for (int t = 0; t < duration; ++t) {
            const bool shut = fl.is_set && t >= fl.start_index;
            const double accel_scale = (shut ? cfg.set_accel_factor : 1.0) * shift.speed_scale;
            const double target = base_target * (shut ? cfg.set_speed_factor : 1.0);

            if (t >= duration - 12) {
                v = std::max(0.0, v - 2.0);  // arriving at the stand
            } else {
                switch (phase) {
                    case Phase::cruise:
                        v += std::clamp((target - v) * 0.15 + rng.uniform(-0.3, 0.3), -0.8, 0.8 * accel_scale);
                        if (rng.bernoulli(cfg.stop_rate_per_s)) {
                            phase = Phase::decel;
                            decel_rate = rng.uniform(1.0, 2.0);
                        }
                        break;
                    case Phase::decel:
                        v -= decel_rate;
                        if (v <= 0.0) {
                            v = 0.0;
                            phase = Phase::stopped;
                            stop_timer = 5 + static_cast<int>(rng.uniform_int(16));
                        }
                        break;
                    case Phase::stopped:
                        v = 0.0;
                        if (--stop_timer <= 0) {
                            phase = Phase::accel;
                            accel_rate = rng.uniform(0.7, 1.5) * accel_scale;
                        }
                        break;
                    case Phase::accel:
                        v += accel_rate;
                        if (v >= target) {
                            v = target;
                            phase = Phase::cruise;
                        }
                        break;
                }
            }
            v = std::max(0.0, v);

            if (turn_timer > 0) {
                heading += turn_rate;
                --turn_timer;
            } else if (v > 2.0 && rng.bernoulli(cfg.turn_rate_per_s)) {
                const double delta = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(30.0, 120.0);
                turn_timer = 10 + static_cast<int>(rng.uniform_int(16));
                turn_rate = delta / turn_timer;
            }
            heading = std::fmod(heading, 360.0);
            if (heading < 0) heading += 360.0;

            TrackPoint p;
            p.t = t;
            p.altitude_ft = cfg.field_elevation_ft;
            p.groundspeed_kt = v;
            p.track_deg = heading;

            const double noise1 = cfg.flow_noise_sd_kgph > 0 ? rng.normal(0.0, cfg.flow_noise_sd_kgph) : 0.0;
            const double noise2 = cfg.flow_noise_sd_kgph > 0 ? rng.normal(0.0, cfg.flow_noise_sd_kgph) : 0.0;
            double ff1 = fl.flow.idle1_kgph + fl.flow.gain_kgph_per_kt * v + noise1;
            double ff2 = fl.flow.idle2_kgph + fl.flow.gain_kgph_per_kt * v + noise2;
            // running engines never dip toward the labeling threshold
            ff1 = std::max(ff1, 20.0);
            ff2 = std::max(ff2, 20.0);
            if (shut) (fl.flow.shut_engine == 1 ? ff1 : ff2) = fl.flow.shutdown_flow_kgph;
            p.ff_eng1_kgph = ff1;
            p.ff_eng2_kgph = ff2;
            fl.track.points.push_back(p);
        }
        flights.push_back(std::move(fl));
    }
    return flights;
}

inline std::vector<SynthFlight> generate(const GenConfig& cfg) { return generate_shifted(cfg, ShiftSpec{}); }

inline std::vector<GroundTrack> tracks_of(const std::vector<SynthFlight>& flights) {
    std::vector<GroundTrack> tracks;
    tracks.reserve(flights.size());
    for (const auto& f : flights) tracks.push_back(f.track);
    return tracks;
}

/// Exact two-engine reference estimator for generated flights: returns each
/// flight's own nominal (noise-free) both-engines flow.
inline FuelFlowEstimator oracle_flow_model(const std::vector<SynthFlight>& flights) {
    std::unordered_map<std::string, FlowParams> params;
    for (const auto& f : flights) params[f.track.flight_id] = f.flow;
    return [params](const GroundTrack& track) {
        auto it = params.find(track.flight_id);
        if (it == params.end()) throw IoError("oracle_flow_model: unknown flight " + track.flight_id);
        std::vector<double> flow;
        flow.reserve(track.points.size());
        for (const auto& p : track.points)
            flow.push_back(detail::nominal_two_engine_flow(it->second, p.groundspeed_kt));
        return flow;
    };
}

/// Records the exact generator inputs so a corpus can be regenerated.
inline void write_gen_manifest(std::ostream& out, const GenConfig& cfg, const ShiftSpec& shift = {}) {
    out << "n_flights = " << cfg.n_flights << "\n"
        << "set_rate = " << csv::fmt(cfg.set_rate) << "\n"
        << "duration_min_s = " << cfg.duration_min_s << "\n"
        << "duration_max_s = " << cfg.duration_max_s << "\n"
        << "cooldown_mean_s = " << csv::fmt(cfg.cooldown_mean_s) << "\n"
        << "cooldown_sd_s = " << csv::fmt(cfg.cooldown_sd_s) << "\n"
        << "cooldown_min_s = " << cfg.cooldown_min_s << "\n"
        << "cooldown_end_margin_s = " << cfg.cooldown_end_margin_s << "\n"
        << "idle_flow_min_kgph = " << csv::fmt(cfg.idle_flow_min_kgph) << "\n"
        << "idle_flow_max_kgph = " << csv::fmt(cfg.idle_flow_max_kgph) << "\n"
        << "flow_speed_gain_kgph_per_kt = " << csv::fmt(cfg.flow_speed_gain_kgph_per_kt) << "\n"
        << "flow_noise_sd_kgph = " << csv::fmt(cfg.flow_noise_sd_kgph) << "\n"
        << "shutdown_flow_min_kgph = " << csv::fmt(cfg.shutdown_flow_min_kgph) << "\n"
        << "shutdown_flow_max_kgph = " << csv::fmt(cfg.shutdown_flow_max_kgph) << "\n"
        << "symmetric_engines = " << (cfg.symmetric_engines ? 1 : 0) << "\n"
        << "stop_rate_per_s = " << csv::fmt(cfg.stop_rate_per_s) << "\n"
        << "turn_rate_per_s = " << csv::fmt(cfg.turn_rate_per_s) << "\n"
        << "set_accel_factor = " << csv::fmt(cfg.set_accel_factor) << "\n"
        << "set_speed_factor = " << csv::fmt(cfg.set_speed_factor) << "\n"
        << "field_elevation_ft = " << csv::fmt(cfg.field_elevation_ft) << "\n"
        << "seed = " << cfg.seed << "\n"
        << "shift.speed_scale = " << csv::fmt(shift.speed_scale) << "\n"
        << "shift.cooldown_mean_s = " << (shift.cooldown_mean_s ? csv::fmt(*shift.cooldown_mean_s) : "none") << "\n";
}

}  // namespace setdetect
