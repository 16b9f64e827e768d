#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "setdetect/errors.hpp"
#include "setdetect/labeler.hpp"
#include "setdetect/locnet.hpp"
#include "setdetect/nmdp.hpp"
#include "setdetect/synthgen.hpp"
#include "setdetect/trackdata.hpp"
#include "setdetect/train.hpp"

namespace setdetect {

/// `key = value` configuration with `[section]` headers. One file drives the
/// whole pipeline; every module reads its own section and anything omitted
/// keeps its default.
class Config {
  public:
    Config() = default;

    static Config parse(std::istream& in) {
        Config cfg;
        std::string line, section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw InvalidConfig("line " + std::to_string(line_no) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw InvalidConfig("line " + std::to_string(line_no) + ": expected key = value");
            cfg.values_[section + "." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config: " + path);
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw InvalidConfig("config key " + key + ": not a number: '" + it->second + "'");
        }
    }

    long get_long(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t used = 0;
            const long v = std::stol(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw InvalidConfig("config key " + key + ": not an integer: '" + it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "1" || it->second == "true") return true;
        if (it->second == "0" || it->second == "false") return false;
        throw InvalidConfig("config key " + key + ": expected a boolean, got '" + it->second + "'");
    }

    /// Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::istringstream is(it->second);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw InvalidConfig("config key " + key + ": not a number: '" + tok + "'");
            }
        }
        return out;
    }

    /// Resolved snapshot in deterministic key order, for run manifests.
    const std::map<std::string, std::string>& entries() const { return values_; }

    // --- module bindings -----------------------------------------------

    GenConfig gen_config() const {
        GenConfig g;
        g.n_flights = static_cast<int>(get_long("gen.n_flights", g.n_flights));
        g.set_rate = get_double("gen.set_rate", g.set_rate);
        g.duration_min_s = static_cast<int>(get_long("gen.duration_min_s", g.duration_min_s));
        g.duration_max_s = static_cast<int>(get_long("gen.duration_max_s", g.duration_max_s));
        g.cooldown_mean_s = get_double("gen.cooldown_mean_s", g.cooldown_mean_s);
        g.cooldown_sd_s = get_double("gen.cooldown_sd_s", g.cooldown_sd_s);
        g.cooldown_min_s = static_cast<int>(get_long("gen.cooldown_min_s", g.cooldown_min_s));
        g.cooldown_end_margin_s = static_cast<int>(get_long("gen.cooldown_end_margin_s", g.cooldown_end_margin_s));
        g.idle_flow_min_kgph = get_double("gen.idle_flow_min_kgph", g.idle_flow_min_kgph);
        g.idle_flow_max_kgph = get_double("gen.idle_flow_max_kgph", g.idle_flow_max_kgph);
        g.flow_speed_gain_kgph_per_kt = get_double("gen.flow_speed_gain_kgph_per_kt", g.flow_speed_gain_kgph_per_kt);
        g.flow_noise_sd_kgph = get_double("gen.flow_noise_sd_kgph", g.flow_noise_sd_kgph);
        g.shutdown_flow_min_kgph = get_double("gen.shutdown_flow_min_kgph", g.shutdown_flow_min_kgph);
        g.shutdown_flow_max_kgph = get_double("gen.shutdown_flow_max_kgph", g.shutdown_flow_max_kgph);
        g.symmetric_engines = get_bool("gen.symmetric_engines", g.symmetric_engines);
        g.stop_rate_per_s = get_double("gen.stop_rate_per_s", g.stop_rate_per_s);
        g.turn_rate_per_s = get_double("gen.turn_rate_per_s", g.turn_rate_per_s);
        g.set_accel_factor = get_double("gen.set_accel_factor", g.set_accel_factor);
        g.set_speed_factor = get_double("gen.set_speed_factor", g.set_speed_factor);
        g.field_elevation_ft = get_double("gen.field_elevation_ft", g.field_elevation_ft);
        g.seed = static_cast<std::uint64_t>(get_long("gen.seed", static_cast<long>(g.seed)));
        return g;
    }

    ShiftSpec shift_spec() const {
        ShiftSpec s;
        s.speed_scale = get_double("shift.speed_scale", s.speed_scale);
        if (has("shift.cooldown_mean_s")) s.cooldown_mean_s = get_double("shift.cooldown_mean_s", 0.0);
        return s;
    }

    LabelConfig label_config() const {
        LabelConfig l;
        l.low_ff_threshold_kgph = get_double("label.low_ff_threshold_kgph", l.low_ff_threshold_kgph);
        l.min_duration_s = static_cast<int>(get_long("label.min_duration_s", l.min_duration_s));
        if (l.low_ff_threshold_kgph <= 0) throw InvalidConfig("label.low_ff_threshold_kgph must be > 0");
        if (l.min_duration_s < 1) throw InvalidConfig("label.min_duration_s must be >= 1");
        return l;
    }

    TaxiInConfig taxi_config() const {
        TaxiInConfig t;
        t.speed_threshold_kt = get_double("taxi.speed_threshold_kt", t.speed_threshold_kt);
        t.sustain_s = static_cast<int>(get_long("taxi.sustain_s", t.sustain_s));
        t.elevation_tolerance_ft = get_double("taxi.elevation_tolerance_ft", t.elevation_tolerance_ft);
        t.stop_extension_s = static_cast<int>(get_long("taxi.stop_extension_s", t.stop_extension_s));
        return t;
    }

    ArchConfig arch_config(const std::string& section = "arch") const {
        ArchConfig a;
        a.n_conv = static_cast<int>(get_long(section + ".n_conv", a.n_conv));
        a.filters = static_cast<int>(get_long(section + ".filters", a.filters));
        a.n_dense = static_cast<int>(get_long(section + ".n_dense", a.n_dense));
        a.neurons = static_cast<int>(get_long(section + ".neurons", a.neurons));
        a.kernel_size = static_cast<int>(get_long(section + ".kernel_size", a.kernel_size));
        a.dropout_rate = get_double(section + ".dropout_rate", a.dropout_rate);
        return a;
    }

    TrainConfig train_config(const std::string& section = "train") const {
        TrainConfig t;
        t.learning_rate = get_double(section + ".learning_rate", t.learning_rate);
        t.batch_size = static_cast<int>(get_long(section + ".batch_size", t.batch_size));
        t.epochs = static_cast<int>(get_long(section + ".epochs", t.epochs));
        t.class1_weight = get_double(section + ".class1_weight", t.class1_weight);
        t.seed = static_cast<std::uint64_t>(get_long(section + ".seed", static_cast<long>(t.seed)));
        t.fractions.train = get_double(section + ".train_frac", t.fractions.train);
        t.fractions.val = get_double(section + ".val_frac", t.fractions.val);
        t.fractions.test = get_double(section + ".test_frac", t.fractions.test);
        t.validate();
        return t;
    }

    RegressorConfig regressor_config() const {
        RegressorConfig r;
        r.arch = arch_config("loc_arch");
        r.arch.dropout_rate = get_double("loc_arch.dropout_rate", 0.6);
        r.train = train_config_with_defaults("loc_train", r.train);
        return r;
    }

    StartEstimatorConfig start_config() const {
        StartEstimatorConfig s;
        const std::string method = get_string("loc.method", "nominal");
        if (method == "nominal") s.method = StartMethod::nominal;
        else if (method == "train_mean") s.method = StartMethod::train_mean;
        else if (method == "regression") s.method = StartMethod::regression;
        else throw InvalidConfig("loc.method must be nominal, train_mean or regression");
        s.nominal_offset_s = static_cast<int>(get_long("loc.nominal_offset_s", s.nominal_offset_s));
        if (s.nominal_offset_s < 0) throw InvalidConfig("loc.nominal_offset_s must be >= 0");
        if (has("loc.learned_mean_s")) s.learned_mean_s = static_cast<int>(get_long("loc.learned_mean_s", 0));
        return s;
    }

  private:
    TrainConfig train_config_with_defaults(const std::string& section, const TrainConfig& defaults) const {
        TrainConfig t = defaults;
        t.learning_rate = get_double(section + ".learning_rate", t.learning_rate);
        t.batch_size = static_cast<int>(get_long(section + ".batch_size", t.batch_size));
        t.epochs = static_cast<int>(get_long(section + ".epochs", t.epochs));
        t.seed = static_cast<std::uint64_t>(get_long(section + ".seed", static_cast<long>(t.seed)));
        t.fractions.train = get_double(section + ".train_frac", t.fractions.train);
        t.fractions.val = get_double(section + ".val_frac", t.fractions.val);
        t.fractions.test = get_double(section + ".test_frac", t.fractions.test);
        t.validate();
        return t;
    }

    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace setdetect
