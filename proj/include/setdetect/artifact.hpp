#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "setdetect/csv.hpp"
#include "setdetect/featurize.hpp"
#include "setdetect/network.hpp"

namespace setdetect {

/// A trained model on disk: a text manifest describing the layer stack,
/// channel ordering, seed and decision threshold, plus a binary blob holding
/// every parameter and running statistic as little-endian float32 in manifest
/// order. Save/load round-trips bit-exactly.
struct ModelArtifact {
    int format_version = 1;
    std::size_t input_time = kTimeSteps;
    std::size_t input_channels = kNumChannels;
    std::vector<LayerSpec> specs;
    std::string channel_order = channel_order_string();
    std::uint64_t seed = 0;
    double threshold = 0.5;
    std::vector<std::pair<std::string, std::vector<float>>> params;

    static ModelArtifact from_network(const Network<float>& net, std::uint64_t seed, double threshold) {
        ModelArtifact a;
        a.input_time = net.input_shape().time;
        a.input_channels = net.input_shape().channels;
        a.specs = net.specs();
        a.seed = seed;
        a.threshold = threshold;
        for (const auto& e : net.param_store()) a.params.emplace_back(e.name, *e.value);
        return a;
    }

    /// Materializes a network carrying this artifact's parameters.
    Network<float> to_network() const {
        Network<float> net(specs, {input_time, input_channels}, seed);
        auto& store = net.param_store();
        if (store.size() != params.size()) throw IoError("artifact/parameter table mismatch");
        for (std::size_t i = 0; i < store.size(); ++i) {
            if (store[i].name != params[i].first || store[i].value->size() != params[i].second.size())
                throw IoError("artifact layout mismatch at " + params[i].first);
            *store[i].value = params[i].second;
        }
        return net;
    }
};

namespace detail {

inline void write_f32_le(std::ostream& out, const std::vector<float>& v) {
    static_assert(sizeof(float) == 4);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
    } else {
        for (float f : v) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            char b[4] = {char(u & 0xff), char((u >> 8) & 0xff), char((u >> 16) & 0xff), char((u >> 24) & 0xff)};
            out.write(b, 4);
        }
    }
}

inline void read_f32_le(std::istream& in, std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
    } else {
        for (float& f : v) {
            unsigned char b[4];
            in.read(reinterpret_cast<char*>(b), 4);
            std::uint32_t u = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                              (std::uint32_t(b[3]) << 24);
            std::memcpy(&f, &u, 4);
        }
    }
    if (!in) throw IoError("model blob truncated");
}

inline std::string fmt_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Writes <stem>.manifest and <stem>.bin.
inline void save_artifact(const ModelArtifact& a, const std::string& stem) {
    auto manifest = csv::open_out(stem + ".manifest");
    manifest << "format_version = " << a.format_version << "\n";
    manifest << "input_time = " << a.input_time << "\n";
    manifest << "input_channels = " << a.input_channels << "\n";
    manifest << "channel_order = " << a.channel_order << "\n";
    manifest << "seed = " << a.seed << "\n";
    manifest << "threshold = " << detail::fmt_exact(a.threshold) << "\n";
    manifest << "layers = " << a.specs.size() << "\n";
    for (std::size_t i = 0; i < a.specs.size(); ++i)
        manifest << "layer." << i << " = " << spec_to_string(a.specs[i]) << "\n";
    manifest << "params = " << a.params.size() << "\n";
    for (std::size_t i = 0; i < a.params.size(); ++i)
        manifest << "param." << i << " = " << a.params[i].first << " size=" << a.params[i].second.size() << "\n";

    auto blob = csv::open_out(stem + ".bin");
    for (const auto& [name, values] : a.params) detail::write_f32_le(blob, values);
}

inline ModelArtifact load_artifact(const std::string& stem) {
    auto manifest = csv::open_in(stem + ".manifest");
    ModelArtifact a;
    a.specs.clear();
    a.params.clear();

    std::string line;
    std::size_t n_layers = 0, n_params = 0;
    std::vector<std::pair<std::string, std::size_t>> param_meta;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        auto eq = line.find(" = ");
        if (eq == std::string::npos) throw IoError("bad manifest line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 3);
        if (key == "format_version") a.format_version = std::stoi(val);
        else if (key == "input_time") a.input_time = std::stoul(val);
        else if (key == "input_channels") a.input_channels = std::stoul(val);
        else if (key == "channel_order") a.channel_order = val;
        else if (key == "seed") a.seed = std::stoull(val);
        else if (key == "threshold") a.threshold = std::stod(val);
        else if (key == "layers") n_layers = std::stoul(val);
        else if (key.rfind("layer.", 0) == 0) a.specs.push_back(spec_from_string(val));
        else if (key == "params") n_params = std::stoul(val);
        else if (key.rfind("param.", 0) == 0) {
            auto sz = val.rfind(" size=");
            if (sz == std::string::npos) throw IoError("bad param line: " + line);
            param_meta.emplace_back(val.substr(0, sz), std::stoul(val.substr(sz + 6)));
        } else throw IoError("unknown manifest key: " + key);
    }
    if (a.specs.size() != n_layers || param_meta.size() != n_params)
        throw IoError("manifest count mismatch in " + stem + ".manifest");
    if (a.format_version != 1) throw IoError("unsupported artifact format version");

    auto blob = csv::open_in(stem + ".bin");
    for (auto& [name, size] : param_meta) {
        std::vector<float> values(size);
        detail::read_f32_le(blob, values);
        a.params.emplace_back(name, std::move(values));
    }
    return a;
}

}  // namespace setdetect
