#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "setdetect/config.hpp"
#include "setdetect/rng.hpp"
#include "setdetect/version.hpp"

namespace setdetect {

/// Reproduction record written next to every command's outputs: tool version,
/// the resolved configuration, the seed, digests of every input file and the
/// produced artifact paths. Two runs with equal manifests must produce
/// byte-identical primary outputs.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;           ///< resolved key/values
    std::vector<std::pair<std::string, std::string>> inputs;   ///< path, fnv1a64 hex digest
    std::vector<std::string> outputs;

    void add_input(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("manifest: cannot read input " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(buf.str())));
        inputs.emplace_back(path, hex);
    }

    void write(const std::string& out_dir) const {
        std::ofstream out(out_dir + "/run_manifest.txt", std::ios::binary);
        if (!out) throw IoError("manifest: cannot write to " + out_dir);
        out << "tool = setdetect " << kVersion << "\n";
        out << "command = " << command << "\n";
        out << "seed = " << seed << "\n";
        for (const auto& [key, value] : config) out << "config." << key << " = " << value << "\n";
        for (const auto& [path, digest] : inputs) out << "input = " << path << " " << digest << "\n";
        for (const auto& path : outputs) out << "output = " << path << "\n";
    }
};

}  // namespace setdetect
