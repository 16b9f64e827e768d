#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "setdetect/csv.hpp"
#include "setdetect/errors.hpp"
#include "setdetect/rng.hpp"

namespace setdetect {

enum class Partition { train, val, test };

inline const char* partition_name(Partition p) {
    switch (p) {
        case Partition::train: return "train";
        case Partition::val: return "val";
        case Partition::test: return "test";
    }
    return "?";
}

struct SplitFractions {
    double train = 0.8, val = 0.1, test = 0.1;
};

/// Per-flight partition tags, index-aligned with the labels passed in.
using SplitAssignment = std::vector<Partition>;

/// Stratified split: within each class, a seeded shuffle followed by
/// proportional slicing, so class balance carries into every partition.
inline SplitAssignment stratified_split(const std::vector<int>& labels, const SplitFractions& fractions,
                                        std::uint64_t seed) {
    if (std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
        throw InvalidConfig("split fractions must sum to 1");

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.size() < 10 || neg.size() < 10)
        throw ClassTooSmall("stratified_split: need at least 10 samples per class, got " +
                            std::to_string(pos.size()) + " positive / " + std::to_string(neg.size()) + " negative");

    SplitAssignment out(labels.size(), Partition::train);
    Rng rng = stream_rng(seed, "split");
    for (auto* cls : {&neg, &pos}) {
        auto& idx = *cls;
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
        const std::size_t n = idx.size();
        const auto n_train = static_cast<std::size_t>(static_cast<double>(n) * fractions.train);
        const auto n_train_val = static_cast<std::size_t>(static_cast<double>(n) * (fractions.train + fractions.val));
        for (std::size_t i = 0; i < n; ++i)
            out[idx[i]] = i < n_train ? Partition::train : (i < n_train_val ? Partition::val : Partition::test);
    }
    return out;
}

inline void write_split_csv(std::ostream& out, const std::vector<std::string>& flight_ids,
                            const SplitAssignment& split) {
    out << "flight_id,partition\n";
    for (std::size_t i = 0; i < flight_ids.size(); ++i)
        out << flight_ids[i] << ',' << partition_name(split[i]) << "\n";
}

inline SplitAssignment read_split_csv(std::istream& in, const std::vector<std::string>& flight_ids) {
    csv::Reader reader(in);
    const std::size_t c_id = reader.column("flight_id");
    const std::size_t c_part = reader.column("partition");
    std::unordered_map<std::string, Partition> by_id;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const std::string& name = row.at(c_part);
        Partition p;
        if (name == "train") p = Partition::train;
        else if (name == "val") p = Partition::val;
        else if (name == "test") p = Partition::test;
        else throw IoError("unknown partition: " + name);
        by_id[row.at(c_id)] = p;
    }
    SplitAssignment out;
    out.reserve(flight_ids.size());
    for (const auto& id : flight_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw IoError("split file is missing flight " + id);
        out.push_back(it->second);
    }
    return out;
}

}  // namespace setdetect
