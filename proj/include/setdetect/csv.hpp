#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "setdetect/errors.hpp"

namespace setdetect::csv {

// Plain comma-separated tables, UTF-8, '.' decimal point, no quoting.
// That is all the external formats in this project need.

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            std::string last = line.substr(start);
            if (!last.empty() && last.back() == '\r') last.pop_back();
            out.push_back(std::move(last));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// Header-indexed row reader over a line-oriented stream.
class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {
        std::string line;
        if (!std::getline(in_, line)) throw IoError("empty csv stream");
        header_ = split_line(line);
        for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
    }

    bool has_column(const std::string& name) const { return index_.count(name) > 0; }

    /// Column index; throws MissingColumn when absent.
    std::size_t column(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw MissingColumn(name);
        return it->second;
    }

    /// Reads the next row; empty lines are skipped. Returns false at EOF.
    bool next(std::vector<std::string>& row) {
        std::string line;
        while (std::getline(in_, line)) {
            if (line.empty() || line == "\r") continue;
            row = split_line(line);
            return true;
        }
        return false;
    }

    const std::vector<std::string>& header() const { return header_; }

  private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline double parse_double(const std::string& cell, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw IoError("not a number in " + what + ": '" + cell + "'");
    return v;
}

inline long parse_long(const std::string& cell, const std::string& what) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw IoError("not an integer in " + what + ": '" + cell + "'");
    return v;
}

/// Fixed float formatting shared by every table writer, so identical values
/// always serialize to identical bytes.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

}  // namespace setdetect::csv
