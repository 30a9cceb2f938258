#pragma once

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seqshield/errors.hpp"
#include "seqshield/rng.hpp"

namespace seqshield {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

/// Rounds to 4 decimal places, ties to even. All reported metric values go
/// through this before serialization.
inline double round4(double v) {
    const double scaled = v * 10000.0;
    const double floor_v = std::floor(scaled);
    const double frac = scaled - floor_v;
    double r;
    if (frac > 0.5) {
        r = floor_v + 1.0;
    } else if (frac < 0.5) {
        r = floor_v;
    } else {
        r = (std::fmod(floor_v, 2.0) == 0.0) ? floor_v : floor_v + 1.0;
    }
    return r / 10000.0;
}

inline std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", round4(v));
    return std::string(buf);
}

inline std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

} // namespace seqshield
