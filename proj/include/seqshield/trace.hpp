#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "seqshield/errors.hpp"
#include "seqshield/util.hpp"

namespace seqshield {

enum class Label : std::uint8_t { benign = 0, malicious = 1 };

inline Label parse_label(std::string_view token) {
    if (token == "benign") return Label::benign;
    if (token == "malicious") return Label::malicious;
    throw ManifestError("unknown label token: '" + std::string(token) + "'");
}

inline std::string_view label_name(Label label) {
    return label == Label::benign ? "benign" : "malicious";
}

/// One API invocation: symbol name plus seconds since process start.
struct ApiCall {
    std::string name;
    double time = 0.0;

    friend bool operator==(const ApiCall&, const ApiCall&) = default;
};

/// Half-open call-index range [begin, end) covering one planted pattern.
/// Provenance from the synthesizer; empty for ingested traces.
struct Span {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

/// One sample's ordered API-call sequence. Calls are non-decreasing in time.
struct Trace {
    std::string sample_id;
    Label label = Label::benign;
    std::vector<ApiCall> calls;
    std::vector<Span> pattern_spans;

    std::vector<std::string> call_names() const {
        std::vector<std::string> names;
        names.reserve(calls.size());
        for (const auto& c : calls) names.push_back(c.name);
        return names;
    }
};

struct Dataset {
    std::vector<Trace> traces;
    std::string provenance;

    std::size_t count(Label label) const {
        std::size_t n = 0;
        for (const auto& t : traces) n += (t.label == label) ? 1 : 0;
        return n;
    }

    void check_unique_ids() const {
        std::unordered_set<std::string_view> seen;
        for (const auto& t : traces) {
            if (!seen.insert(t.sample_id).second) {
                throw ManifestError("duplicate sample_id: '" + t.sample_id + "'");
            }
        }
    }
};

// --- canonical trace file format ------------------------------------------
// {"sample_id": ..., "label": "benign"|"malicious", "calls": [{"name","time"},...]}
// `pattern_spans` is an optional provenance key written by the synthesizer
// and ignored by featurization.

inline nlohmann::json trace_to_json(const Trace& trace) {
    nlohmann::json calls = nlohmann::json::array();
    for (const auto& c : trace.calls) {
        calls.push_back({{"name", c.name}, {"time", c.time}});
    }
    nlohmann::json j{
        {"sample_id", trace.sample_id},
        {"label", std::string(label_name(trace.label))},
        {"calls", std::move(calls)},
    };
    if (!trace.pattern_spans.empty()) {
        nlohmann::json spans = nlohmann::json::array();
        for (const auto& s : trace.pattern_spans) spans.push_back({s.begin, s.end});
        j["pattern_spans"] = std::move(spans);
    }
    return j;
}

inline Trace trace_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("sample_id") || !j.contains("label") || !j.contains("calls")) {
        throw SchemaError("trace document must contain sample_id, label, calls");
    }
    Trace trace;
    trace.sample_id = j.at("sample_id").get<std::string>();
    trace.label = parse_label(j.at("label").get<std::string>());
    const auto& calls = j.at("calls");
    if (!calls.is_array()) throw SchemaError("trace 'calls' must be an array");
    double prev = 0.0;
    for (const auto& c : calls) {
        if (!c.is_object() || !c.contains("name") || !c.contains("time")) {
            throw SchemaError("trace call entries need string 'name' and numeric 'time'");
        }
        ApiCall call{c.at("name").get<std::string>(), c.at("time").get<double>()};
        if (call.name.empty()) throw SchemaError("trace call with empty API name");
        if (call.time < 0.0) throw SchemaError("trace call with negative timestamp");
        if (call.time < prev) throw SchemaError("trace calls not sorted by timestamp");
        prev = call.time;
        trace.calls.push_back(std::move(call));
    }
    if (j.contains("pattern_spans")) {
        for (const auto& s : j.at("pattern_spans")) {
            trace.pattern_spans.push_back({s.at(0).get<std::uint32_t>(), s.at(1).get<std::uint32_t>()});
        }
    }
    return trace;
}

inline void write_trace_file(const std::filesystem::path& path, const Trace& trace) {
    write_file(path, trace_to_json(trace).dump(2) + "\n");
}

inline Trace read_trace_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed trace JSON in " + path.string() + " at byte " +
                         std::to_string(e.byte));
    }
    return trace_from_json(j);
}

} // namespace seqshield
