#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "seqshield/errors.hpp"
#include "seqshield/trace.hpp"
#include "seqshield/util.hpp"

namespace seqshield {

/// Parses the behavior section of a sandbox report (the minimal subset of
/// the Cuckoo v2 schema: behavior.processes[].calls[].{api,time}) into one
/// globally ordered trace. Calls from all processes are merged and sorted by
/// timestamp; ties keep document order.
inline Trace parse_report(std::string_view bytes, Label label, std::string sample_id = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed report JSON at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (!doc.is_object() || !doc.contains("behavior")) {
        throw SchemaError("report lacks a 'behavior' section");
    }
    const auto& behavior = doc.at("behavior");
    if (!behavior.is_object() || !behavior.contains("processes") ||
        !behavior.at("processes").is_array()) {
        throw SchemaError("report 'behavior' lacks a 'processes' array");
    }

    struct Ordered {
        double time;
        std::size_t doc_index;
        std::string name;
    };
    std::vector<Ordered> calls;
    std::size_t doc_index = 0;
    for (const auto& process : behavior.at("processes")) {
        if (!process.is_object() || !process.contains("calls")) continue;
        const auto& raw_calls = process.at("calls");
        if (!raw_calls.is_array()) throw SchemaError("process 'calls' must be an array");
        for (const auto& call : raw_calls) {
            if (!call.is_object() || !call.contains("api") || !call.contains("time")) {
                throw SchemaError("call entry needs string 'api' and numeric 'time'");
            }
            const auto& api = call.at("api");
            const auto& time = call.at("time");
            if (!api.is_string() || api.get<std::string>().empty()) {
                throw SchemaError("call 'api' must be a non-empty string");
            }
            if (!time.is_number()) throw SchemaError("call 'time' must be numeric");
            const double t = time.get<double>();
            if (t < 0.0) throw SchemaError("call 'time' must be non-negative");
            calls.push_back({t, doc_index++, api.get<std::string>()});
        }
    }
    if (calls.empty()) throw EmptyTraceError("report contains zero API calls");

    std::stable_sort(calls.begin(), calls.end(),
                     [](const Ordered& a, const Ordered& b) { return a.time < b.time; });

    Trace trace;
    trace.sample_id = std::move(sample_id);
    trace.label = label;
    trace.calls.reserve(calls.size());
    for (auto& c : calls) trace.calls.push_back({std::move(c.name), c.time});
    return trace;
}

struct LoadResult {
    Dataset dataset;
    std::size_t skipped = 0;
    std::vector<std::string> skip_messages;
};

/// Loads a dataset from a manifest of `sample_id,relative_path,label` rows
/// (no header). Referenced files may be sandbox reports or canonical trace
/// files; unreadable or unparseable files are skipped and counted, while
/// duplicate ids and unknown labels abort the load.
inline LoadResult load_dataset(const std::filesystem::path& directory,
                               const std::filesystem::path& manifest_path) {
    const std::string manifest = read_file(manifest_path);
    LoadResult result;
    result.dataset.provenance = "manifest: " + manifest_path.string();
    std::unordered_set<std::string> seen_ids;

    std::size_t line_no = 0;
    for (const auto& raw_line : split_on(manifest, '\n')) {
        ++line_no;
        const std::string line = strip_cr(raw_line);
        if (line.empty()) continue;
        const auto fields = split_on(line, ',');
        if (fields.size() != 3) {
            throw ManifestError("manifest line " + std::to_string(line_no) +
                                ": expected 'sample_id,relative_path,label'");
        }
        const std::string& sample_id = fields[0];
        const std::string& rel_path = fields[1];
        const Label label = parse_label(fields[2]);
        if (sample_id.empty()) {
            throw ManifestError("manifest line " + std::to_string(line_no) + ": empty sample_id");
        }
        if (!seen_ids.insert(sample_id).second) {
            throw ManifestError("duplicate sample_id: '" + sample_id + "'");
        }

        const std::filesystem::path file = directory / rel_path;
        try {
            const std::string bytes = read_file(file);
            nlohmann::json probe;
            try {
                probe = nlohmann::json::parse(bytes);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError("malformed JSON in " + file.string() + " at byte " +
                                 std::to_string(e.byte));
            }
            Trace trace;
            if (probe.is_object() && probe.contains("calls") && !probe.contains("behavior")) {
                trace = trace_from_json(probe);
                trace.sample_id = sample_id; // manifest is authoritative
                trace.label = label;
            } else {
                trace = parse_report(bytes, label, sample_id);
            }
            result.dataset.traces.push_back(std::move(trace));
        } catch (const IoError& e) {
            ++result.skipped;
            result.skip_messages.push_back(sample_id + ": " + e.what());
        } catch (const ParseError& e) {
            ++result.skipped;
            result.skip_messages.push_back(sample_id + ": " + e.what());
        } catch (const SchemaError& e) {
            ++result.skipped;
            result.skip_messages.push_back(sample_id + ": " + e.what());
        } catch (const EmptyTraceError& e) {
            ++result.skipped;
            result.skip_messages.push_back(sample_id + ": " + e.what());
        }
    }
    return result;
}

} // namespace seqshield
