#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "seqshield/errors.hpp"
#include "seqshield/ngram.hpp"
#include "seqshield/parallel.hpp"
#include "seqshield/trace.hpp"

namespace seqshield {

struct EncodedRow {
    std::vector<FeatureId> ones; // sorted, unique
    std::size_t oov_grams = 0;   // trace grams absent from the vocabulary
};

/// Presence vector of a single trace against a vocabulary, as the sorted
/// list of set indices. Out-of-vocabulary grams are dropped and counted.
inline EncodedRow encode(const Trace& trace, const NGramVocab& vocab) {
    if (vocab.size() == 0) throw DomainError("cannot encode against an empty vocabulary");
    EncodedRow row;
    const auto names = trace.call_names();
    const std::size_t n = vocab.order();
    if (names.size() < n) return row;
    for (std::size_t i = 0; i + n <= names.size(); ++i) {
        std::span<const std::string> window(names.data() + i, n);
        if (const auto id = vocab.find(window)) {
            row.ones.push_back(*id);
        } else {
            ++row.oov_grams;
        }
    }
    std::sort(row.ones.begin(), row.ones.end());
    row.ones.erase(std::unique(row.ones.begin(), row.ones.end()), row.ones.end());
    return row;
}

struct RowRecord {
    std::string sample_id;
    Label label = Label::benign;
    std::vector<FeatureId> ones; // sorted, unique
};

/// Binary presence matrix with sparse rows. Row order follows dataset order;
/// the column space is the vocabulary that produced it.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t n_features, std::string vocab_id)
        : n_features_(n_features), vocab_id_(std::move(vocab_id)) {}

    static FeatureMatrix encode_dataset(const Dataset& dataset, const NGramVocab& vocab,
                                        unsigned threads = 1) {
        if (dataset.traces.empty()) throw DomainError("cannot encode an empty dataset");
        FeatureMatrix m(vocab.size(), vocab.id());
        m.rows_.resize(dataset.traces.size());
        std::vector<std::size_t> oov(dataset.traces.size(), 0);
        parallel_for(dataset.traces.size(), threads, [&](std::size_t i) {
            const Trace& t = dataset.traces[i];
            EncodedRow row = encode(t, vocab);
            m.rows_[i] = RowRecord{t.sample_id, t.label, std::move(row.ones)};
            oov[i] = row.oov_grams;
        });
        for (const std::size_t c : oov) m.oov_grams_ += c;
        return m;
    }

    std::size_t row_count() const { return rows_.size(); }
    std::size_t feature_count() const { return n_features_; }
    const std::string& vocab_id() const { return vocab_id_; }
    std::size_t oov_grams() const { return oov_grams_; }

    const RowRecord& row(std::size_t i) const { return rows_.at(i); }
    const std::vector<RowRecord>& rows() const { return rows_; }

    void add_row(RowRecord row) {
        for (const FeatureId f : row.ones) {
            if (f >= n_features_) throw ShapeError("row index exceeds matrix width");
        }
        rows_.push_back(std::move(row));
    }

    std::vector<Label> labels() const {
        std::vector<Label> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.label);
        return out;
    }

    std::vector<std::string> sample_ids() const {
        std::vector<std::string> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.sample_id);
        return out;
    }

    std::vector<std::uint8_t> dense_row(std::size_t i) const {
        std::vector<std::uint8_t> dense(n_features_, 0);
        for (const FeatureId f : rows_.at(i).ones) dense[f] = 1;
        return dense;
    }

    FeatureMatrix select_rows(std::span<const std::size_t> indices) const {
        FeatureMatrix out(n_features_, vocab_id_);
        out.rows_.reserve(indices.size());
        for (const std::size_t i : indices) out.rows_.push_back(rows_.at(i));
        return out;
    }

    /// Restriction to a sorted list of original-column ids; the new matrix
    /// indexes columns 0..|columns|-1 in the given order.
    FeatureMatrix restrict_columns(std::span<const FeatureId> columns) const {
        if (columns.empty()) throw DomainError("column restriction must keep at least one column");
        std::unordered_map<FeatureId, FeatureId> remap;
        remap.reserve(columns.size());
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] >= n_features_) throw ShapeError("restriction column out of range");
            if (!remap.emplace(columns[i], static_cast<FeatureId>(i)).second) {
                throw DomainError("restriction columns must be distinct");
            }
        }
        FeatureMatrix out(columns.size(), vocab_id_);
        out.rows_.reserve(rows_.size());
        for (const auto& r : rows_) {
            RowRecord nr{r.sample_id, r.label, {}};
            for (const FeatureId f : r.ones) {
                const auto it = remap.find(f);
                if (it != remap.end()) nr.ones.push_back(it->second);
            }
            std::sort(nr.ones.begin(), nr.ones.end());
            out.rows_.push_back(std::move(nr));
        }
        return out;
    }

    // --- persistence --------------------------------------------------------
    // Line 1: header JSON {format, vocab_id, n, V, R}.
    // Then one `sample_id,label,i1 i2 i3` line per row. Round-trips bit-exactly.

    std::string serialize(std::size_t ngram_order) const {
        nlohmann::json header{{"format", "seqshield-matrix-v1"},
                              {"vocab_id", vocab_id_},
                              {"n", ngram_order},
                              {"V", n_features_},
                              {"R", rows_.size()}};
        std::string out = header.dump();
        out.push_back('\n');
        for (const auto& r : rows_) {
            out += r.sample_id;
            out.push_back(',');
            out += label_name(r.label);
            out.push_back(',');
            for (std::size_t i = 0; i < r.ones.size(); ++i) {
                if (i > 0) out.push_back(' ');
                out += std::to_string(r.ones[i]);
            }
            out.push_back('\n');
        }
        return out;
    }

    struct Loaded {
        FeatureMatrix matrix;
        std::size_t ngram_order = 0;
    };

    static Loaded deserialize(std::string_view text) {
        const auto lines = split_on(text, '\n');
        if (lines.empty()) throw ParseError("empty matrix file");
        nlohmann::json header;
        try {
            header = nlohmann::json::parse(lines[0]);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("malformed matrix header at byte " + std::to_string(e.byte));
        }
        Loaded loaded;
        loaded.ngram_order = header.at("n").get<std::size_t>();
        loaded.matrix = FeatureMatrix(header.at("V").get<std::size_t>(),
                                      header.at("vocab_id").get<std::string>());
        const auto expected_rows = header.at("R").get<std::size_t>();
        for (std::size_t li = 1; li < lines.size(); ++li) {
            const std::string line = strip_cr(lines[li]);
            if (line.empty()) continue;
            const auto fields = split_on(line, ',');
            if (fields.size() != 3) {
                throw ParseError("matrix row " + std::to_string(li) +
                                 ": expected 'sample_id,label,indices'");
            }
            RowRecord row;
            row.sample_id = fields[0];
            row.label = parse_label(fields[1]);
            if (!fields[2].empty()) {
                for (const auto& tok : split_on(fields[2], ' ')) {
                    row.ones.push_back(static_cast<FeatureId>(std::stoul(tok)));
                }
            }
            if (!std::is_sorted(row.ones.begin(), row.ones.end())) {
                throw ParseError("matrix row " + std::to_string(li) + ": indices not sorted");
            }
            loaded.matrix.add_row(std::move(row));
        }
        if (loaded.matrix.row_count() != expected_rows) {
            throw ParseError("matrix row count does not match header R");
        }
        return loaded;
    }

    void save(const std::filesystem::path& path, std::size_t ngram_order) const {
        write_file(path, serialize(ngram_order));
    }

    static Loaded load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

private:
    std::size_t n_features_ = 0;
    std::string vocab_id_;
    std::size_t oov_grams_ = 0;
    std::vector<RowRecord> rows_;
};

} // namespace seqshield
