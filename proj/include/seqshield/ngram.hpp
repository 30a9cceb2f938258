#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "seqshield/errors.hpp"
#include "seqshield/rng.hpp"
#include "seqshield/trace.hpp"
#include "seqshield/util.hpp"

namespace seqshield {

using FeatureId = std::uint32_t;

/// An n-gram is an ordered tuple of API names.
using Gram = std::vector<std::string>;

namespace detail {
// API names are canonical Windows symbols and never contain control bytes,
// so unit-separator joining gives collision-free map keys.
constexpr char kGramSep = '\x1f';

inline std::string gram_key(std::span<const std::string> tokens) {
    std::string key;
    std::size_t total = tokens.size();
    for (const auto& t : tokens) total += t.size();
    key.reserve(total);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) key.push_back(kGramSep);
        key += tokens[i];
    }
    return key;
}
} // namespace detail

/// All contiguous n-grams of `calls` in sequence order, duplicates kept.
/// A sequence shorter than n yields the empty list.
inline std::vector<Gram> extract_ngrams(std::span<const std::string> calls, std::size_t n) {
    if (n < 2) throw DomainError("n-gram order must be at least 2");
    std::vector<Gram> grams;
    if (calls.size() < n) return grams;
    grams.reserve(calls.size() - n + 1);
    for (std::size_t i = 0; i + n <= calls.size(); ++i) {
        grams.emplace_back(calls.begin() + static_cast<std::ptrdiff_t>(i),
                           calls.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    return grams;
}

inline std::vector<Gram> extract_ngrams(const std::vector<std::string>& calls, std::size_t n) {
    return extract_ngrams(std::span<const std::string>(calls), n);
}

/// Bijective map from distinct training n-grams to contiguous feature
/// indices, assigned in first-occurrence order over traces in dataset order.
class NGramVocab {
public:
    NGramVocab() = default;

    static NGramVocab build(const Dataset& training, std::size_t n) {
        if (n < 2) throw DomainError("n-gram order must be at least 2");
        NGramVocab vocab;
        vocab.n_ = n;
        for (const auto& trace : training.traces) {
            const auto names = trace.call_names();
            if (names.size() < n) continue;
            for (std::size_t i = 0; i + n <= names.size(); ++i) {
                std::span<const std::string> window(names.data() + i, n);
                std::string key = detail::gram_key(window);
                if (vocab.index_.find(key) == vocab.index_.end()) {
                    vocab.index_.emplace(std::move(key),
                                         static_cast<FeatureId>(vocab.grams_.size()));
                    vocab.grams_.emplace_back(window.begin(), window.end());
                }
            }
        }
        if (vocab.grams_.empty()) {
            throw DomainError("no training trace long enough to form a single " +
                              std::to_string(n) + "-gram");
        }
        return vocab;
    }

    std::size_t order() const { return n_; }
    std::size_t size() const { return grams_.size(); }

    std::optional<FeatureId> find(std::span<const std::string> tokens) const {
        const auto it = index_.find(detail::gram_key(tokens));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const Gram& gram(FeatureId id) const { return grams_.at(id); }

    /// Content hash; identifies the vocabulary in matrices and models.
    std::string id() const {
        std::uint64_t h = fnv1a64(std::to_string(n_));
        for (const auto& g : grams_) {
            h = splitmix64(h ^ fnv1a64(detail::gram_key(g)));
        }
        return to_hex(h);
    }

    nlohmann::json to_json() const {
        nlohmann::json grams = nlohmann::json::array();
        for (const auto& g : grams_) grams.push_back(g);
        return nlohmann::json{{"format", "seqshield-vocab-v1"},
                              {"n", n_},
                              {"grams", std::move(grams)}};
    }

    static NGramVocab from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("n") || !j.contains("grams")) {
            throw SchemaError("vocabulary document needs 'n' and 'grams'");
        }
        NGramVocab vocab;
        vocab.n_ = j.at("n").get<std::size_t>();
        if (vocab.n_ < 2) throw SchemaError("vocabulary order must be at least 2");
        for (const auto& g : j.at("grams")) {
            Gram gram = g.get<Gram>();
            if (gram.size() != vocab.n_) {
                throw SchemaError("vocabulary gram length does not match order");
            }
            std::string key = detail::gram_key(gram);
            if (!vocab.index_.emplace(std::move(key), static_cast<FeatureId>(vocab.grams_.size()))
                     .second) {
                throw SchemaError("vocabulary contains a duplicate gram");
            }
            vocab.grams_.push_back(std::move(gram));
        }
        if (vocab.grams_.empty()) throw SchemaError("vocabulary is empty");
        return vocab;
    }

    void save(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }

    static NGramVocab load(const std::filesystem::path& path) {
        try {
            return from_json(nlohmann::json::parse(read_file(path)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("malformed vocabulary JSON in " + path.string() + " at byte " +
                             std::to_string(e.byte));
        }
    }

private:
    std::size_t n_ = 0;
    std::vector<Gram> grams_;
    std::unordered_map<std::string, FeatureId> index_;
};

} // namespace seqshield
