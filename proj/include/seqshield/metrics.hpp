#pragma once

#include <algorithm>
#include <cstdint>
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

/// Counts with malicious as the positive class.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

/// Accuracy plus support-weighted precision/recall/F1 over both classes.
/// On binary data weighted recall equals accuracy by construction.
struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionMatrix confusion;

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"accuracy", round4(accuracy)},
            {"precision", round4(precision)},
            {"recall", round4(recall)},
            {"f1", round4(f1)},
            {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp},
                           {"tn", confusion.tn}, {"fn", confusion.fn}}},
        };
    }
};

inline Metrics compute_metrics(std::span<const Label> y_true, std::span<const Label> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("label vectors differ in length: " + std::to_string(y_true.size()) +
                         " vs " + std::to_string(y_pred.size()));
    }
    if (y_true.empty()) throw DomainError("cannot compute metrics on empty label vectors");

    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool truth = y_true[i] == Label::malicious;
        const bool pred = y_pred[i] == Label::malicious;
        if (truth && pred) ++cm.tp;
        else if (!truth && pred) ++cm.fp;
        else if (!truth && !pred) ++cm.tn;
        else ++cm.fn;
    }

    const double total = static_cast<double>(cm.total());
    Metrics m;
    m.confusion = cm;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / total;

    // Per-class precision/recall/F1, then support-weighted average. Classes
    // absent from y_true carry zero weight; undefined ratios count as zero.
    struct PerClass {
        double support, precision, recall, f1;
    };
    const auto per_class = [&](bool positive) -> PerClass {
        const double tp = static_cast<double>(positive ? cm.tp : cm.tn);
        const double fp = static_cast<double>(positive ? cm.fp : cm.fn);
        const double fn = static_cast<double>(positive ? cm.fn : cm.fp);
        const double support = tp + fn;
        const double precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
        const double recall = support > 0.0 ? tp / support : 0.0;
        const double f1 =
            (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        return {support, precision, recall, f1};
    };
    const PerClass neg = per_class(false);
    const PerClass pos = per_class(true);
    m.precision = (neg.support * neg.precision + pos.support * pos.precision) / total;
    m.recall = (neg.support * neg.recall + pos.support * pos.recall) / total;
    m.f1 = (neg.support * neg.f1 + pos.support * pos.f1) / total;
    return m;
}

/// Disjoint train/test id sets covering a dataset, with per-class
/// proportions matching the global ratio to within one sample.
struct Split {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    double ratio = 0.0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        return nlohmann::json{{"train_ids", train_ids},
                              {"test_ids", test_ids},
                              {"ratio", ratio},
                              {"seed", seed}};
    }
};

inline Split stratified_split(std::span<const std::string> ids, std::span<const Label> labels,
                              double ratio, std::uint64_t seed) {
    if (ids.size() != labels.size()) throw ShapeError("ids and labels differ in length");
    if (ratio <= 0.0 || ratio >= 1.0) throw DomainError("split ratio must lie in (0, 1)");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ids.size(); ++i) {
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (const auto& members : by_class) {
        if (members.size() < 2) {
            throw DomainError("stratified split needs at least 2 samples per class");
        }
    }

    // Per-class train counts: floor of the exact share, then hand out the
    // remainder (to hit round(N*ratio) overall) by largest fractional part,
    // ties to the lower class ordinal.
    const auto target_total =
        static_cast<std::size_t>(std::llround(static_cast<double>(ids.size()) * ratio));
    std::size_t take[2];
    double frac[2];
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
        const double exact = static_cast<double>(by_class[c].size()) * ratio;
        take[c] = static_cast<std::size_t>(exact);
        frac[c] = exact - static_cast<double>(take[c]);
        assigned += take[c];
    }
    while (assigned < target_total) {
        const int c = (frac[0] >= frac[1]) ? 0 : 1;
        ++take[c];
        frac[c] = -1.0;
        ++assigned;
    }
    for (int c = 0; c < 2; ++c) {
        // keep both sides of every class non-empty
        take[c] = std::min(take[c], by_class[c].size() - 1);
        take[c] = std::max<std::size_t>(take[c], 1);
    }

    Split split;
    split.ratio = ratio;
    split.seed = seed;
    for (int c = 0; c < 2; ++c) {
        auto members = by_class[c];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(members);
        std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take[c]));
        std::sort(members.begin() + static_cast<std::ptrdiff_t>(take[c]), members.end());
        for (std::size_t i = 0; i < members.size(); ++i) {
            auto& bucket = (i < take[c]) ? split.train_ids : split.test_ids;
            bucket.push_back(ids[members[i]]);
        }
    }
    return split;
}

/// Row indices of `ids` (in their original order) that belong to the given
/// id set.
inline std::vector<std::size_t> rows_for_ids(std::span<const std::string> ids,
                                             std::span<const std::string> wanted) {
    std::unordered_map<std::string_view, std::size_t> positions;
    positions.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) positions.emplace(ids[i], i);
    std::vector<std::size_t> rows;
    rows.reserve(wanted.size());
    for (const auto& id : wanted) {
        const auto it = positions.find(id);
        if (it == positions.end()) throw DomainError("split id not present in matrix: " + id);
        rows.push_back(it->second);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

} // namespace seqshield
