#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "seqshield/errors.hpp"
#include "seqshield/features.hpp"
#include "seqshield/rng.hpp"

namespace seqshield {

using ImportanceVector = std::vector<double>;

/// Gini impurity 1 - sum_c p_c^2 of a label multiset.
inline double gini_impurity(std::span<const Label> labels) {
    if (labels.empty()) throw DomainError("Gini impurity of an empty label multiset is undefined");
    std::size_t counts[2] = {0, 0};
    for (const Label l : labels) ++counts[static_cast<std::size_t>(l)];
    const double n = static_cast<double>(labels.size());
    const double p0 = static_cast<double>(counts[0]) / n;
    const double p1 = static_cast<double>(counts[1]) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

inline double gini_from_counts(std::uint64_t n0, std::uint64_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(n0) / n;
    const double p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeParams {
    std::optional<std::uint32_t> max_depth;
    std::uint32_t min_samples_split = 2;
    /// Static restriction of the candidate pool (defaults to all features).
    std::optional<std::vector<FeatureId>> feature_subset;
    /// Per-node random draw size from the pool; unset means the whole pool.
    std::optional<std::uint32_t> max_features;
    std::uint64_t seed = 0;
};

/// Flat node storage. Features are binary, so every split sends value 0
/// left and value 1 right.
struct TreeNode {
    static constexpr std::uint32_t kNoChild = 0xffffffffu;

    FeatureId feature = 0;
    std::uint32_t left = kNoChild;
    std::uint32_t right = kNoChild;
    double decrease = 0.0; // weighted impurity decrease of this split
    std::uint64_t n = 0;   // samples that reached the node
    std::uint64_t counts[2] = {0, 0};
    Label leaf_label = Label::benign;

    bool is_leaf() const { return left == kNoChild; }
};

namespace detail {

/// Column-major bit view of a (possibly resampled) row set, one bitmask per
/// feature plus a label mask. Split search then reduces to AND + popcount.
class BitDataset {
public:
    BitDataset(const FeatureMatrix& matrix, std::span<const std::size_t> row_indices)
        : n_rows_(row_indices.size()),
          n_features_(matrix.feature_count()),
          words_((row_indices.size() + 63) / 64),
          columns_(n_features_ * words_, 0),
          labels_(words_, 0) {
        for (std::size_t j = 0; j < row_indices.size(); ++j) {
            const RowRecord& row = matrix.row(row_indices[j]);
            const std::uint64_t bit = 1ULL << (j % 64);
            const std::size_t word = j / 64;
            for (const FeatureId f : row.ones) {
                columns_[static_cast<std::size_t>(f) * words_ + word] |= bit;
            }
            if (row.label == Label::malicious) labels_[word] |= bit;
        }
    }

    std::size_t rows() const { return n_rows_; }
    std::size_t features() const { return n_features_; }
    std::size_t words() const { return words_; }
    const std::uint64_t* column(FeatureId f) const {
        return columns_.data() + static_cast<std::size_t>(f) * words_;
    }
    const std::uint64_t* labels() const { return labels_.data(); }

    std::vector<std::uint64_t> full_mask() const {
        std::vector<std::uint64_t> mask(words_, ~0ULL);
        const std::size_t tail = n_rows_ % 64;
        if (words_ > 0 && tail != 0) mask[words_ - 1] = (1ULL << tail) - 1;
        return mask;
    }

private:
    std::size_t n_rows_;
    std::size_t n_features_;
    std::size_t words_;
    std::vector<std::uint64_t> columns_;
    std::vector<std::uint64_t> labels_;
};

struct SplitChoice {
    FeatureId feature = 0;
    double decrease = -1.0;
    std::uint64_t right_n = 0;
    std::uint64_t right_1 = 0;
};

} // namespace detail

/// CART decision tree over binary features, greedy Gini-decrease splits.
/// Tie-breaks are pinned for determinism: equal decreases go to the lowest
/// feature index, leaf-majority ties to the lower label ordinal.
class DecisionTree {
public:
    DecisionTree() = default;

    void fit(const FeatureMatrix& matrix, const TreeParams& params = {}) {
        std::vector<std::size_t> identity(matrix.row_count());
        for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
        fit_rows(matrix, identity, params);
    }

    /// Fits on an explicit row multiset (bootstrap resamples repeat rows).
    void fit_rows(const FeatureMatrix& matrix, std::span<const std::size_t> row_indices,
                  const TreeParams& params) {
        if (matrix.row_count() == 0 || row_indices.empty()) {
            throw DomainError("cannot fit a tree on an empty matrix");
        }
        params_ = params;
        n_features_ = matrix.feature_count();
        nodes_.clear();

        const detail::BitDataset data(matrix, row_indices);
        Rng rng(params.seed);

        pool_.clear();
        if (params.feature_subset) {
            pool_ = *params.feature_subset;
            std::sort(pool_.begin(), pool_.end());
            for (const FeatureId f : pool_) {
                if (f >= n_features_) throw ShapeError("feature_subset index out of range");
            }
        } else {
            pool_.resize(n_features_);
            for (std::size_t f = 0; f < n_features_; ++f) pool_[f] = static_cast<FeatureId>(f);
        }
        draw_mark_.assign(n_features_, 0);
        draw_epoch_ = 0;

        auto mask = data.full_mask();
        const std::uint64_t n1 = masked_count(mask.data(), data.labels(), data.words());
        build_node(data, mask, row_indices.size(), n1, 0, rng);
        pool_.clear();
        pool_.shrink_to_fit();
        draw_mark_.clear();
        draw_mark_.shrink_to_fit();
    }

    bool trained() const { return !nodes_.empty(); }
    std::size_t feature_count() const { return n_features_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.at(0); }

    std::size_t depth() const { return trained() ? depth_below(0) : 0; }

    Label predict_row(const RowRecord& row) const {
        if (!trained()) throw StateError("predict called on an untrained tree");
        std::uint32_t at = 0;
        for (;;) {
            const TreeNode& node = nodes_[at];
            if (node.is_leaf()) return node.leaf_label;
            const bool set =
                std::binary_search(row.ones.begin(), row.ones.end(), node.feature);
            at = set ? node.right : node.left;
        }
    }

    std::vector<Label> predict(const FeatureMatrix& matrix) const {
        if (!trained()) throw StateError("predict called on an untrained tree");
        if (matrix.feature_count() != n_features_) {
            throw ShapeError("matrix width " + std::to_string(matrix.feature_count()) +
                             " does not match trained width " + std::to_string(n_features_));
        }
        std::vector<Label> out;
        out.reserve(matrix.row_count());
        for (std::size_t i = 0; i < matrix.row_count(); ++i) out.push_back(predict_row(matrix.row(i)));
        return out;
    }

    /// Mean-decrease-in-impurity importances, normalized to sum 1 when the
    /// tree has at least one split. Unused features stay exactly zero.
    ImportanceVector importances() const {
        if (!trained()) throw StateError("importances requested from an untrained tree");
        ImportanceVector imp(n_features_, 0.0);
        const double n_total = static_cast<double>(nodes_[0].n);
        double sum = 0.0;
        for (const TreeNode& node : nodes_) {
            if (node.is_leaf()) continue;
            const double w = (static_cast<double>(node.n) / n_total) * node.decrease;
            imp[node.feature] += w;
            sum += w;
        }
        if (sum > 0.0) {
            for (double& v : imp) {
                if (v != 0.0) v /= sum;
            }
        }
        return imp;
    }

    nlohmann::json to_json() const {
        if (!trained()) throw StateError("cannot serialize an untrained tree");
        return nlohmann::json{{"n_features", n_features_}, {"root", node_to_json(0)}};
    }

    static DecisionTree from_json(const nlohmann::json& j) {
        DecisionTree tree;
        tree.n_features_ = j.at("n_features").get<std::size_t>();
        tree.node_from_json(j.at("root"));
        return tree;
    }

private:
    std::uint64_t masked_count(const std::uint64_t* mask, const std::uint64_t* bits,
                               std::size_t words) const {
        std::uint64_t n = 0;
        for (std::size_t w = 0; w < words; ++w) n += std::popcount(mask[w] & bits[w]);
        return n;
    }

    std::span<const FeatureId> draw_candidates(Rng& rng) {
        if (!params_.max_features || *params_.max_features >= pool_.size()) return pool_;
        const std::uint32_t m = *params_.max_features;
        ++draw_epoch_;
        drawn_.clear();
        drawn_.reserve(m);
        while (drawn_.size() < m) {
            const FeatureId f = pool_[rng.uniform_index(pool_.size())];
            if (draw_mark_[f] != draw_epoch_) {
                draw_mark_[f] = draw_epoch_;
                drawn_.push_back(f);
            }
        }
        std::sort(drawn_.begin(), drawn_.end());
        return drawn_;
    }

    std::uint32_t build_node(const detail::BitDataset& data, std::vector<std::uint64_t>& mask,
                             std::uint64_t n, std::uint64_t n1, std::uint32_t depth, Rng& rng) {
        const std::uint64_t n0 = n - n1;
        const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_[index].n = n;
        nodes_[index].counts[0] = n0;
        nodes_[index].counts[1] = n1;
        nodes_[index].leaf_label = (n1 > n0) ? Label::malicious : Label::benign;

        const bool pure = (n0 == 0 || n1 == 0);
        const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
        if (pure || depth_capped || n < params_.min_samples_split) return index;

        const auto choice = best_split(data, mask.data(), n, n1, rng);
        if (!choice) return index;

        // Partition the node mask; value 0 goes left, value 1 goes right.
        const std::uint64_t* col = data.column(choice->feature);
        std::vector<std::uint64_t> right_mask(data.words());
        for (std::size_t w = 0; w < data.words(); ++w) {
            right_mask[w] = mask[w] & col[w];
            mask[w] &= ~col[w];
        }

        nodes_[index].feature = choice->feature;
        nodes_[index].decrease = choice->decrease;
        const std::uint32_t left =
            build_node(data, mask, n - choice->right_n, n1 - choice->right_1, depth + 1, rng);
        const std::uint32_t right =
            build_node(data, right_mask, choice->right_n, choice->right_1, depth + 1, rng);
        nodes_[index].left = left;
        nodes_[index].right = right;
        return index;
    }

    std::optional<detail::SplitChoice> best_split(const detail::BitDataset& data,
                                                  const std::uint64_t* mask, std::uint64_t n,
                                                  std::uint64_t n1, Rng& rng) {
        const double parent = gini_from_counts(n - n1, n1);
        const std::size_t words = data.words();
        const std::uint64_t* labels = data.labels();

        detail::SplitChoice best;
        bool found = false;
        for (const FeatureId f : draw_candidates(rng)) {
            const std::uint64_t* col = data.column(f);
            std::uint64_t right_n = 0;
            std::uint64_t right_1 = 0;
            for (std::size_t w = 0; w < words; ++w) {
                const std::uint64_t bits = mask[w] & col[w];
                right_n += std::popcount(bits);
                right_1 += std::popcount(bits & labels[w]);
            }
            if (right_n == 0 || right_n == n) continue; // degenerate
            const std::uint64_t left_n = n - right_n;
            const std::uint64_t left_1 = n1 - right_1;
            const double child =
                (static_cast<double>(left_n) * gini_from_counts(left_n - left_1, left_1) +
                 static_cast<double>(right_n) * gini_from_counts(right_n - right_1, right_1)) /
                static_cast<double>(n);
            const double decrease = parent - child;
            if (!found || decrease > best.decrease) {
                best = {f, decrease, right_n, right_1};
                found = true;
            }
        }
        if (!found) return std::nullopt;
        return best;
    }

    std::size_t depth_below(std::uint32_t index) const {
        const TreeNode& node = nodes_[index];
        if (node.is_leaf()) return 0;
        return 1 + std::max(depth_below(node.left), depth_below(node.right));
    }

    nlohmann::json node_to_json(std::uint32_t index) const {
        const TreeNode& node = nodes_[index];
        if (node.is_leaf()) {
            return nlohmann::json{{"label", std::string(label_name(node.leaf_label))},
                                  {"counts", {node.counts[0], node.counts[1]}}};
        }
        return nlohmann::json{{"feature", node.feature},
                              {"decrease", node.decrease},
                              {"n", node.n},
                              {"counts", {node.counts[0], node.counts[1]}},
                              {"left", node_to_json(node.left)},
                              {"right", node_to_json(node.right)}};
    }

    std::uint32_t node_from_json(const nlohmann::json& j) {
        const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        if (j.contains("feature")) {
            nodes_[index].feature = j.at("feature").get<FeatureId>();
            nodes_[index].decrease = j.at("decrease").get<double>();
            nodes_[index].n = j.at("n").get<std::uint64_t>();
            nodes_[index].counts[0] = j.at("counts").at(0).get<std::uint64_t>();
            nodes_[index].counts[1] = j.at("counts").at(1).get<std::uint64_t>();
            nodes_[index].leaf_label =
                nodes_[index].counts[1] > nodes_[index].counts[0] ? Label::malicious : Label::benign;
            const std::uint32_t left = node_from_json(j.at("left"));
            const std::uint32_t right = node_from_json(j.at("right"));
            nodes_[index].left = left;
            nodes_[index].right = right;
        } else {
            nodes_[index].leaf_label = parse_label(j.at("label").get<std::string>());
            nodes_[index].counts[0] = j.at("counts").at(0).get<std::uint64_t>();
            nodes_[index].counts[1] = j.at("counts").at(1).get<std::uint64_t>();
            nodes_[index].n = nodes_[index].counts[0] + nodes_[index].counts[1];
        }
        return index;
    }

    std::vector<TreeNode> nodes_;
    std::size_t n_features_ = 0;
    TreeParams params_;

    // fit-time scratch
    std::vector<FeatureId> pool_;
    std::vector<FeatureId> drawn_;
    std::vector<std::uint32_t> draw_mark_;
    std::uint32_t draw_epoch_ = 0;
};

} // namespace seqshield
