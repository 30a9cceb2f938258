#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqshield/parallel.hpp"
#include "seqshield/tree.hpp"

namespace seqshield {

/// Per-node candidate count strategy for forests.
struct MaxFeatures {
    enum class Kind { sqrt_v, log2_v, all, fraction, count };
    Kind kind = Kind::sqrt_v;
    double value = 0.0; // fraction in (0,1] or absolute count, per kind

    std::uint32_t resolve(std::size_t v) const {
        double m = 0.0;
        switch (kind) {
            case Kind::sqrt_v: m = std::floor(std::sqrt(static_cast<double>(v))); break;
            case Kind::log2_v: m = std::floor(std::log2(static_cast<double>(v))); break;
            case Kind::all: m = static_cast<double>(v); break;
            case Kind::fraction: m = std::floor(value * static_cast<double>(v)); break;
            case Kind::count: m = value; break;
        }
        if (m < 1.0) m = 1.0;
        if (m > static_cast<double>(v)) m = static_cast<double>(v);
        return static_cast<std::uint32_t>(m);
    }

    nlohmann::json to_json() const {
        switch (kind) {
            case Kind::sqrt_v: return "sqrt";
            case Kind::log2_v: return "log2";
            case Kind::all: return "all";
            case Kind::fraction: return value;
            case Kind::count: return static_cast<std::uint64_t>(value);
        }
        return "sqrt";
    }

    static MaxFeatures from_json(const nlohmann::json& j) {
        MaxFeatures mf;
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "sqrt") mf.kind = Kind::sqrt_v;
            else if (s == "log2") mf.kind = Kind::log2_v;
            else if (s == "all") mf.kind = Kind::all;
            else throw ConfigError("unknown max_features strategy: '" + s + "'");
        } else if (j.is_number_float()) {
            mf.kind = Kind::fraction;
            mf.value = j.get<double>();
            if (mf.value <= 0.0 || mf.value > 1.0) {
                throw ConfigError("max_features fraction must lie in (0, 1]");
            }
        } else if (j.is_number_integer()) {
            mf.kind = Kind::count;
            mf.value = static_cast<double>(j.get<std::uint64_t>());
            if (mf.value < 1.0) throw ConfigError("max_features count must be at least 1");
        } else {
            throw ConfigError("max_features must be a strategy name or a number");
        }
        return mf;
    }
};

struct ForestParams {
    std::uint32_t n_trees = 100;
    MaxFeatures max_features;
    bool bootstrap = true;
    std::optional<std::uint32_t> max_depth;
    std::uint32_t min_samples_split = 2;
    std::uint64_t seed = 0;
};

/// Bagged CART ensemble. Tree t draws its bootstrap and per-node feature
/// subsets from an RNG seeded by (seed, t), so training is bit-identical
/// across worker-thread counts. Vote ties go to the lower label ordinal.
class RandomForest {
public:
    RandomForest() = default;

    void fit(const FeatureMatrix& matrix, const ForestParams& params, unsigned threads = 1) {
        if (matrix.row_count() == 0) throw DomainError("cannot fit a forest on an empty matrix");
        if (params.n_trees < 1) throw ConfigError("forest needs at least one tree");
        params_ = params;
        n_features_ = matrix.feature_count();
        trees_.assign(params.n_trees, DecisionTree());

        const std::size_t rows = matrix.row_count();
        const std::uint32_t m = params.max_features.resolve(n_features_);
        parallel_for(params.n_trees, threads, [&](std::size_t t) {
            Rng rng(derive_seed(params_.seed, static_cast<std::uint64_t>(t)));
            std::vector<std::size_t> sample(rows);
            if (params_.bootstrap) {
                for (std::size_t i = 0; i < rows; ++i) sample[i] = rng.uniform_index(rows);
            } else {
                for (std::size_t i = 0; i < rows; ++i) sample[i] = i;
            }
            TreeParams tp;
            tp.max_depth = params_.max_depth;
            tp.min_samples_split = params_.min_samples_split;
            if (m < n_features_) tp.max_features = m;
            tp.seed = rng.next_u64();
            trees_[t].fit_rows(matrix, sample, tp);
        });
    }

    bool trained() const { return !trees_.empty(); }
    std::size_t feature_count() const { return n_features_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }

    std::vector<Label> predict(const FeatureMatrix& matrix) const {
        if (!trained()) throw StateError("predict called on an untrained forest");
        if (matrix.feature_count() != n_features_) {
            throw ShapeError("matrix width " + std::to_string(matrix.feature_count()) +
                             " does not match trained width " + std::to_string(n_features_));
        }
        std::vector<Label> out;
        out.reserve(matrix.row_count());
        for (std::size_t i = 0; i < matrix.row_count(); ++i) {
            std::size_t votes = 0;
            for (const auto& tree : trees_) {
                votes += tree.predict_row(matrix.row(i)) == Label::malicious ? 1 : 0;
            }
            out.push_back(2 * votes > trees_.size() ? Label::malicious : Label::benign);
        }
        return out;
    }

    /// Mean of per-tree normalized MDI vectors, renormalized to sum 1.
    ImportanceVector importances() const {
        if (!trained()) throw StateError("importances requested from an untrained forest");
        ImportanceVector mean(n_features_, 0.0);
        for (const auto& tree : trees_) {
            const ImportanceVector imp = tree.importances();
            for (std::size_t f = 0; f < n_features_; ++f) {
                if (imp[f] != 0.0) mean[f] += imp[f];
            }
        }
        double sum = 0.0;
        for (const double v : mean) sum += v;
        if (sum > 0.0) {
            for (double& v : mean) {
                if (v != 0.0) v /= sum;
            }
        }
        return mean;
    }

    nlohmann::json to_json() const {
        if (!trained()) throw StateError("cannot serialize an untrained forest");
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : trees_) trees.push_back(t.to_json());
        return nlohmann::json{{"n_features", n_features_},
                              {"params",
                               {{"n_trees", params_.n_trees},
                                {"max_features", params_.max_features.to_json()},
                                {"bootstrap", params_.bootstrap},
                                {"min_samples_split", params_.min_samples_split},
                                {"seed", params_.seed}}},
                              {"trees", std::move(trees)}};
    }

    static RandomForest from_json(const nlohmann::json& j) {
        RandomForest forest;
        forest.n_features_ = j.at("n_features").get<std::size_t>();
        const auto& p = j.at("params");
        forest.params_.n_trees = p.at("n_trees").get<std::uint32_t>();
        forest.params_.max_features = MaxFeatures::from_json(p.at("max_features"));
        forest.params_.bootstrap = p.at("bootstrap").get<bool>();
        forest.params_.min_samples_split = p.at("min_samples_split").get<std::uint32_t>();
        forest.params_.seed = p.at("seed").get<std::uint64_t>();
        for (const auto& tj : j.at("trees")) forest.trees_.push_back(DecisionTree::from_json(tj));
        return forest;
    }

private:
    std::vector<DecisionTree> trees_;
    ForestParams params_;
    std::size_t n_features_ = 0;
};

} // namespace seqshield
