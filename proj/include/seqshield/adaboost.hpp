#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqshield/features.hpp"
#include "seqshield/tree.hpp"

namespace seqshield {

struct AdaBoostParams {
    std::uint32_t n_rounds = 50;
    std::uint64_t seed = 0; // kept for interface uniformity; the algorithm is deterministic
};

/// SAMME boosting over depth-1 stumps on binary features. A stump routes
/// value 1 to `label_if_one` and value 0 to the other class. Rounds stop
/// early on a perfect stump (kept with unit weight) or when no stump beats
/// chance.
class AdaBoostStumps {
public:
    struct Stump {
        FeatureId feature = 0;
        Label label_if_one = Label::malicious;
        double alpha = 0.0;
    };

    AdaBoostStumps() = default;

    void fit(const FeatureMatrix& matrix, const AdaBoostParams& params = {}) {
        const std::size_t rows = matrix.row_count();
        if (rows == 0) throw DomainError("cannot fit AdaBoost on an empty matrix");
        params_ = params;
        n_features_ = matrix.feature_count();
        stumps_.clear();

        const auto labels = matrix.labels();
        std::size_t class_counts[2] = {0, 0};
        for (const Label l : labels) ++class_counts[static_cast<std::size_t>(l)];
        if (class_counts[0] == 0 || class_counts[1] == 0) {
            throw DomainError("AdaBoost needs both classes present in training data");
        }
        fallback_label_ = class_counts[1] > class_counts[0] ? Label::malicious : Label::benign;

        // Column-sparse view: rows where each feature is set.
        std::vector<std::vector<std::uint32_t>> columns(n_features_);
        for (std::size_t r = 0; r < rows; ++r) {
            for (const FeatureId f : matrix.row(r).ones) {
                columns[f].push_back(static_cast<std::uint32_t>(r));
            }
        }

        std::vector<double> weights(rows, 1.0 / static_cast<double>(rows));
        trained_ = true;

        for (std::uint32_t round = 0; round < params.n_rounds; ++round) {
            double w_mal_total = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                if (labels[r] == Label::malicious) w_mal_total += weights[r];
            }

            // Best stump: lowest weighted error, ties to the lower feature
            // index and to the malicious-if-one polarity.
            double best_err = 2.0;
            FeatureId best_feature = 0;
            Label best_polarity = Label::malicious;
            for (FeatureId f = 0; f < n_features_; ++f) {
                double w1_mal = 0.0;
                double w1_ben = 0.0;
                for (const std::uint32_t r : columns[f]) {
                    if (labels[r] == Label::malicious) w1_mal += weights[r];
                    else w1_ben += weights[r];
                }
                const double err_mal_if_one = w1_ben + (w_mal_total - w1_mal);
                const double err_ben_if_one = 1.0 - err_mal_if_one;
                if (err_mal_if_one < best_err) {
                    best_err = err_mal_if_one;
                    best_feature = f;
                    best_polarity = Label::malicious;
                }
                if (err_ben_if_one < best_err) {
                    best_err = err_ben_if_one;
                    best_feature = f;
                    best_polarity = Label::benign;
                }
            }

            if (best_err >= 0.5) break;
            if (best_err <= 0.0) {
                stumps_.push_back({best_feature, best_polarity, 1.0});
                break;
            }

            const double alpha = std::log((1.0 - best_err) / best_err);
            stumps_.push_back({best_feature, best_polarity, alpha});

            const double scale = std::exp(alpha);
            double sum = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                const bool is_one = std::binary_search(matrix.row(r).ones.begin(),
                                                       matrix.row(r).ones.end(), best_feature);
                const Label predicted =
                    is_one ? best_polarity
                           : (best_polarity == Label::malicious ? Label::benign : Label::malicious);
                if (predicted != labels[r]) weights[r] *= scale;
                sum += weights[r];
            }
            for (double& w : weights) w /= sum;
        }
    }

    bool trained() const { return trained_; }
    std::size_t feature_count() const { return n_features_; }
    std::size_t rounds_used() const { return stumps_.size(); }
    const std::vector<Stump>& stumps() const { return stumps_; }

    Label predict_row(const RowRecord& row) const {
        if (!trained_) throw StateError("predict called on an untrained AdaBoost model");
        if (stumps_.empty()) return fallback_label_;
        double score = 0.0;
        for (const Stump& s : stumps_) {
            const bool is_one = std::binary_search(row.ones.begin(), row.ones.end(), s.feature);
            const Label predicted =
                is_one ? s.label_if_one
                       : (s.label_if_one == Label::malicious ? Label::benign : Label::malicious);
            score += predicted == Label::malicious ? s.alpha : -s.alpha;
        }
        return score > 0.0 ? Label::malicious : Label::benign;
    }

    std::vector<Label> predict(const FeatureMatrix& matrix) const {
        if (!trained_) throw StateError("predict called on an untrained AdaBoost model");
        if (matrix.feature_count() != n_features_) {
            throw ShapeError("matrix width " + std::to_string(matrix.feature_count()) +
                             " does not match trained width " + std::to_string(n_features_));
        }
        std::vector<Label> out;
        out.reserve(matrix.row_count());
        for (std::size_t i = 0; i < matrix.row_count(); ++i) out.push_back(predict_row(matrix.row(i)));
        return out;
    }

    /// Round-weight (alpha) mass per feature, normalized to sum 1.
    ImportanceVector importances() const {
        if (!trained_) throw StateError("importances requested from an untrained AdaBoost model");
        ImportanceVector imp(n_features_, 0.0);
        double sum = 0.0;
        for (const Stump& s : stumps_) {
            imp[s.feature] += s.alpha;
            sum += s.alpha;
        }
        if (sum > 0.0) {
            for (double& v : imp) {
                if (v != 0.0) v /= sum;
            }
        }
        return imp;
    }

    nlohmann::json to_json() const {
        if (!trained_) throw StateError("cannot serialize an untrained AdaBoost model");
        nlohmann::json stumps = nlohmann::json::array();
        for (const Stump& s : stumps_) {
            stumps.push_back({{"feature", s.feature},
                              {"label_if_one", std::string(label_name(s.label_if_one))},
                              {"alpha", s.alpha}});
        }
        return nlohmann::json{{"n_features", n_features_},
                              {"fallback_label", std::string(label_name(fallback_label_))},
                              {"params", {{"n_rounds", params_.n_rounds}, {"seed", params_.seed}}},
                              {"stumps", std::move(stumps)}};
    }

    static AdaBoostStumps from_json(const nlohmann::json& j) {
        AdaBoostStumps model;
        model.n_features_ = j.at("n_features").get<std::size_t>();
        model.fallback_label_ = parse_label(j.at("fallback_label").get<std::string>());
        model.params_.n_rounds = j.at("params").at("n_rounds").get<std::uint32_t>();
        model.params_.seed = j.at("params").at("seed").get<std::uint64_t>();
        for (const auto& sj : j.at("stumps")) {
            model.stumps_.push_back({sj.at("feature").get<FeatureId>(),
                                     parse_label(sj.at("label_if_one").get<std::string>()),
                                     sj.at("alpha").get<double>()});
        }
        model.trained_ = true;
        return model;
    }

private:
    std::vector<Stump> stumps_;
    AdaBoostParams params_;
    Label fallback_label_ = Label::benign;
    std::size_t n_features_ = 0;
    bool trained_ = false;
};

} // namespace seqshield
