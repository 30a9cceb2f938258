#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqshield/adaboost.hpp"
#include "seqshield/forest.hpp"
#include "seqshield/tree.hpp"

namespace seqshield {

enum class ClassifierKind { decision_tree, random_forest, adaboost };

inline std::string_view kind_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::decision_tree: return "DT";
        case ClassifierKind::random_forest: return "RF";
        case ClassifierKind::adaboost: return "AdaBoost";
    }
    return "?";
}

inline ClassifierKind parse_kind(std::string_view token) {
    if (token == "DT" || token == "dt" || token == "decision_tree") {
        return ClassifierKind::decision_tree;
    }
    if (token == "RF" || token == "rf" || token == "random_forest") {
        return ClassifierKind::random_forest;
    }
    if (token == "AdaBoost" || token == "adaboost" || token == "ada") {
        return ClassifierKind::adaboost;
    }
    throw ConfigError("unknown classifier kind: '" + std::string(token) + "'");
}

/// Untrained classifier description: kind plus hyperparameters. The seed is
/// the only field the pipeline rewrites (derived per training site).
struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::decision_tree;
    TreeParams tree;
    ForestParams forest;
    AdaBoostParams ada;

    ClassifierConfig with_seed(std::uint64_t seed) const {
        ClassifierConfig c = *this;
        c.tree.seed = seed;
        c.forest.seed = seed;
        c.ada.seed = seed;
        return c;
    }

    static ClassifierConfig decision_tree_default() {
        return ClassifierConfig{ClassifierKind::decision_tree, {}, {}, {}};
    }
    static ClassifierConfig random_forest_default() {
        return ClassifierConfig{ClassifierKind::random_forest, {}, {}, {}};
    }
    static ClassifierConfig adaboost_default() {
        return ClassifierConfig{ClassifierKind::adaboost, {}, {}, {}};
    }
};

/// Trained-model handle shared by the selection loop, evaluation, and the
/// CLI. Implementations throw StateError before fit and ShapeError on
/// width mismatches.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual ClassifierKind kind() const = 0;
    virtual bool trained() const = 0;
    virtual std::size_t feature_count() const = 0;
    virtual void fit(const FeatureMatrix& matrix, unsigned threads) = 0;
    virtual std::vector<Label> predict(const FeatureMatrix& matrix) const = 0;
    virtual ImportanceVector feature_importances() const = 0;
    virtual nlohmann::json model_json() const = 0;

    void fit(const FeatureMatrix& matrix) { fit(matrix, 1); }

    const std::string& vocab_id() const { return vocab_id_; }
    void set_vocab_id(std::string id) { vocab_id_ = std::move(id); }

protected:
    void note_vocab(const FeatureMatrix& matrix) { vocab_id_ = matrix.vocab_id(); }

private:
    std::string vocab_id_;
};

namespace detail {

class TreeClassifier final : public Classifier {
public:
    explicit TreeClassifier(TreeParams params) : params_(params) {}
    explicit TreeClassifier(DecisionTree model) : model_(std::move(model)) {}

    ClassifierKind kind() const override { return ClassifierKind::decision_tree; }
    bool trained() const override { return model_.trained(); }
    std::size_t feature_count() const override { return model_.feature_count(); }

    void fit(const FeatureMatrix& matrix, unsigned) override {
        model_.fit(matrix, params_);
        note_vocab(matrix);
    }
    std::vector<Label> predict(const FeatureMatrix& matrix) const override {
        return model_.predict(matrix);
    }
    ImportanceVector feature_importances() const override {
        if (!model_.trained()) throw StateError("importances requested before fit");
        return model_.importances();
    }
    nlohmann::json model_json() const override { return model_.to_json(); }

    const DecisionTree& tree() const { return model_; }

private:
    TreeParams params_;
    DecisionTree model_;
};

class ForestClassifier final : public Classifier {
public:
    explicit ForestClassifier(ForestParams params) : params_(params) {}
    explicit ForestClassifier(RandomForest model) : model_(std::move(model)) {}

    ClassifierKind kind() const override { return ClassifierKind::random_forest; }
    bool trained() const override { return model_.trained(); }
    std::size_t feature_count() const override { return model_.feature_count(); }

    void fit(const FeatureMatrix& matrix, unsigned threads) override {
        model_.fit(matrix, params_, threads);
        note_vocab(matrix);
    }
    std::vector<Label> predict(const FeatureMatrix& matrix) const override {
        return model_.predict(matrix);
    }
    ImportanceVector feature_importances() const override {
        if (!model_.trained()) throw StateError("importances requested before fit");
        return model_.importances();
    }
    nlohmann::json model_json() const override { return model_.to_json(); }

    const RandomForest& forest() const { return model_; }

private:
    ForestParams params_;
    RandomForest model_;
};

class AdaClassifier final : public Classifier {
public:
    explicit AdaClassifier(AdaBoostParams params) : params_(params) {}
    explicit AdaClassifier(AdaBoostStumps model) : model_(std::move(model)) {}

    ClassifierKind kind() const override { return ClassifierKind::adaboost; }
    bool trained() const override { return model_.trained(); }
    std::size_t feature_count() const override { return model_.feature_count(); }

    void fit(const FeatureMatrix& matrix, unsigned) override {
        model_.fit(matrix, params_);
        note_vocab(matrix);
    }
    std::vector<Label> predict(const FeatureMatrix& matrix) const override {
        return model_.predict(matrix);
    }
    ImportanceVector feature_importances() const override {
        if (!model_.trained()) throw StateError("importances requested before fit");
        return model_.importances();
    }
    nlohmann::json model_json() const override { return model_.to_json(); }

    const AdaBoostStumps& model() const { return model_; }

private:
    AdaBoostParams params_;
    AdaBoostStumps model_;
};

} // namespace detail

inline std::unique_ptr<Classifier> make_classifier(const ClassifierConfig& config) {
    switch (config.kind) {
        case ClassifierKind::decision_tree:
            return std::make_unique<detail::TreeClassifier>(config.tree);
        case ClassifierKind::random_forest:
            return std::make_unique<detail::ForestClassifier>(config.forest);
        case ClassifierKind::adaboost:
            return std::make_unique<detail::AdaClassifier>(config.ada);
    }
    throw ConfigError("unknown classifier kind");
}

// --- model file format ------------------------------------------------------

inline nlohmann::json classifier_to_json(const Classifier& model) {
    return nlohmann::json{{"format", "seqshield-model-v1"},
                          {"kind", std::string(kind_name(model.kind()))},
                          {"vocab_id", model.vocab_id()},
                          {"model", model.model_json()}};
}

inline std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("model")) {
        throw SchemaError("model document needs 'kind' and 'model'");
    }
    const ClassifierKind kind = parse_kind(j.at("kind").get<std::string>());
    std::unique_ptr<Classifier> model;
    switch (kind) {
        case ClassifierKind::decision_tree:
            model = std::make_unique<detail::TreeClassifier>(
                DecisionTree::from_json(j.at("model")));
            break;
        case ClassifierKind::random_forest:
            model = std::make_unique<detail::ForestClassifier>(
                RandomForest::from_json(j.at("model")));
            break;
        case ClassifierKind::adaboost:
            model = std::make_unique<detail::AdaClassifier>(
                AdaBoostStumps::from_json(j.at("model")));
            break;
    }
    struct Access : Classifier {
        using Classifier::set_vocab;
    };
    if (j.contains("vocab_id")) {
        static_cast<Access*>(model.get())->set_vocab(j.at("vocab_id").get<std::string>());
    }
    return model;
}

inline void save_classifier(const std::filesystem::path& path, const Classifier& model) {
    write_file(path, classifier_to_json(model).dump() + "\n");
}

inline std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path) {
    try {
        return classifier_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed model JSON in " + path.string() + " at byte " +
                         std::to_string(e.byte));
    }
}

} // namespace seqshield
