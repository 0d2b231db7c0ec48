#pragma once

// Trained classifiers, the repetition bundle (10 members by default) and
// their on-disk form.
//
// A bundle file is one JSON document:
//
//   {"format": "traceforge-model", "version": 1, "kind": "RandomForest",
//    "attribute_set": "All", "attributes": ["a1", ...],
//    "params": {...}, "members": [{"seed": 42, "counts": {...}, "model": {...}}, ...]}
//
// Member seeds are base_seed .. base_seed + repetitions - 1. Doubles are
// written with round-trip precision so a reloaded bundle scores
// bit-identically.

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "traceforge/core/parallel.hpp"
#include "traceforge/learn/dataset.hpp"
#include "traceforge/learn/forest.hpp"
#include "traceforge/learn/naive_bayes.hpp"
#include "traceforge/learn/tree.hpp"

namespace traceforge::learn {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::size_t kRepetitions = 10;

enum class ClassifierKind { NaiveBayes, DecisionTree, RandomForest };

inline std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::NaiveBayes: return "NaiveBayes";
        case ClassifierKind::DecisionTree: return "DecisionTree";
        case ClassifierKind::RandomForest: return "RandomForest";
    }
    return "RandomForest";
}

inline ClassifierKind classifier_kind_from_string(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "naivebayes" || lower == "nb" || lower == "naive-bayes") return ClassifierKind::NaiveBayes;
    if (lower == "decisiontree" || lower == "tree" || lower == "j48" || lower == "decision-tree") {
        return ClassifierKind::DecisionTree;
    }
    if (lower == "randomforest" || lower == "forest" || lower == "rf" || lower == "random-forest") {
        return ClassifierKind::RandomForest;
    }
    throw ParseError("unknown classifier '" + std::string(text) + "'");
}

struct ClassifierParams {
    ClassifierKind kind = ClassifierKind::RandomForest;
    double pruning_confidence = 0.25;
    double tree_min_leaf = 2.0;
    std::size_t forest_trees = 100;
    std::size_t forest_attrs_per_split = 0;  ///< 0: floor(log2 m) + 1
    bool forest_bootstrap = true;
    /// Members of a bundle, one balanced sub-sample each.
    std::size_t repetitions = kRepetitions;
    std::uint64_t seed = 0;

    void validate() const {
        if (forest_trees < 1) throw DataError("forest size must be at least 1");
        if (repetitions < 1) throw DataError("at least one repetition is needed");
        if (!(pruning_confidence > 0.0 && pruning_confidence < 0.5)) {
            throw DataError("pruning confidence must lie in (0, 0.5)");
        }
    }

    nlohmann::json to_json() const {
        return {{"kind", std::string(to_string(kind))},
                {"pruning_confidence", pruning_confidence},
                {"tree_min_leaf", tree_min_leaf},
                {"forest_trees", forest_trees},
                {"forest_attrs_per_split", forest_attrs_per_split},
                {"forest_bootstrap", forest_bootstrap},
                {"repetitions", repetitions}};
    }

    static ClassifierParams from_json(const nlohmann::json& j) {
        ClassifierParams p;
        p.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
        p.pruning_confidence = j.at("pruning_confidence").get<double>();
        p.tree_min_leaf = j.at("tree_min_leaf").get<double>();
        p.forest_trees = j.at("forest_trees").get<std::size_t>();
        p.forest_attrs_per_split = j.at("forest_attrs_per_split").get<std::size_t>();
        p.forest_bootstrap = j.at("forest_bootstrap").get<bool>();
        p.repetitions = j.value("repetitions", kRepetitions);
        return p;
    }
};

struct TrainingCounts {
    std::size_t linked = 0;
    std::size_t nonlinked = 0;

    friend bool operator==(const TrainingCounts&, const TrainingCounts&) = default;
};

class TrainedModel {
public:
    ClassifierKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    const TrainingCounts& counts() const { return counts_; }
    const std::vector<AttributeInfo>& schema() const { return schema_; }

    /// Linked likelihood in [0, 1]; the label is Linked iff score >= 0.5.
    double score(const Row& row) const {
        if (row.size() != schema_.size()) {
            throw DataError("instance has " + std::to_string(row.size()) + " values, model expects " +
                            std::to_string(schema_.size()) + " (" + schema_names() + ")");
        }
        return std::visit([&](const auto& m) { return m.score(row); }, model_);
    }

    bool classify(const Row& row) const { return score(row) >= 0.5; }

    nlohmann::json to_json() const {
        return {{"seed", seed_},
                {"counts", {{"linked", counts_.linked}, {"nonlinked", counts_.nonlinked}}},
                {"model", std::visit([](const auto& m) { return m.to_json(); }, model_)}};
    }

    static TrainedModel from_json(const nlohmann::json& j, ClassifierKind kind, const std::vector<AttributeInfo>& schema) {
        TrainedModel m;
        m.kind_ = kind;
        m.schema_ = schema;
        m.seed_ = j.at("seed").get<std::uint64_t>();
        m.counts_ = {j.at("counts").at("linked").get<std::size_t>(), j.at("counts").at("nonlinked").get<std::size_t>()};
        const auto& body = j.at("model");
        switch (kind) {
            case ClassifierKind::NaiveBayes: m.model_ = NaiveBayes::from_json(body, schema); break;
            case ClassifierKind::DecisionTree: m.model_ = DecisionTree::from_json(body, schema); break;
            case ClassifierKind::RandomForest: m.model_ = RandomForest::from_json(body, schema); break;
        }
        return m;
    }

    friend TrainedModel train(const ClassifierParams& params, const Dataset& d);

private:
    std::string schema_names() const {
        std::string out;
        for (const auto& a : schema_) out += (out.empty() ? "" : ",") + a.name;
        return out;
    }

    ClassifierKind kind_ = ClassifierKind::RandomForest;
    std::uint64_t seed_ = 0;
    TrainingCounts counts_;
    std::vector<AttributeInfo> schema_;
    std::variant<NaiveBayes, DecisionTree, RandomForest> model_;
};

/// Fits one classifier on an (already balanced) dataset.
inline TrainedModel train(const ClassifierParams& params, const Dataset& d) {
    params.validate();
    d.require_two_classes();
    TrainedModel m;
    m.kind_ = params.kind;
    m.seed_ = params.seed;
    m.schema_ = d.schema;
    m.counts_ = {d.positives(), d.negatives()};
    switch (params.kind) {
        case ClassifierKind::NaiveBayes:
            m.model_ = NaiveBayes::fit(d);
            break;
        case ClassifierKind::DecisionTree: {
            TreeOptions opt;
            opt.min_leaf = params.tree_min_leaf;
            opt.confidence = params.pruning_confidence;
            opt.seed = params.seed;
            m.model_ = DecisionTree::fit(d, opt);
            break;
        }
        case ClassifierKind::RandomForest: {
            ForestOptions opt;
            opt.trees = params.forest_trees;
            opt.attrs_per_split = params.forest_attrs_per_split;
            opt.bootstrap = params.forest_bootstrap;
            opt.seed = params.seed;
            m.model_ = RandomForest::fit(d, opt);
            break;
        }
    }
    return m;
}

inline double predict_score(const TrainedModel& model, const Row& row) { return model.score(row); }

/// One model per balanced sub-sample. `training` is free-form metadata
/// written by the pipeline (scope, split point).
struct RepetitionBundle {
    ClassifierParams params;
    std::string attribute_set = "All";
    std::vector<std::size_t> attributes;  ///< indices into AttributeVector
    std::vector<TrainedModel> members;
    /// Repetitions that had fewer NonLinked than Linked rows to sample from.
    std::size_t short_samples = 0;
    nlohmann::json training = nlohmann::json::object();

    Row project(const AttributeVector& v) const { return learn::project(v, attributes); }

    /// Mean member score.
    double score(const AttributeVector& v) const {
        const Row row = project(v);
        double sum = 0.0;
        for (const auto& m : members) sum += m.score(row);
        return sum / static_cast<double>(members.size());
    }

    double member_score(std::size_t member, const AttributeVector& v) const { return members.at(member).score(project(v)); }

    nlohmann::json to_json() const {
        nlohmann::json names = nlohmann::json::array();
        for (auto a : attributes) names.push_back(attribute_name(a));
        nlohmann::json ms = nlohmann::json::array();
        for (const auto& m : members) ms.push_back(m.to_json());
        return {{"format", "traceforge-model"},
                {"version", kModelFormatVersion},
                {"kind", std::string(to_string(params.kind))},
                {"attribute_set", attribute_set},
                {"attributes", names},
                {"params", params.to_json()},
                {"short_samples", short_samples},
                {"training", training},
                {"members", ms}};
    }

    static RepetitionBundle from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "traceforge-model") throw ParseError("not a traceforge model file");
        if (j.value("version", -1) != kModelFormatVersion) {
            throw ParseError("model format version " + std::to_string(j.value("version", -1)) + " is not supported");
        }
        RepetitionBundle b;
        b.params = ClassifierParams::from_json(j.at("params"));
        b.attribute_set = j.at("attribute_set").get<std::string>();
        b.attributes = attribute_indices(j.at("attributes").get<std::vector<std::string>>());
        b.short_samples = j.value("short_samples", std::size_t{0});
        b.training = j.value("training", nlohmann::json::object());
        const auto schema = schema_for(b.attributes);
        for (const auto& jm : j.at("members")) b.members.push_back(TrainedModel::from_json(jm, b.params.kind, schema));
        if (b.members.size() != b.params.repetitions) {
            throw ParseError("model bundle has " + std::to_string(b.members.size()) + " members, expected " +
                             std::to_string(b.params.repetitions));
        }
        if (!b.members.empty()) b.params.seed = b.members.front().seed();
        return b;
    }

    void save(const std::filesystem::path& file) const {
        std::filesystem::create_directories(file.parent_path());
        std::ofstream out(file, std::ios::trunc);
        if (!out) throw Error("cannot write model " + file.string());
        out << to_json().dump() << "\n";
        if (!out) throw Error("write failed for " + file.string());
    }

    static RepetitionBundle load(const std::filesystem::path& file) {
        std::ifstream in(file);
        if (!in) throw LookupError("no model at " + file.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(file.string() + ": " + e.what());
        }
    }
};

/// Trains params.repetitions models (10 by default) with seeds base_seed,
/// base_seed + 1, ..., each on
/// its own balanced sub-sample of `full` (columns already projected to
/// `attributes`).
inline RepetitionBundle train_repetitions(const ClassifierParams& params, const Dataset& full,
                                          const std::vector<std::size_t>& attributes, std::uint64_t base_seed,
                                          std::string attribute_set = "All", unsigned jobs = 1) {
    params.validate();
    full.require_two_classes();
    if (full.schema != schema_for(attributes)) throw DataError("dataset columns do not match the attribute list");
    RepetitionBundle bundle;
    bundle.params = params;
    bundle.params.seed = base_seed;
    bundle.attribute_set = std::move(attribute_set);
    bundle.attributes = attributes;
    std::vector<std::optional<TrainedModel>> members(params.repetitions);
    std::vector<std::uint8_t> short_flags(params.repetitions, 0);
    parallel_for(params.repetitions, jobs, [&](std::size_t r) {
        const std::uint64_t seed = base_seed + r;
        auto sample = subsample_balance(full, seed);
        short_flags[r] = sample.nonlinked_short ? 1 : 0;
        ClassifierParams p = params;
        p.seed = seed;
        members[r] = train(p, sample.data);
    });
    for (auto& m : members) bundle.members.push_back(std::move(*m));
    bundle.short_samples = static_cast<std::size_t>(std::count(short_flags.begin(), short_flags.end(), std::uint8_t{1}));
    return bundle;
}

}  // namespace traceforge::learn
