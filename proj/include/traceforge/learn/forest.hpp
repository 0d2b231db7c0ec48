#pragma once

// Random forest: bagged, unpruned gain-ratio trees that each examine a random
// attribute subset per node. The score is the mean over trees of the Linked
// fraction at the leaf an instance reaches (a soft vote). With pure leaves,
// as unpruned trees mostly have, this is the fraction of trees voting Linked.

#include <cmath>
#include <vector>

#include <json.hpp>

#include "traceforge/core/rng.hpp"
#include "traceforge/learn/tree.hpp"

namespace traceforge::learn {

struct ForestOptions {
    std::size_t trees = 100;
    /// 0 means floor(log2 m) + 1 for m attributes.
    std::size_t attrs_per_split = 0;
    bool bootstrap = true;
    double min_leaf = 1.0;
    std::uint64_t seed = 0;
};

inline std::size_t default_attrs_per_split(std::size_t m) {
    if (m == 0) return 0;
    return static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(m)))) + 1;
}

class RandomForest {
public:
    static RandomForest fit(const Dataset& d, const ForestOptions& opt) {
        d.require_two_classes();
        if (opt.trees == 0) throw DataError("a forest needs at least one tree");
        RandomForest forest;
        forest.schema_ = d.schema;
        const std::size_t k = opt.attrs_per_split ? opt.attrs_per_split : default_attrs_per_split(d.attribute_count());
        for (std::size_t t = 0; t < opt.trees; ++t) {
            const std::uint64_t tree_seed = derive_seed(opt.seed, t);
            std::vector<double> weights(d.size(), 1.0);
            if (opt.bootstrap) {
                std::fill(weights.begin(), weights.end(), 0.0);
                Rng rng(derive_seed(tree_seed, 0xb007));
                for (std::size_t n = 0; n < d.size(); ++n) weights[rng.below(d.size())] += 1.0;
            }
            TreeOptions topt;
            topt.min_leaf = opt.min_leaf;
            topt.prune = false;
            topt.attrs_per_split = k >= d.attribute_count() ? 0 : k;
            topt.seed = tree_seed;
            forest.trees_.push_back(DecisionTree::fit(d, topt, weights));
        }
        return forest;
    }

    double score(const Row& row) const {
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.leaf_fraction(row);
        return sum / static_cast<double>(trees_.size());
    }

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const std::vector<AttributeInfo>& schema() const { return schema_; }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : trees_) arr.push_back(t.to_json());
        return nlohmann::json{{"trees", arr}};
    }

    static RandomForest from_json(const nlohmann::json& j, std::vector<AttributeInfo> schema) {
        RandomForest forest;
        forest.schema_ = schema;
        for (const auto& jt : j.at("trees")) forest.trees_.push_back(DecisionTree::from_json(jt, schema));
        if (forest.trees_.empty()) throw ParseError("forest without trees");
        return forest;
    }

private:
    std::vector<AttributeInfo> schema_;
    std::vector<DecisionTree> trees_;
};

}  // namespace traceforge::learn
