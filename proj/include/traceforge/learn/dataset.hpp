#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "traceforge/core/error.hpp"
#include "traceforge/core/rng.hpp"
#include "traceforge/features.hpp"

namespace traceforge::learn {

struct AttributeInfo {
    std::string name;
    bool categorical = false;

    friend bool operator==(const AttributeInfo&, const AttributeInfo&) = default;
};

using Value = std::optional<double>;  ///< nullopt is MISSING
using Row = std::vector<Value>;

/// Two-class table. label 1 is Linked, 0 NonLinked.
struct Dataset {
    std::vector<AttributeInfo> schema;
    std::vector<Row> rows;
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return rows.size(); }
    std::size_t attribute_count() const { return schema.size(); }

    std::size_t positives() const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
    }
    std::size_t negatives() const { return size() - positives(); }

    void add(Row row, bool linked) {
        if (row.size() != schema.size()) {
            throw DataError("row has " + std::to_string(row.size()) + " values, schema has " +
                            std::to_string(schema.size()));
        }
        rows.push_back(std::move(row));
        labels.push_back(linked ? 1 : 0);
    }

    void require_two_classes() const {
        if (positives() == 0 || negatives() == 0) {
            throw DataError("training data must contain both Linked and NonLinked instances (have " +
                            std::to_string(positives()) + " Linked, " + std::to_string(negatives()) +
                            " NonLinked)");
        }
    }
};

inline std::vector<AttributeInfo> schema_for(const std::vector<std::size_t>& attributes) {
    std::vector<AttributeInfo> schema;
    for (auto idx : attributes) {
        if (idx >= kAttributeCount) throw Error("attribute index out of range");
        schema.push_back({attribute_name(idx), is_categorical_attribute(idx)});
    }
    return schema;
}

inline Row project(const AttributeVector& v, const std::vector<std::size_t>& attributes) {
    Row row;
    row.reserve(attributes.size());
    for (auto idx : attributes) row.push_back(v[idx]);
    return row;
}

/// Dataset of the labelled pairs (Unknown labels are skipped).
inline Dataset make_dataset(const std::vector<CandidatePair>& pairs, const std::vector<AttributeVector>& vectors,
                            const std::vector<std::size_t>& attributes) {
    if (pairs.size() != vectors.size()) throw Error("make_dataset: pairs and vectors differ in length");
    Dataset d;
    d.schema = schema_for(attributes);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (pairs[k].label == Label::Unknown) continue;
        d.add(project(vectors[k], attributes), pairs[k].label == Label::Linked);
    }
    return d;
}

/// Attribute indices for names such as "a17"; throws naming the first
/// unknown one.
inline std::vector<std::size_t> attribute_indices(const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& name : names) {
        bool found = false;
        for (std::size_t k = 0; k < kAttributeCount; ++k) {
            if (attribute_name(k) == name) {
                out.push_back(k);
                found = true;
                break;
            }
        }
        if (!found) throw DataError("unknown attribute '" + name + "'");
    }
    return out;
}

struct BalancedSample {
    Dataset data;
    /// Fewer NonLinked than Linked instances were available; all were kept.
    bool nonlinked_short = false;
};

/// Keeps every Linked row and a uniform sample without replacement of as many
/// NonLinked rows. Rows keep their original relative order.
inline BalancedSample subsample_balance(const Dataset& d, std::uint64_t seed) {
    const std::size_t pos = d.positives();
    if (pos == 0) throw DataError("cannot balance a dataset without Linked instances");
    std::vector<std::size_t> negatives;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (!d.labels[k]) negatives.push_back(k);
    }
    BalancedSample out;
    out.nonlinked_short = negatives.size() < pos;
    const std::size_t take = std::min(pos, negatives.size());
    // Partial Fisher-Yates: the first `take` slots become the sample.
    Rng rng(seed);
    for (std::size_t k = 0; k < take; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(negatives.size() - k));
        std::swap(negatives[k], negatives[j]);
    }
    std::vector<std::uint8_t> keep(d.size(), 0);
    for (std::size_t k = 0; k < d.size(); ++k) keep[k] = d.labels[k];
    for (std::size_t k = 0; k < take; ++k) keep[negatives[k]] = 1;
    out.data.schema = d.schema;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (keep[k]) {
            out.data.rows.push_back(d.rows[k]);
            out.data.labels.push_back(d.labels[k]);
        }
    }
    return out;
}

}  // namespace traceforge::learn
