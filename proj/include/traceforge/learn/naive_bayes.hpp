#pragma once

// Naive Bayes over mixed attributes.
//
// Numeric: one Gaussian per class. As in Weka, the standard deviation is
// floored at precision / 6 where precision is the mean gap between adjacent
// distinct training values of the attribute (0.01 with fewer than two).
// Categorical: (count + 1) / (n_c + |V| + 1), the extra slot being the OTHER
// bucket that unseen values fall into. MISSING values are skipped both when
// fitting and when scoring. Priors are Laplace-smoothed.

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include <json.hpp>

#include "traceforge/learn/dataset.hpp"

namespace traceforge::learn {

class NaiveBayes {
public:
    struct Gaussian {
        double mean = 0.0;
        double sd = 1.0;
        double weight = 0.0;  ///< observations behind the estimate
    };

    struct AttributeModel {
        bool categorical = false;
        std::array<Gaussian, 2> gaussian{};
        std::set<double> values;                      ///< categories seen in training
        std::array<std::map<double, double>, 2> counts;  ///< per class
        std::array<double, 2> known{};                 ///< non-missing count per class
    };

    static NaiveBayes fit(const Dataset& d) {
        d.require_two_classes();
        NaiveBayes nb;
        nb.class_counts_ = {static_cast<double>(d.negatives()), static_cast<double>(d.positives())};
        for (std::size_t a = 0; a < d.attribute_count(); ++a) {
            AttributeModel m;
            m.categorical = d.schema[a].categorical;
            if (m.categorical) {
                for (std::size_t r = 0; r < d.size(); ++r) {
                    if (!d.rows[r][a]) continue;
                    const double v = *d.rows[r][a];
                    m.values.insert(v);
                    m.counts[d.labels[r]][v] += 1.0;
                    m.known[d.labels[r]] += 1.0;
                }
            } else {
                std::set<double> distinct;
                std::array<double, 2> sum{}, sum_sq{};
                for (std::size_t r = 0; r < d.size(); ++r) {
                    if (!d.rows[r][a]) continue;
                    const double v = *d.rows[r][a];
                    distinct.insert(v);
                    sum[d.labels[r]] += v;
                    sum_sq[d.labels[r]] += v * v;
                    m.known[d.labels[r]] += 1.0;
                }
                double precision = 0.01;
                if (distinct.size() >= 2) {
                    precision = (*distinct.rbegin() - *distinct.begin()) / static_cast<double>(distinct.size() - 1);
                }
                for (int c = 0; c < 2; ++c) {
                    auto& g = m.gaussian[c];
                    g.weight = m.known[c];
                    if (g.weight == 0) continue;
                    g.mean = sum[c] / g.weight;
                    const double var = std::max(0.0, sum_sq[c] / g.weight - g.mean * g.mean);
                    g.sd = std::max(std::sqrt(var), precision / 6.0);
                }
            }
            nb.attributes_.push_back(std::move(m));
        }
        nb.schema_ = d.schema;
        return nb;
    }

    /// Normalised posterior of Linked.
    double score(const Row& row) const {
        check_row(row);
        std::array<double, 2> logp{};
        const double n = class_counts_[0] + class_counts_[1];
        for (int c = 0; c < 2; ++c) logp[c] = std::log((class_counts_[c] + 1.0) / (n + 2.0));
        for (std::size_t a = 0; a < attributes_.size(); ++a) {
            if (!row[a]) continue;
            const auto& m = attributes_[a];
            const double v = *row[a];
            if (m.categorical) {
                const double slots = static_cast<double>(m.values.size()) + 1.0;
                for (int c = 0; c < 2; ++c) {
                    auto it = m.counts[c].find(v);
                    const double count = it == m.counts[c].end() ? 0.0 : it->second;
                    logp[c] += std::log((count + 1.0) / (m.known[c] + slots));
                }
            } else {
                if (m.gaussian[0].weight == 0 || m.gaussian[1].weight == 0) continue;
                for (int c = 0; c < 2; ++c) logp[c] += log_density(m.gaussian[c], v);
            }
        }
        const double hi = std::max(logp[0], logp[1]);
        const double e0 = std::exp(logp[0] - hi);
        const double e1 = std::exp(logp[1] - hi);
        return e1 / (e0 + e1);
    }

    const std::vector<AttributeInfo>& schema() const { return schema_; }
    const std::vector<AttributeModel>& attributes() const { return attributes_; }

    nlohmann::json to_json() const {
        using nlohmann::json;
        json attrs = json::array();
        for (const auto& m : attributes_) {
            json j{{"categorical", m.categorical}, {"known", m.known}};
            if (m.categorical) {
                j["values"] = m.values;
                json counts = json::array();
                for (int c = 0; c < 2; ++c) {
                    json pairs = json::array();
                    for (const auto& [v, n] : m.counts[c]) pairs.push_back({v, n});
                    counts.push_back(pairs);
                }
                j["counts"] = counts;
            } else {
                json g = json::array();
                for (const auto& x : m.gaussian) g.push_back({{"mean", x.mean}, {"sd", x.sd}, {"weight", x.weight}});
                j["gaussian"] = g;
            }
            attrs.push_back(j);
        }
        return json{{"class_counts", class_counts_}, {"attributes", attrs}};
    }

    static NaiveBayes from_json(const nlohmann::json& j, std::vector<AttributeInfo> schema) {
        NaiveBayes nb;
        nb.schema_ = std::move(schema);
        nb.class_counts_ = j.at("class_counts").get<std::array<double, 2>>();
        for (const auto& ja : j.at("attributes")) {
            AttributeModel m;
            m.categorical = ja.at("categorical").get<bool>();
            m.known = ja.at("known").get<std::array<double, 2>>();
            if (m.categorical) {
                m.values = ja.at("values").get<std::set<double>>();
                for (int c = 0; c < 2; ++c) {
                    for (const auto& p : ja.at("counts")[c]) m.counts[c][p[0].get<double>()] = p[1].get<double>();
                }
            } else {
                for (int c = 0; c < 2; ++c) {
                    const auto& g = ja.at("gaussian")[c];
                    m.gaussian[c] = {g.at("mean").get<double>(), g.at("sd").get<double>(), g.at("weight").get<double>()};
                }
            }
            nb.attributes_.push_back(std::move(m));
        }
        if (nb.attributes_.size() != nb.schema_.size()) throw ParseError("naive bayes model does not match its schema");
        return nb;
    }

private:
    static double log_density(const Gaussian& g, double x) {
        constexpr double kLogSqrt2Pi = 0.91893853320467274178;
        const double z = (x - g.mean) / g.sd;
        return -0.5 * z * z - std::log(g.sd) - kLogSqrt2Pi;
    }

    void check_row(const Row& row) const {
        if (row.size() != attributes_.size()) {
            throw DataError("instance has " + std::to_string(row.size()) + " values, model expects " +
                            std::to_string(attributes_.size()));
        }
    }

    std::vector<AttributeInfo> schema_;
    std::vector<AttributeModel> attributes_;
    std::array<double, 2> class_counts_{};
};

}  // namespace traceforge::learn
