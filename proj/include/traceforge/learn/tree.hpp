#pragma once

// C4.5-style decision tree, following the J48 conventions:
//
// - splits chosen by gain ratio among candidates whose information gain is at
//   least the average gain of all valid candidates;
// - numeric attributes split binary (x <= t) with the MDL penalty
//   log2(#cut points) / W on the gain, each side holding at least
//   clamp(0.1 * W / 2, min_leaf, 25) weight;
// - categorical attributes split multiway over the values seen at the node;
//   a value not seen there stops at the node and uses its distribution;
// - MISSING values travel down every branch with weight proportional to the
//   branch's known weight, at training and prediction time;
// - optional collapse plus pessimistic pruning at confidence CF with subtree
//   raising (upper confidence bound of the binomial error, as in addErrs).
//
// The same builder grows random-forest members: an attribute window restricts
// each node to a random subset, and pruning is off.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "traceforge/core/rng.hpp"
#include "traceforge/learn/dataset.hpp"

namespace traceforge::learn {

struct TreeOptions {
    double min_leaf = 2.0;
    bool prune = true;
    double confidence = 0.25;
    bool subtree_raising = true;
    /// Attributes examined per node; 0 means all.
    std::size_t attrs_per_split = 0;
    std::uint64_t seed = 0;
};

namespace tree_detail {

using Dist = std::array<double, 2>;

inline double log2w(double w) { return w > 0 ? w * std::log2(w) : 0.0; }

/// Sum over bags of W * H(bag), in bits times weight.
inline double weighted_entropy(const std::vector<Dist>& bags) {
    double out = 0.0;
    for (const auto& b : bags) out += log2w(b[0] + b[1]) - log2w(b[0]) - log2w(b[1]);
    return out;
}

inline double total(const Dist& d) { return d[0] + d[1]; }
inline double incorrect(const Dist& d) { return total(d) - std::max(d[0], d[1]); }

/// Upper-bound extra errors for e observed errors in N (C4.5's pessimistic
/// estimate at confidence cf).
inline double add_errs(double n, double e, double cf) {
    if (cf > 0.5) return 0.0;
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (add_errs(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    static const boost::math::normal standard;
    const double z = boost::math::quantile(standard, 1.0 - cf);
    const double f = (e + 0.5) / n;
    const double r = (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
    return r * n - e;
}

struct Item {
    std::size_t row;
    double weight;
};

struct Split {
    int attribute = -1;
    bool categorical = false;
    double threshold = 0.0;
    std::vector<double> categories;  ///< branch values, ascending
    std::vector<double> branch_weights;
    double gain = 0.0;
    double gain_ratio = 0.0;

    bool valid() const { return attribute >= 0; }

    /// Branch of a known value; -1 for a category without a branch.
    int branch_of(double v) const {
        if (!categorical) return v <= threshold ? 0 : 1;
        auto it = std::lower_bound(categories.begin(), categories.end(), v);
        if (it == categories.end() || *it != v) return -1;
        return static_cast<int>(it - categories.begin());
    }
};

struct BuildNode {
    Split split;  ///< attribute < 0 for a leaf
    Dist dist{};
    std::vector<Item> items;
    std::vector<std::unique_ptr<BuildNode>> children;

    bool leaf() const { return children.empty(); }
};

}  // namespace tree_detail

class DecisionTree {
public:
    struct Node {
        int attribute = -1;  ///< -1 for leaves
        bool categorical = false;
        double threshold = 0.0;
        std::vector<double> categories;
        std::vector<int> children;
        std::vector<double> branch_weights;
        std::array<double, 2> dist{};  ///< NonLinked, Linked training weight
    };

    static DecisionTree fit(const Dataset& d, const TreeOptions& opt) {
        d.require_two_classes();
        std::vector<double> weights(d.size(), 1.0);
        return fit(d, opt, weights);
    }

    /// Rows with weight 0 are ignored (bootstrap counts arrive as weights).
    /// A single-class sample yields a single leaf.
    static DecisionTree fit(const Dataset& d, const TreeOptions& opt, const std::vector<double>& weights) {
        using namespace tree_detail;
        if (weights.size() != d.size()) throw Error("tree weights do not match the dataset");
        Builder b{d, opt, Rng(opt.seed)};
        std::vector<Item> items;
        for (std::size_t r = 0; r < d.size(); ++r) {
            if (weights[r] > 0) items.push_back({r, weights[r]});
        }
        auto root = b.grow(std::move(items));
        if (opt.prune) {
            b.collapse(*root);
            b.prune(*root);
        }
        DecisionTree tree;
        tree.schema_ = d.schema;
        tree.flatten(*root);
        return tree;
    }

    /// Weighted class distribution reached by the row, normalised; leaves
    /// without weight use their parent's distribution.
    std::array<double, 2> distribution(const Row& row) const {
        check_row(row);
        std::array<double, 2> acc{};
        walk(0, row, 1.0, {0.5, 0.5}, false, acc);
        return acc;
    }

    /// Laplace-smoothed Linked probability, (w_L + 1) / (w + 2) per leaf.
    double score(const Row& row) const {
        check_row(row);
        std::array<double, 2> acc{};
        walk(0, row, 1.0, {0.5, 0.5}, true, acc);
        return acc[1];
    }

    /// Unsmoothed Linked fraction of the leaf (blend of leaves).
    double leaf_fraction(const Row& row) const { return distribution(row)[1]; }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<AttributeInfo>& schema() const { return schema_; }
    std::size_t leaf_count() const {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.attribute < 0; }));
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& n : nodes_) {
            nlohmann::json j{{"d", n.dist}};
            if (n.attribute >= 0) {
                j["a"] = n.attribute;
                j["bw"] = n.branch_weights;
                j["ch"] = n.children;
                if (n.categorical) j["cats"] = n.categories;
                else j["t"] = n.threshold;
            }
            arr.push_back(std::move(j));
        }
        return nlohmann::json{{"nodes", arr}};
    }

    static DecisionTree from_json(const nlohmann::json& j, std::vector<AttributeInfo> schema) {
        DecisionTree tree;
        tree.schema_ = std::move(schema);
        for (const auto& jn : j.at("nodes")) {
            Node n;
            n.dist = jn.at("d").get<std::array<double, 2>>();
            if (jn.contains("a")) {
                n.attribute = jn.at("a").get<int>();
                if (n.attribute < 0 || static_cast<std::size_t>(n.attribute) >= tree.schema_.size()) {
                    throw ParseError("tree node refers to attribute outside the schema");
                }
                n.branch_weights = jn.at("bw").get<std::vector<double>>();
                n.children = jn.at("ch").get<std::vector<int>>();
                n.categorical = jn.contains("cats");
                if (n.categorical) n.categories = jn.at("cats").get<std::vector<double>>();
                else n.threshold = jn.at("t").get<double>();
            }
            tree.nodes_.push_back(std::move(n));
        }
        if (tree.nodes_.empty()) throw ParseError("empty tree");
        for (const auto& n : tree.nodes_) {
            for (int c : n.children) {
                if (c <= 0 || static_cast<std::size_t>(c) >= tree.nodes_.size()) throw ParseError("bad tree child index");
            }
        }
        return tree;
    }

private:
    struct Builder {
        const Dataset& d;
        const TreeOptions& opt;
        Rng rng;

        using Dist = tree_detail::Dist;
        using Item = tree_detail::Item;
        using Split = tree_detail::Split;
        using BuildNode = tree_detail::BuildNode;

        Dist distribution(const std::vector<Item>& items) const {
            Dist out{};
            for (const auto& it : items) out[d.labels[it.row]] += it.weight;
            return out;
        }

        std::unique_ptr<BuildNode> grow(std::vector<Item> items) {
            auto node = std::make_unique<BuildNode>();
            node->dist = distribution(items);
            const double w = tree_detail::total(node->dist);
            const bool pure = node->dist[0] <= 0 || node->dist[1] <= 0;
            if (!pure && w >= 2 * opt.min_leaf) node->split = choose_split(items);
            if (node->split.valid()) {
                auto parts = partition(node->split, items);
                for (auto& part : parts) node->children.push_back(grow(std::move(part)));
            }
            node->items = std::move(items);
            return node;
        }

        std::vector<std::size_t> window() {
            std::vector<std::size_t> all(d.attribute_count());
            std::iota(all.begin(), all.end(), std::size_t{0});
            if (opt.attrs_per_split == 0 || opt.attrs_per_split >= all.size()) return all;
            rng.shuffle(all);
            return all;
        }

        Split choose_split(const std::vector<Item>& items) {
            const auto order = window();
            const std::size_t k = (opt.attrs_per_split == 0 || opt.attrs_per_split >= order.size())
                                      ? order.size()
                                      : opt.attrs_per_split;
            // Examine the first k of the (shuffled) order; like Weka's random
            // trees, keep drawing further attributes while nothing splits.
            std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
            std::size_t next = k;
            while (true) {
                std::sort(chosen.begin(), chosen.end());
                Split best = select(items, chosen);
                if (best.valid() || next >= order.size()) return best;
                chosen.assign(1, order[next++]);
            }
        }

        Split select(const std::vector<Item>& items, const std::vector<std::size_t>& attributes) const {
            std::vector<Split> candidates;
            double gain_sum = 0.0;
            std::size_t gain_count = 0;
            for (auto a : attributes) {
                Split s = d.schema[a].categorical ? categorical_split(items, a) : numeric_split(items, a);
                if (!s.valid()) continue;
                // Many-valued categorical attributes do not set the bar.
                if (!s.categorical || static_cast<double>(s.categories.size()) < 0.3 * static_cast<double>(items.size())) {
                    gain_sum += s.gain;
                    ++gain_count;
                }
                candidates.push_back(std::move(s));
            }
            Split best;
            if (candidates.empty()) return best;
            const double average = gain_count ? gain_sum / static_cast<double>(gain_count) : 0.0;
            double best_ratio = 0.0;
            for (auto& s : candidates) {
                if (s.gain >= average - 1e-3 && s.gain_ratio > best_ratio) {
                    best_ratio = s.gain_ratio;
                    best = s;
                }
            }
            return best;
        }

        // Gain ratio bookkeeping shared by both split kinds. `bags` are class
        // distributions of the known instances per branch.
        static void finish(Split& s, const std::vector<Dist>& bags, double known_w, double total_w, double penalty) {
            Dist all{};
            for (const auto& b : bags) {
                all[0] += b[0];
                all[1] += b[1];
            }
            const double old_ent = tree_detail::weighted_entropy({all});
            const double new_ent = tree_detail::weighted_entropy(bags);
            const double unknown_rate = (total_w - known_w) / total_w;
            double gain = (1.0 - unknown_rate) * (old_ent - new_ent) / known_w;
            gain -= penalty;
            double split_info = 0.0;
            for (const auto& b : bags) split_info -= tree_detail::log2w(tree_detail::total(b));
            split_info -= tree_detail::log2w(total_w - known_w);
            split_info += tree_detail::log2w(total_w);
            split_info /= total_w;
            if (gain <= 1e-12 || split_info <= 1e-12) {
                s.attribute = -1;
                return;
            }
            s.gain = gain;
            s.gain_ratio = gain / split_info;
            s.branch_weights.clear();
            for (const auto& b : bags) s.branch_weights.push_back(tree_detail::total(b));
        }

        Split numeric_split(const std::vector<Item>& items, std::size_t a) const {
            Split s;
            std::vector<std::pair<double, const Item*>> known;
            double total_w = 0.0;
            for (const auto& it : items) {
                total_w += it.weight;
                if (const auto& v = d.rows[it.row][a]) known.push_back({*v, &it});
            }
            double known_w = 0.0;
            for (const auto& [v, it] : known) known_w += it->weight;
            if (known.size() < 2 || known_w < 2 * opt.min_leaf) return s;
            std::stable_sort(known.begin(), known.end(),
                             [](const auto& x, const auto& y) { return x.first < y.first; });
            const double min_split = std::clamp(0.1 * known_w / 2.0, opt.min_leaf, 25.0);

            Dist right{};
            for (const auto& [v, it] : known) right[d.labels[it->row]] += it->weight;
            Dist left{};
            const double base = tree_detail::weighted_entropy({right});
            double best_gain = -1.0;
            double best_threshold = 0.0;
            Dist best_left{}, best_right{};
            std::size_t cut_points = 0;
            for (std::size_t k = 0; k + 1 < known.size(); ++k) {
                const auto& [v, it] = known[k];
                const int c = d.labels[it->row];
                left[c] += it->weight;
                right[c] -= it->weight;
                if (known[k + 1].first <= v) continue;
                const double lw = tree_detail::total(left);
                const double rw = known_w - lw;
                if (lw < min_split || rw < min_split) continue;
                ++cut_points;
                const double g = base - tree_detail::weighted_entropy({left, right});
                if (g > best_gain + 1e-12) {
                    best_gain = g;
                    best_threshold = v;
                    best_left = left;
                    best_right = right;
                }
            }
            if (cut_points == 0) return s;
            s.attribute = static_cast<int>(a);
            s.threshold = best_threshold;
            finish(s, {best_left, best_right}, known_w, total_w, std::log2(static_cast<double>(cut_points)) / known_w);
            return s;
        }

        Split categorical_split(const std::vector<Item>& items, std::size_t a) const {
            Split s;
            std::map<double, Dist> bags_by_value;
            double total_w = 0.0;
            double known_w = 0.0;
            for (const auto& it : items) {
                total_w += it.weight;
                if (const auto& v = d.rows[it.row][a]) {
                    bags_by_value[*v][d.labels[it.row]] += it.weight;
                    known_w += it.weight;
                }
            }
            std::size_t big = 0;
            for (const auto& [v, b] : bags_by_value) {
                if (tree_detail::total(b) >= opt.min_leaf) ++big;
            }
            if (big < 2) return s;
            std::vector<Dist> bags;
            s.attribute = static_cast<int>(a);
            s.categorical = true;
            for (const auto& [v, b] : bags_by_value) {
                s.categories.push_back(v);
                bags.push_back(b);
            }
            finish(s, bags, known_w, total_w, 0.0);
            return s;
        }

        /// Splits items by `s`; missing values go everywhere, weighted by the
        /// known weight of each branch within these items.
        std::vector<std::vector<Item>> partition(const Split& s, const std::vector<Item>& items) const {
            const std::size_t n = s.categorical ? s.categories.size() : 2;
            std::vector<std::vector<Item>> parts(n);
            std::vector<double> known(n, 0.0);
            std::vector<const Item*> missing;
            for (const auto& it : items) {
                const auto& v = d.rows[it.row][static_cast<std::size_t>(s.attribute)];
                if (!v) {
                    missing.push_back(&it);
                    continue;
                }
                const int b = s.branch_of(*v);
                if (b < 0) {
                    missing.push_back(&it);
                    continue;
                }
                parts[static_cast<std::size_t>(b)].push_back(it);
                known[static_cast<std::size_t>(b)] += it.weight;
            }
            const double known_total = std::accumulate(known.begin(), known.end(), 0.0);
            for (const Item* it : missing) {
                for (std::size_t b = 0; b < n; ++b) {
                    const double share = known_total > 0 ? known[b] / known_total : 1.0 / static_cast<double>(n);
                    if (share > 0) parts[b].push_back({it->row, it->weight * share});
                }
            }
            for (auto& p : parts) {
                std::sort(p.begin(), p.end(), [](const Item& x, const Item& y) { return x.row < y.row; });
            }
            return parts;
        }

        static double training_errors(const BuildNode& node) {
            if (node.leaf()) return tree_detail::incorrect(node.dist);
            double e = 0.0;
            for (const auto& c : node.children) e += training_errors(*c);
            return e;
        }

        void collapse(BuildNode& node) const {
            if (node.leaf()) return;
            if (training_errors(node) >= tree_detail::incorrect(node.dist) - 1e-3) {
                make_leaf(node);
                return;
            }
            for (auto& c : node.children) collapse(*c);
        }

        static void make_leaf(BuildNode& node) {
            node.children.clear();
            node.split = Split{};
        }

        double errors_for(const Dist& dist) const {
            const double n = tree_detail::total(dist);
            if (n <= 0) return 0.0;
            const double e = tree_detail::incorrect(dist);
            return e + tree_detail::add_errs(n, e, opt.confidence);
        }

        double estimated_errors(const BuildNode& node) const {
            if (node.leaf()) return errors_for(node.dist);
            double e = 0.0;
            for (const auto& c : node.children) e += estimated_errors(*c);
            return e;
        }

        double errors_for_branch(const BuildNode& node, const std::vector<Item>& items) const {
            if (node.leaf()) return errors_for(distribution(items));
            auto parts = partition(node.split, items);
            double e = 0.0;
            for (std::size_t b = 0; b < node.children.size(); ++b) e += errors_for_branch(*node.children[b], parts[b]);
            return e;
        }

        /// Re-derives distributions and item lists of a subtree from new items.
        void redistribute(BuildNode& node, std::vector<Item> items) const {
            node.dist = distribution(items);
            if (!node.leaf()) {
                auto parts = partition(node.split, items);
                node.split.branch_weights.assign(parts.size(), 0.0);
                for (std::size_t b = 0; b < parts.size(); ++b) {
                    // Branch weight counts only instances with a known value.
                    for (const auto& it : parts[b]) {
                        const auto& v = d.rows[it.row][static_cast<std::size_t>(node.split.attribute)];
                        if (v && node.split.branch_of(*v) == static_cast<int>(b)) node.split.branch_weights[b] += it.weight;
                    }
                    redistribute(*node.children[b], std::move(parts[b]));
                }
            }
            node.items = std::move(items);
        }

        void prune(BuildNode& node) const {
            if (node.leaf()) return;
            for (auto& c : node.children) prune(*c);
            std::size_t largest = 0;
            for (std::size_t b = 1; b < node.split.branch_weights.size(); ++b) {
                if (node.split.branch_weights[b] > node.split.branch_weights[largest]) largest = b;
            }
            const double errors_largest = opt.subtree_raising
                                              ? errors_for_branch(*node.children[largest], node.items)
                                              : std::numeric_limits<double>::max();
            const double errors_leaf = errors_for(node.dist);
            const double errors_tree = estimated_errors(node);
            if (errors_leaf <= errors_tree + 0.1 && errors_leaf <= errors_largest + 0.1) {
                make_leaf(node);
                return;
            }
            if (errors_largest <= errors_tree + 0.1) {
                auto raised = std::move(node.children[largest]);
                auto items = std::move(node.items);
                node.split = std::move(raised->split);
                node.children = std::move(raised->children);
                redistribute(node, std::move(items));
                prune(node);
            }
        }
    };

    int flatten(const tree_detail::BuildNode& b) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_[static_cast<std::size_t>(id)].dist = b.dist;
        if (!b.leaf()) {
            std::vector<int> kids;
            for (const auto& c : b.children) kids.push_back(flatten(*c));
            auto& n = nodes_[static_cast<std::size_t>(id)];
            n.attribute = b.split.attribute;
            n.categorical = b.split.categorical;
            n.threshold = b.split.threshold;
            n.categories = b.split.categories;
            n.branch_weights = b.split.branch_weights;
            n.children = std::move(kids);
        }
        return id;
    }

    void walk(int id, const Row& row, double weight, std::array<double, 2> parent, bool laplace,
              std::array<double, 2>& acc) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        const double w = n.dist[0] + n.dist[1];
        std::array<double, 2> here = parent;
        if (w > 0) {
            if (laplace) {
                const double p = (n.dist[1] + 1.0) / (w + 2.0);
                here = {1.0 - p, p};
            } else {
                here = {n.dist[0] / w, n.dist[1] / w};
            }
        }
        if (n.attribute < 0) {
            acc[0] += weight * here[0];
            acc[1] += weight * here[1];
            return;
        }
        const auto& v = row[static_cast<std::size_t>(n.attribute)];
        if (v) {
            int b;
            if (n.categorical) {
                auto it = std::lower_bound(n.categories.begin(), n.categories.end(), *v);
                b = (it == n.categories.end() || *it != *v) ? -1 : static_cast<int>(it - n.categories.begin());
            } else {
                b = *v <= n.threshold ? 0 : 1;
            }
            if (b < 0) {  // category unseen at this node
                acc[0] += weight * here[0];
                acc[1] += weight * here[1];
                return;
            }
            walk(n.children[static_cast<std::size_t>(b)], row, weight, here, laplace, acc);
            return;
        }
        const double known = std::accumulate(n.branch_weights.begin(), n.branch_weights.end(), 0.0);
        for (std::size_t b = 0; b < n.children.size(); ++b) {
            const double share = known > 0 ? n.branch_weights[b] / known : 1.0 / static_cast<double>(n.children.size());
            if (share > 0) walk(n.children[b], row, weight * share, here, laplace, acc);
        }
    }

    void check_row(const Row& row) const {
        if (row.size() != schema_.size()) {
            throw DataError("instance has " + std::to_string(row.size()) + " values, model expects " +
                            std::to_string(schema_.size()));
        }
    }

    std::vector<AttributeInfo> schema_;
    std::vector<Node> nodes_;
};

}  // namespace traceforge::learn
