#pragma once

// Correlation-based feature subset selection (the Auto attribute set).
//
// Numeric attributes are discretised against the class with Fayyad & Irani's
// MDL criterion; MISSING forms its own bin. Correlation is symmetric
// uncertainty, SU(X, Y) = 2 (H(X) + H(Y) - H(X, Y)) / (H(X) + H(Y)). A subset
// S of k attributes has merit
//
//   k * mean SU(a, class) / sqrt(k + k (k - 1) * mean SU(a, b)),  a != b in S
//
// Search is best-first forward from the empty set. Each expansion adds one
// attribute to the best open subset; a child must beat the best merit so far
// strictly, ties go to the lowest attribute index, and the search stops after
// 5 consecutive expansions without improvement.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "traceforge/core/error.hpp"
#include "traceforge/learn/dataset.hpp"

namespace traceforge {

namespace selection_detail {

inline double entropy_of(const std::array<double, 2>& d) {
    const double n = d[0] + d[1];
    double h = 0.0;
    for (double c : d) {
        if (c > 0) h -= c / n * std::log2(c / n);
    }
    return h;
}

/// Cut points for sorted (value, class) pairs in [lo, hi).
inline void mdl_cuts(const std::vector<std::pair<double, int>>& v, std::size_t lo, std::size_t hi,
                     std::vector<double>& cuts) {
    const std::size_t n = hi - lo;
    if (n < 2) return;
    std::array<double, 2> all{};
    for (std::size_t k = lo; k < hi; ++k) all[static_cast<std::size_t>(v[k].second)] += 1;
    const double h_all = entropy_of(all);
    std::array<double, 2> left{};
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_at = 0;
    std::array<double, 2> best_left{}, best_right{};
    for (std::size_t k = lo; k + 1 < hi; ++k) {
        left[static_cast<std::size_t>(v[k].second)] += 1;
        if (v[k + 1].first <= v[k].first) continue;
        const std::array<double, 2> right{all[0] - left[0], all[1] - left[1]};
        const double nl = left[0] + left[1];
        const double nr = right[0] + right[1];
        const double e = (nl * entropy_of(left) + nr * entropy_of(right)) / static_cast<double>(n);
        if (e < best) {
            best = e;
            best_at = k;
            best_left = left;
            best_right = right;
        }
    }
    if (!std::isfinite(best)) return;
    auto classes = [](const std::array<double, 2>& d) { return (d[0] > 0 ? 1.0 : 0.0) + (d[1] > 0 ? 1.0 : 0.0); };
    const double gain = h_all - best;
    const double k0 = classes(all), k1 = classes(best_left), k2 = classes(best_right);
    const double delta = std::log2(std::pow(3.0, k0) - 2.0) -
                         (k0 * h_all - k1 * entropy_of(best_left) - k2 * entropy_of(best_right));
    const double nd = static_cast<double>(n);
    if (gain <= (std::log2(nd - 1.0) + delta) / nd) return;
    mdl_cuts(v, lo, best_at + 1, cuts);
    cuts.push_back((v[best_at].first + v[best_at + 1].first) / 2.0);
    mdl_cuts(v, best_at + 1, hi, cuts);
}

/// Column as small integer codes; MISSING is code 0.
inline std::vector<int> discretize(const learn::Dataset& d, std::size_t a) {
    std::vector<int> codes(d.size(), 0);
    if (d.schema[a].categorical) {
        std::map<double, int> ids;
        for (std::size_t r = 0; r < d.size(); ++r) {
            if (const auto& v = d.rows[r][a]) {
                auto [it, inserted] = ids.emplace(*v, static_cast<int>(ids.size()) + 1);
                codes[r] = it->second;
            }
        }
        return codes;
    }
    std::vector<std::pair<double, int>> known;
    for (std::size_t r = 0; r < d.size(); ++r) {
        if (const auto& v = d.rows[r][a]) known.push_back({*v, d.labels[r]});
    }
    std::sort(known.begin(), known.end());
    std::vector<double> cuts;
    mdl_cuts(known, 0, known.size(), cuts);
    for (std::size_t r = 0; r < d.size(); ++r) {
        if (const auto& v = d.rows[r][a]) {
            codes[r] = 1 + static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), *v) - cuts.begin());
        }
    }
    return codes;
}

inline double entropy_codes(const std::vector<int>& x) {
    std::map<int, double> counts;
    for (int v : x) counts[v] += 1;
    const double n = static_cast<double>(x.size());
    double h = 0.0;
    for (const auto& [v, c] : counts) h -= c / n * std::log2(c / n);
    return h;
}

inline double joint_entropy(const std::vector<int>& x, const std::vector<int>& y) {
    std::map<std::pair<int, int>, double> counts;
    for (std::size_t k = 0; k < x.size(); ++k) counts[{x[k], y[k]}] += 1;
    const double n = static_cast<double>(x.size());
    double h = 0.0;
    for (const auto& [v, c] : counts) h -= c / n * std::log2(c / n);
    return h;
}

}  // namespace selection_detail

inline double symmetric_uncertainty(const std::vector<int>& x, const std::vector<int>& y) {
    using namespace selection_detail;
    const double hx = entropy_codes(x);
    const double hy = entropy_codes(y);
    if (hx + hy <= 0) return 0.0;
    return std::clamp(2.0 * (hx + hy - joint_entropy(x, y)) / (hx + hy), 0.0, 1.0);
}

/// Precomputed correlations for CFS over one dataset.
class CfsEvaluator {
public:
    explicit CfsEvaluator(const learn::Dataset& d) : m_(d.attribute_count()) {
        d.require_two_classes();
        std::vector<std::vector<int>> codes;
        for (std::size_t a = 0; a < m_; ++a) codes.push_back(selection_detail::discretize(d, a));
        const std::vector<int> cls(d.labels.begin(), d.labels.end());
        class_corr_.resize(m_);
        pair_corr_.assign(m_, std::vector<double>(m_, 1.0));
        for (std::size_t a = 0; a < m_; ++a) class_corr_[a] = symmetric_uncertainty(codes[a], cls);
        for (std::size_t a = 0; a < m_; ++a) {
            for (std::size_t b = a + 1; b < m_; ++b) {
                pair_corr_[a][b] = pair_corr_[b][a] = symmetric_uncertainty(codes[a], codes[b]);
            }
        }
    }

    double class_correlation(std::size_t a) const { return class_corr_[a]; }
    double attribute_correlation(std::size_t a, std::size_t b) const { return pair_corr_[a][b]; }

    double merit(const std::vector<std::size_t>& subset) const {
        if (subset.empty()) return 0.0;
        double rcf = 0.0;
        double rff = 0.0;
        for (std::size_t i = 0; i < subset.size(); ++i) {
            rcf += class_corr_[subset[i]];
            for (std::size_t j = i + 1; j < subset.size(); ++j) rff += pair_corr_[subset[i]][subset[j]];
        }
        const double k = static_cast<double>(subset.size());
        const double denom = std::sqrt(k + 2.0 * rff);
        return denom > 0 ? rcf / denom : 0.0;
    }

    /// Best-first forward search; returns column indices, ascending.
    std::vector<std::size_t> search(std::size_t max_stale = 5) const {
        struct Open {
            std::vector<std::size_t> subset;
            double merit;
        };
        std::vector<Open> open{{{}, 0.0}};
        std::set<std::vector<std::size_t>> seen{{}};
        std::vector<std::size_t> best;
        double best_merit = 0.0;
        std::size_t stale = 0;
        while (stale < max_stale && !open.empty()) {
            // Highest merit first; among equals the lexicographically smallest subset.
            auto top = std::max_element(open.begin(), open.end(), [](const Open& x, const Open& y) {
                if (x.merit != y.merit) return x.merit < y.merit;
                return x.subset > y.subset;
            });
            const Open current = *top;
            open.erase(top);
            bool improved = false;
            for (std::size_t a = 0; a < m_; ++a) {
                if (std::binary_search(current.subset.begin(), current.subset.end(), a)) continue;
                auto child = current.subset;
                child.insert(std::upper_bound(child.begin(), child.end(), a), a);
                if (!seen.insert(child).second) continue;
                const double m = merit(child);
                open.push_back({child, m});
                if (m > best_merit + 1e-12) {
                    best_merit = m;
                    best = child;
                    improved = true;
                }
            }
            stale = improved ? 0 : stale + 1;
        }
        return best;
    }

private:
    std::size_t m_;
    std::vector<double> class_corr_;
    std::vector<std::vector<double>> pair_corr_;
};

/// Fixed sets return their list; Auto runs CFS over the All attributes of
/// `training` (whose columns must be a1..a18 in order).
inline std::vector<std::size_t> select_attributes(const learn::Dataset& training, AttributeSet set) {
    if (set != AttributeSet::Auto) return fixed_attributes(set);
    if (training.schema != learn::schema_for(fixed_attributes(AttributeSet::All))) {
        throw DataError("Auto selection expects the full a1..a18 attribute table");
    }
    auto picked = CfsEvaluator(training).search();
    if (picked.empty()) throw DataError("attribute selection found no attribute correlated with the class");
    return picked;
}

}  // namespace traceforge
