#pragma once

// Retrieval metrics and the two statistics used in the evaluation:
// Mann-Whitney U and Fleiss' kappa.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "traceforge/core/error.hpp"

namespace traceforge::eval {

/// (1 + b^2) p r / (b^2 p + r); 0 when the denominator is 0.
inline double fbeta(double p, double r, double beta) {
    const double b2 = beta * beta;
    const double denom = b2 * p + r;
    return denom == 0.0 ? 0.0 : (1.0 + b2) * p * r / denom;
}

struct Metrics {
    std::size_t retrieved = 0;
    std::size_t relevant = 0;
    std::size_t hits = 0;
    double precision = 1.0;
    double recall = 0.0;
    /// Nothing retrieved: precision is reported as 1.0.
    bool precision_undefined = true;

    static Metrics from_counts(std::size_t retrieved, std::size_t relevant, std::size_t hits) {
        Metrics m;
        m.retrieved = retrieved;
        m.relevant = relevant;
        m.hits = hits;
        m.precision_undefined = retrieved == 0;
        m.precision = retrieved == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(retrieved);
        m.recall = relevant == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(relevant);
        return m;
    }

    double f(double beta) const { return fbeta(precision, recall, beta); }
};

struct MannWhitneyResult {
    double u = 0.0;  ///< U of the first sample
    double p_value = 1.0;
    bool exact = false;
};

namespace metrics_detail {

inline std::vector<double> midranks(const std::vector<double>& pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    std::vector<double> ranks(pooled.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

}  // namespace metrics_detail

/// Two-sided test with midranks for ties. Exact permutation distribution of U
/// when both samples have at most 8 values, otherwise the normal
/// approximation with tie and continuity correction.
inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DataError("Mann-Whitney U needs two non-empty samples");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = metrics_detail::midranks(pooled);
    const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
    const double d1 = static_cast<double>(n1);
    const double d2 = static_cast<double>(n2);
    MannWhitneyResult res;
    res.u = r1 - d1 * (d1 + 1.0) / 2.0;
    const double mean = d1 * d2 / 2.0;
    const double observed = std::abs(res.u - mean);

    if (n1 <= 8 && n2 <= 8) {
        // Every way of choosing which n1 of the pooled ranks belong to a.
        const std::size_t n = n1 + n2;
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), true);
        std::size_t total = 0;
        std::size_t extreme = 0;
        std::sort(pick.begin(), pick.end());
        do {
            double r = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (pick[k]) r += ranks[k];
            }
            const double u = r - d1 * (d1 + 1.0) / 2.0;
            ++total;
            if (std::abs(u - mean) >= observed - 1e-9) ++extreme;
        } while (std::next_permutation(pick.begin(), pick.end()));
        res.exact = true;
        res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        return res;
    }

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double n = d1 + d2;
    const double var = d1 * d2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0) {
        res.p_value = 1.0;
        return res;
    }
    const double z = std::max(0.0, observed - 0.5) / std::sqrt(var);
    static const boost::math::normal standard;
    res.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(standard, z)));
    return res;
}

struct KappaResult {
    double kappa = 0.0;
    /// Every rating fell into one category (P_e = 1); kappa reported as 1.0.
    bool undefined = false;
};

/// ratings[i][j]: raters who put item i into category j. Every item must have
/// the same number of raters (at least 2), and there must be at least 2 items.
inline KappaResult fleiss_kappa(const std::vector<std::vector<double>>& ratings) {
    if (ratings.size() < 2) throw DataError("Fleiss kappa needs at least two items");
    const std::size_t k = ratings.front().size();
    const double n = std::accumulate(ratings.front().begin(), ratings.front().end(), 0.0);
    if (n < 2) throw DataError("Fleiss kappa needs at least two raters per item");
    const double big_n = static_cast<double>(ratings.size());
    std::vector<double> column(k, 0.0);
    double p_bar = 0.0;
    for (const auto& row : ratings) {
        if (row.size() != k) throw DataError("rating rows differ in category count");
        const double raters = std::accumulate(row.begin(), row.end(), 0.0);
        if (std::abs(raters - n) > 1e-9) throw DataError("every item needs the same number of raters");
        double sq = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            sq += row[j] * row[j];
            column[j] += row[j];
        }
        p_bar += (sq - n) / (n * (n - 1.0));
    }
    p_bar /= big_n;
    double p_e = 0.0;
    for (double c : column) {
        const double p = c / (big_n * n);
        p_e += p * p;
    }
    KappaResult res;
    if (std::abs(1.0 - p_e) < 1e-12) {
        res.kappa = 1.0;
        res.undefined = true;
        return res;
    }
    res.kappa = (p_bar - p_e) / (1.0 - p_e);
    return res;
}

}  // namespace traceforge::eval
