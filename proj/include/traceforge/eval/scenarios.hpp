#pragma once

// Scenario 1 (top-k recommendation, F2) and Scenario 2 (score threshold
// augmentation, F0.5) over scored test pairs.
//
// Each pair carries one score per bundle member plus their mean. Both
// scenarios are computed per member and averaged (macro over repetitions);
// that mean is the headline. The same metrics over the mean bundle score are
// reported alongside as "ensemble". Scenario 1 ranks a commit's candidates by
// score, ties by issue key, and keeps the first k. Scenario 2 predicts the
// pairs whose score exceeds the threshold.
//
// Truth comes either from explicit links (the usual setting) or from a
// separate ground truth with the explicit links withheld: then truth is
// ground truth minus explicit links and explicitly linked pairs are left out
// of ranking and prediction, since they need no recovery.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "traceforge/eval/metrics.hpp"
#include "traceforge/features.hpp"
#include "traceforge/learn/model.hpp"

namespace traceforge::eval {

using PairKey = std::pair<std::string, std::string>;  ///< (commit hash, issue key)

struct ScoredPair {
    std::string commit_hash;
    std::string issue_key;
    bool truth = false;
    bool excluded = false;
    std::vector<double> member_scores;
    double score = 0.0;  ///< mean of member_scores
};

/// Scores pairs with every member. With `ground_truth`, truth and exclusion
/// follow the withheld-links rule above; otherwise truth is the pair label.
inline std::vector<ScoredPair> score_pairs(const learn::RepetitionBundle& bundle, const std::vector<CandidatePair>& pairs,
                                           const std::vector<AttributeVector>& vectors,
                                           const std::set<PairKey>* ground_truth = nullptr, unsigned jobs = 1) {
    if (pairs.size() != vectors.size()) throw Error("score_pairs: pairs and vectors differ in length");
    std::vector<ScoredPair> out(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t k) {
        auto& s = out[k];
        s.commit_hash = pairs[k].commit_hash;
        s.issue_key = pairs[k].issue_key;
        const bool explicit_link = pairs[k].label == Label::Linked;
        if (ground_truth) {
            s.excluded = explicit_link;
            s.truth = !explicit_link && ground_truth->count({s.commit_hash, s.issue_key}) > 0;
        } else {
            s.truth = explicit_link;
        }
        const auto row = bundle.project(vectors[k]);
        double sum = 0.0;
        for (const auto& m : bundle.members) {
            s.member_scores.push_back(m.score(row));
            sum += s.member_scores.back();
        }
        s.score = sum / static_cast<double>(bundle.members.size());
    });
    return out;
}

struct ScenarioReport {
    std::string scenario;
    double beta = 1.0;
    double parameter = 0.0;  ///< k or threshold
    std::vector<Metrics> repetitions;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f = 0.0;
    Metrics ensemble;
    /// Which of the above the headline uses; always "repetition-mean".
    std::string headline_source;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    bool precision_undefined = false;

    nlohmann::json to_json() const {
        auto metrics_json = [this](const Metrics& m) {
            return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f", m.f(beta)},
                                  {"retrieved", m.retrieved}, {"relevant", m.relevant}, {"hits", m.hits},
                                  {"precision_undefined", m.precision_undefined}};
        };
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& m : repetitions) reps.push_back(metrics_json(m));
        return {{"scenario", scenario},
                {"beta", beta},
                {scenario == "top-k" ? "k" : "threshold", parameter},
                {"precision", precision},
                {"recall", recall},
                {"f", f},
                {"precision_undefined", precision_undefined},
                {"headline_source", headline_source},
                {"repetition_mean", {{"precision", mean_precision}, {"recall", mean_recall}, {"f", mean_f}}},
                {"ensemble", metrics_json(ensemble)},
                {"repetitions", reps}};
    }
};

namespace scenario_detail {

/// Score of a pair under member r, or the mean for r == npos.
inline double score_of(const ScoredPair& p, std::size_t r) {
    return r == static_cast<std::size_t>(-1) ? p.score : p.member_scores[r];
}

inline void summarise(ScenarioReport& rep) {
    double sp = 0, sr = 0, sf = 0;
    for (const auto& m : rep.repetitions) {
        sp += m.precision;
        sr += m.recall;
        sf += m.f(rep.beta);
    }
    const double n = static_cast<double>(std::max<std::size_t>(rep.repetitions.size(), 1));
    rep.mean_precision = sp / n;
    rep.mean_recall = sr / n;
    rep.mean_f = sf / n;
}

}  // namespace scenario_detail

/// Ranked candidate issues of one commit: score descending, key ascending.
inline std::vector<const ScoredPair*> rank(std::vector<const ScoredPair*> candidates, std::size_t member) {
    std::sort(candidates.begin(), candidates.end(), [member](const ScoredPair* a, const ScoredPair* b) {
        const double sa = scenario_detail::score_of(*a, member);
        const double sb = scenario_detail::score_of(*b, member);
        if (sa != sb) return sa > sb;
        return a->issue_key < b->issue_key;
    });
    return candidates;
}

inline Metrics scenario1_metrics(const std::vector<ScoredPair>& pairs, std::size_t k, std::size_t member) {
    std::map<std::string, std::vector<const ScoredPair*>> by_commit;
    for (const auto& p : pairs) {
        if (!p.excluded) by_commit[p.commit_hash].push_back(&p);
    }
    std::size_t retrieved = 0, relevant = 0, hits = 0;
    for (auto& [hash, list] : by_commit) {
        const auto truths = static_cast<std::size_t>(
            std::count_if(list.begin(), list.end(), [](const ScoredPair* p) { return p->truth; }));
        if (truths == 0) continue;
        relevant += truths;
        const auto ranked = rank(list, member);
        const std::size_t take = std::min(k, ranked.size());
        retrieved += take;
        for (std::size_t r = 0; r < take; ++r) hits += ranked[r]->truth ? 1 : 0;
    }
    return Metrics::from_counts(retrieved, relevant, hits);
}

inline Metrics scenario2_metrics(const std::vector<ScoredPair>& pairs, double threshold, std::size_t member) {
    std::size_t retrieved = 0, relevant = 0, hits = 0;
    for (const auto& p : pairs) {
        if (p.excluded) continue;
        relevant += p.truth ? 1 : 0;
        if (scenario_detail::score_of(p, member) > threshold) {
            ++retrieved;
            hits += p.truth ? 1 : 0;
        }
    }
    return Metrics::from_counts(retrieved, relevant, hits);
}

inline std::size_t member_count(const std::vector<ScoredPair>& pairs) {
    return pairs.empty() ? 0 : pairs.front().member_scores.size();
}

inline void require_truth(const std::vector<ScoredPair>& pairs) {
    if (std::none_of(pairs.begin(), pairs.end(), [](const ScoredPair& p) { return p.truth && !p.excluded; })) {
        throw DataError("the test set contains no truly linked candidate pair");
    }
}

namespace scenario_detail {

template <typename PerMember>
ScenarioReport evaluate(const std::vector<ScoredPair>& pairs, PerMember&& per_member) {
    ScenarioReport rep;
    for (std::size_t r = 0; r < member_count(pairs); ++r) rep.repetitions.push_back(per_member(r));
    rep.ensemble = per_member(static_cast<std::size_t>(-1));
    return rep;
}

inline void headline(ScenarioReport& rep) {
    summarise(rep);
    rep.headline_source = "repetition-mean";
    rep.precision = rep.mean_precision;
    rep.recall = rep.mean_recall;
    rep.f = rep.mean_f;
    rep.precision_undefined = std::all_of(rep.repetitions.begin(), rep.repetitions.end(),
                                          [](const Metrics& m) { return m.precision_undefined; });
}

}  // namespace scenario_detail

inline ScenarioReport evaluate_scenario1(const std::vector<ScoredPair>& pairs, std::size_t k = 3) {
    require_truth(pairs);
    auto rep = scenario_detail::evaluate(pairs, [&](std::size_t r) { return scenario1_metrics(pairs, k, r); });
    rep.scenario = "top-k";
    rep.beta = 2.0;
    rep.parameter = static_cast<double>(k);
    scenario_detail::headline(rep);
    return rep;
}

inline ScenarioReport evaluate_scenario2(const std::vector<ScoredPair>& pairs, double threshold = 0.95) {
    require_truth(pairs);
    auto rep = scenario_detail::evaluate(pairs, [&](std::size_t r) { return scenario2_metrics(pairs, threshold, r); });
    rep.scenario = "threshold";
    rep.beta = 0.5;
    rep.parameter = threshold;
    scenario_detail::headline(rep);
    return rep;
}

}  // namespace traceforge::eval
