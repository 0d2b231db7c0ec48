#pragma once

// Temporal train/test split of one profile.
//
// Improvements are ordered by creation; I_split is the one at index
// ceil(0.8 n) - 1 and t_split = resolved(I_split). The same t_split serves
// both profiles.
//
//   train: committed(C) <= t_split and resolved(I) <= t_split
//   test:  committed(C) >  t_split and created(I)  >  t_split
//
// with I of the profile's kind and (C, I) a candidate pair.

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "traceforge/features.hpp"
#include "traceforge/model.hpp"

namespace traceforge::eval {

struct ProfileSplit {
    IssueKind profile = IssueKind::Bug;
    Timestamp t_split;
    std::string split_issue;  ///< key of I_split
    std::vector<CandidatePair> train;
    std::vector<CandidatePair> test;
};

inline constexpr std::size_t kMinImprovements = 5;

struct SplitPoint {
    Timestamp t_split;
    std::string issue_key;
};

inline SplitPoint compute_split_point(const ProjectStore& store) {
    std::vector<const Issue*> imps;
    for (const auto& [key, issue] : store.issues) {
        if (issue.kind == IssueKind::Improvement) imps.push_back(&issue);
    }
    if (imps.size() < kMinImprovements) {
        throw DataError("need at least " + std::to_string(kMinImprovements) + " improvements to split, have " +
                        std::to_string(imps.size()));
    }
    std::sort(imps.begin(), imps.end(), [](const Issue* a, const Issue* b) {
        return std::tie(a->created, a->key) < std::tie(b->created, b->key);
    });
    const std::size_t index = (imps.size() * 8 + 9) / 10 - 1;  // ceil(0.8 n) - 1
    return {imps[index]->resolved, imps[index]->key};
}

inline bool in_train_period(const Commit& c, Timestamp t_split) { return c.committed <= t_split; }

inline ProfileSplit split_profiles(const ProjectStore& store, IssueKind profile, const CandidateConfig& cfg = {},
                                   const LabelPolicy& policy = {}) {
    const auto point = compute_split_point(store);
    ProfileSplit split;
    split.profile = profile;
    split.t_split = point.t_split;
    split.split_issue = point.issue_key;
    const Timestamp t = point.t_split;
    split.train = generate_candidates(
        store, [t](const Commit& c) { return c.committed <= t; },
        [t, profile](const Issue& i) { return i.kind == profile && i.resolved <= t; }, cfg, policy);
    split.test = generate_candidates(
        store, [t](const Commit& c) { return t < c.committed; },
        [t, profile](const Issue& i) { return i.kind == profile && t < i.created; }, cfg, policy);
    return split;
}

}  // namespace traceforge::eval
