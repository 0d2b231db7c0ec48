#pragma once

// Candidate commit-issue pairs and their 18 attributes.
//
//   a1  committer of C            a10 committer of C_p
//   a2  assignee of I             a11 committed(C_n) - committed(C)
//   a3  a1 == a2                  a12 overlap(C_n, C)
//   a4  committed(C) - created(I) a13 committer of C_n
//   a5  resolved(I) - committed(C)  a14 |I_exist|
//   a6  created <= committed <= resolved  a15 issues in I_exist with I's assignee
//   a7  |a5| < epsilon_close      a16 links to I from commits before C
//   a8  committed(C) - committed(C_p)  a17 sim(message, issue text)
//   a9  overlap(C_p, C)           a18 max sim(file snapshot, issue text)
//
// C_p is the latest commit linked to I strictly before C, C_n the earliest
// strictly after. Durations are fractional hours. User ids are categorical.
// Only trusted links (explicit tags and human-accepted verdicts) feed a8..a16,
// so classifier output never feeds back into the features.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "traceforge/core/parallel.hpp"
#include "traceforge/model.hpp"
#include "traceforge/textsim.hpp"

namespace traceforge {

struct CandidateConfig {
    double epsilon_candidate_hours = 30.0;
    double epsilon_close_hours = 60.0;
};

inline double hours(std::int64_t seconds) { return static_cast<double>(seconds) / 3600.0; }

inline bool is_candidate(const Commit& c, const Issue& i, const CandidateConfig& cfg = {}) {
    if (c.committed < i.created) return false;
    return hours(c.committed.epoch_seconds - i.resolved.epoch_seconds) <= cfg.epsilon_candidate_hours;
}

/// |A & B| / max(|A|, |B|) over file paths; 0 when either set is empty.
inline double overlap(const Commit& a, const Commit& b) {
    if (a.files.empty() || b.files.empty()) return 0.0;
    std::size_t common = 0;
    auto ia = a.files.begin();
    auto ib = b.files.begin();
    while (ia != a.files.end() && ib != b.files.end()) {
        if (ia->path == ib->path) {
            ++common;
            ++ia;
            ++ib;
        } else if (ia->path < ib->path) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(std::max(a.files.size(), b.files.size()));
}

enum class Label { Linked, NonLinked, Unknown };

inline std::string_view to_string(Label label) {
    switch (label) {
        case Label::Linked: return "Linked";
        case Label::NonLinked: return "NonLinked";
        case Label::Unknown: return "Unknown";
    }
    return "Unknown";
}

struct CandidatePair {
    std::string commit_hash;
    std::string issue_key;
    Label label = Label::Unknown;

    friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

inline constexpr std::size_t kAttributeCount = 18;

/// nullopt is MISSING.
using AttributeVector = std::array<std::optional<double>, kAttributeCount>;

/// Zero-based index of attribute a<n>.
constexpr std::size_t attr(int n) { return static_cast<std::size_t>(n - 1); }

inline std::string attribute_name(std::size_t index) { return "a" + std::to_string(index + 1); }

inline bool is_categorical_attribute(std::size_t index) {
    return index == attr(1) || index == attr(2) || index == attr(10) || index == attr(13);
}

enum class AttributeSet { Process, Similarity, All, Auto };

inline std::string_view to_string(AttributeSet set) {
    switch (set) {
        case AttributeSet::Process: return "Process";
        case AttributeSet::Similarity: return "Similarity";
        case AttributeSet::All: return "All";
        case AttributeSet::Auto: return "Auto";
    }
    return "All";
}

inline AttributeSet attribute_set_from_string(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "process") return AttributeSet::Process;
    if (lower == "similarity" || lower == "sim") return AttributeSet::Similarity;
    if (lower == "all") return AttributeSet::All;
    if (lower == "auto") return AttributeSet::Auto;
    throw ParseError("unknown attribute set '" + std::string(text) + "'");
}

/// Attribute indices of a fixed set. Auto has no fixed list (see selection.hpp).
inline std::vector<std::size_t> fixed_attributes(AttributeSet set) {
    std::vector<std::size_t> out;
    switch (set) {
        case AttributeSet::Process:
            for (int n = 1; n <= 16; ++n) out.push_back(attr(n));
            break;
        case AttributeSet::Similarity:
            out = {attr(6), attr(17), attr(18)};
            break;
        case AttributeSet::All:
            for (int n = 1; n <= 18; ++n) out.push_back(attr(n));
            break;
        case AttributeSet::Auto:
            throw Error("the Auto attribute set is computed from training data");
    }
    return out;
}

inline bool is_trusted(LinkOrigin origin) {
    return origin == LinkOrigin::ExplicitTag || origin == LinkOrigin::HumanAccepted;
}

struct LabelPolicy {
    /// Count HumanAccepted links as Linked training labels.
    bool include_human = false;
};

inline Label label_of(const ProjectStore& store, const std::string& hash, const std::string& key,
                      const LabelPolicy& policy = {}) {
    if (store.has_link(hash, key, LinkOrigin::ExplicitTag)) return Label::Linked;
    if (policy.include_human && store.has_link(hash, key, LinkOrigin::HumanAccepted) &&
        !store.has_link(hash, key, LinkOrigin::HumanRejected)) {
        return Label::Linked;
    }
    return Label::NonLinked;
}

/// All (commit, issue) candidates among the selected commits and issues,
/// sorted by hash then key, labelled per policy.
template <typename CommitPred, typename IssuePred>
std::vector<CandidatePair> generate_candidates(const ProjectStore& store, CommitPred&& commit_pred,
                                               IssuePred&& issue_pred, const CandidateConfig& cfg = {},
                                               const LabelPolicy& policy = {}) {
    std::vector<const Issue*> issues;
    for (const auto& [key, issue] : store.issues) {
        if (issue_pred(issue)) issues.push_back(&issue);
    }
    // Sorted by creation, so each commit scans only issues created before it.
    std::sort(issues.begin(), issues.end(), [](const Issue* a, const Issue* b) {
        return std::tie(a->created, a->key) < std::tie(b->created, b->key);
    });
    std::vector<CandidatePair> out;
    for (const auto& [hash, commit] : store.commits) {
        if (!commit_pred(commit)) continue;
        const auto end = std::upper_bound(issues.begin(), issues.end(), commit.committed,
                                          [](Timestamp t, const Issue* i) { return t < i->created; });
        std::vector<const Issue*> hits;
        for (auto it = issues.begin(); it != end; ++it) {
            if (is_candidate(commit, **it, cfg)) hits.push_back(*it);
        }
        std::sort(hits.begin(), hits.end(), [](const Issue* a, const Issue* b) { return a->key < b->key; });
        for (const Issue* issue : hits) out.push_back({hash, issue->key, label_of(store, hash, issue->key, policy)});
    }
    return out;
}

inline std::vector<CandidatePair> generate_candidates(const ProjectStore& store, const CandidateConfig& cfg = {},
                                                      const LabelPolicy& policy = {}) {
    return generate_candidates(
        store, [](const Commit&) { return true; }, [](const Issue&) { return true; }, cfg, policy);
}

/// Candidate issues of one commit, by key.
inline std::vector<std::string> candidate_issues(const ProjectStore& store, const Commit& commit,
                                                 const CandidateConfig& cfg = {}) {
    std::vector<std::string> out;
    for (const auto& [key, issue] : store.issues) {
        if (is_candidate(commit, issue, cfg)) out.push_back(key);
    }
    return out;
}

/// Computes attribute vectors against one store and corpus index. Document
/// vectors are cached by prepare(); compute() falls back to vectorising on
/// the fly for anything not prepared. Thread-safe after prepare().
class FeatureExtractor {
public:
    FeatureExtractor(const ProjectStore& store, const text::CorpusIndex& index, CandidateConfig cfg = {})
        : store_(store), index_(index), cfg_(cfg) {
        for (const auto& link : store.links()) {
            if (!is_trusted(link.origin)) continue;
            trusted_[link.issue_key].insert(link.commit_hash);
        }
        for (auto& [key, hashes] : trusted_) {
            auto& seq = linked_[key];
            for (const auto& h : hashes) seq.push_back(&store.commit(h));
            std::sort(seq.begin(), seq.end(), [](const Commit* a, const Commit* b) {
                return std::tie(a->committed, a->hash) < std::tie(b->committed, b->hash);
            });
        }
    }

    const CandidateConfig& config() const { return cfg_; }

    /// Vectorises every document the given pairs need.
    void prepare(const std::vector<CandidatePair>& pairs, unsigned jobs = 1) {
        std::set<std::string> keys;
        std::set<std::string> hashes;
        for (const auto& p : pairs) {
            if (!issue_vectors_.count(p.issue_key)) keys.insert(p.issue_key);
            if (!message_vectors_.count(p.commit_hash)) hashes.insert(p.commit_hash);
        }
        std::set<std::string> refs;
        for (const auto& h : hashes) {
            for (const auto& f : store_.commit(h).files) {
                if (!snapshot_vectors_.count(f.content_ref)) refs.insert(f.content_ref);
            }
        }
        fill(issue_vectors_, keys, jobs, [this](const std::string& k) { return text::vectorize(store_.issue(k).text(), index_); });
        fill(message_vectors_, hashes, jobs,
             [this](const std::string& h) { return text::vectorize(store_.commit(h).message, index_); });
        fill(snapshot_vectors_, refs, jobs, [this](const std::string& ref) -> std::optional<text::DocumentVector> {
            auto content = store_.snapshot(ref);
            if (!content) return std::nullopt;
            return text::vectorize(*content, index_);
        });
    }

    AttributeVector compute(const Commit& c, const Issue& i) const {
        AttributeVector a{};
        const UserId committer = c.committer.value_or(UserId::unknown());
        const UserId assignee = i.assignee.value_or(UserId::unknown());

        a[attr(1)] = committer.value;
        a[attr(2)] = assignee.value;
        a[attr(3)] = (!committer.is_unknown() && committer == assignee) ? 1.0 : 0.0;

        const double a4 = hours(c.committed.epoch_seconds - i.created.epoch_seconds);
        const double a5 = hours(i.resolved.epoch_seconds - c.committed.epoch_seconds);
        a[attr(4)] = a4;
        a[attr(5)] = a5;
        a[attr(6)] = (i.created <= c.committed && c.committed <= i.resolved) ? 1.0 : 0.0;
        a[attr(7)] = std::abs(a5) < cfg_.epsilon_close_hours ? 1.0 : 0.0;

        const Commit* prev = nullptr;
        const Commit* next = nullptr;
        std::size_t earlier_links = 0;
        if (auto it = linked_.find(i.key); it != linked_.end()) {
            for (const Commit* other : it->second) {
                if (other->committed < c.committed) {
                    prev = other;
                    ++earlier_links;
                } else if (c.committed < other->committed && !next) {
                    next = other;
                }
            }
        }
        if (prev) {
            a[attr(8)] = hours(c.committed.epoch_seconds - prev->committed.epoch_seconds);
            a[attr(9)] = overlap(*prev, c);
            a[attr(10)] = prev->committer.value_or(UserId::unknown()).value;
        }
        if (next) {
            a[attr(11)] = hours(next->committed.epoch_seconds - c.committed.epoch_seconds);
            a[attr(12)] = overlap(*next, c);
            a[attr(13)] = next->committer.value_or(UserId::unknown()).value;
        }

        std::size_t existing = 0;
        std::size_t same_assignee = 0;
        for (const auto& [key, other] : store_.issues) {
            if (other.created <= c.committed && c.committed <= other.resolved) {
                ++existing;
                if (other.assignee.value_or(UserId::unknown()) == assignee) ++same_assignee;
            }
        }
        a[attr(14)] = static_cast<double>(existing);
        a[attr(15)] = static_cast<double>(same_assignee);
        a[attr(16)] = static_cast<double>(earlier_links);

        text::DocumentVector local_issue, local_msg;
        const auto& issue_vec =
            cached(issue_vectors_, i.key, local_issue, [&] { return text::vectorize(i.text(), index_); });
        const auto& msg_vec =
            cached(message_vectors_, c.hash, local_msg, [&] { return text::vectorize(c.message, index_); });
        a[attr(17)] = text::cosine(msg_vec, issue_vec);

        double best = 0.0;
        for (const auto& f : c.files) {
            const text::DocumentVector* v = nullptr;
            std::optional<text::DocumentVector> local;
            if (auto it = snapshot_vectors_.find(f.content_ref); it != snapshot_vectors_.end()) {
                if (it->second) v = &*it->second;
            } else if (auto content = store_.snapshot(f.content_ref)) {
                local = text::vectorize(*content, index_);
                v = &*local;
            }
            if (!v) {
                ++missing_snapshots_;
                continue;
            }
            best = std::max(best, text::cosine(*v, issue_vec));
        }
        a[attr(18)] = best;
        return a;
    }

    AttributeVector compute(const CandidatePair& pair) const {
        return compute(store_.commit(pair.commit_hash), store_.issue(pair.issue_key));
    }

    std::vector<AttributeVector> compute_all(const std::vector<CandidatePair>& pairs, unsigned jobs = 1) {
        prepare(pairs, jobs);
        std::vector<AttributeVector> out(pairs.size());
        parallel_for(pairs.size(), jobs, [&](std::size_t k) { out[k] = compute(pairs[k]); });
        return out;
    }

    /// Files whose snapshot was unavailable (each contributes 0 to a18).
    std::size_t missing_snapshots() const { return missing_snapshots_.load(); }

private:
    template <typename Map, typename Make>
    void fill(Map& map, const std::set<std::string>& keys, unsigned jobs, Make&& make) {
        const std::vector<std::string> list(keys.begin(), keys.end());
        std::vector<typename Map::mapped_type> values(list.size());
        parallel_for(list.size(), jobs, [&](std::size_t k) { values[k] = make(list[k]); });
        for (std::size_t k = 0; k < list.size(); ++k) map.emplace(list[k], std::move(values[k]));
    }

    template <typename Make>
    static const text::DocumentVector& cached(const std::unordered_map<std::string, text::DocumentVector>& map,
                                              const std::string& key, text::DocumentVector& local, Make&& make) {
        if (auto it = map.find(key); it != map.end()) return it->second;
        local = make();
        return local;
    }

    const ProjectStore& store_;
    const text::CorpusIndex& index_;
    CandidateConfig cfg_;
    std::map<std::string, std::set<std::string>> trusted_;
    std::map<std::string, std::vector<const Commit*>> linked_;
    std::unordered_map<std::string, text::DocumentVector> issue_vectors_;
    std::unordered_map<std::string, text::DocumentVector> message_vectors_;
    std::unordered_map<std::string, std::optional<text::DocumentVector>> snapshot_vectors_;
    mutable std::atomic<std::size_t> missing_snapshots_{0};
};

/// tf-idf corpus: issue texts, commit messages and the distinct snapshots of
/// the selected commits.
template <typename CommitPred, typename IssuePred>
text::CorpusIndex build_corpus_index(const ProjectStore& store, CommitPred&& commit_pred, IssuePred&& issue_pred,
                                     text::NgramRange range = {}) {
    std::vector<std::vector<std::string>> docs;
    for (const auto& [key, issue] : store.issues) {
        if (issue_pred(issue)) docs.push_back(text::document_terms(issue.text(), range));
    }
    std::set<std::string> refs;
    for (const auto& [hash, commit] : store.commits) {
        if (!commit_pred(commit)) continue;
        docs.push_back(text::document_terms(commit.message, range));
        for (const auto& f : commit.files) refs.insert(f.content_ref);
    }
    for (const auto& ref : refs) {
        if (auto content = store.snapshot(ref)) docs.push_back(text::document_terms(*content, range));
    }
    if (docs.empty()) throw DataError("no documents in the training period to build a corpus index from");
    return text::build_index(docs, range);
}

inline text::CorpusIndex build_corpus_index(const ProjectStore& store, text::NgramRange range = {}) {
    return build_corpus_index(
        store, [](const Commit&) { return true; }, [](const Issue&) { return true; }, range);
}

namespace features_detail {

inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace features_detail

/// CSV with header `hash,key,a1..a18,label`; MISSING is an empty cell.
inline void write_feature_csv(std::ostream& out, const std::vector<CandidatePair>& pairs,
                              const std::vector<AttributeVector>& vectors) {
    if (pairs.size() != vectors.size()) throw Error("write_feature_csv: pairs and vectors differ in length");
    out << "hash,key";
    for (std::size_t k = 0; k < kAttributeCount; ++k) out << ',' << attribute_name(k);
    out << ",label\n";
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        out << features_detail::csv_field(pairs[r].commit_hash) << ',' << features_detail::csv_field(pairs[r].issue_key);
        for (const auto& v : vectors[r]) {
            out << ',';
            if (v) out << features_detail::format_number(*v);
        }
        out << ',' << to_string(pairs[r].label) << '\n';
    }
}

}  // namespace traceforge
