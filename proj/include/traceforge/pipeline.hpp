#pragma once

// End-to-end flows over one project store: profile preparation, training,
// evaluation, and deployment-time scoring against models kept in the archive.
//
// Archive additions:
//
//   models/<profile>/<set>/<kind>.model   repetition bundle (JSON)
//   index/<profile>/                      corpus index the bundle was trained with
//   index/<profile>/scope.json            {"scope": "full"|"split", "t_split": ...}
//
// A bundle records the same scope object under "training"; loading checks
// that bundle and index agree.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "traceforge/archive.hpp"
#include "traceforge/eval/metrics.hpp"
#include "traceforge/eval/scenarios.hpp"
#include "traceforge/eval/split.hpp"
#include "traceforge/features.hpp"
#include "traceforge/features/selection.hpp"
#include "traceforge/learn/model.hpp"
#include "traceforge/textsim.hpp"

namespace traceforge {

struct PipelineConfig {
    CandidateConfig candidates;
    text::NgramRange ngrams;
    learn::ClassifierParams classifier;
    AttributeSet attribute_set = AttributeSet::All;
    LabelPolicy labels;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

inline std::string profile_dir_name(IssueKind kind) { return kind == IssueKind::Bug ? "bug" : "improvement"; }

/// Candidate pairs, their attribute vectors and the index they came from.
struct PreparedProfile {
    IssueKind profile = IssueKind::Bug;
    std::string scope;  ///< "split" or "full"
    std::optional<eval::ProfileSplit> split;
    text::CorpusIndex index;
    std::vector<CandidatePair> train;
    std::vector<AttributeVector> train_vectors;
    std::vector<CandidatePair> test;
    std::vector<AttributeVector> test_vectors;
    std::size_t missing_snapshots = 0;

    nlohmann::json scope_json() const {
        nlohmann::json j{{"scope", scope}, {"profile", std::string(to_string(profile))}};
        if (split) j["t_split"] = format_iso8601(split->t_split);
        return j;
    }
};

/// Temporal split: the index covers the training period only (issues of the
/// profile resolved by t_split, commits up to t_split), so nothing about the
/// test period leaks into idf.
inline PreparedProfile prepare_split_profile(const ProjectStore& store, IssueKind profile, const PipelineConfig& cfg) {
    PreparedProfile p;
    p.profile = profile;
    p.scope = "split";
    p.split = eval::split_profiles(store, profile, cfg.candidates, cfg.labels);
    const Timestamp t = p.split->t_split;
    p.index = build_corpus_index(
        store, [t](const Commit& c) { return c.committed <= t; },
        [t, profile](const Issue& i) { return i.kind == profile && i.resolved <= t; }, cfg.ngrams);
    FeatureExtractor fx(store, p.index, cfg.candidates);
    p.train = p.split->train;
    p.test = p.split->test;
    p.train_vectors = fx.compute_all(p.train, cfg.jobs);
    p.test_vectors = fx.compute_all(p.test, cfg.jobs);
    p.missing_snapshots = fx.missing_snapshots();
    return p;
}

/// Deployment: every candidate pair of the profile trains the model.
inline PreparedProfile prepare_full_profile(const ProjectStore& store, IssueKind profile, const PipelineConfig& cfg) {
    PreparedProfile p;
    p.profile = profile;
    p.scope = "full";
    p.index = build_corpus_index(
        store, [](const Commit&) { return true; }, [profile](const Issue& i) { return i.kind == profile; },
        cfg.ngrams);
    p.train = generate_candidates(
        store, [](const Commit&) { return true; }, [profile](const Issue& i) { return i.kind == profile; },
        cfg.candidates, cfg.labels);
    FeatureExtractor fx(store, p.index, cfg.candidates);
    p.train_vectors = fx.compute_all(p.train, cfg.jobs);
    p.missing_snapshots = fx.missing_snapshots();
    return p;
}

/// Resolves the attribute list (CFS for Auto) and trains the bundle.
inline learn::RepetitionBundle train_profile(const PreparedProfile& p, const PipelineConfig& cfg) {
    const auto all = fixed_attributes(AttributeSet::All);
    std::vector<std::size_t> attrs;
    if (cfg.attribute_set == AttributeSet::Auto) {
        attrs = select_attributes(learn::make_dataset(p.train, p.train_vectors, all), AttributeSet::Auto);
        for (auto& a : attrs) a = all[a];
    } else {
        attrs = fixed_attributes(cfg.attribute_set);
    }
    const auto data = learn::make_dataset(p.train, p.train_vectors, attrs);
    if (data.positives() == 0) {
        throw DataError(std::string(to_string(p.profile)) + " profile has no Linked training pairs");
    }
    auto bundle = learn::train_repetitions(cfg.classifier, data, attrs, cfg.seed,
                                           std::string(to_string(cfg.attribute_set)), cfg.jobs);
    bundle.training = p.scope_json();
    return bundle;
}

struct EvaluationResult {
    IssueKind profile = IssueKind::Bug;
    AttributeSet attribute_set = AttributeSet::All;
    learn::ClassifierKind kind = learn::ClassifierKind::RandomForest;
    std::vector<std::size_t> attributes;
    std::string t_split;
    std::string split_issue;
    std::size_t train_linked = 0, train_nonlinked = 0;
    std::size_t test_pairs = 0, test_truth = 0;
    std::string truth_source;
    std::size_t short_samples = 0;
    std::size_t missing_snapshots = 0;
    eval::ScenarioReport scenario1;
    eval::ScenarioReport scenario2;

    nlohmann::json to_json() const {
        nlohmann::json names = nlohmann::json::array();
        for (auto a : attributes) names.push_back(attribute_name(a));
        return {{"profile", std::string(to_string(profile))},
                {"attribute_set", std::string(to_string(attribute_set))},
                {"classifier", std::string(learn::to_string(kind))},
                {"attributes", names},
                {"t_split", t_split},
                {"split_issue", split_issue},
                {"train", {{"linked", train_linked}, {"nonlinked", train_nonlinked}}},
                {"test", {{"pairs", test_pairs}, {"truly_linked", test_truth}}},
                {"truth_source", truth_source},
                {"short_samples", short_samples},
                {"missing_snapshots", missing_snapshots},
                {"scenario1", scenario1.to_json()},
                {"scenario2", scenario2.to_json()}};
    }
};

/// Trains on the split's training side and scores its test side. With
/// `ground_truth`, truth is the ground truth minus the explicit links.
inline EvaluationResult evaluate_prepared(const PreparedProfile& p, const PipelineConfig& cfg, std::size_t k,
                                          double threshold, const std::set<eval::PairKey>* ground_truth = nullptr) {
    if (!p.split) throw Error("evaluation needs a temporally split profile");
    if (p.test.empty()) throw DataError(std::string(to_string(p.profile)) + " profile has an empty test set");
    const auto bundle = train_profile(p, cfg);
    const auto scored = eval::score_pairs(bundle, p.test, p.test_vectors, ground_truth, cfg.jobs);
    EvaluationResult r;
    r.profile = p.profile;
    r.attribute_set = cfg.attribute_set;
    r.kind = cfg.classifier.kind;
    r.attributes = bundle.attributes;
    r.t_split = format_iso8601(p.split->t_split);
    r.split_issue = p.split->split_issue;
    for (const auto& pair : p.train) {
        if (pair.label == Label::Linked) ++r.train_linked;
        if (pair.label == Label::NonLinked) ++r.train_nonlinked;
    }
    r.test_pairs = p.test.size();
    r.test_truth = static_cast<std::size_t>(
        std::count_if(scored.begin(), scored.end(), [](const eval::ScoredPair& s) { return s.truth && !s.excluded; }));
    r.truth_source = ground_truth ? "ground-truth-withheld" : "explicit-links";
    r.short_samples = bundle.short_samples;
    r.missing_snapshots = p.missing_snapshots;
    r.scenario1 = eval::evaluate_scenario1(scored, k);
    r.scenario2 = eval::evaluate_scenario2(scored, threshold);
    return r;
}

/// Mann-Whitney U on per-repetition F values of two evaluations.
inline nlohmann::json compare_runs(const EvaluationResult& a, const EvaluationResult& b) {
    auto fvalues = [](const eval::ScenarioReport& rep) {
        std::vector<double> out;
        for (const auto& m : rep.repetitions) out.push_back(m.f(rep.beta));
        return out;
    };
    nlohmann::json out{{"a", std::string(to_string(a.attribute_set))},
                       {"b", std::string(to_string(b.attribute_set))},
                       {"profile", std::string(to_string(a.profile))}};
    const auto s1 = eval::mann_whitney_u(fvalues(a.scenario1), fvalues(b.scenario1));
    const auto s2 = eval::mann_whitney_u(fvalues(a.scenario2), fvalues(b.scenario2));
    out["scenario1"] = {{"u", s1.u}, {"p_value", s1.p_value}, {"exact", s1.exact}};
    out["scenario2"] = {{"u", s2.u}, {"p_value", s2.p_value}, {"exact", s2.exact}};
    return out;
}

/// Ground truth file: one {"commit_hash": ..., "issue_key": ...} per line.
inline std::set<eval::PairKey> load_ground_truth(const std::filesystem::path& file) {
    if (!std::filesystem::exists(file)) throw LookupError("no ground truth at " + file.string());
    std::set<eval::PairKey> out;
    archive_detail::for_each_jsonl(file, [&](const nlohmann::json& j) {
        out.insert({j.at("commit_hash").get<std::string>(), j.at("issue_key").get<std::string>()});
    });
    return out;
}

inline void save_ground_truth(const std::set<eval::PairKey>& truth, const std::filesystem::path& file) {
    std::string text;
    for (const auto& [hash, key] : truth) text += nlohmann::json{{"commit_hash", hash}, {"issue_key", key}}.dump() + "\n";
    archive_detail::write_text(file, text);
}

// ---------------------------------------------------------------------------
// Models in the archive

inline std::filesystem::path model_path(const std::filesystem::path& archive, IssueKind profile, AttributeSet set,
                                        learn::ClassifierKind kind) {
    return archive / "models" / profile_dir_name(profile) / std::string(to_string(set)) /
           (std::string(learn::to_string(kind)) + ".model");
}

inline std::filesystem::path index_path(const std::filesystem::path& archive, IssueKind profile) {
    return archive / "index" / profile_dir_name(profile);
}

inline void save_trained(const std::filesystem::path& archive, const PreparedProfile& p,
                         const learn::RepetitionBundle& bundle, AttributeSet set) {
    const auto dir = index_path(archive, p.profile);
    p.index.save(dir);
    archive_detail::write_text(dir / "scope.json", p.scope_json().dump(2) + "\n");
    bundle.save(model_path(archive, p.profile, set, bundle.params.kind));
}

/// A bundle with the index it was trained against.
struct DeployedModel {
    IssueKind profile = IssueKind::Bug;
    learn::RepetitionBundle bundle;
    text::CorpusIndex index;
};

inline std::optional<DeployedModel> load_deployed(const std::filesystem::path& archive, IssueKind profile,
                                                  AttributeSet set, learn::ClassifierKind kind) {
    const auto file = model_path(archive, profile, set, kind);
    if (!std::filesystem::exists(file)) return std::nullopt;
    DeployedModel m;
    m.profile = profile;
    m.bundle = learn::RepetitionBundle::load(file);
    const auto dir = index_path(archive, profile);
    m.index = text::CorpusIndex::load(dir);
    const auto scope = nlohmann::json::parse(archive_detail::read_text(dir / "scope.json"));
    if (scope != m.bundle.training) {
        throw DataError("model " + file.string() + " was trained with a different corpus index; retrain the profile");
    }
    return m;
}

/// Models of both profiles for one (set, kind); at least one must exist.
inline std::vector<DeployedModel> load_models(const std::filesystem::path& archive, AttributeSet set,
                                              learn::ClassifierKind kind) {
    std::vector<DeployedModel> out;
    for (auto profile : {IssueKind::Bug, IssueKind::Improvement}) {
        if (auto m = load_deployed(archive, profile, set, kind)) out.push_back(std::move(*m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deployment-time scoring

struct ScoredIssue {
    std::string issue_key;
    double score = 0.0;
    IssueKind profile = IssueKind::Bug;
};

/// Scores every candidate issue of `commit`; each issue is scored by the
/// model of its own kind, kinds without a model are skipped. Sorted by score
/// descending, key ascending.
inline std::vector<ScoredIssue> score_commit(const ProjectStore& store, const std::vector<DeployedModel>& models,
                                             const std::string& hash, const CandidateConfig& cfg = {}) {
    const auto& commit = store.commit(hash);
    std::vector<ScoredIssue> out;
    for (const auto& m : models) {
        FeatureExtractor fx(store, m.index, cfg);
        for (const auto& [key, issue] : store.issues) {
            if (issue.kind != m.profile || !is_candidate(commit, issue, cfg)) continue;
            out.push_back({key, m.bundle.score(fx.compute(commit, issue)), m.profile});
        }
    }
    std::sort(out.begin(), out.end(), [](const ScoredIssue& a, const ScoredIssue& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.issue_key < b.issue_key;
    });
    return out;
}

inline std::vector<ScoredIssue> recommend(const ProjectStore& store, const std::vector<DeployedModel>& models,
                                          const std::string& hash, std::size_t k, const CandidateConfig& cfg = {}) {
    auto all = score_commit(store, models, hash, cfg);
    if (all.size() > k) all.resize(k);
    return all;
}

/// Commits without a trusted (explicit or human-accepted) link.
inline std::vector<std::string> unlinked_commits(const ProjectStore& store) {
    std::set<std::string> linked;
    for (const auto& link : store.links()) {
        if (is_trusted(link.origin)) linked.insert(link.commit_hash);
    }
    std::vector<std::string> out;
    for (const auto& [hash, commit] : store.commits) {
        if (!linked.count(hash)) out.push_back(hash);
    }
    return out;
}

/// Scores for all candidates of the given commits, computed in parallel.
inline std::map<std::string, std::vector<ScoredIssue>> score_commits(const ProjectStore& store,
                                                                     const std::vector<DeployedModel>& models,
                                                                     const std::vector<std::string>& hashes,
                                                                     const CandidateConfig& cfg, unsigned jobs) {
    std::vector<std::vector<ScoredIssue>> scored(hashes.size());
    // One extractor per model, prepared once, shared read-only by the workers.
    std::vector<std::unique_ptr<FeatureExtractor>> extractors;
    std::vector<std::vector<CandidatePair>> pairs(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto profile = models[m].profile;
        const std::set<std::string> wanted(hashes.begin(), hashes.end());
        pairs[m] = generate_candidates(
            store, [&wanted](const Commit& c) { return wanted.count(c.hash) > 0; },
            [profile](const Issue& i) { return i.kind == profile; }, cfg);
        extractors.push_back(std::make_unique<FeatureExtractor>(store, models[m].index, cfg));
        extractors.back()->prepare(pairs[m], jobs);
    }
    std::map<std::string, std::size_t> slot;
    for (std::size_t k = 0; k < hashes.size(); ++k) slot[hashes[k]] = k;
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<double> scores(pairs[m].size());
        parallel_for(pairs[m].size(), jobs,
                     [&](std::size_t k) { scores[k] = models[m].bundle.score(extractors[m]->compute(pairs[m][k])); });
        for (std::size_t k = 0; k < pairs[m].size(); ++k) {
            scored[slot.at(pairs[m][k].commit_hash)].push_back({pairs[m][k].issue_key, scores[k], models[m].profile});
        }
    }
    std::map<std::string, std::vector<ScoredIssue>> out;
    for (std::size_t k = 0; k < hashes.size(); ++k) {
        auto& list = scored[k];
        std::sort(list.begin(), list.end(), [](const ScoredIssue& a, const ScoredIssue& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.issue_key < b.issue_key;
        });
        out[hashes[k]] = std::move(list);
    }
    return out;
}

struct AugmentationProposal {
    std::string commit_hash;
    std::string issue_key;
    double score = 0.0;
};

/// Pairs of unlinked commits whose score exceeds `threshold`, by hash then key.
inline std::vector<AugmentationProposal> propose_links(const ProjectStore& store, const std::vector<DeployedModel>& models,
                                                       double threshold, const CandidateConfig& cfg, unsigned jobs) {
    std::vector<AugmentationProposal> out;
    for (const auto& [hash, list] : score_commits(store, models, unlinked_commits(store), cfg, jobs)) {
        std::vector<AugmentationProposal> mine;
        for (const auto& s : list) {
            if (s.score > threshold) mine.push_back({hash, s.issue_key, s.score});
        }
        std::sort(mine.begin(), mine.end(),
                  [](const AugmentationProposal& a, const AugmentationProposal& b) { return a.issue_key < b.issue_key; });
        out.insert(out.end(), mine.begin(), mine.end());
    }
    return out;
}

/// Adds proposals as Classifier links; returns how many were new.
inline std::size_t apply_links(ProjectStore& store, const std::vector<AugmentationProposal>& proposals) {
    std::size_t added = 0;
    for (const auto& p : proposals) {
        TraceLink link;
        link.commit_hash = p.commit_hash;
        link.issue_key = p.issue_key;
        link.origin = LinkOrigin::Classifier;
        link.score = p.score;
        added += store.add_link(std::move(link)) ? 1 : 0;
    }
    return added;
}

struct AugmentationStats {
    IssueKind profile = IssueKind::Bug;
    std::size_t unlinked_commits = 0;
    std::size_t classified_links = 0;
    double mean = 0.0;
};

/// Per profile: candidate issues classified Linked (score >= 0.5), averaged
/// over all commits without a trusted link.
inline std::vector<AugmentationStats> augmentation_stats(const ProjectStore& store,
                                                         const std::vector<DeployedModel>& models,
                                                         const CandidateConfig& cfg, unsigned jobs) {
    const auto commits = unlinked_commits(store);
    if (commits.empty()) throw DataError("every commit already has a link");
    const auto scored = score_commits(store, models, commits, cfg, jobs);
    std::vector<AugmentationStats> out;
    for (const auto& m : models) {
        AugmentationStats s;
        s.profile = m.profile;
        s.unlinked_commits = commits.size();
        for (const auto& [hash, list] : scored) {
            for (const auto& x : list) {
                if (x.profile == m.profile && x.score >= 0.5) ++s.classified_links;
            }
        }
        s.mean = static_cast<double>(s.classified_links) / static_cast<double>(s.unlinked_commits);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Project statistics

inline nlohmann::json project_stats(const ProjectStore& store, const CandidateConfig& cfg = {}) {
    std::map<std::string, std::size_t> issues_by_kind{{"Bug", 0}, {"Improvement", 0}};
    for (const auto& [key, issue] : store.issues) ++issues_by_kind[std::string(to_string(issue.kind))];
    std::map<std::string, std::size_t> links_by_origin{
        {"ExplicitTag", 0}, {"Classifier", 0}, {"HumanAccepted", 0}, {"HumanRejected", 0}};
    for (const auto& link : store.links()) ++links_by_origin[std::string(to_string(link.origin))];

    std::size_t linked_commits = 0;
    std::size_t empty_file_sets = 0;
    for (const auto& [hash, commit] : store.commits) {
        if (store.commit_has_link(hash)) ++linked_commits;
        if (commit.files.empty()) ++empty_file_sets;
    }

    // Late commits: explicitly linked commits made after the issue was resolved.
    std::size_t explicit_pairs = 0, late = 0, late_within_close = 0, late_within_candidate = 0;
    for (const auto& link : store.links()) {
        if (link.origin != LinkOrigin::ExplicitTag) continue;
        ++explicit_pairs;
        const auto& c = store.commit(link.commit_hash);
        const auto& i = store.issue(link.issue_key);
        if (c.committed > i.resolved) {
            ++late;
            const double h = hours(c.committed.epoch_seconds - i.resolved.epoch_seconds);
            if (h < cfg.epsilon_close_hours) ++late_within_close;
            if (h <= cfg.epsilon_candidate_hours) ++late_within_candidate;
        }
    }
    const auto pairs = generate_candidates(store, cfg);
    std::size_t candidate_linked = 0;
    for (const auto& p : pairs) candidate_linked += p.label == Label::Linked ? 1 : 0;

    nlohmann::json j{{"project", store.project_key},
                     {"issues", issues_by_kind},
                     {"commits", store.commits.size()},
                     {"commits_without_source_files", empty_file_sets},
                     {"linked_commits", linked_commits},
                     {"links", links_by_origin},
                     {"verdicts", store.verdicts.size()},
                     {"developers", store.identities.size()},
                     {"candidate_pairs", {{"total", pairs.size()}, {"explicitly_linked", candidate_linked}}},
                     {"late_commits",
                      {{"explicit_pairs", explicit_pairs},
                       {"after_resolution", late},
                       {"within_epsilon_close", late_within_close},
                       {"within_epsilon_candidate", late_within_candidate}}}};
    try {
        const auto point = eval::compute_split_point(store);
        j["split"] = {{"t_split", format_iso8601(point.t_split)}, {"split_issue", point.issue_key}};
    } catch (const DataError&) {
        j["split"] = nullptr;
    }
    return j;
}

}  // namespace traceforge
