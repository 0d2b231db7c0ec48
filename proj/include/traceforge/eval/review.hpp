#pragma once

// Blind review batches and inter-rater agreement.
//
// A batch holds 20 commits without a trusted link, each paired with one
// candidate issue. 14 entries (group A) carry the classifier's top-ranked
// candidate; 6 (group B) carry a candidate that is not the top one,
// preferably one classified NonLinked. Construction, given the seed:
//
//   1. eligible commits (unlinked, at least one candidate) sorted by hash,
//      then shuffled with Rng(derive_seed(seed, 1));
//   2. walking that order, the first 6 commits with two or more candidates go
//      to group B, the first 14 of the rest to group A;
//   3. each group-B issue is drawn uniformly from the non-top candidates
//      scoring below 0.5, or from all non-top candidates if none does;
//   4. the 20 entries are shuffled with Rng(derive_seed(seed, 2)).
//
// Rng is xoshiro256** seeded through splitmix64 (core/rng.hpp).

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "traceforge/core/rng.hpp"
#include "traceforge/eval/metrics.hpp"
#include "traceforge/pipeline.hpp"

namespace traceforge::eval {

inline constexpr std::size_t kBatchSize = 20;
inline constexpr std::size_t kGroupA = 14;

struct ReviewEntry {
    std::string commit_hash;
    std::string issue_key;
    char group = 'A';
    double score = 0.0;

    friend bool operator==(const ReviewEntry&, const ReviewEntry&) = default;
};

struct ReviewBatch {
    std::string id;
    std::uint64_t seed = 0;
    std::vector<ReviewEntry> entries;

    friend bool operator==(const ReviewBatch&, const ReviewBatch&) = default;

    std::size_t group_size(char g) const {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [g](const ReviewEntry& e) { return e.group == g; }));
    }

    bool contains(const std::string& hash, const std::string& key) const {
        return std::any_of(entries.begin(), entries.end(),
                           [&](const ReviewEntry& e) { return e.commit_hash == hash && e.issue_key == key; });
    }

    /// Full form, for the archive only.
    nlohmann::json to_json() const {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& e : entries) {
            list.push_back({{"commit_hash", e.commit_hash},
                            {"issue_key", e.issue_key},
                            {"group", std::string(1, e.group)},
                            {"score", e.score}});
        }
        return {{"id", id}, {"seed", seed}, {"entries", list}};
    }

    static ReviewBatch from_json(const nlohmann::json& j) {
        ReviewBatch b;
        b.id = j.at("id").get<std::string>();
        b.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& e : j.at("entries")) {
            const auto group = e.at("group").get<std::string>();
            if (group != "A" && group != "B") throw ParseError("review entry group must be A or B");
            b.entries.push_back({e.at("commit_hash").get<std::string>(), e.at("issue_key").get<std::string>(),
                                 group[0], e.at("score").get<double>()});
        }
        return b;
    }

    /// What a rater sees: artifacts only, no group and no score.
    nlohmann::json rater_json(const ProjectStore& store) const {
        nlohmann::json list = nlohmann::json::array();
        std::size_t position = 0;
        for (const auto& e : entries) {
            const auto& c = store.commit(e.commit_hash);
            const auto& i = store.issue(e.issue_key);
            nlohmann::json files = nlohmann::json::array();
            for (const auto& f : c.files) files.push_back(f.path);
            list.push_back({{"position", ++position},
                            {"commit_hash", c.hash},
                            {"message", c.message},
                            {"committed", format_iso8601(c.committed)},
                            {"files", files},
                            {"issue_key", i.key},
                            {"summary", i.summary},
                            {"description", i.description}});
        }
        return {{"id", id}, {"entries", list}};
    }
};

inline bool is_valid_batch_id(std::string_view id) {
    return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

inline std::filesystem::path batch_path(const std::filesystem::path& archive, const std::string& id) {
    if (!is_valid_batch_id(id)) throw DataError("invalid batch id '" + id + "'");
    return archive / "batches" / (id + ".json");
}

inline void save_batch(const std::filesystem::path& archive, const ReviewBatch& batch) {
    const auto file = batch_path(archive, batch.id);
    std::filesystem::create_directories(file.parent_path());
    archive_detail::write_text(file, batch.to_json().dump(2) + "\n");
}

inline ReviewBatch load_batch(const std::filesystem::path& archive, const std::string& id) {
    const auto file = batch_path(archive, id);
    if (!std::filesystem::exists(file)) throw LookupError("unknown review batch '" + id + "'");
    return ReviewBatch::from_json(nlohmann::json::parse(archive_detail::read_text(file)));
}

inline std::vector<ReviewBatch> load_batches(const std::filesystem::path& archive) {
    std::vector<ReviewBatch> out;
    const auto dir = archive / "batches";
    if (!std::filesystem::is_directory(dir)) return out;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(ReviewBatch::from_json(nlohmann::json::parse(archive_detail::read_text(f))));
    return out;
}

/// `scored`: commit -> candidates ranked best first (see score_commits).
inline ReviewBatch build_review_batch(const std::map<std::string, std::vector<ScoredIssue>>& scored, std::uint64_t seed,
                                      std::string id) {
    std::vector<std::string> eligible;
    std::size_t multi = 0;
    for (const auto& [hash, list] : scored) {
        if (list.empty()) continue;
        eligible.push_back(hash);
        multi += list.size() >= 2 ? 1 : 0;
    }
    const std::size_t group_b = kBatchSize - kGroupA;
    if (eligible.size() < kBatchSize || multi < group_b) {
        throw DataError("a review batch needs " + std::to_string(kBatchSize) +
                        " unlinked commits with candidates (at least " + std::to_string(group_b) +
                        " with two or more); available: " + std::to_string(eligible.size()) + " (" +
                        std::to_string(multi) + " with two or more)");
    }
    Rng pick(derive_seed(seed, 1));
    pick.shuffle(eligible);

    ReviewBatch batch;
    batch.id = std::move(id);
    batch.seed = seed;
    std::vector<ReviewEntry> a, b;
    for (const auto& hash : eligible) {
        const auto& list = scored.at(hash);
        if (b.size() < group_b && list.size() >= 2) {
            std::vector<const ScoredIssue*> pool;
            for (std::size_t k = 1; k < list.size(); ++k) {
                if (list[k].score < 0.5) pool.push_back(&list[k]);
            }
            if (pool.empty()) {
                for (std::size_t k = 1; k < list.size(); ++k) pool.push_back(&list[k]);
            }
            const auto* chosen = pool[pick.below(pool.size())];
            b.push_back({hash, chosen->issue_key, 'B', chosen->score});
        } else if (a.size() < kGroupA) {
            a.push_back({hash, list.front().issue_key, 'A', list.front().score});
        }
        if (a.size() == kGroupA && b.size() == group_b) break;
    }
    if (a.size() < kGroupA || b.size() < group_b) {
        throw DataError("not enough eligible commits to fill both review groups; available: " +
                        std::to_string(eligible.size()));
    }
    batch.entries = std::move(a);
    batch.entries.insert(batch.entries.end(), b.begin(), b.end());
    Rng order(derive_seed(seed, 2));
    order.shuffle(batch.entries);
    return batch;
}

inline ReviewBatch build_review_batch(const ProjectStore& store, const std::vector<DeployedModel>& models,
                                      std::uint64_t seed, std::string id, const CandidateConfig& cfg = {},
                                      unsigned jobs = 1) {
    if (models.empty()) throw DataError("no trained model to rank candidates with");
    return build_review_batch(score_commits(store, models, unlinked_commits(store), cfg, jobs), seed, std::move(id));
}

struct BatchAgreement {
    std::vector<std::string> raters;  ///< raters who judged every entry
    KappaResult kappa;
    /// Per group: accepted / judged over the complete raters.
    std::map<char, std::pair<std::size_t, std::size_t>> accepted;

    nlohmann::json to_json(const std::string& batch_id) const {
        nlohmann::json groups = nlohmann::json::object();
        for (const auto& [g, counts] : accepted) {
            groups[std::string(1, g)] = {{"accepted", counts.first}, {"judged", counts.second}};
        }
        return {{"batch", batch_id},
                {"raters", raters},
                {"kappa", kappa.kappa},
                {"undefined", kappa.undefined},
                {"groups", groups}};
    }
};

/// Fleiss' kappa over the raters who judged all entries of the batch
/// (categories: accept, reject). A rater's latest verdict on a pair counts.
inline BatchAgreement batch_agreement(const std::vector<Verdict>& verdicts, const ReviewBatch& batch) {
    std::map<std::string, std::map<std::pair<std::string, std::string>, Decision>> by_rater;
    for (const auto& v : verdicts) {
        if (batch.contains(v.commit_hash, v.issue_key)) by_rater[v.rater][{v.commit_hash, v.issue_key}] = v.decision;
    }
    BatchAgreement out;
    for (const auto& [rater, decisions] : by_rater) {
        if (decisions.size() == batch.entries.size()) out.raters.push_back(rater);
    }
    if (out.raters.size() < 2) {
        throw DataError("kappa needs at least two raters who judged all " + std::to_string(batch.entries.size()) +
                        " entries; complete raters: " + std::to_string(out.raters.size()));
    }
    std::vector<std::vector<double>> ratings;
    for (const auto& e : batch.entries) {
        std::vector<double> row(2, 0.0);
        for (const auto& rater : out.raters) {
            const auto d = by_rater.at(rater).at({e.commit_hash, e.issue_key});
            row[d == Decision::Accept ? 0 : 1] += 1;
            auto& counts = out.accepted[e.group];
            counts.first += d == Decision::Accept ? 1 : 0;
            counts.second += 1;
        }
        ratings.push_back(row);
    }
    out.kappa = fleiss_kappa(ratings);
    return out;
}

}  // namespace traceforge::eval
