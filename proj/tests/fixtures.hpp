#pragma once

// Shared test fixtures: the timeline example, random stores, tabular data.

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "traceforge/core/rng.hpp"
#include "traceforge/learn/dataset.hpp"
#include "traceforge/model.hpp"

namespace fixtures {

using namespace traceforge;

inline constexpr std::int64_t kBase = 1420070400;  // 2015-01-01T00:00:00Z

/// Timeline unit = one hour.
inline Timestamp at(double hours) { return Timestamp{kBase + static_cast<std::int64_t>(hours * 3600.0)}; }

inline Issue make_issue(const std::string& key, IssueKind kind, double created, double resolved,
                        std::optional<UserId> assignee = UserId{0}, std::string summary = "", std::string description = "") {
    Issue i;
    i.key = key;
    i.kind = kind;
    i.created = at(created);
    i.resolved = at(resolved);
    i.assignee = assignee;
    i.summary = summary.empty() ? "issue " + key : summary;
    i.description = description;
    i.status = "Resolved";
    i.resolution = "Fixed";
    return i;
}

inline Commit make_commit(const std::string& hash, double committed, const std::vector<std::string>& files,
                          std::optional<UserId> committer = UserId{0}, std::string message = "") {
    Commit c;
    c.hash = hash;
    c.committed = at(committed);
    c.committer = committer;
    c.message = message.empty() ? "change " + hash : message;
    for (const auto& f : files) c.files.insert(FilePath{f, snapshot_ref(hash, f)});
    return c;
}

inline void add_explicit(ProjectStore& s, const std::string& hash, const std::string& key) {
    s.add_link(TraceLink{hash, key, LinkOrigin::ExplicitTag, std::nullopt, std::nullopt, std::nullopt});
}

/// The timeline example: issues I1..I4 (FIG-1..FIG-4), bugs B1, B2
/// (FIG-5, FIG-6), commits C1..C9, files F1..F6. Linked: C1-I1, C5-I2,
/// C8-I4, C9-B1.
///
///   I1 [0, 3]   I2 [3, 6]   I3 [7, 10]   I4 [8, 12]   B1 [8, 13]   B2 [14, 16]
///   C1 1  C2 2  C3 4  C4 5  C5 6  C6 8  C7 9  C8 10  C9 11
inline ProjectStore fig4_store() {
    ProjectStore s;
    s.project_key = "FIG";
    auto F = [](int n) { return "src/main/java/F" + std::to_string(n) + ".java"; };
    for (auto issue : {make_issue("FIG-1", IssueKind::Improvement, 0, 3, UserId{0}),
                       make_issue("FIG-2", IssueKind::Improvement, 3, 6, UserId{1}),
                       make_issue("FIG-3", IssueKind::Improvement, 7, 10, UserId{0}),
                       make_issue("FIG-4", IssueKind::Improvement, 8, 12, UserId{1}),
                       make_issue("FIG-5", IssueKind::Bug, 8, 13, UserId{0}),
                       make_issue("FIG-6", IssueKind::Bug, 14, 16, UserId{2})}) {
        s.issues.emplace(issue.key, issue);
    }
    for (auto commit : {make_commit("c1", 1, {F(1), F(2)}, UserId{0}),
                        make_commit("c2", 2, {F(2)}, UserId{0}),
                        make_commit("c3", 4, {F(3)}, UserId{1}),
                        make_commit("c4", 5, {F(4)}, UserId{1}),
                        make_commit("c5", 6, {F(3), F(4)}, UserId{1}),
                        make_commit("c6", 8, {F(1)}, UserId{0}),
                        make_commit("c7", 9, {F(4), F(5), F(6)}, UserId{0}),
                        make_commit("c8", 10, {F(3)}, UserId{1}),
                        make_commit("c9", 11, {F(5), F(6)}, UserId{0})}) {
        s.commits.emplace(commit.hash, commit);
    }
    add_explicit(s, "c1", "FIG-1");
    add_explicit(s, "c5", "FIG-2");
    add_explicit(s, "c8", "FIG-4");
    add_explicit(s, "c9", "FIG-5");
    return s;
}

/// Random store with a given number of issues and commits over ~100 hours.
inline ProjectStore random_store(std::uint64_t seed, std::size_t n_issues, std::size_t n_commits,
                                 double link_rate = 0.3) {
    Rng rng(seed);
    ProjectStore s;
    s.project_key = "RND";
    for (std::size_t k = 0; k < n_issues; ++k) {
        const double created = rng.uniform() * 100.0;
        const double resolved = created + rng.uniform() * 40.0;
        auto i = make_issue("RND-" + std::to_string(k + 1), rng.bernoulli(0.5) ? IssueKind::Bug : IssueKind::Improvement,
                            created, resolved,
                            rng.bernoulli(0.1) ? std::nullopt : std::optional<UserId>(UserId{static_cast<std::uint32_t>(rng.below(4))}),
                            "summary " + std::to_string(k), "text " + std::to_string(rng.below(50)));
        s.issues.emplace(i.key, i);
    }
    for (std::size_t k = 0; k < n_commits; ++k) {
        std::vector<std::string> files;
        for (int f = 0; f < 4; ++f) {
            if (rng.bernoulli(0.4)) files.push_back("src/main/F" + std::to_string(rng.below(8)) + ".java");
        }
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(rng()));
        auto c = make_commit(hash, rng.uniform() * 150.0, files,
                             rng.bernoulli(0.1) ? std::nullopt : std::optional<UserId>(UserId{static_cast<std::uint32_t>(rng.below(4))}));
        for (const auto& f : c.files) s.snapshots[f.content_ref] = "class " + f.path + " body " + std::to_string(rng.below(9));
        s.commits.emplace(c.hash, c);
    }
    for (const auto& [hash, c] : s.commits) {
        for (const auto& [key, i] : s.issues) {
            if (rng.bernoulli(link_rate / static_cast<double>(n_issues))) add_explicit(s, hash, key);
        }
    }
    return s;
}

/// Two classes separated by x0 (gap around 0.5); x1 numeric noise with some
/// MISSING values; x2 categorical noise.
inline learn::Dataset separable_dataset(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    learn::Dataset d;
    d.schema = {{"x0", false}, {"x1", false}, {"x2", true}};
    for (std::size_t k = 0; k < n; ++k) {
        const bool linked = rng.bernoulli(0.5);
        const double x0 = linked ? 0.55 + 0.45 * rng.uniform() : 0.45 * rng.uniform();
        learn::Row row{x0, rng.bernoulli(0.05) ? std::nullopt : std::optional<double>(rng.uniform()),
                       static_cast<double>(rng.below(3))};
        d.add(row, linked);
    }
    return d;
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("traceforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace fixtures
