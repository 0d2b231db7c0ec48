#pragma once

// Artifact model: issues, commits, files, trace links and developer
// identities, plus the in-memory project store that owns them.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "traceforge/core/error.hpp"
#include "traceforge/core/time.hpp"

namespace traceforge {

/// Anonymised developer number, dense within a project.
struct UserId {
    std::uint32_t value = 0;

    /// Reserved id for a missing committer or assignee.
    static constexpr UserId unknown() { return UserId{std::numeric_limits<std::uint32_t>::max()}; }
    constexpr bool is_unknown() const { return value == unknown().value; }

    friend auto operator<=>(const UserId&, const UserId&) = default;
};

enum class IssueKind { Bug, Improvement };

inline std::string_view to_string(IssueKind kind) {
    return kind == IssueKind::Bug ? "Bug" : "Improvement";
}

inline IssueKind issue_kind_from_string(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "bug") return IssueKind::Bug;
    if (lower == "improvement" || lower == "imp") return IssueKind::Improvement;
    throw ParseError("unknown issue kind '" + std::string(text) + "'");
}

inline bool is_valid_issue_key(std::string_view key) {
    static const std::regex pattern("^[A-Z][A-Z0-9]*-[0-9]+$");
    return std::regex_match(key.begin(), key.end(), pattern);
}

/// Project key part of an issue key ("GROOVY" for "GROOVY-5082").
inline std::string project_of_key(std::string_view key) {
    const auto dash = key.rfind('-');
    return std::string(dash == std::string_view::npos ? key : key.substr(0, dash));
}

struct Issue {
    std::string key;
    IssueKind kind = IssueKind::Bug;
    std::string summary;
    std::string description;
    Timestamp created;
    Timestamp resolved;
    std::optional<UserId> assignee;
    std::string status;
    std::string resolution;

    std::string text() const { return summary + "\n" + description; }

    friend bool operator==(const Issue&, const Issue&) = default;
};

/// A file as modified by one commit. Identity and ordering are by path; the
/// content reference names the post-change snapshot (`<hash>:<path>`).
struct FilePath {
    std::string path;
    std::string content_ref;

    friend bool operator==(const FilePath& a, const FilePath& b) { return a.path == b.path; }
    friend auto operator<=>(const FilePath& a, const FilePath& b) { return a.path <=> b.path; }
};

inline std::string snapshot_ref(std::string_view hash, std::string_view path) {
    return std::string(hash) + ":" + std::string(path);
}

struct Commit {
    std::string hash;
    std::string message;
    Timestamp committed;
    std::optional<UserId> committer;
    std::set<FilePath> files;

    friend bool operator==(const Commit& a, const Commit& b) {
        return a.hash == b.hash && a.message == b.message && a.committed == b.committed &&
               a.committer == b.committer &&
               std::equal(a.files.begin(), a.files.end(), b.files.begin(), b.files.end(),
                          [](const FilePath& x, const FilePath& y) {
                              return x.path == y.path && x.content_ref == y.content_ref;
                          });
    }
};

enum class LinkOrigin { ExplicitTag, Classifier, HumanAccepted, HumanRejected };

inline std::string_view to_string(LinkOrigin origin) {
    switch (origin) {
        case LinkOrigin::ExplicitTag: return "ExplicitTag";
        case LinkOrigin::Classifier: return "Classifier";
        case LinkOrigin::HumanAccepted: return "HumanAccepted";
        case LinkOrigin::HumanRejected: return "HumanRejected";
    }
    return "ExplicitTag";
}

inline LinkOrigin link_origin_from_string(std::string_view text) {
    if (text == "ExplicitTag") return LinkOrigin::ExplicitTag;
    if (text == "Classifier") return LinkOrigin::Classifier;
    if (text == "HumanAccepted") return LinkOrigin::HumanAccepted;
    if (text == "HumanRejected") return LinkOrigin::HumanRejected;
    throw ParseError("unknown link origin '" + std::string(text) + "'");
}

/// Origins that count towards is_linked.
inline bool is_positive(LinkOrigin origin) { return origin != LinkOrigin::HumanRejected; }

struct TraceLink {
    std::string commit_hash;
    std::string issue_key;
    LinkOrigin origin = LinkOrigin::ExplicitTag;
    std::optional<double> score;
    std::optional<std::string> decided_by;
    std::optional<Timestamp> decided_at;

    friend bool operator==(const TraceLink&, const TraceLink&) = default;
};

enum class PersonSource { IssueTracker, VersionControl };

inline std::string_view to_string(PersonSource source) {
    return source == PersonSource::IssueTracker ? "IssueTracker" : "VersionControl";
}

inline PersonSource person_source_from_string(std::string_view text) {
    if (text == "IssueTracker") return PersonSource::IssueTracker;
    if (text == "VersionControl") return PersonSource::VersionControl;
    throw ParseError("unknown person source '" + std::string(text) + "'");
}

struct DeveloperIdentity {
    UserId user_id;
    std::set<std::string> names;
    std::set<std::string> logins;
    std::set<PersonSource> sources;

    friend bool operator==(const DeveloperIdentity&, const DeveloperIdentity&) = default;
};

enum class Decision { Accept, Reject };

/// One rater's decision on a commit-issue pair. Kept as an append-only history
/// next to the links it produced.
struct Verdict {
    std::string commit_hash;
    std::string issue_key;
    Decision decision = Decision::Accept;
    std::string rater;
    Timestamp timestamp;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Owns every artifact of one project. Readers may share a const store;
/// mutation (adding links or verdicts) must be serialised by the caller.
class ProjectStore {
public:
    std::string project_key;
    std::map<std::string, Issue> issues;
    std::map<std::string, Commit> commits;
    std::vector<DeveloperIdentity> identities;
    /// content_ref -> file text at that commit.
    std::map<std::string, std::string> snapshots;
    std::vector<Verdict> verdicts;

    const Issue& issue(std::string_view key) const {
        auto it = issues.find(std::string(key));
        if (it == issues.end()) throw LookupError("unknown issue key '" + std::string(key) + "'");
        return it->second;
    }

    const Commit& commit(std::string_view hash) const {
        auto it = commits.find(std::string(hash));
        if (it == commits.end()) throw LookupError("unknown commit hash '" + std::string(hash) + "'");
        return it->second;
    }

    const std::vector<TraceLink>& links() const { return links_; }

    /// Adds a link; returns false (and changes nothing) when a link with the
    /// same (commit, issue, origin) already exists.
    bool add_link(TraceLink link) {
        commit(link.commit_hash);
        issue(link.issue_key);
        auto key = std::make_tuple(link.commit_hash, link.issue_key, link.origin);
        if (!link_keys_.insert(key).second) return false;
        index_link(link);
        links_.push_back(std::move(link));
        return true;
    }

    bool has_link(std::string_view hash, std::string_view key, LinkOrigin origin) const {
        return link_keys_.count(std::make_tuple(std::string(hash), std::string(key), origin)) > 0;
    }

    bool is_linked(std::string_view hash, std::string_view key) const {
        commit(hash);
        issue(key);
        return positive_pairs_.count({std::string(hash), std::string(key)}) > 0;
    }

    /// Files of a commit after filtering; may be empty.
    const std::set<FilePath>& mod(std::string_view hash) const { return commit(hash).files; }

    /// Commits linked (positive origins) to an issue, by commit time then hash.
    std::vector<const Commit*> linked_commits(std::string_view key) const {
        std::vector<const Commit*> out;
        auto it = issue_links_.find(std::string(key));
        if (it == issue_links_.end()) return out;
        for (const auto& hash : it->second) out.push_back(&commit(hash));
        std::sort(out.begin(), out.end(), [](const Commit* a, const Commit* b) {
            return std::tie(a->committed, a->hash) < std::tie(b->committed, b->hash);
        });
        return out;
    }

    /// Issues linked (positive origins) to a commit, sorted by key.
    std::vector<std::string> linked_issues(std::string_view hash) const {
        auto it = commit_links_.find(std::string(hash));
        if (it == commit_links_.end()) return {};
        return {it->second.begin(), it->second.end()};
    }

    bool commit_has_link(std::string_view hash) const {
        auto it = commit_links_.find(std::string(hash));
        return it != commit_links_.end() && !it->second.empty();
    }

    std::optional<std::string> snapshot(const std::string& content_ref) const {
        auto it = snapshots.find(content_ref);
        if (it == snapshots.end()) return std::nullopt;
        return it->second;
    }

    /// Throws IntegrityError listing every dangling or duplicate link and every
    /// malformed issue.
    void check_integrity() const {
        std::string problems;
        for (const auto& [key, issue] : issues) {
            if (!is_valid_issue_key(key)) problems += " malformed issue key '" + key + "';";
            if (issue.created > issue.resolved) problems += " issue " + key + " resolved before created;";
        }
        for (const auto& link : links_) {
            if (!commits.count(link.commit_hash)) {
                problems += " link references missing commit '" + link.commit_hash + "';";
            }
            if (!issues.count(link.issue_key)) {
                problems += " link references missing issue '" + link.issue_key + "';";
            }
        }
        if (!problems.empty()) throw IntegrityError("integrity violation:" + problems);
    }

    friend bool operator==(const ProjectStore& a, const ProjectStore& b) {
        return a.project_key == b.project_key && a.issues == b.issues && a.commits == b.commits &&
               a.identities == b.identities && a.snapshots == b.snapshots &&
               a.verdicts == b.verdicts && a.links_ == b.links_;
    }

private:
    friend class ArchiveReader;

    // Used by the archive loader, which validates afterwards.
    void append_link_unchecked(TraceLink link) {
        auto key = std::make_tuple(link.commit_hash, link.issue_key, link.origin);
        if (!link_keys_.insert(key).second) {
            throw IntegrityError("duplicate link " + link.commit_hash + " -> " + link.issue_key +
                                 " (" + std::string(to_string(link.origin)) + ")");
        }
        index_link(link);
        links_.push_back(std::move(link));
    }

    void index_link(const TraceLink& link) {
        if (!is_positive(link.origin)) return;
        positive_pairs_.insert({link.commit_hash, link.issue_key});
        issue_links_[link.issue_key].insert(link.commit_hash);
        commit_links_[link.commit_hash].insert(link.issue_key);
    }

    std::vector<TraceLink> links_;
    std::set<std::tuple<std::string, std::string, LinkOrigin>> link_keys_;
    std::set<std::pair<std::string, std::string>> positive_pairs_;
    std::map<std::string, std::set<std::string>> issue_links_;
    std::map<std::string, std::set<std::string>> commit_links_;
};

}  // namespace traceforge
