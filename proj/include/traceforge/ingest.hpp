#pragma once

// Parsing of issue-tracker and version-control exports into a ProjectStore.
//
// Commit export: produced by
//
//   git log --name-only -z --format='%x01%H%n%cn%n%ce%n%an%n%ae%n%cI%n%B%x02'
//
// Each record starts with \x01 and holds, newline separated, the hash,
// committer name, committer e-mail, author name, author e-mail and ISO-8601
// commit date, then the message terminated by \x02, then the changed paths
// each terminated by \0. Newlines around path entries are ignored.
//
// Issue export: a JSON array of objects with the RawIssueRecord field names.
// `created`/`resolved` are ISO-8601 strings or integer epoch seconds.

#include <fnmatch.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "traceforge/archive.hpp"
#include "traceforge/identities.hpp"
#include "traceforge/model.hpp"

namespace traceforge {

struct RawIssueRecord {
    std::string key;
    std::string raw_type;
    std::string status;
    std::string resolution;
    std::string summary;
    std::string description;
    std::optional<std::string> created;
    std::optional<std::string> resolved;
    std::string assignee_name;
    std::string assignee_login;
};

struct RawCommitRecord {
    std::string hash;
    std::string author_name;
    std::string author_email;
    std::string committer_name;
    std::string committer_email;
    std::string committed;  ///< ISO-8601
    std::string message;
    std::vector<std::string> changed_paths;
};

struct FileFilterConfig {
    std::vector<std::string> include_globs{"src/main/**"};
    std::vector<std::string> exclude_globs{"src/test/java/**"};
    std::vector<std::string> excluded_extensions{"md", "txt", "xml", "html", "properties"};
    std::vector<std::string> excluded_filenames{"pom.xml", "build.xml", "build.gradle"};

    /// True when the path is kept as a source file: it matches an include
    /// glob and no exclude rule. Globs use fnmatch(3) without FNM_PATHNAME,
    /// so `*` also matches `/` and `**` means "anything below".
    bool accepts(std::string_view path) const {
        const std::string p(path);
        if (p.empty()) return false;
        for (const auto& glob : exclude_globs) {
            if (::fnmatch(glob.c_str(), p.c_str(), 0) == 0) return false;
        }
        const auto slash = p.rfind('/');
        const std::string filename = slash == std::string::npos ? p : p.substr(slash + 1);
        for (const auto& name : excluded_filenames) {
            if (filename == name) return false;
        }
        const auto dot = filename.rfind('.');
        if (dot != std::string::npos) {
            std::string ext = filename.substr(dot + 1);
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            for (const auto& excluded : excluded_extensions) {
                if (ext == excluded) return false;
            }
        }
        return std::any_of(include_globs.begin(), include_globs.end(), [&](const std::string& glob) {
            return ::fnmatch(glob.c_str(), p.c_str(), 0) == 0;
        });
    }
};

/// Which Git identity feeds the commit's user id.
enum class CommitIdentity { Committer, Author };

// ---------------------------------------------------------------------------
// Export parsing

inline std::vector<RawCommitRecord> parse_commit_export(std::string_view data) {
    std::vector<RawCommitRecord> records;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto start = data.find('\x01', pos);
        if (start == std::string_view::npos) break;
        auto next = data.find('\x01', start + 1);
        std::string_view record = data.substr(start + 1, next == std::string_view::npos
                                                             ? std::string_view::npos
                                                             : next - start - 1);
        pos = next == std::string_view::npos ? data.size() : next;

        const auto msg_end = record.find('\x02');
        if (msg_end == std::string_view::npos) {
            throw ParseError("commit record without message terminator near byte " +
                             std::to_string(start));
        }
        std::string_view header = record.substr(0, msg_end);
        std::string_view paths = record.substr(msg_end + 1);

        std::string_view fields[6];
        for (auto& field : fields) {
            const auto nl = header.find('\n');
            if (nl == std::string_view::npos) {
                throw ParseError("truncated commit record header near byte " + std::to_string(start));
            }
            field = header.substr(0, nl);
            header.remove_prefix(nl + 1);
        }
        RawCommitRecord rec;
        rec.hash = std::string(fields[0]);
        rec.committer_name = std::string(fields[1]);
        rec.committer_email = std::string(fields[2]);
        rec.author_name = std::string(fields[3]);
        rec.author_email = std::string(fields[4]);
        rec.committed = std::string(fields[5]);
        std::string message(header);
        while (!message.empty() && (message.back() == '\n' || message.back() == '\r')) message.pop_back();
        rec.message = std::move(message);

        std::size_t p = 0;
        while (p <= paths.size()) {
            auto nul = paths.find('\0', p);
            std::string_view entry = paths.substr(p, nul == std::string_view::npos ? std::string_view::npos
                                                                                   : nul - p);
            while (!entry.empty() && (entry.front() == '\n' || entry.front() == '\r')) entry.remove_prefix(1);
            while (!entry.empty() && (entry.back() == '\n' || entry.back() == '\r')) entry.remove_suffix(1);
            if (!entry.empty()) rec.changed_paths.emplace_back(entry);
            if (nul == std::string_view::npos) break;
            p = nul + 1;
        }
        if (rec.hash.empty()) throw ParseError("commit record with empty hash");
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::string format_commit_export(const std::vector<RawCommitRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += '\x01';
        out += r.hash + "\n" + r.committer_name + "\n" + r.committer_email + "\n" + r.author_name +
               "\n" + r.author_email + "\n" + r.committed + "\n" + r.message + "\n";
        out += '\x02';
        out += '\0';
        out += '\n';
        for (const auto& p : r.changed_paths) {
            out += p;
            out += '\0';
        }
    }
    return out;
}

namespace ingest_detail {

inline std::optional<std::string> optional_time_field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || j[name].is_null()) return std::nullopt;
    if (j[name].is_number_integer()) return std::to_string(j[name].get<std::int64_t>());
    auto text = j[name].get<std::string>();
    if (text.empty()) return std::nullopt;
    return text;
}

inline std::string string_field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || j[name].is_null()) return {};
    return j[name].get<std::string>();
}

/// ISO-8601 or a plain integer count of epoch seconds.
inline Timestamp parse_time_value(const std::string& text) {
    if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return Timestamp{std::stoll(text)};
    }
    return parse_iso8601(text);
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace ingest_detail

inline std::vector<RawIssueRecord> parse_issue_export(std::string_view data) {
    using ingest_detail::optional_time_field;
    using ingest_detail::string_field;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(data);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("issue export is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("issue export must be a JSON array");
    std::vector<RawIssueRecord> out;
    for (const auto& j : doc) {
        RawIssueRecord r;
        r.key = string_field(j, "key");
        r.raw_type = string_field(j, "raw_type");
        r.status = string_field(j, "status");
        r.resolution = string_field(j, "resolution");
        r.summary = string_field(j, "summary");
        r.description = string_field(j, "description");
        r.created = optional_time_field(j, "created");
        r.resolved = optional_time_field(j, "resolved");
        r.assignee_name = string_field(j, "assignee_name");
        r.assignee_login = string_field(j, "assignee_login");
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format_issue_export(const std::vector<RawIssueRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back({{"key", r.key},
                       {"raw_type", r.raw_type},
                       {"status", r.status},
                       {"resolution", r.resolution},
                       {"summary", r.summary},
                       {"description", r.description},
                       {"created", r.created ? nlohmann::json(*r.created) : nlohmann::json(nullptr)},
                       {"resolved", r.resolved ? nlohmann::json(*r.resolved) : nlohmann::json(nullptr)},
                       {"assignee_name", r.assignee_name},
                       {"assignee_login", r.assignee_login}});
    }
    return arr.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Import

struct IssueImport {
    std::vector<Issue> issues;
    /// reason -> number of dropped records. Reasons: type, status, resolution,
    /// missing-lifecycle, inverted-lifecycle, bad-key, duplicate-key.
    std::map<std::string, std::size_t> dropped;
};

/// Keeps resolved (Resolved/Closed, Fixed/Done) bugs and improvements.
/// Type mapping: bug -> Bug; improvement, enhancement -> Improvement.
inline IssueImport import_issues(const std::vector<RawIssueRecord>& records,
                                 const IdentityIndex* identities = nullptr) {
    using ingest_detail::lower;
    IssueImport result;
    std::set<std::string> seen;
    for (const auto& r : records) {
        const auto type = lower(r.raw_type);
        IssueKind kind;
        if (type == "bug") {
            kind = IssueKind::Bug;
        } else if (type == "improvement" || type == "enhancement") {
            kind = IssueKind::Improvement;
        } else {
            ++result.dropped["type"];
            continue;
        }
        const auto status = lower(r.status);
        if (status != "resolved" && status != "closed") {
            ++result.dropped["status"];
            continue;
        }
        const auto resolution = lower(r.resolution);
        if (resolution != "fixed" && resolution != "done") {
            ++result.dropped["resolution"];
            continue;
        }
        if (!r.created || !r.resolved) {
            ++result.dropped["missing-lifecycle"];
            continue;
        }
        if (!is_valid_issue_key(r.key)) {
            ++result.dropped["bad-key"];
            continue;
        }
        Issue issue;
        issue.key = r.key;
        issue.kind = kind;
        issue.summary = r.summary;
        issue.description = r.description;
        issue.created = ingest_detail::parse_time_value(*r.created);
        issue.resolved = ingest_detail::parse_time_value(*r.resolved);
        if (issue.created > issue.resolved) {
            ++result.dropped["inverted-lifecycle"];
            continue;
        }
        if (!seen.insert(issue.key).second) {
            ++result.dropped["duplicate-key"];
            continue;
        }
        issue.status = r.status;
        issue.resolution = r.resolution;
        if (identities && (!r.assignee_login.empty() || !r.assignee_name.empty())) {
            issue.assignee = identities->resolve(PersonSource::IssueTracker, r.assignee_name, r.assignee_login);
        }
        result.issues.push_back(std::move(issue));
    }
    std::sort(result.issues.begin(), result.issues.end(),
              [](const Issue& a, const Issue& b) { return a.key < b.key; });
    return result;
}

inline std::vector<Commit> import_commits(const std::vector<RawCommitRecord>& records,
                                          const FileFilterConfig& filter,
                                          const IdentityIndex* identities = nullptr,
                                          CommitIdentity identity_field = CommitIdentity::Committer) {
    std::vector<Commit> commits;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.hash).second) throw ParseError("duplicate commit hash '" + r.hash + "'");
        Commit c;
        c.hash = r.hash;
        c.message = r.message;
        c.committed = ingest_detail::parse_time_value(r.committed);
        if (identities) {
            c.committer = identity_field == CommitIdentity::Committer
                              ? identities->resolve(PersonSource::VersionControl, r.committer_name, r.committer_email)
                              : identities->resolve(PersonSource::VersionControl, r.author_name, r.author_email);
        }
        for (const auto& path : r.changed_paths) {
            if (filter.accepts(path)) c.files.insert(FilePath{path, snapshot_ref(r.hash, path)});
        }
        commits.push_back(std::move(c));
    }
    std::sort(commits.begin(), commits.end(), [](const Commit& a, const Commit& b) { return a.hash < b.hash; });
    return commits;
}

/// Links every commit to each distinct imported issue whose key appears in its
/// message as a whole word with the (case-sensitive) project key.
inline std::vector<TraceLink> extract_explicit_links(const std::vector<Commit>& commits,
                                                     const std::map<std::string, Issue>& issues,
                                                     std::string_view project_key) {
    std::string escaped;
    for (char ch : project_key) {
        if (std::string_view("\\^$.|?*+()[]{}").find(ch) != std::string_view::npos) escaped += '\\';
        escaped += ch;
    }
    const std::regex pattern("\\b" + escaped + "-[0-9]+\\b");
    std::vector<TraceLink> links;
    for (const auto& commit : commits) {
        std::set<std::string> keys;
        for (auto it = std::sregex_iterator(commit.message.begin(), commit.message.end(), pattern);
             it != std::sregex_iterator(); ++it) {
            if (issues.count(it->str())) keys.insert(it->str());
        }
        for (const auto& key : keys) {
            links.push_back(TraceLink{commit.hash, key, LinkOrigin::ExplicitTag, std::nullopt,
                                      std::nullopt, std::nullopt});
        }
    }
    std::sort(links.begin(), links.end(), [](const TraceLink& a, const TraceLink& b) {
        return std::tie(a.commit_hash, a.issue_key) < std::tie(b.commit_hash, b.issue_key);
    });
    return links;
}

// ---------------------------------------------------------------------------
// Snapshots

/// Supplies the content of a file as stored by a commit.
class SnapshotSource {
public:
    virtual ~SnapshotSource() = default;
    virtual std::optional<std::string> read(std::string_view hash, std::string_view path) const = 0;
};

/// Reads `<root>/<hash>/<path>`.
class DirectorySnapshotSource : public SnapshotSource {
public:
    explicit DirectorySnapshotSource(std::filesystem::path root) : root_(std::move(root)) {}

    std::optional<std::string> read(std::string_view hash, std::string_view path) const override {
        const auto file = root_ / std::string(hash) / std::string(path);
        if (!std::filesystem::is_regular_file(file)) return std::nullopt;
        return archive_detail::read_text(file);
    }

private:
    std::filesystem::path root_;
};

/// Reads blobs from a local Git repository with `git show <hash>:<path>`.
class GitSnapshotSource : public SnapshotSource {
public:
    explicit GitSnapshotSource(std::filesystem::path repo) : repo_(std::move(repo)) {}

    std::optional<std::string> read(std::string_view hash, std::string_view path) const override {
        auto quote = [](std::string_view s) {
            std::string q = "'";
            for (char c : s) {
                if (c == '\'') q += "'\\''";
                else q += c;
            }
            return q + "'";
        };
        const std::string cmd = "git -C " + quote(repo_.string()) + " show " +
                                quote(std::string(hash) + ":" + std::string(path)) + " 2>/dev/null";
        std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(cmd.c_str(), "r"), ::pclose);
        if (!pipe) return std::nullopt;
        std::string out;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
        const int status = ::pclose(pipe.release());
        if (status != 0) return std::nullopt;
        return out;
    }

private:
    std::filesystem::path repo_;
};

// ---------------------------------------------------------------------------
// Whole-project ingest

struct IngestOptions {
    std::string project_key;  ///< inferred from the first issue key when empty
    FileFilterConfig filter;
    CommitIdentity identity_field = CommitIdentity::Committer;
};

struct IngestReport {
    std::size_t raw_issues = 0;
    std::size_t raw_commits = 0;
    std::map<std::string, std::size_t> dropped_issues;
    std::size_t explicit_links = 0;
    std::size_t missing_snapshots = 0;
};

inline ProjectStore build_store(const std::vector<RawIssueRecord>& raw_issues,
                                const std::vector<RawCommitRecord>& raw_commits,
                                const IngestOptions& options, const SnapshotSource* snapshots = nullptr,
                                IngestReport* report = nullptr) {
    std::vector<Person> issue_people;
    for (const auto& r : raw_issues) {
        if (!r.assignee_name.empty() || !r.assignee_login.empty()) {
            issue_people.push_back({r.assignee_name, r.assignee_login});
        }
    }
    std::vector<Person> commit_people;
    for (const auto& r : raw_commits) {
        if (options.identity_field == CommitIdentity::Committer) {
            commit_people.push_back({r.committer_name, r.committer_email});
        } else {
            commit_people.push_back({r.author_name, r.author_email});
        }
    }
    const auto identities = unify_identities(issue_people, commit_people);

    ProjectStore store;
    auto imported = import_issues(raw_issues, &identities);
    store.project_key = options.project_key;
    if (store.project_key.empty() && !imported.issues.empty()) {
        store.project_key = project_of_key(imported.issues.front().key);
    }
    for (auto& issue : imported.issues) {
        if (project_of_key(issue.key) != store.project_key) {
            ++imported.dropped["foreign-project"];
            continue;
        }
        store.issues.emplace(issue.key, std::move(issue));
    }
    auto commits = import_commits(raw_commits, options.filter, &identities, options.identity_field);
    const auto links = extract_explicit_links(commits, store.issues, store.project_key);
    std::size_t missing = 0;
    for (auto& commit : commits) {
        if (snapshots) {
            for (const auto& file : commit.files) {
                if (auto content = snapshots->read(commit.hash, file.path)) {
                    store.snapshots[file.content_ref] = std::move(*content);
                } else {
                    ++missing;
                }
            }
        }
        store.commits.emplace(commit.hash, std::move(commit));
    }
    for (const auto& link : links) store.add_link(link);
    store.identities = identities.identities;

    if (report) {
        report->raw_issues = raw_issues.size();
        report->raw_commits = raw_commits.size();
        report->dropped_issues = imported.dropped;
        report->explicit_links = links.size();
        report->missing_snapshots = missing;
    }
    return store;
}

}  // namespace traceforge
