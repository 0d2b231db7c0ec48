#pragma once

// Project archive: one directory per project.
//
//   meta.json         {"format": "traceforge-archive", "schema_version": 1, "project_key": ...}
//   issues.jsonl      one issue per line
//   commits.jsonl     one commit per line; "files" lists repository paths
//   links.jsonl       one trace link per line
//   identities.json   array of developer identities
//   snapshots.jsonl   optional, {"ref": "<hash>:<path>", "content": ...}
//   verdicts.jsonl    optional, human link decisions in submission order
//
// Timestamps are integer UTC epoch seconds. Absent optional values are null.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "traceforge/model.hpp"

namespace traceforge {

inline constexpr int kArchiveSchemaVersion = 1;

namespace archive_detail {

using nlohmann::json;

template <typename T, typename F>
json optional_json(const std::optional<T>& value, F&& convert) {
    return value ? json(convert(*value)) : json(nullptr);
}

inline json to_json(const Issue& issue) {
    return json{{"key", issue.key},
                {"kind", std::string(to_string(issue.kind))},
                {"summary", issue.summary},
                {"description", issue.description},
                {"created", issue.created.epoch_seconds},
                {"resolved", issue.resolved.epoch_seconds},
                {"assignee", optional_json(issue.assignee, [](UserId u) { return u.value; })},
                {"status", issue.status},
                {"resolution", issue.resolution}};
}

inline json to_json(const Commit& commit) {
    json files = json::array();
    for (const auto& f : commit.files) files.push_back(f.path);
    return json{{"hash", commit.hash},
                {"message", commit.message},
                {"committed", commit.committed.epoch_seconds},
                {"committer", optional_json(commit.committer, [](UserId u) { return u.value; })},
                {"files", files}};
}

inline json to_json(const TraceLink& link) {
    return json{{"commit_hash", link.commit_hash},
                {"issue_key", link.issue_key},
                {"origin", std::string(to_string(link.origin))},
                {"score", optional_json(link.score, [](double s) { return s; })},
                {"decided_by", optional_json(link.decided_by, [](const std::string& s) { return s; })},
                {"decided_at",
                 optional_json(link.decided_at, [](Timestamp t) { return t.epoch_seconds; })}};
}

inline json to_json(const DeveloperIdentity& identity) {
    json sources = json::array();
    for (auto s : identity.sources) sources.push_back(std::string(to_string(s)));
    return json{{"user_id", identity.user_id.value},
                {"names", identity.names},
                {"logins", identity.logins},
                {"sources", sources}};
}

inline json to_json(const Verdict& verdict) {
    return json{{"commit_hash", verdict.commit_hash},
                {"issue_key", verdict.issue_key},
                {"decision", verdict.decision == Decision::Accept ? "accept" : "reject"},
                {"rater", verdict.rater},
                {"timestamp", verdict.timestamp.epoch_seconds}};
}

inline std::optional<UserId> user_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return UserId{j.get<std::uint32_t>()};
}

inline Issue issue_from_json(const json& j) {
    Issue issue;
    issue.key = j.at("key").get<std::string>();
    issue.kind = issue_kind_from_string(j.at("kind").get<std::string>());
    issue.summary = j.at("summary").get<std::string>();
    issue.description = j.at("description").get<std::string>();
    issue.created = Timestamp{j.at("created").get<std::int64_t>()};
    issue.resolved = Timestamp{j.at("resolved").get<std::int64_t>()};
    issue.assignee = user_from_json(j.at("assignee"));
    issue.status = j.at("status").get<std::string>();
    issue.resolution = j.at("resolution").get<std::string>();
    return issue;
}

inline Commit commit_from_json(const json& j) {
    Commit commit;
    commit.hash = j.at("hash").get<std::string>();
    commit.message = j.at("message").get<std::string>();
    commit.committed = Timestamp{j.at("committed").get<std::int64_t>()};
    commit.committer = user_from_json(j.at("committer"));
    for (const auto& path : j.at("files")) {
        const auto p = path.get<std::string>();
        commit.files.insert(FilePath{p, snapshot_ref(commit.hash, p)});
    }
    return commit;
}

inline TraceLink link_from_json(const json& j) {
    TraceLink link;
    link.commit_hash = j.at("commit_hash").get<std::string>();
    link.issue_key = j.at("issue_key").get<std::string>();
    link.origin = link_origin_from_string(j.at("origin").get<std::string>());
    if (j.contains("score") && !j["score"].is_null()) link.score = j["score"].get<double>();
    if (j.contains("decided_by") && !j["decided_by"].is_null()) {
        link.decided_by = j["decided_by"].get<std::string>();
    }
    if (j.contains("decided_at") && !j["decided_at"].is_null()) {
        link.decided_at = Timestamp{j["decided_at"].get<std::int64_t>()};
    }
    return link;
}

inline DeveloperIdentity identity_from_json(const json& j) {
    DeveloperIdentity identity;
    identity.user_id = UserId{j.at("user_id").get<std::uint32_t>()};
    identity.names = j.at("names").get<std::set<std::string>>();
    identity.logins = j.at("logins").get<std::set<std::string>>();
    for (const auto& s : j.at("sources")) {
        identity.sources.insert(person_source_from_string(s.get<std::string>()));
    }
    return identity;
}

inline Verdict verdict_from_json(const json& j) {
    Verdict v;
    v.commit_hash = j.at("commit_hash").get<std::string>();
    v.issue_key = j.at("issue_key").get<std::string>();
    const auto decision = j.at("decision").get<std::string>();
    if (decision != "accept" && decision != "reject") {
        throw ParseError("unknown verdict decision '" + decision + "'");
    }
    v.decision = decision == "accept" ? Decision::Accept : Decision::Reject;
    v.rater = j.at("rater").get<std::string>();
    v.timestamp = Timestamp{j.at("timestamp").get<std::int64_t>()};
    return v;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename F>
void for_each_jsonl(const std::filesystem::path& path, F&& fn) {
    if (!std::filesystem::exists(path)) return;
    std::istringstream in(read_text(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            fn(json::parse(line));
        } catch (const json::exception& e) {
            throw ParseError(path.filename().string() + ":" + std::to_string(line_no) + ": " +
                             e.what());
        }
    }
}

}  // namespace archive_detail

inline void save_project(const ProjectStore& store, const std::filesystem::path& dir) {
    using namespace archive_detail;
    std::filesystem::create_directories(dir);

    json meta{{"format", "traceforge-archive"},
              {"schema_version", kArchiveSchemaVersion},
              {"project_key", store.project_key}};
    write_text(dir / "meta.json", meta.dump(2) + "\n");

    std::string issues;
    for (const auto& [key, issue] : store.issues) issues += to_json(issue).dump() + "\n";
    write_text(dir / "issues.jsonl", issues);

    std::string commits;
    for (const auto& [hash, commit] : store.commits) commits += to_json(commit).dump() + "\n";
    write_text(dir / "commits.jsonl", commits);

    std::string links;
    for (const auto& link : store.links()) links += to_json(link).dump() + "\n";
    write_text(dir / "links.jsonl", links);

    json identities = json::array();
    for (const auto& identity : store.identities) identities.push_back(to_json(identity));
    write_text(dir / "identities.json", identities.dump(2) + "\n");

    std::string snapshots;
    for (const auto& [ref, content] : store.snapshots) {
        snapshots += json{{"ref", ref}, {"content", content}}.dump() + "\n";
    }
    write_text(dir / "snapshots.jsonl", snapshots);

    std::string verdicts;
    for (const auto& v : store.verdicts) verdicts += to_json(v).dump() + "\n";
    write_text(dir / "verdicts.jsonl", verdicts);
}

class ArchiveReader {
public:
    static ProjectStore load(const std::filesystem::path& dir) {
        using namespace archive_detail;
        if (!std::filesystem::exists(dir / "meta.json")) {
            throw Error("not a project archive (missing meta.json): " + dir.string());
        }
        const json meta = json::parse(read_text(dir / "meta.json"));
        const int version = meta.value("schema_version", -1);
        if (version != kArchiveSchemaVersion) {
            throw IntegrityError("archive schema version " + std::to_string(version) +
                                 " does not match supported version " +
                                 std::to_string(kArchiveSchemaVersion));
        }
        ProjectStore store;
        store.project_key = meta.at("project_key").get<std::string>();

        for_each_jsonl(dir / "issues.jsonl", [&](const json& j) {
            auto issue = issue_from_json(j);
            auto key = issue.key;
            if (!store.issues.emplace(key, std::move(issue)).second) {
                throw IntegrityError("duplicate issue key '" + key + "'");
            }
        });
        for_each_jsonl(dir / "commits.jsonl", [&](const json& j) {
            auto commit = commit_from_json(j);
            auto hash = commit.hash;
            if (!store.commits.emplace(hash, std::move(commit)).second) {
                throw IntegrityError("duplicate commit hash '" + hash + "'");
            }
        });
        // Collect dangling links first so the error lists all of them.
        std::vector<TraceLink> links;
        for_each_jsonl(dir / "links.jsonl", [&](const json& j) { links.push_back(link_from_json(j)); });
        std::string dangling;
        for (const auto& link : links) {
            if (!store.commits.count(link.commit_hash)) dangling += " commit '" + link.commit_hash + "'";
            if (!store.issues.count(link.issue_key)) dangling += " issue '" + link.issue_key + "'";
        }
        if (!dangling.empty()) {
            throw IntegrityError("links reference missing artifacts:" + dangling);
        }
        for (auto& link : links) store.append_link_unchecked(std::move(link));

        if (std::filesystem::exists(dir / "identities.json")) {
            for (const auto& j : json::parse(read_text(dir / "identities.json"))) {
                store.identities.push_back(identity_from_json(j));
            }
        }
        for_each_jsonl(dir / "snapshots.jsonl", [&](const json& j) {
            store.snapshots[j.at("ref").get<std::string>()] = j.at("content").get<std::string>();
        });
        for_each_jsonl(dir / "verdicts.jsonl",
                       [&](const json& j) { store.verdicts.push_back(verdict_from_json(j)); });
        store.check_integrity();
        return store;
    }
};

inline ProjectStore load_project(const std::filesystem::path& dir) { return ArchiveReader::load(dir); }

}  // namespace traceforge
