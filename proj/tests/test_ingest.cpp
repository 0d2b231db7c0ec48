#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "link_corpus.hpp"
#include "traceforge/ingest.hpp"

using namespace traceforge;
using fixtures::TempDir;

namespace {

RawIssueRecord raw_issue(std::string key, std::string type, std::string status = "Closed",
                         std::string resolution = "Fixed") {
    RawIssueRecord r;
    r.key = std::move(key);
    r.raw_type = std::move(type);
    r.status = std::move(status);
    r.resolution = std::move(resolution);
    r.summary = "summary of " + r.key;
    r.created = "2015-01-01T00:00:00Z";
    r.resolved = "2015-01-02T00:00:00Z";
    r.assignee_name = "Jane Doe";
    r.assignee_login = "jdoe";
    return r;
}

RawCommitRecord raw_commit(std::string hash, std::string message, std::vector<std::string> paths) {
    RawCommitRecord r;
    r.hash = std::move(hash);
    r.committer_name = "Jane Doe";
    r.committer_email = "jane@x.org";
    r.author_name = "Bob Roe";
    r.author_email = "bob@x.org";
    r.committed = "2015-01-01T12:00:00+01:00";
    r.message = std::move(message);
    r.changed_paths = std::move(paths);
    return r;
}

}  // namespace

TEST(CommitExport, ParsesGitLogOutput) {
    // Shape of `git log --name-only -z --format='%x01%H%n%cn%n%ce%n%an%n%ae%n%cI%n%B%x02'`.
    std::string data;
    data += "\x01" "aaa111\nJane Doe\njane@x.org\nBob Roe\nbob@x.org\n2015-01-01T12:00:00+01:00\n"
            "GROOVY-1: first\n\nbody line\n\n\x02";
    data += std::string("\n") + "src/main/A.java" + '\0' + "README.md" + '\0';
    data += "\x01" "bbb222\nAnn\nann@x.org\nAnn\nann@x.org\n2015-01-02T00:00:00Z\nno files\n\x02";
    data += '\0';
    const auto records = parse_commit_export(data);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].hash, "aaa111");
    EXPECT_EQ(records[0].committer_email, "jane@x.org");
    EXPECT_EQ(records[0].author_name, "Bob Roe");
    EXPECT_EQ(records[0].message, "GROOVY-1: first\n\nbody line");
    EXPECT_EQ(records[0].changed_paths, (std::vector<std::string>{"src/main/A.java", "README.md"}));
    EXPECT_TRUE(records[1].changed_paths.empty());
    EXPECT_THROW(parse_commit_export("\x01" "abc\nx\n"), ParseError);
}

TEST(CommitExport, FormatRoundTrips) {
    std::vector<RawCommitRecord> records{raw_commit("h1", "one\ntwo", {"src/main/A.java", "src/main/b c.java"}),
                                         raw_commit("h2", "GROOVY-2 fix", {})};
    const auto back = parse_commit_export(format_commit_export(records));
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(back[k].hash, records[k].hash);
        EXPECT_EQ(back[k].message, records[k].message);
        EXPECT_EQ(back[k].changed_paths, records[k].changed_paths);
        EXPECT_EQ(back[k].committed, records[k].committed);
    }
}

TEST(IssueExport, ParsesJsonArrayAndRoundTrips) {
    const auto records = parse_issue_export(R"([
        {"key":"GROOVY-1","raw_type":"Bug","status":"Closed","resolution":"Fixed","summary":"s",
         "description":null,"created":"2015-01-01T00:00:00Z","resolved":1420156800,
         "assignee_name":"Jane","assignee_login":"jd"},
        {"key":"GROOVY-2","raw_type":"Task","status":"Open","resolution":"","summary":"t"}])");
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].resolved, std::optional<std::string>("1420156800"));
    EXPECT_EQ(records[0].description, "");
    EXPECT_FALSE(records[1].created.has_value());
    const auto again = parse_issue_export(format_issue_export(records));
    ASSERT_EQ(again.size(), 2u);
    EXPECT_EQ(again[0].key, "GROOVY-1");
    EXPECT_EQ(again[0].assignee_login, "jd");
    EXPECT_THROW(parse_issue_export("{}"), ParseError);
    EXPECT_THROW(parse_issue_export("[not json"), ParseError);
}

TEST(IssueImport, MapsTypesAndDropsTheRest) {
    std::vector<RawIssueRecord> records{
        raw_issue("P-1", "enhancement", "Closed", "Done"),
        raw_issue("P-2", "task"),
        raw_issue("P-3", "bug", "Open", ""),
        raw_issue("P-4", "Bug", "Resolved", "Fixed"),
        raw_issue("P-5", "Improvement", "Closed", "Won't Fix"),
        raw_issue("p-6", "bug"),
        raw_issue("P-4", "bug"),
    };
    auto missing = raw_issue("P-7", "bug");
    missing.resolved.reset();
    records.push_back(missing);
    auto inverted = raw_issue("P-8", "bug");
    inverted.created = "2015-02-01T00:00:00Z";
    records.push_back(inverted);

    const auto result = import_issues(records);
    ASSERT_EQ(result.issues.size(), 2u);
    EXPECT_EQ(result.issues[0].key, "P-1");
    EXPECT_EQ(result.issues[0].kind, IssueKind::Improvement);
    EXPECT_EQ(result.issues[1].key, "P-4");
    EXPECT_EQ(result.issues[1].kind, IssueKind::Bug);
    EXPECT_EQ(result.dropped.at("type"), 1u);
    EXPECT_EQ(result.dropped.at("status"), 1u);
    EXPECT_EQ(result.dropped.at("resolution"), 1u);
    EXPECT_EQ(result.dropped.at("bad-key"), 1u);
    EXPECT_EQ(result.dropped.at("duplicate-key"), 1u);
    EXPECT_EQ(result.dropped.at("missing-lifecycle"), 1u);
    EXPECT_EQ(result.dropped.at("inverted-lifecycle"), 1u);
}

TEST(FileFilter, DefaultRules) {
    const FileFilterConfig filter;
    EXPECT_TRUE(filter.accepts("src/main/A.java"));
    EXPECT_TRUE(filter.accepts("src/main/groovy/x/Y.groovy"));
    EXPECT_FALSE(filter.accepts("src/test/java/ATest.java"));
    EXPECT_FALSE(filter.accepts("src/main/resources/app.properties"));
    EXPECT_FALSE(filter.accepts("src/main/README.md"));
    EXPECT_FALSE(filter.accepts("src/main/pom.xml"));
    EXPECT_FALSE(filter.accepts("pom.xml"));
    EXPECT_FALSE(filter.accepts("docs/guide.html"));
    EXPECT_FALSE(filter.accepts(""));

    const auto commits = import_commits({raw_commit("h", "m", {"src/main/A.java", "src/test/java/ATest.java"})}, filter);
    ASSERT_EQ(commits.size(), 1u);
    ASSERT_EQ(commits[0].files.size(), 1u);
    EXPECT_EQ(commits[0].files.begin()->path, "src/main/A.java");
    EXPECT_EQ(commits[0].files.begin()->content_ref, "h:src/main/A.java");
}

TEST(CommitImport, DuplicateHashIsAnError) {
    EXPECT_THROW(import_commits({raw_commit("h", "a", {}), raw_commit("h", "b", {})}, FileFilterConfig{}), ParseError);
}

TEST(CommitImport, ParsesOffsetsToUtc) {
    const auto commits = import_commits({raw_commit("h", "m", {})}, FileFilterConfig{});
    EXPECT_EQ(commits[0].committed, parse_iso8601("2015-01-01T11:00:00Z"));
}

TEST(LinkExtraction, CorpusYieldsExactlyTheExpectedLinks) {
    EXPECT_EQ(fixtures::extracted_corpus_links(), fixtures::expected_corpus_links());
    EXPECT_EQ(fixtures::link_corpus().size(), 25u);
}

TEST(BuildStore, UnifiesIdentitiesAndExtractsLinks) {
    std::vector<RawIssueRecord> issues{raw_issue("GROOVY-1", "bug"), raw_issue("GROOVY-2", "improvement"),
                                       raw_issue("GROOVY-3", "task")};
    issues[1].assignee_name = "Someone Else";
    issues[1].assignee_login = "else";
    auto c1 = raw_commit("c1", "GROOVY-1: fix", {"src/main/A.java", "pom.xml"});
    auto c2 = raw_commit("c2", "GROOVY-3 is a task", {"src/main/B.java"});
    c2.committer_name = "Someone Else";
    c2.committer_email = "else@x.org";

    TempDir snaps("snap");
    std::filesystem::create_directories(snaps.path / "c1" / "src/main");
    archive_detail::write_text(snaps.path / "c1" / "src/main/A.java", "class A {}");
    const DirectorySnapshotSource source(snaps.path);

    IngestReport report;
    const auto store = build_store(issues, {c1, c2}, IngestOptions{}, &source, &report);
    EXPECT_EQ(store.project_key, "GROOVY");
    EXPECT_EQ(store.issues.size(), 2u);
    EXPECT_EQ(store.commits.size(), 2u);
    EXPECT_EQ(report.raw_issues, 3u);
    EXPECT_EQ(report.dropped_issues.at("type"), 1u);
    EXPECT_EQ(report.explicit_links, 1u);
    EXPECT_EQ(report.missing_snapshots, 1u);
    EXPECT_TRUE(store.is_linked("c1", "GROOVY-1"));
    EXPECT_EQ(store.snapshot("c1:src/main/A.java"), std::optional<std::string>("class A {}"));
    EXPECT_EQ(store.commit("c1").files.size(), 1u);
    // "Jane Doe" (jdoe in the tracker, jane@x.org in git) merges by name.
    EXPECT_EQ(store.issue("GROOVY-1").assignee, store.commit("c1").committer);
    EXPECT_EQ(store.issue("GROOVY-2").assignee, store.commit("c2").committer);
    EXPECT_NE(store.commit("c1").committer, store.commit("c2").committer);
    store.check_integrity();
}

TEST(BuildStore, AuthorIdentityOption) {
    IngestOptions options;
    options.identity_field = CommitIdentity::Author;
    const auto store = build_store({raw_issue("GROOVY-1", "bug")}, {raw_commit("c1", "x", {})}, options);
    const auto& c = store.commit("c1");
    ASSERT_TRUE(c.committer.has_value());
    EXPECT_NE(c.committer, store.issue("GROOVY-1").assignee);
}
