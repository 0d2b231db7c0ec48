#pragma once

// 25 commit messages against a GROOVY tracker holding GROOVY-1..GROOVY-9 and
// GROOVY-5080..GROOVY-5089, with the links each one should produce.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "traceforge/ingest.hpp"

namespace fixtures {

struct LinkCase {
    std::string message;
    std::set<std::string> expected;
};

inline std::vector<LinkCase> link_corpus() {
    return {
        {"GROOVY-5082: fix NPE in closure coercion", {"GROOVY-5082"}},
        {"GROVY-5082 fix NPE in closure coercion", {}},
        {"Fix for GROOVY-5083 and GROOVY-5084", {"GROOVY-5083", "GROOVY-5084"}},
        {"GROOVY-5085 GROOVY-5085 mentioned twice", {"GROOVY-5085"}},
        {"groovy-5086 lower case does not count", {}},
        {"(GROOVY-5087) parenthesised", {"GROOVY-5087"}},
        {"GROOVY-50870 is not a known issue", {}},
        {"XGROOVY-5088 is a different project", {}},
        {"GROOVY-5088x glued suffix", {}},
        {"Merge branch 'GROOVY-5089'", {"GROOVY-5089"}},
        {"minor cleanup, no issue", {}},
        {"GROOVY-1", {"GROOVY-1"}},
        {"GROOVY-9999 unknown key", {}},
        {"GROOVY- 5080 split by a space", {}},
        {"[GROOVY-5080] bracketed", {"GROOVY-5080"}},
        {"GROOVY-2,GROOVY-3 comma list", {"GROOVY-2", "GROOVY-3"}},
        {"refs GROOVY-4.", {"GROOVY-4"}},
        {"GROOVY_5081 underscore", {}},
        {"see https://issues.example.org/browse/GROOVY-5081", {"GROOVY-5081"}},
        {"GROOVY-5\nsecond line mentions GROOVY-6", {"GROOVY-5", "GROOVY-6"}},
        {"JIRA GROOVY-7: tidy", {"GROOVY-7"}},
        {"GROOVY-08 leading zero is a different key", {}},
        {"GROOVY-8/GROOVY-9 slash separated", {"GROOVY-8", "GROOVY-9"}},
        {"Revert \"GROOVY-5082\"", {"GROOVY-5082"}},
        {"GR00VY-5083 digits for letters", {}},
    };
}

inline std::map<std::string, Issue> link_corpus_issues() {
    std::map<std::string, Issue> issues;
    auto add = [&](int n) {
        const auto key = "GROOVY-" + std::to_string(n);
        issues.emplace(key, make_issue(key, IssueKind::Bug, 0, 1));
    };
    for (int n = 1; n <= 9; ++n) add(n);
    for (int n = 5080; n <= 5089; ++n) add(n);
    return issues;
}

/// (commit hash, key) pairs expected from the corpus; hash of message k is "m<k>".
inline std::set<std::pair<std::string, std::string>> expected_corpus_links() {
    std::set<std::pair<std::string, std::string>> out;
    const auto corpus = link_corpus();
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        for (const auto& key : corpus[k].expected) out.insert({"m" + std::to_string(k), key});
    }
    return out;
}

inline std::set<std::pair<std::string, std::string>> extracted_corpus_links() {
    std::vector<Commit> commits;
    const auto corpus = link_corpus();
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        commits.push_back(make_commit("m" + std::to_string(k), 1, {}, UserId{0}, corpus[k].message));
    }
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& link : extract_explicit_links(commits, link_corpus_issues(), "GROOVY")) {
        out.insert({link.commit_hash, link.issue_key});
    }
    return out;
}

}  // namespace fixtures
