#pragma once

// Synthetic desk-scale projects with known ground truth.
//
// The generator writes the same raw inputs a real project provides (issue
// export records, commit export records, file snapshots) and runs them
// through the regular ingest, so the whole pipeline is exercised.
//
// Issues get an assignee, a lifecycle of 1..10 days and four topic words of
// their own; each belongs to a component with its own files and vocabulary.
// Every issue receives at least one commit; commits land inside the
// lifecycle, a few up to a day after resolution. signal_strength is the
// probability that a commit's committer is the issue's assignee and that each
// topic word appears in its message. A fraction tag_omission_rate of the true
// links loses its "KEY-n:" tag. Some unrelated maintenance commits and some
// non-qualifying issue records (tasks, open bugs) are mixed in, and commits
// also touch tests and build files so filtering matters.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "traceforge/core/rng.hpp"
#include "traceforge/core/time.hpp"
#include "traceforge/ingest.hpp"

namespace traceforge::eval {

struct SynthParams {
    std::size_t n_issues = 200;
    std::size_t n_commits = 400;
    double tag_omission_rate = 0.3;
    double signal_strength = 1.0;
    std::string project_key = "SYN";
    std::size_t developers = 15;
    std::size_t components = 12;
    double span_days = 180.0;
    double noise_commit_rate = 0.05;
};

struct SynthProject {
    std::vector<RawIssueRecord> issues;
    std::vector<RawCommitRecord> commits;
    /// (hash, path) -> content
    std::map<std::pair<std::string, std::string>, std::string> snapshots;
    /// True (commit, issue) links before any tag was dropped.
    std::set<std::pair<std::string, std::string>> ground_truth;
};

class MapSnapshotSource : public SnapshotSource {
public:
    explicit MapSnapshotSource(const std::map<std::pair<std::string, std::string>, std::string>& files) : files_(files) {}

    std::optional<std::string> read(std::string_view hash, std::string_view path) const override {
        auto it = files_.find({std::string(hash), std::string(path)});
        if (it == files_.end()) return std::nullopt;
        return it->second;
    }

private:
    const std::map<std::pair<std::string, std::string>, std::string>& files_;
};

namespace synth_detail {

inline const std::vector<std::string>& generic_words() {
    static const std::vector<std::string> words{
        "fix",    "update", "handle", "support", "error",   "value",  "method",  "class",  "problem", "add",
        "remove", "improve", "allow", "check",   "null",    "default", "option", "config", "change",  "use",
        "case",   "return", "type",   "call",    "result",  "missing", "wrong",  "correct", "code",   "new"};
    return words;
}

inline const std::vector<std::string>& first_names() {
    static const std::vector<std::string> names{"Ana",  "Bo",    "Chen",  "Dario", "Eva",   "Femi",  "Gita", "Hugo",
                                                "Ines", "Jonas", "Kaito", "Lena",  "Marta", "Nils",  "Omar", "Pia",
                                                "Rui",  "Sara",  "Tomas", "Ulla",  "Vera",  "Wim",   "Yara", "Zeno"};
    return names;
}

inline const std::vector<std::string>& last_names() {
    static const std::vector<std::string> names{"Alves", "Berg",  "Costa", "Dahl",  "Eder",  "Falk",   "Gomez", "Holm",
                                                "Ito",   "Jansen", "Kern", "Lund",  "Moser", "Novak",  "Ortiz", "Peters",
                                                "Quinn", "Rossi", "Stein", "Toth",  "Ueda",  "Vogel",  "Weber", "Young"};
    return names;
}

/// Pronounceable made-up word, unlikely to be a stop word or English stem.
inline std::string pseudo_word(Rng& rng) {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    std::string w;
    const auto syllables = 2 + rng.below(2);
    for (std::uint64_t s = 0; s < syllables; ++s) {
        w += consonants[rng.below(consonants.size())];
        w += vowels[rng.below(vowels.size())];
    }
    w += consonants[rng.below(consonants.size())];
    return w;
}

inline std::string capitalize(std::string w) {
    if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
}

inline std::string hex_hash(Rng& rng) {
    static const char* digits = "0123456789abcdef";
    std::string h;
    for (int k = 0; k < 40; ++k) h += digits[rng.below(16)];
    return h;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[rng.below(items.size())];
}

struct Developer {
    std::string name;
    std::string login;
    std::string email;
};

struct Component {
    std::string name;
    std::vector<std::string> words;
};

struct PlannedIssue {
    std::string key;
    std::size_t component;
    std::size_t assignee;
    std::int64_t created;
    std::int64_t resolved;
    std::vector<std::string> topic;
    std::vector<std::string> files;
};

}  // namespace synth_detail

inline SynthProject synth_raw_project(std::uint64_t seed, const SynthParams& params) {
    using namespace synth_detail;
    if (params.n_issues == 0 || params.n_commits == 0) throw DataError("synthetic project needs issues and commits");
    if (params.tag_omission_rate < 0 || params.tag_omission_rate > 1) throw DataError("tag omission rate must lie in [0, 1]");
    if (params.signal_strength < 0 || params.signal_strength > 1) throw DataError("signal strength must lie in [0, 1]");
    Rng rng(derive_seed(seed, 1));
    SynthProject out;

    std::set<std::string> used_words(generic_words().begin(), generic_words().end());
    auto fresh_word = [&] {
        while (true) {
            auto w = pseudo_word(rng);
            if (used_words.insert(w).second) return w;
        }
    };

    std::vector<Developer> devs;
    std::set<std::string> dev_names;
    while (devs.size() < params.developers) {
        const auto& first = pick(rng, first_names());
        const auto& last = pick(rng, last_names());
        const std::string name = first + " " + last;
        if (!dev_names.insert(name).second) continue;
        std::string login;
        login += static_cast<char>(std::tolower(static_cast<unsigned char>(first[0])));
        for (char c : last) login += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        devs.push_back({name, login, login + "@dev.example.org"});
    }

    std::vector<Component> comps;
    for (std::size_t c = 0; c < params.components; ++c) comps.push_back({fresh_word(), {fresh_word(), fresh_word()}});

    const std::int64_t start = 1420070400;  // 2015-01-01T00:00:00Z
    const auto span = static_cast<std::int64_t>(params.span_days * 86400.0);

    std::vector<PlannedIssue> planned;
    for (std::size_t k = 0; k < params.n_issues; ++k) {
        PlannedIssue p;
        p.key = params.project_key + "-" + std::to_string(k + 1);
        p.component = static_cast<std::size_t>(rng.below(comps.size()));
        p.assignee = static_cast<std::size_t>(rng.below(devs.size()));
        p.created = start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
        p.resolved = p.created + 86400 + static_cast<std::int64_t>(rng.below(9 * 86400));
        for (int t = 0; t < 4; ++t) p.topic.push_back(fresh_word());
        const auto n_files = 1 + rng.below(3);
        for (std::uint64_t f = 0; f < n_files; ++f) {
            const std::string cls = capitalize(p.topic[f % 4]) + capitalize(p.topic[(f + 1) % 4]);
            p.files.push_back("src/main/java/org/syn/" + comps[p.component].name + "/" + cls + ".java");
        }
        planned.push_back(std::move(p));
    }

    // Issue records, with non-qualifying ones interleaved.
    std::size_t next_key = params.n_issues + 1;
    for (std::size_t k = 0; k < planned.size(); ++k) {
        const auto& p = planned[k];
        const auto& comp = comps[p.component];
        RawIssueRecord r;
        r.key = p.key;
        const bool bug = rng.bernoulli(0.5);
        r.raw_type = bug ? "Bug" : (rng.bernoulli(0.5) ? "Improvement" : "Enhancement");
        r.status = rng.bernoulli(0.7) ? "Resolved" : "Closed";
        r.resolution = rng.bernoulli(0.8) ? "Fixed" : "Done";
        r.summary = capitalize(pick(rng, generic_words())) + " " + p.topic[0] + " " + p.topic[1] + " in " + comp.name;
        std::string desc = "The " + p.topic[0] + " " + p.topic[1] + " of " + comp.words[0] + " " + comp.words[1];
        for (int w = 0; w < 6; ++w) desc += " " + pick(rng, generic_words());
        desc += ". " + capitalize(p.topic[2]) + " " + p.topic[3] + " " + pick(rng, generic_words()) + " " +
                pick(rng, generic_words()) + " " + p.topic[0] + ".";
        r.description = desc;
        r.created = format_iso8601(Timestamp{p.created});
        r.resolved = format_iso8601(Timestamp{p.resolved});
        r.assignee_name = devs[p.assignee].name;
        r.assignee_login = devs[p.assignee].login;
        out.issues.push_back(std::move(r));
        if (rng.bernoulli(0.05)) {
            RawIssueRecord junk;
            junk.key = params.project_key + "-" + std::to_string(next_key++);
            junk.raw_type = rng.bernoulli(0.5) ? "Task" : "Bug";
            junk.status = junk.raw_type == "Task" ? "Resolved" : "Open";
            junk.resolution = junk.raw_type == "Task" ? "Fixed" : "Unresolved";
            junk.summary = "Investigate " + fresh_word();
            junk.description = pick(rng, generic_words()) + " " + pick(rng, generic_words());
            junk.created = format_iso8601(Timestamp{p.created});
            if (junk.raw_type == "Task") junk.resolved = format_iso8601(Timestamp{p.resolved});
            junk.assignee_name = devs[p.assignee].name;
            junk.assignee_login = devs[p.assignee].login;
            out.issues.push_back(std::move(junk));
        }
    }

    // Commit plan: one per issue first, the rest spread at random.
    const auto n_noise = static_cast<std::size_t>(std::llround(params.noise_commit_rate * static_cast<double>(params.n_commits)));
    const std::size_t n_linked = params.n_commits - std::min(n_noise, params.n_commits);
    std::vector<std::ptrdiff_t> owner;  // issue index or -1
    for (std::size_t k = 0; k < n_linked; ++k) {
        owner.push_back(k < planned.size() ? static_cast<std::ptrdiff_t>(k)
                                           : static_cast<std::ptrdiff_t>(rng.below(planned.size())));
    }
    for (std::size_t k = n_linked; k < params.n_commits; ++k) owner.push_back(-1);
    rng.shuffle(owner);

    // Exactly round(rate * links) tags go missing.
    std::vector<std::size_t> linked_slots;
    for (std::size_t k = 0; k < owner.size(); ++k) {
        if (owner[k] >= 0) linked_slots.push_back(k);
    }
    rng.shuffle(linked_slots);
    const auto n_omit = static_cast<std::size_t>(
        std::llround(params.tag_omission_rate * static_cast<double>(linked_slots.size())));
    std::set<std::size_t> untagged(linked_slots.begin(), linked_slots.begin() + static_cast<std::ptrdiff_t>(n_omit));

    std::set<std::string> hashes;
    for (std::size_t k = 0; k < owner.size(); ++k) {
        RawCommitRecord c;
        do {
            c.hash = hex_hash(rng);
        } while (!hashes.insert(c.hash).second);
        std::vector<std::pair<std::string, std::string>> files;  // path, content
        std::string message;
        std::size_t dev;
        std::int64_t when;
        if (owner[k] >= 0) {
            const auto& p = planned[static_cast<std::size_t>(owner[k])];
            const auto& comp = comps[p.component];
            dev = rng.bernoulli(params.signal_strength) ? p.assignee : static_cast<std::size_t>(rng.below(devs.size()));
            if (rng.bernoulli(0.1)) {
                when = p.resolved + static_cast<std::int64_t>(rng.below(24 * 3600));
            } else {
                when = p.created + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(p.resolved - p.created + 1)));
            }
            std::vector<std::string> words;
            words.push_back(pick(rng, generic_words()));
            for (const auto& t : p.topic) {
                words.push_back(rng.bernoulli(params.signal_strength) ? t : pick(rng, generic_words()));
            }
            words.push_back(pick(rng, generic_words()));
            if (rng.bernoulli(0.5)) words.push_back(comp.name);
            message = capitalize(words[0]);
            for (std::size_t w = 1; w < words.size(); ++w) message += " " + words[w];
            if (rng.bernoulli(0.3)) {
                message += "\n\nRefactor " + words[1] + capitalize(words[2]) + " and " + pick(rng, generic_words()) + "_" +
                           words[3] + ".";
            }
            if (!untagged.count(k)) message = p.key + ": " + message;
            out.ground_truth.insert({c.hash, p.key});

            std::vector<std::string> touched;
            for (const auto& f : p.files) {
                if (touched.empty() || rng.bernoulli(0.6)) touched.push_back(f);
            }
            for (const auto& f : touched) {
                std::string body = "package org.syn." + comp.name + ";\n\n";
                const auto slash = f.rfind('/');
                const std::string cls = f.substr(slash + 1, f.size() - slash - 6);
                body += "/** " + capitalize(p.topic[0]) + " " + p.topic[1] + " for " + comp.words[0] + ". */\n";
                body += "public class " + cls + " {\n";
                body += "    private " + capitalize(comp.words[1]) + " " + p.topic[2] + capitalize(p.topic[3]) + ";\n";
                body += "    public void " + p.topic[0] + capitalize(p.topic[1]) + "(" + capitalize(comp.words[0]) + " " +
                        p.topic[3] + ") {\n";
                body += "        " + pick(rng, generic_words()) + "(" + p.topic[2] + ");\n    }\n}\n";
                files.push_back({f, body});
            }
            if (rng.bernoulli(0.3)) {
                files.push_back({"src/test/java/org/syn/" + comp.name + "/" + capitalize(p.topic[0]) + "Test.java",
                                 "class " + capitalize(p.topic[0]) + "Test {}\n"});
            }
        } else {
            dev = static_cast<std::size_t>(rng.below(devs.size()));
            when = start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
            message = capitalize(pick(rng, generic_words())) + " " + pick(rng, generic_words()) + " formatting";
            const auto& comp = pick(rng, comps);
            const std::string path = "src/main/java/org/syn/" + comp.name + "/" + capitalize(comp.words[0]) + "Util.java";
            files.push_back({path, "public class " + capitalize(comp.words[0]) + "Util { void " + comp.words[1] +
                                       "() {} }\n"});
        }
        if (rng.bernoulli(0.1)) files.push_back({"pom.xml", "<project/>\n"});
        if (rng.bernoulli(0.1)) files.push_back({"docs/notes.md", "notes\n"});

        c.committer_name = devs[dev].name;
        c.committer_email = devs[dev].email;
        c.author_name = devs[dev].name;
        c.author_email = devs[dev].email;
        c.committed = format_iso8601(Timestamp{when});
        c.message = message;
        for (auto& [path, content] : files) {
            if (std::find(c.changed_paths.begin(), c.changed_paths.end(), path) != c.changed_paths.end()) continue;
            c.changed_paths.push_back(path);
            out.snapshots[{c.hash, path}] = content;
        }
        out.commits.push_back(std::move(c));
    }
    return out;
}

struct SynthResult {
    ProjectStore store;
    std::set<std::pair<std::string, std::string>> ground_truth;
    IngestReport report;
};

/// Raw generation followed by the regular ingest.
inline SynthResult synth_project(std::uint64_t seed, const SynthParams& params) {
    const auto raw = synth_raw_project(seed, params);
    IngestOptions options;
    options.project_key = params.project_key;
    MapSnapshotSource snapshots(raw.snapshots);
    SynthResult res;
    res.store = build_store(raw.issues, raw.commits, options, &snapshots, &res.report);
    res.ground_truth = raw.ground_truth;
    return res;
}

}  // namespace traceforge::eval
