#pragma once

// Command-line front end. dispatch() parses argv, runs one subcommand and
// returns the exit code: 0 success, 1 usage error, 2 data error.
//
//   ingest        exports -> project archive
//   stats         project statistics
//   train         fit and store repetition bundles per profile
//   evaluate      temporal split, Scenario 1 and 2 reports
//   recommend     top-k issues for one commit
//   augment       classifier links above a score threshold
//   review-batch  blind review batch, or agreement over its verdicts
//   synth         synthetic project with ground truth
//   serve         HTTP API for the review UI
//
// Reports go to stdout as JSON unless --format says otherwise. Identical
// flags and seeds give byte-identical output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "traceforge/archive.hpp"
#include "traceforge/core/parallel.hpp"
#include "traceforge/eval/review.hpp"
#include "traceforge/eval/synth.hpp"
#include "traceforge/ingest.hpp"
#include "traceforge/pipeline.hpp"
#include "traceforge/service.hpp"

namespace traceforge::cli {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// TRACE_FORGE_SEED when set (decimal), else 42.
inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("TRACE_FORGE_SEED")) {
        try {
            std::size_t used = 0;
            const auto value = std::stoull(env, &used);
            if (used == std::string(env).size()) return value;
        } catch (const std::exception&) {
        }
        throw ParseError(std::string("TRACE_FORGE_SEED must be a non-negative integer, got '") + env + "'");
    }
    return kDefaultSeed;
}

struct CliConfig {
    std::string project;
    std::string profile = "both";
    std::string attribute_set = "All";
    std::string classifier = "RandomForest";
    std::size_t k = 3;
    double threshold = 0.95;
    std::uint64_t seed = kDefaultSeed;
    std::string format = "json";
    unsigned jobs = 1;
    double epsilon_candidate = 30.0;
    double epsilon_close = 60.0;
    std::size_t repetitions = learn::kRepetitions;
    std::size_t trees = 100;
    std::size_t attrs_per_split = 0;
    double pruning_confidence = 0.25;
    double min_leaf = 2.0;
    std::size_t ngram_min = 2;
    std::size_t ngram_max = 4;
    bool include_human = false;
};

namespace cli_detail {

inline std::vector<IssueKind> profiles_of(const std::string& text) {
    if (text == "both") return {IssueKind::Bug, IssueKind::Improvement};
    return {issue_kind_from_string(text)};
}

inline std::vector<AttributeSet> sets_of(const std::string& text) {
    if (text == "every") return {AttributeSet::Process, AttributeSet::Similarity, AttributeSet::All, AttributeSet::Auto};
    std::vector<AttributeSet> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(attribute_set_from_string(item));
    if (out.empty()) throw ParseError("empty attribute set list");
    return out;
}

/// Option check that runs a parser, so bad enum values are usage errors.
template <typename Parse>
CLI::Validator parses_as(std::string what, Parse parse) {
    return CLI::Validator(
        [parse](std::string& value) -> std::string {
            try {
                parse(value);
                return {};
            } catch (const Error& e) {
                return e.what();
            }
        },
        std::move(what));
}

inline CandidateConfig candidates_of(const CliConfig& c) {
    if (c.epsilon_candidate < 0 || c.epsilon_close < 0) throw DataError("epsilon values must be non-negative");
    return {c.epsilon_candidate, c.epsilon_close};
}

inline PipelineConfig pipeline_of(const CliConfig& c, AttributeSet set) {
    PipelineConfig p;
    p.candidates = candidates_of(c);
    if (c.ngram_min < 1 || c.ngram_max < c.ngram_min) throw DataError("n-gram range must satisfy 1 <= min <= max");
    p.ngrams = {c.ngram_min, c.ngram_max};
    p.classifier.kind = learn::classifier_kind_from_string(c.classifier);
    p.classifier.pruning_confidence = c.pruning_confidence;
    p.classifier.tree_min_leaf = c.min_leaf;
    p.classifier.forest_trees = c.trees;
    p.classifier.forest_attrs_per_split = c.attrs_per_split;
    p.classifier.repetitions = c.repetitions;
    p.classifier.validate();
    p.attribute_set = set;
    p.labels.include_human = c.include_human;
    p.seed = c.seed;
    p.jobs = c.jobs;
    return p;
}

inline void require_format(const std::string& format, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
        if (format == a) return;
    }
    throw DataError("output format '" + format + "' is not available for this command");
}

inline std::string fixed(double v, int digits = 2) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

/// Plain-text layout of Tables 3 and 4: one block per scenario, one row per
/// (profile, set, classifier).
inline std::string evaluation_table(const std::vector<EvaluationResult>& results) {
    std::ostringstream out;
    for (int scenario = 1; scenario <= 2; ++scenario) {
        const auto& first = scenario == 1 ? results.front().scenario1 : results.front().scenario2;
        if (scenario == 1) {
            out << "Scenario 1: top-" << static_cast<std::size_t>(first.parameter) << " recommendation (F2)\n";
        } else {
            out << "\nScenario 2: score > " << first.parameter << " augmentation (F0.5)\n";
        }
        out << std::left << std::setw(13) << "Profile" << std::setw(12) << "Set" << std::setw(14) << "Classifier"
            << std::right << std::setw(7) << "P" << std::setw(7) << "R" << std::setw(7) << "F" << "\n";
        for (const auto& r : results) {
            const auto& rep = scenario == 1 ? r.scenario1 : r.scenario2;
            out << std::left << std::setw(13) << to_string(r.profile) << std::setw(12) << to_string(r.attribute_set)
                << std::setw(14) << learn::to_string(r.kind) << std::right << std::setw(7) << fixed(rep.precision)
                << std::setw(7) << fixed(rep.recall) << std::setw(7) << fixed(rep.f) << "\n";
        }
    }
    return out.str();
}

inline std::string evaluation_csv(const std::vector<EvaluationResult>& results) {
    std::ostringstream out;
    out << "profile,set,classifier,scenario,parameter,precision,recall,f,precision_undefined\n";
    for (const auto& r : results) {
        for (const auto* rep : {&r.scenario1, &r.scenario2}) {
            out << to_string(r.profile) << "," << to_string(r.attribute_set) << "," << learn::to_string(r.kind) << ","
                << rep->scenario << "," << features_detail::format_number(rep->parameter) << ","
                << features_detail::format_number(rep->precision) << "," << features_detail::format_number(rep->recall)
                << "," << features_detail::format_number(rep->f) << "," << (rep->precision_undefined ? "true" : "false")
                << "\n";
        }
    }
    return out.str();
}

inline std::vector<DeployedModel> require_models(const std::filesystem::path& archive, const CliConfig& c) {
    const auto set = attribute_set_from_string(c.attribute_set);
    auto models = load_models(archive, set, learn::classifier_kind_from_string(c.classifier));
    if (models.empty()) {
        throw DataError("no " + c.classifier + "/" + c.attribute_set + " model in " + archive.string() +
                        "; run train first");
    }
    return models;
}

inline void write_output(std::ostream& out, const std::string& text, const std::string& file) {
    if (file.empty()) {
        out << text;
    } else {
        archive_detail::write_text(file, text);
    }
}

}  // namespace cli_detail

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli_detail;
    CLI::App app{"traceforge: recover missing commit-issue trace links"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "traceforge 1.0");

    CliConfig c;
    int result = 0;
    std::uint64_t seed_default = kDefaultSeed;
    try {
        seed_default = default_seed();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    c.seed = seed_default;

    auto add_project = [&](CLI::App* sub) {
        sub->add_option("--project", c.project, "Project archive directory")->required();
    };
    auto add_jobs = [&](CLI::App* sub) {
        sub->add_option("--jobs", c.jobs, "Worker threads (default: logical CPUs)")->check(CLI::PositiveNumber);
    };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", c.seed, "RNG seed (default: TRACE_FORGE_SEED or 42)");
    };
    auto add_epsilons = [&](CLI::App* sub) {
        sub->add_option("--epsilon-candidate", c.epsilon_candidate, "Hours after resolution a candidate commit may lie")
            ->capture_default_str();
        sub->add_option("--epsilon-close", c.epsilon_close, "Hours around resolution for a7")->capture_default_str();
    };
    auto add_model_choice = [&](CLI::App* sub) {
        sub->add_option("--set", c.attribute_set, "Attribute set: Process, Similarity, All, Auto")
            ->capture_default_str()
            ->check(parses_as("attribute set list", [](const std::string& v) { (void)sets_of(v); }));
        sub->add_option("--classifier", c.classifier, "NaiveBayes, DecisionTree or RandomForest")
            ->capture_default_str()
            ->check(parses_as("classifier", [](const std::string& v) { (void)learn::classifier_kind_from_string(v); }));
    };
    auto add_training = [&](CLI::App* sub) {
        add_model_choice(sub);
        add_epsilons(sub);
        add_seed(sub);
        add_jobs(sub);
        sub->add_option("--profile", c.profile, "bug, improvement or both")
            ->capture_default_str()
            ->check(CLI::IsMember({"bug", "improvement", "both"}, CLI::ignore_case));
        sub->add_option("--repetitions", c.repetitions, "Balanced sub-samples per bundle")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--trees", c.trees, "Random forest size")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--attrs-per-split", c.attrs_per_split, "Forest attributes per split (0: log2(m)+1)")
            ->capture_default_str();
        sub->add_option("--pruning-confidence", c.pruning_confidence, "Decision tree pruning confidence")
            ->capture_default_str();
        sub->add_option("--min-leaf", c.min_leaf, "Decision tree minimum leaf weight")->capture_default_str();
        sub->add_option("--ngram-min", c.ngram_min, "Smallest n-gram added to the vector space")->capture_default_str();
        sub->add_option("--ngram-max", c.ngram_max, "Largest n-gram added to the vector space")->capture_default_str();
        sub->add_flag("--include-human", c.include_human, "Treat HumanAccepted links as Linked labels");
    };
    c.jobs = default_jobs();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Import commit and issue exports into a project archive");
    std::string git_file, issues_file, out_dir, snapshots_dir, repo_dir, project_key, identity = "committer";
    std::vector<std::string> include_globs, exclude_globs;
    ingest->add_option("--git", git_file, "Commit export (git log format, see docs)")->required();
    ingest->add_option("--issues", issues_file, "Issue export (JSON array)")->required();
    ingest->add_option("--out", out_dir, "Archive directory to write")->required();
    ingest->add_option("--project-key", project_key, "Project key (default: from the first issue)");
    ingest->add_option("--snapshots", snapshots_dir, "Directory with <hash>/<path> file snapshots");
    ingest->add_option("--repo", repo_dir, "Git repository to read file snapshots from");
    ingest->add_option("--identity", identity, "Git identity for user ids: committer or author")
        ->capture_default_str()
        ->check(CLI::IsMember({"committer", "author"}, CLI::ignore_case));
    ingest->add_option("--include-glob", include_globs, "Source path include glob (repeatable)");
    ingest->add_option("--exclude-glob", exclude_globs, "Source path exclude glob (repeatable)");

    // stats
    auto* stats = app.add_subcommand("stats", "Project statistics");
    add_project(stats);
    add_epsilons(stats);

    // train
    auto* train = app.add_subcommand("train", "Train repetition bundles and store them in the archive");
    add_project(train);
    add_training(train);
    std::string scope = "full", features_csv;
    train->add_option("--scope", scope, "full: all candidate pairs; split: training period only")
        ->capture_default_str()
        ->check(CLI::IsMember({"full", "split"}));
    train->add_option("--features-csv", features_csv, "Also write the training feature matrix as CSV");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Temporal-split evaluation of Scenario 1 and 2");
    add_project(evaluate);
    add_training(evaluate);
    std::string ground_truth, output_file;
    evaluate->add_option("-k,--k", c.k, "Scenario 1 cutoff")->capture_default_str()->check(CLI::PositiveNumber);
    evaluate->add_option("--threshold", c.threshold, "Scenario 2 score threshold")->capture_default_str();
    evaluate->add_option("--ground-truth", ground_truth, "True links (JSONL); explicit links are then withheld");
    evaluate->add_option("--format", c.format, "json, table or csv")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "table", "csv"}));
    evaluate->add_option("--output", output_file, "Write the report to a file instead of stdout");

    // recommend
    auto* rec = app.add_subcommand("recommend", "Top-k candidate issues for a commit");
    add_project(rec);
    add_model_choice(rec);
    add_epsilons(rec);
    std::string commit_hash;
    rec->add_option("--commit", commit_hash, "Commit hash")->required();
    rec->add_option("-k,--k", c.k, "Number of issues")->capture_default_str()->check(CLI::PositiveNumber);

    // augment
    auto* augment = app.add_subcommand("augment", "Add classifier links scoring above the threshold");
    add_project(augment);
    add_model_choice(augment);
    add_epsilons(augment);
    add_jobs(augment);
    bool dry_run = false, with_stats = false;
    augment->add_option("--threshold", c.threshold, "Score threshold")->capture_default_str();
    augment->add_flag("--dry-run", dry_run, "Print the links without touching the archive");
    augment->add_flag("--stats", with_stats, "Also report mean links classified per unlinked commit");

    // review-batch
    auto* review = app.add_subcommand("review-batch", "Build a blind review batch or report its agreement");
    add_project(review);
    add_model_choice(review);
    add_epsilons(review);
    add_seed(review);
    add_jobs(review);
    std::string batch_id;
    bool agreement = false;
    review->add_option("--id", batch_id, "Batch id (default: batch-<seed>)");
    review->add_flag("--kappa", agreement, "Report Fleiss' kappa over the batch verdicts instead of building");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic project archive with ground truth");
    eval::SynthParams sp;
    synth->add_option("--out", out_dir, "Archive directory to write")->required();
    add_seed(synth);
    synth->add_option("--n-issues", sp.n_issues, "Qualifying issues")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--n-commits", sp.n_commits, "Commits")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--tag-omission-rate", sp.tag_omission_rate, "Fraction of true links without a tag")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--signal-strength", sp.signal_strength, "Strength of committer and text signal")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--developers", sp.developers, "Developers")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--project-key", sp.project_key, "Project key")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the review API");
    add_project(serve);
    add_model_choice(serve);
    add_epsilons(serve);
    int port = service::kDefaultPort;
    std::string host = "127.0.0.1", cors = "*";
    serve->add_option("--port", port, "TCP port")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--cors-origin", cors, "Allowed browser origin")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << "traceforge 1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << failed->help();
        return 1;
    }

    try {
        if (ingest->parsed()) {
            IngestOptions options;
            options.project_key = project_key;
            if (identity == "committer") {
                options.identity_field = CommitIdentity::Committer;
            } else if (identity == "author") {
                options.identity_field = CommitIdentity::Author;
            } else {
                throw DataError("--identity must be committer or author");
            }
            if (!include_globs.empty()) options.filter.include_globs = include_globs;
            if (!exclude_globs.empty()) options.filter.exclude_globs = exclude_globs;
            if (!snapshots_dir.empty() && !repo_dir.empty()) throw DataError("use either --snapshots or --repo");
            const auto raw_commits = parse_commit_export(archive_detail::read_text(git_file));
            const auto raw_issues = parse_issue_export(archive_detail::read_text(issues_file));
            std::unique_ptr<SnapshotSource> source;
            if (!snapshots_dir.empty()) source = std::make_unique<DirectorySnapshotSource>(snapshots_dir);
            if (!repo_dir.empty()) source = std::make_unique<GitSnapshotSource>(repo_dir);
            IngestReport report;
            const auto store = build_store(raw_issues, raw_commits, options, source.get(), &report);
            save_project(store, out_dir);
            out << nlohmann::json{{"archive", out_dir},
                                  {"project", store.project_key},
                                  {"raw_issues", report.raw_issues},
                                  {"issues", store.issues.size()},
                                  {"dropped_issues", report.dropped_issues},
                                  {"raw_commits", report.raw_commits},
                                  {"commits", store.commits.size()},
                                  {"explicit_links", report.explicit_links},
                                  {"missing_snapshots", report.missing_snapshots}}
                       .dump(2)
                << "\n";
        } else if (stats->parsed()) {
            const auto store = load_project(c.project);
            out << project_stats(store, candidates_of(c)).dump(2) << "\n";
        } else if (train->parsed()) {
            if (scope != "full" && scope != "split") throw DataError("--scope must be full or split");
            const auto store = load_project(c.project);
            const auto set = attribute_set_from_string(c.attribute_set);
            const auto cfg = pipeline_of(c, set);
            nlohmann::json summary = nlohmann::json::array();
            std::ostringstream csv;
            for (auto profile : profiles_of(c.profile)) {
                const auto prepared = scope == "full" ? prepare_full_profile(store, profile, cfg)
                                                      : prepare_split_profile(store, profile, cfg);
                const auto bundle = train_profile(prepared, cfg);
                save_trained(c.project, prepared, bundle, set);
                if (!features_csv.empty()) write_feature_csv(csv, prepared.train, prepared.train_vectors);
                nlohmann::json names = nlohmann::json::array();
                for (auto a : bundle.attributes) names.push_back(attribute_name(a));
                summary.push_back({{"profile", std::string(to_string(profile))},
                                   {"model", model_path(c.project, profile, set, cfg.classifier.kind).string()},
                                   {"attributes", names},
                                   {"training", bundle.training},
                                   {"pairs", prepared.train.size()},
                                   {"short_samples", bundle.short_samples},
                                   {"missing_snapshots", prepared.missing_snapshots}});
            }
            if (!features_csv.empty()) archive_detail::write_text(features_csv, csv.str());
            out << nlohmann::json{{"trained", summary}}.dump(2) << "\n";
        } else if (evaluate->parsed()) {
            require_format(c.format, {"json", "table", "csv"});
            const auto store = load_project(c.project);
            std::set<eval::PairKey> truth;
            if (!ground_truth.empty()) truth = load_ground_truth(ground_truth);
            const auto sets = sets_of(c.attribute_set);
            std::vector<EvaluationResult> results;
            for (auto profile : profiles_of(c.profile)) {
                const auto prepared = prepare_split_profile(store, profile, pipeline_of(c, sets.front()));
                for (auto set : sets) {
                    results.push_back(evaluate_prepared(prepared, pipeline_of(c, set), c.k, c.threshold,
                                                        ground_truth.empty() ? nullptr : &truth));
                }
            }
            std::string text;
            if (c.format == "table") {
                text = evaluation_table(results);
            } else if (c.format == "csv") {
                text = evaluation_csv(results);
            } else {
                nlohmann::json report{{"project", store.project_key}, {"seed", c.seed}, {"results", nlohmann::json::array()}};
                for (const auto& r : results) report["results"].push_back(r.to_json());
                nlohmann::json tests = nlohmann::json::array();
                for (std::size_t a = 0; a < results.size(); ++a) {
                    for (std::size_t b = a + 1; b < results.size(); ++b) {
                        if (results[a].profile == results[b].profile) tests.push_back(compare_runs(results[a], results[b]));
                    }
                }
                report["mann_whitney"] = tests;
                text = report.dump(2) + "\n";
            }
            write_output(out, text, output_file);
        } else if (rec->parsed()) {
            const auto store = load_project(c.project);
            const auto models = require_models(c.project, c);
            store.commit(commit_hash);
            nlohmann::json list = nlohmann::json::array();
            for (const auto& r : recommend(store, models, commit_hash, c.k, candidates_of(c))) {
                list.push_back({{"issue_key", r.issue_key}, {"score", r.score}});
            }
            out << nlohmann::json{{"commit_hash", commit_hash}, {"k", c.k}, {"recommendations", list}}.dump(2) << "\n";
        } else if (augment->parsed()) {
            auto store = load_project(c.project);
            const auto models = require_models(c.project, c);
            const auto cfg = candidates_of(c);
            const auto proposals = propose_links(store, models, c.threshold, cfg, c.jobs);
            nlohmann::json list = nlohmann::json::array();
            for (const auto& p : proposals) {
                list.push_back({{"commit_hash", p.commit_hash}, {"issue_key", p.issue_key}, {"score", p.score}});
            }
            nlohmann::json report{{"threshold", c.threshold}, {"dry_run", dry_run}, {"links", list}};
            if (with_stats) {
                nlohmann::json s = nlohmann::json::array();
                for (const auto& a : augmentation_stats(store, models, cfg, c.jobs)) {
                    s.push_back({{"profile", std::string(to_string(a.profile))},
                                 {"unlinked_commits", a.unlinked_commits},
                                 {"classified_links", a.classified_links},
                                 {"mean_links_per_commit", a.mean}});
                }
                report["classified_per_unlinked_commit"] = s;
            }
            if (!dry_run) {
                report["added"] = apply_links(store, proposals);
                save_project(store, c.project);
            }
            out << report.dump(2) << "\n";
        } else if (review->parsed()) {
            const std::string id = batch_id.empty() ? "batch-" + std::to_string(c.seed) : batch_id;
            const auto store = load_project(c.project);
            if (agreement) {
                const auto batch = eval::load_batch(c.project, id);
                out << eval::batch_agreement(store.verdicts, batch).to_json(id).dump(2) << "\n";
            } else {
                const auto models = require_models(c.project, c);
                const auto batch = eval::build_review_batch(store, models, c.seed, id, candidates_of(c), c.jobs);
                eval::save_batch(c.project, batch);
                out << nlohmann::json{{"id", batch.id},
                                      {"file", eval::batch_path(c.project, batch.id).string()},
                                      {"entries", batch.entries.size()},
                                      {"group_a", batch.group_size('A')},
                                      {"group_b", batch.group_size('B')}}
                           .dump(2)
                    << "\n";
            }
        } else if (synth->parsed()) {
            const auto res = eval::synth_project(c.seed, sp);
            save_project(res.store, out_dir);
            save_ground_truth(res.ground_truth, std::filesystem::path(out_dir) / "ground_truth.jsonl");
            out << nlohmann::json{{"archive", out_dir},
                                  {"seed", c.seed},
                                  {"issues", res.store.issues.size()},
                                  {"commits", res.store.commits.size()},
                                  {"explicit_links", res.report.explicit_links},
                                  {"ground_truth_links", res.ground_truth.size()},
                                  {"ground_truth", (std::filesystem::path(out_dir) / "ground_truth.jsonl").string()}}
                       .dump(2)
                << "\n";
        } else if (serve->parsed()) {
            service::ServiceOptions options;
            options.attribute_set = attribute_set_from_string(c.attribute_set);
            options.kind = learn::classifier_kind_from_string(c.classifier);
            options.candidates = candidates_of(c);
            options.cors_origin = cors;
            service::ReviewService svc(c.project, options);
            httplib::Server server;
            svc.mount(server);
            err << "serving " << svc.store().project_key << " on http://" << host << ":" << port
                << (svc.has_model() ? "" : " (no trained model: recommendations return 409)") << "\n";
            if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        result = 2;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << "\n";
        result = 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        result = 2;
    }
    return result;
}

}  // namespace traceforge::cli
