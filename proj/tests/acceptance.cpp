// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "link_corpus.hpp"
#include "reported_rows.hpp"
#include "traceforge/archive.hpp"
#include "traceforge/eval/metrics.hpp"
#include "traceforge/eval/synth.hpp"
#include "traceforge/features.hpp"
#include "traceforge/features/selection.hpp"
#include "traceforge/learn/forest.hpp"
#include "traceforge/learn/model.hpp"
#include "traceforge/learn/tree.hpp"
#include "traceforge/pipeline.hpp"
#include "traceforge/textsim.hpp"

using namespace traceforge;

namespace {

/// Collects failed expectations of one criterion.
struct Check {
    std::ostringstream why;
    int failures = 0;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        if (failures++ < 5) why << (failures > 1 ? "; " : "") << what;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream s;
        s << what << " = " << got << ", want " << want;
        expect(std::abs(got - want) <= tol, s.str());
    }
};

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<std::string(Check&)> body;  // returns a detail line
};

// ---------------------------------------------------------------------------

std::string figure4(Check& c) {
    const auto s = fixtures::fig4_store();
    const auto index = build_corpus_index(s);
    FeatureExtractor fx(s, index);
    const auto a = fx.compute(s.commit("c6"), s.issue("FIG-3"));
    const auto b = fx.compute(s.commit("c2"), s.issue("FIG-1"));
    const auto d = fx.compute(s.commit("c7"), s.issue("FIG-5"));
    auto value = [&](const AttributeVector& v, int n) { return v[attr(n)].value_or(-1e9); };
    c.near(value(a, 4), 1.0, 0.0, "(C6,I3) a4");
    c.near(value(a, 5), 2.0, 0.0, "(C6,I3) a5");
    c.near(value(a, 6), 1.0, 0.0, "(C6,I3) a6");
    c.near(value(b, 8), 1.0, 1.0, "(C2,I1) a8");
    c.near(value(b, 9), 0.5, 0.0, "(C2,I1) a9");
    c.near(value(d, 11), 2.0, 1.0, "(C7,B1) a11");
    c.near(value(d, 12), 2.0 / 3.0, 1e-12, "(C7,B1) a12");
    c.near(value(d, 14), 3.0, 0.0, "(C7,B1) a14");
    c.near(overlap(s.commit("c1"), s.commit("c2")), 0.5, 0.0, "overlap(C1,C2)");
    c.near(overlap(s.commit("c3"), s.commit("c4")), 0.0, 0.0, "overlap(C3,C4)");
    c.expect(s.is_linked("c1", "FIG-1"), "is_linked(C1,I1)");
    c.expect(!s.is_linked("c6", "FIG-3"), "C6 must be unlinked");
    return "10 values checked";
}

std::string metric_formulas(Check& c) {
    double worst = 0.0;
    for (const auto& r : fixtures::recommendation_rows()) {
        const double d = std::abs(eval::fbeta(r.precision, r.recall, 2.0) - r.f);
        worst = std::max(worst, d);
        c.expect(d <= 0.02, r.project + "/" + r.profile + " F2");
    }
    for (const auto& r : fixtures::augmentation_rows()) {
        const double d = std::abs(eval::fbeta(r.precision, r.recall, 0.5) - r.f);
        worst = std::max(worst, d);
        c.expect(d <= 0.02, r.project + "/" + r.profile + " F0.5");
    }
    std::ostringstream s;
    s << "24 rows, max |dF| = " << worst;
    return s.str();
}

std::string end_to_end(Check& c) {
    eval::SynthParams params;  // 200 issues, 400 commits, omission 0.3, strength 1.0
    const auto res = eval::synth_project(7, params);
    PipelineConfig cfg;  // RandomForest, All, 10 repetitions
    std::ostringstream s;
    for (auto profile : {IssueKind::Bug, IssueKind::Improvement}) {
        const auto p = prepare_split_profile(res.store, profile, cfg);
        const auto r = evaluate_prepared(p, cfg, 3, 0.95, &res.ground_truth);
        const std::string name(to_string(profile));
        c.expect(r.scenario1.recall >= 0.90, name + " S1 recall " + std::to_string(r.scenario1.recall));
        c.expect(r.scenario2.precision >= 0.90, name + " S2 precision " + std::to_string(r.scenario2.precision));
        bool retrieved = false;
        for (const auto& m : r.scenario2.repetitions) retrieved = retrieved || m.retrieved > 0;
        c.expect(retrieved, name + " S2 retrieved nothing");
        c.expect(r.test_truth > 0, name + " has no withheld truth");
        s << name << ": S1 R=" << r.scenario1.recall << " S2 P=" << r.scenario2.precision
          << " (truth " << r.test_truth << ") ";
    }
    return s.str();
}

std::string classifier_sanity(Check& c) {
    std::ostringstream s;
    for (auto kind : {learn::ClassifierKind::NaiveBayes, learn::ClassifierKind::DecisionTree,
                      learn::ClassifierKind::RandomForest}) {
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            learn::ClassifierParams p;
            p.kind = kind;
            p.seed = seed;
            const auto m = learn::train(p, fixtures::separable_dataset(seed, 200));
            const auto test = fixtures::separable_dataset(1000 + seed, 200);
            std::size_t right = 0;
            for (std::size_t r = 0; r < test.size(); ++r) right += m.classify(test.rows[r]) == (test.labels[r] == 1);
            sum += static_cast<double>(right) / static_cast<double>(test.size());
        }
        c.expect(sum / 10.0 >= 0.95, std::string(learn::to_string(kind)) + " accuracy " + std::to_string(sum / 10.0));
        s << learn::to_string(kind) << "=" << sum / 10.0 << " ";
    }
    const auto d = fixtures::separable_dataset(11, 120);
    learn::ForestOptions fo;
    fo.trees = 1;
    fo.bootstrap = false;
    fo.attrs_per_split = d.attribute_count();
    fo.min_leaf = 2.0;
    const auto forest = learn::RandomForest::fit(d, fo);
    learn::TreeOptions to;
    to.prune = false;
    to.min_leaf = 2.0;
    const auto tree = learn::DecisionTree::fit(d, to);
    Rng rng(99);
    int equal = 0;
    for (int k = 0; k < 100; ++k) {
        const learn::Row row{rng.uniform(), rng.uniform(), static_cast<double>(rng.below(4))};
        equal += forest.score(row) == tree.distribution(row)[1];
    }
    c.expect(equal == 100, "forest-of-one differs from the unpruned tree on " + std::to_string(100 - equal) + " rows");
    s << "one-tree match " << equal << "/100";
    return s.str();
}

double pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

std::string properties(Check& c) {
    Rng rng(2024);
    // Cosine.
    auto random_vector = [&] {
        std::vector<std::pair<std::string, double>> w;
        const auto n = rng.below(8);
        for (std::uint64_t k = 0; k < n; ++k) w.emplace_back("t" + std::to_string(rng.below(12)), 0.1 + 5.0 * rng.uniform());
        return text::make_vector(std::move(w));
    };
    std::vector<text::DocumentVector> vs;
    for (int k = 0; k < 1000; ++k) vs.push_back(random_vector());
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const auto& a = vs[k];
        const auto& b = vs[(k * 7 + 1) % vs.size()];
        const double ab = text::cosine(a, b);
        c.expect(ab == text::cosine(b, a) && ab >= 0.0 && ab <= 1.0, "cosine symmetry/range");
        auto w = a.weights;
        const double scale = 0.01 + 100.0 * rng.uniform();
        for (auto& e : w) e.second *= scale;
        c.expect(std::abs(text::cosine(text::make_vector(std::move(w)), b) - ab) <= 1e-12, "cosine scale invariance");
    }
    // Overlap.
    for (int k = 0; k < 1000; ++k) {
        std::vector<std::string> fa, fb;
        for (int f = 0; f < 6; ++f) {
            if (rng.bernoulli(0.4)) fa.push_back("F" + std::to_string(f));
            if (rng.bernoulli(0.4)) fb.push_back("F" + std::to_string(f));
        }
        const auto a = fixtures::make_commit("a", 0, fa), b = fixtures::make_commit("b", 0, fb);
        const double ab = overlap(a, b);
        c.expect(ab == overlap(b, a) && ab >= 0.0 && ab <= 1.0, "overlap symmetry/range");
    }
    // Candidates against the brute-force filter.
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto s = fixtures::random_store(seed, 20, 45);
        const CandidateConfig cfg;
        std::vector<CandidatePair> brute;
        for (const auto& [hash, cm] : s.commits) {
            for (const auto& [key, i] : s.issues) {
                if (cm.committed >= i.created && hours_between(i.resolved, cm.committed) <= cfg.epsilon_candidate_hours) {
                    brute.push_back({hash, key, s.has_link(hash, key, LinkOrigin::ExplicitTag) ? Label::Linked : Label::NonLinked});
                }
            }
        }
        c.expect(generate_candidates(s, cfg) == brute, "candidates differ from brute force, seed " + std::to_string(seed));
    }
    // Subsample balance.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng r(seed);
        learn::Dataset d;
        d.schema = {{"x", false}};
        const auto pos = 1 + r.below(20), neg = r.below(60);
        for (std::uint64_t k = 0; k < pos; ++k) d.add({double(k)}, true);
        for (std::uint64_t k = 0; k < neg; ++k) d.add({1000.0 + double(k)}, false);
        const auto sub = learn::subsample_balance(d, seed);
        c.expect(sub.data.positives() == pos && sub.data.negatives() == std::min(pos, neg), "subsample counts");
    }
    // Archive round trip.
    {
        fixtures::TempDir dir("accept-archive");
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto s = fixtures::random_store(seed, 20, 40);
            const auto path = dir.path / std::to_string(seed);
            save_project(s, path);
            c.expect(load_project(path) == s, "archive round trip, seed " + std::to_string(seed));
        }
    }
    // Mann-Whitney exact p against enumeration of all relabellings, n1 = n2 = 3.
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a, b;
        for (int k = 0; k < 3; ++k) a.push_back(double(rng.below(5)));
        for (int k = 0; k < 3; ++k) b.push_back(double(rng.below(5)));
        std::vector<double> pooled(a);
        pooled.insert(pooled.end(), b.begin(), b.end());
        const double observed = std::abs(pairwise_u(a, b) - 4.5);
        int total = 0, extreme = 0;
        for (unsigned mask = 0; mask < 64; ++mask) {
            if (__builtin_popcount(mask) != 3) continue;
            std::vector<double> x, y;
            for (int k = 0; k < 6; ++k) ((mask >> k) & 1u ? x : y).push_back(pooled[k]);
            ++total;
            extreme += std::abs(pairwise_u(x, y) - 4.5) >= observed - 1e-9;
        }
        const auto r = eval::mann_whitney_u(a, b);
        c.expect(r.exact && std::abs(r.p_value - double(extreme) / total) <= 1e-12, "Mann-Whitney exact p");
    }
    // Fleiss kappa toy matrices.
    c.near(eval::fleiss_kappa({{2, 1}, {1, 2}}).kappa, -1.0 / 3.0, 1e-9, "kappa toy 1");
    c.near(eval::fleiss_kappa({{2, 0}, {1, 1}, {0, 2}, {2, 0}}).kappa, 7.0 / 15.0, 1e-9, "kappa toy 2");
    c.near(eval::fleiss_kappa({{3, 0}, {0, 3}, {3, 0}}).kappa, 1.0, 1e-9, "kappa toy 3");
    return "cosine, overlap, candidates, subsample, archive, Mann-Whitney, kappa";
}

std::string auto_selection(Check& c) {
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        learn::Dataset d;
        d.schema = {{"x", false}, {"x_copy", false}, {"n1", false}, {"n2", false}, {"n3", true}};
        for (int k = 0; k < 300; ++k) {
            const bool linked = rng.bernoulli(0.5);
            const double x = linked ? 0.6 + 0.4 * rng.uniform() : 0.4 * rng.uniform();
            d.add({x, x, rng.uniform(), rng.uniform() * 10.0, double(rng.below(4))}, linked);
        }
        const auto picked = CfsEvaluator(d).search();
        const auto informative = std::count(picked.begin(), picked.end(), 0u) + std::count(picked.begin(), picked.end(), 1u);
        const bool noise = std::any_of(picked.begin(), picked.end(), [](std::size_t a) { return a >= 2; });
        good += informative == 1 && !noise;
    }
    c.expect(good >= 9, "only " + std::to_string(good) + "/10 seeds");
    return std::to_string(good) + "/10 seeds";
}

std::string link_extraction(Check& c) {
    const auto got = fixtures::extracted_corpus_links();
    const auto want = fixtures::expected_corpus_links();
    c.expect(fixtures::link_corpus().size() == 25, "corpus size");
    c.expect(got == want, "extracted set differs");
    for (const auto& [hash, key] : got) c.expect(key != "GROOVY-5082" || hash != "m1", "misspelled key linked");
    return std::to_string(got.size()) + " links from 25 messages";
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"figure-4 oracle", 1.0, figure4},
        {"metric formulas", 1.0, metric_formulas},
        {"end-to-end synthetic pipeline", 120.0, end_to_end},
        {"classifier sanity", 60.0, classifier_sanity},
        {"property suites", 60.0, properties},
        {"auto selection", 60.0, auto_selection},
        {"link extraction", 1.0, link_extraction},
    };
    int failed = 0;
    for (const auto& crit : criteria) {
        Check c;
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        try {
            detail = crit.body(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > crit.budget_seconds) c.expect(false, "took " + std::to_string(secs) + " s");
        const bool ok = c.failures == 0;
        failed += !ok;
        std::printf("%s  %-30s %7.2fs  %s\n", ok ? "PASS" : "FAIL", crit.name.c_str(), secs,
                    ok ? detail.c_str() : c.why.str().c_str());
    }
    return failed == 0 ? 0 : 1;
}
