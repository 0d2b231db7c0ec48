#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "traceforge/learn/forest.hpp"
#include "traceforge/learn/model.hpp"
#include "traceforge/learn/naive_bayes.hpp"
#include "traceforge/learn/tree.hpp"

using namespace traceforge;
using namespace traceforge::learn;

namespace {

Dataset one_numeric(std::vector<std::pair<double, bool>> points) {
    Dataset d;
    d.schema = {{"x", false}};
    for (auto [x, linked] : points) d.add({x}, linked);
    return d;
}

double accuracy(const TrainedModel& m, const Dataset& test) {
    std::size_t right = 0;
    for (std::size_t r = 0; r < test.size(); ++r) right += m.classify(test.rows[r]) == (test.labels[r] == 1) ? 1 : 0;
    return static_cast<double>(right) / static_cast<double>(test.size());
}

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace

TEST(NaiveBayes, SymmetricDataGivesHalfAtTheMidpoint) {
    const auto nb = NaiveBayes::fit(one_numeric({{1, true}, {3, true}, {-1, false}, {-3, false}}));
    EXPECT_NEAR(nb.score({0.0}), 0.5, 1e-12);
    EXPECT_GT(nb.score({2.0}), 0.99);
    EXPECT_LT(nb.score({-2.0}), 0.01);
    EXPECT_NEAR(nb.score({std::nullopt}), 0.5, 1e-12);
}

TEST(NaiveBayes, ClosedFormPosterior) {
    // Linked: 1, 3 (mean 2, sd 1). NonLinked: 0, 0, 6 (mean 2, sd sqrt(8)).
    const auto nb = NaiveBayes::fit(one_numeric({{1, true}, {3, true}, {0, false}, {0, false}, {6, false}}));
    const double x = 2.5;
    const double p1 = (2.0 + 1.0) / 7.0 * normal_pdf(x, 2.0, 1.0);
    const double p0 = (3.0 + 1.0) / 7.0 * normal_pdf(x, 2.0, std::sqrt(8.0));
    EXPECT_NEAR(nb.score({x}), p1 / (p0 + p1), 1e-12);
}

TEST(NaiveBayes, CategoricalLaplaceWithOtherBucket) {
    Dataset d;
    d.schema = {{"c", true}};
    d.add({1.0}, true);
    d.add({1.0}, true);
    d.add({2.0}, false);
    const auto nb = NaiveBayes::fit(d);
    // Values {1, 2} plus OTHER: 3 slots.
    const double l = 3.0 / 5.0 * (2.0 + 1.0) / (2.0 + 3.0);
    const double n = 2.0 / 5.0 * (0.0 + 1.0) / (1.0 + 3.0);
    EXPECT_NEAR(nb.score({1.0}), l / (l + n), 1e-12);
    const double lo = 3.0 / 5.0 * 1.0 / 5.0, no = 2.0 / 5.0 * 1.0 / 4.0;
    EXPECT_NEAR(nb.score({7.0}), lo / (lo + no), 1e-12);
}

TEST(Classifiers, SeparableFixtureHeldOutAccuracy) {
    for (auto kind : {ClassifierKind::NaiveBayes, ClassifierKind::DecisionTree, ClassifierKind::RandomForest}) {
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ClassifierParams p;
            p.kind = kind;
            p.seed = seed;
            p.forest_trees = 30;
            const auto m = train(p, fixtures::separable_dataset(seed, 200));
            sum += accuracy(m, fixtures::separable_dataset(1000 + seed, 200));
        }
        EXPECT_GE(sum / 10.0, 0.95) << to_string(kind);
    }
}

TEST(Forest, TrainingAccuracyOnToyData) {
    const auto d = fixtures::separable_dataset(5, 150);
    ClassifierParams p;
    p.seed = 5;
    EXPECT_GE(accuracy(train(p, d), d), 0.99);
}

TEST(Forest, SingleTreeEqualsUnprunedTree) {
    const auto d = fixtures::separable_dataset(11, 120);
    ForestOptions fo;
    fo.trees = 1;
    fo.bootstrap = false;
    fo.attrs_per_split = d.attribute_count();
    fo.min_leaf = 2.0;
    fo.seed = 3;
    const auto forest = RandomForest::fit(d, fo);
    TreeOptions to;
    to.prune = false;
    to.min_leaf = 2.0;
    const auto tree = DecisionTree::fit(d, to);
    Rng rng(99);
    for (int k = 0; k < 100; ++k) {
        const Row row{rng.uniform(), rng.bernoulli(0.1) ? std::nullopt : std::optional<double>(rng.uniform()),
                      static_cast<double>(rng.below(4))};
        EXPECT_DOUBLE_EQ(forest.score(row), tree.distribution(row)[1]);
    }
}

TEST(Tree, PruningNeverGrowsTheTree) {
    const auto d = fixtures::separable_dataset(2, 300);
    TreeOptions pruned, unpruned;
    unpruned.prune = false;
    EXPECT_LE(DecisionTree::fit(d, pruned).leaf_count(), DecisionTree::fit(d, unpruned).leaf_count());
    const auto t = DecisionTree::fit(d, pruned);
    for (double x : {0.1, 0.9}) {
        const double s = t.score({x, 0.5, 1.0});
        EXPECT_GT(s, 0.0);
        EXPECT_LT(s, 1.0);
    }
}

TEST(Subsample, ExactCounts) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        Dataset d;
        d.schema = {{"x", false}};
        const auto pos = 1 + rng.below(20);
        const auto neg = rng.below(60);
        for (std::uint64_t k = 0; k < pos; ++k) d.add({static_cast<double>(k)}, true);
        for (std::uint64_t k = 0; k < neg; ++k) d.add({1000.0 + static_cast<double>(k)}, false);
        const auto s = subsample_balance(d, seed);
        EXPECT_EQ(s.data.positives(), pos);
        EXPECT_EQ(s.data.negatives(), std::min(pos, neg));
        EXPECT_EQ(s.nonlinked_short, neg < pos);
        std::set<double> seen;
        for (const auto& r : s.data.rows) EXPECT_TRUE(seen.insert(*r[0]).second) << "row sampled twice";
        EXPECT_EQ(subsample_balance(d, seed).data.rows, s.data.rows);
    }
    Dataset none;
    none.schema = {{"x", false}};
    none.add({1.0}, false);
    EXPECT_THROW(subsample_balance(none, 1), DataError);
}

namespace {

Dataset wide_fixture(std::uint64_t seed, std::size_t n) {
    const auto attrs = fixed_attributes(AttributeSet::Similarity);
    Rng rng(seed);
    Dataset d;
    d.schema = schema_for(attrs);
    for (std::size_t k = 0; k < n; ++k) {
        const bool linked = rng.bernoulli(0.2);
        d.add({rng.bernoulli(0.5) ? 1.0 : 0.0, linked ? 0.5 + 0.5 * rng.uniform() : 0.4 * rng.uniform(), rng.uniform()},
              linked);
    }
    return d;
}

}  // namespace

TEST(Bundle, RepetitionsDeterminismAndRoundTrip) {
    const auto attrs = fixed_attributes(AttributeSet::Similarity);
    const auto d = wide_fixture(4, 200);
    for (auto kind : {ClassifierKind::NaiveBayes, ClassifierKind::DecisionTree, ClassifierKind::RandomForest}) {
        ClassifierParams p;
        p.kind = kind;
        p.forest_trees = 10;
        const auto b1 = train_repetitions(p, d, attrs, 42, "Similarity");
        const auto b2 = train_repetitions(p, d, attrs, 42, "Similarity", 3);
        ASSERT_EQ(b1.members.size(), kRepetitions);
        for (std::size_t r = 0; r < kRepetitions; ++r) {
            EXPECT_EQ(b1.members[r].seed(), 42 + r);
            EXPECT_EQ(b1.members[r].counts().linked, d.positives());
            EXPECT_EQ(b1.members[r].counts().nonlinked, d.positives());
        }
        EXPECT_EQ(b1.to_json(), b2.to_json());
        const auto back = RepetitionBundle::from_json(nlohmann::json::parse(b1.to_json().dump()));
        EXPECT_EQ(back.to_json(), b1.to_json());
        AttributeVector v{};
        v[attr(6)] = 1.0;
        v[attr(17)] = 0.7;
        v[attr(18)] = std::nullopt;
        EXPECT_DOUBLE_EQ(back.score(v), b1.score(v));
    }
}

TEST(Bundle, RepetitionCountIsAParameter) {
    const auto attrs = fixed_attributes(AttributeSet::Similarity);
    ClassifierParams p;
    p.kind = ClassifierKind::NaiveBayes;
    p.repetitions = 3;
    const auto b = train_repetitions(p, wide_fixture(1, 100), attrs, 7);
    EXPECT_EQ(b.members.size(), 3u);
    auto j = b.to_json();
    j["members"].erase(0);
    EXPECT_THROW(RepetitionBundle::from_json(j), ParseError);
    p.repetitions = 0;
    EXPECT_THROW(p.validate(), DataError);
}

TEST(Errors, SingleClassAndSchemaMismatch) {
    ClassifierParams p;
    EXPECT_THROW(train(p, one_numeric({{1, true}, {2, true}})), DataError);
    const auto m = train(p, one_numeric({{1, true}, {2, false}}));
    try {
        m.score({1.0, 2.0});
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("x"), std::string::npos);
    }
    const auto attrs = fixed_attributes(AttributeSet::Similarity);
    EXPECT_THROW(train_repetitions(p, one_numeric({{1, true}, {2, false}}), attrs, 1), DataError);
    p.pruning_confidence = 0.7;
    EXPECT_THROW(p.validate(), DataError);
    EXPECT_THROW(classifier_kind_from_string("svm"), ParseError);
}
