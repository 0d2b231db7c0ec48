#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "traceforge/core/rng.hpp"
#include "traceforge/textsim.hpp"

using namespace traceforge;
using namespace traceforge::text;

TEST(Porter, MatchesReferenceVocabulary) {
    std::ifstream in(std::string(TRACEFORGE_TEST_DATA) + "/porter_vectors.tsv");
    ASSERT_TRUE(in) << "missing porter_vectors.tsv";
    std::string line;
    std::size_t checked = 0, wrong = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        ASSERT_NE(tab, std::string::npos) << line;
        const auto word = line.substr(0, tab);
        const auto stem = line.substr(tab + 1);
        if (porter_stem(word) != stem && ++wrong <= 10) {
            ADD_FAILURE() << word << ": expected " << stem << ", got " << porter_stem(word);
        }
        ++checked;
    }
    EXPECT_GT(checked, 1000u);
    EXPECT_EQ(wrong, 0u);
}

TEST(Porter, ClassicExamples) {
    EXPECT_EQ(porter_stem("caresses"), "caress");
    EXPECT_EQ(porter_stem("ponies"), "poni");
    EXPECT_EQ(porter_stem("relational"), "relat");
    EXPECT_EQ(porter_stem("generalization"), "gener");
    EXPECT_EQ(porter_stem("hopping"), "hop");
    EXPECT_EQ(porter_stem("a"), "a");
}

TEST(StopWords, ResourceFileMatchesBuiltInList) {
    const auto from_file = StopWords::from_file(std::string(TRACEFORGE_RESOURCE_DIR) + "/stopwords.txt");
    EXPECT_EQ(from_file.words(), default_stop_words().words());
    EXPECT_EQ(from_file.words().size(), kDefaultStopWords.size());
    EXPECT_THROW(StopWords::from_file("/nonexistent/stop.txt"), Error);
}

TEST(Preprocess, SplitsIdentifiersDropsStopWordsAndStems) {
    EXPECT_EQ(split_identifiers("optionsParser XMLReader2 snake_case"),
              (std::vector<std::string>{"options", "Parser", "XML", "Reader2", "snake", "case"}));
    EXPECT_EQ(preprocess("The parser is failing on nested closures"),
              (TokenList{"parser", "fail", "nest", "closur"}));
    EXPECT_TRUE(preprocess("the and of it").empty());
    EXPECT_TRUE(preprocess("").empty());
}

TEST(Ngrams, ContiguousRuns) {
    const TokenList t{"a", "b", "c", "d"};
    EXPECT_EQ(ngrams(t, 2, 2), (std::vector<std::string>{"a_b", "b_c", "c_d"}));
    EXPECT_EQ(ngrams(t, 2, 4).size(), 3u + 2u + 1u);
    EXPECT_EQ(ngrams(t, 4, 4), (std::vector<std::string>{"a_b_c_d"}));
    EXPECT_TRUE(ngrams({"x"}, 2, 4).empty());
    EXPECT_THROW(ngrams(t, 3, 2), Error);
    EXPECT_THROW(ngrams(t, 0, 2), Error);
    EXPECT_EQ(document_terms(t, {2, 3}).size(), 4u + 3u + 2u);
}

TEST(Index, IdfAndSimilarity) {
    const std::vector<std::vector<std::string>> docs{document_terms("parser fails on closures"),
                                                     document_terms("parser crashes"),
                                                     document_terms("update documentation")};
    const auto index = build_index(docs);
    EXPECT_EQ(index.document_count(), 3u);
    EXPECT_EQ(index.df("parser"), 2u);
    EXPECT_NEAR(index.idf("parser"), std::log(1.5) + 1.0, 1e-12);
    EXPECT_NEAR(index.idf("unseen"), std::log(3.0) + 1.0, 1e-12);
    EXPECT_NEAR(sim("parser fails on closures", "parser fails on closures", index), 1.0, 1e-12);
    EXPECT_EQ(sim("parser", "documentation", index), 0.0);
    EXPECT_EQ(sim("", "parser", index), 0.0);
    const double s = sim("parser fails", "parser crashes", index);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    EXPECT_THROW(build_index(std::vector<std::vector<std::string>>{}), DataError);
}

TEST(Index, SaveLoadRoundTrip) {
    fixtures::TempDir dir("index");
    const std::vector<std::vector<std::string>> docs{document_terms("a parser for groovy scripts", {2, 3}),
                                                     document_terms("the \"quoted\" closure", {2, 3})};
    const auto index = build_index(docs, {2, 3});
    index.save(dir.path / "idx");
    const auto back = CorpusIndex::load(dir.path / "idx");
    EXPECT_EQ(back, index);
    EXPECT_EQ(back.ngram_range().max, 3u);
    EXPECT_THROW(CorpusIndex::load(dir.path / "none"), Error);
}

namespace {

DocumentVector random_vector(Rng& rng, std::size_t vocab = 12) {
    std::vector<std::pair<std::string, double>> w;
    const auto n = rng.below(8);
    for (std::uint64_t k = 0; k < n; ++k) w.emplace_back("t" + std::to_string(rng.below(vocab)), 0.1 + 5.0 * rng.uniform());
    return make_vector(std::move(w));
}

DocumentVector scaled(const DocumentVector& v, double c) {
    auto w = v.weights;
    for (auto& entry : w) entry.second *= c;
    return make_vector(std::move(w));
}

}  // namespace

TEST(CosineProperties, SymmetryRangeAndScaleInvariance) {
    Rng rng(1234);
    std::vector<DocumentVector> vs;
    for (int k = 0; k < 1000; ++k) vs.push_back(random_vector(rng));
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const auto& a = vs[k];
        const auto& b = vs[(k * 7 + 1) % vs.size()];
        const double ab = cosine(a, b);
        EXPECT_DOUBLE_EQ(ab, cosine(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        const double c = 0.01 + 100.0 * rng.uniform();
        EXPECT_NEAR(cosine(scaled(a, c), b), ab, 1e-12);
        if (a.empty()) {
            EXPECT_EQ(cosine(a, a), 0.0);
        } else {
            EXPECT_NEAR(cosine(a, a), 1.0, 1e-12);
        }
    }
}
