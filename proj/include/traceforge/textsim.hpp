#pragma once

// Vector space model with word n-grams and tf-idf weighting.
//
// Text is tokenised on non-alphanumeric characters, identifiers are split at
// camelCase boundaries (snake_case falls out of the tokenisation), tokens are
// lower-cased, stop words dropped and the rest Porter-stemmed. A document's
// terms are its stemmed tokens plus every contiguous 2..4-gram over them,
// joined with '_'.
//
//   idf(t)   = ln(N / max(df(t), 1)) + 1
//   w(t, d)  = tf(t, d) * idf(t)
//   sim      = (v1 . v2) / (|v1| |v2|), 0 when either vector is zero

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "traceforge/core/error.hpp"
#include "traceforge/text/porter.hpp"
#include "traceforge/text/stopwords.hpp"

namespace traceforge::text {

using TokenList = std::vector<std::string>;

class StopWords {
public:
    StopWords() : words_(kDefaultStopWords.begin(), kDefaultStopWords.end()) {}
    explicit StopWords(std::set<std::string, std::less<>> words) : words_(std::move(words)) {}

    /// One word per line; blank lines and lines starting with '#' are skipped.
    static StopWords from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot read stop-word list " + path.string());
        std::set<std::string, std::less<>> words;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            words.insert(line);
        }
        return StopWords(std::move(words));
    }

    bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
    const std::set<std::string, std::less<>>& words() const { return words_; }

private:
    std::set<std::string, std::less<>> words_;
};

inline const StopWords& default_stop_words() {
    static const StopWords words;
    return words;
}

/// Alphanumeric runs split into identifier constituents, case preserved.
/// "optionsParser" -> options, Parser; "XMLReader2" -> XML, Reader2.
inline std::vector<std::string> split_identifiers(std::string_view text) {
    auto is_alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    auto is_upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
    auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_alnum(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && is_alnum(text[i])) ++i;
        std::string_view run = text.substr(start, i - start);
        std::size_t piece = 0;
        for (std::size_t p = 1; p < run.size(); ++p) {
            const bool lower_to_upper = (is_lower(run[p - 1]) || std::isdigit(static_cast<unsigned char>(run[p - 1]))) &&
                                        is_upper(run[p]);
            const bool acronym_end = is_upper(run[p - 1]) && is_upper(run[p]) && p + 1 < run.size() &&
                                     is_lower(run[p + 1]);
            if (lower_to_upper || acronym_end) {
                out.emplace_back(run.substr(piece, p - piece));
                piece = p;
            }
        }
        if (piece < run.size()) out.emplace_back(run.substr(piece));
    }
    return out;
}

inline TokenList preprocess(std::string_view text, const StopWords& stop_words = default_stop_words()) {
    TokenList tokens;
    PorterStemmer stem;
    for (auto& piece : split_identifiers(text)) {
        std::transform(piece.begin(), piece.end(), piece.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (stop_words.contains(piece)) continue;
        auto stemmed = stem(piece);
        if (!stemmed.empty()) tokens.push_back(std::move(stemmed));
    }
    return tokens;
}

inline std::vector<std::string> ngrams(const TokenList& tokens, std::size_t n_min = 2, std::size_t n_max = 4) {
    if (n_min == 0 || n_min > n_max) throw Error("ngrams: require 0 < n_min <= n_max");
    std::vector<std::string> out;
    for (std::size_t n = n_min; n <= n_max; ++n) {
        if (tokens.size() < n) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (std::size_t k = 1; k < n; ++k) {
                gram += '_';
                gram += tokens[i + k];
            }
            out.push_back(std::move(gram));
        }
    }
    return out;
}

struct NgramRange {
    std::size_t min = 2;
    std::size_t max = 4;
};

/// Unigrams followed by n-grams: the term multiset of a document.
inline std::vector<std::string> document_terms(const TokenList& tokens, NgramRange range = {}) {
    std::vector<std::string> terms = tokens;
    auto grams = ngrams(tokens, range.min, range.max);
    terms.insert(terms.end(), std::make_move_iterator(grams.begin()), std::make_move_iterator(grams.end()));
    return terms;
}

inline std::vector<std::string> document_terms(std::string_view text, NgramRange range = {}) {
    return document_terms(preprocess(text), range);
}

/// Document frequencies over a corpus. Immutable once built.
class CorpusIndex {
public:
    CorpusIndex() = default;

    std::size_t document_count() const { return document_count_; }
    NgramRange ngram_range() const { return range_; }

    std::size_t df(std::string_view term) const {
        auto it = df_.find(std::string(term));
        return it == df_.end() ? 0 : it->second;
    }

    double idf(std::string_view term) const {
        const auto d = std::max<std::size_t>(df(term), 1);
        return std::log(static_cast<double>(document_count_) / static_cast<double>(d)) + 1.0;
    }

    std::size_t vocabulary_size() const { return df_.size(); }

    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        std::ofstream meta(dir / "meta.json", std::ios::trunc);
        meta << nlohmann::json{{"document_count", document_count_},
                               {"ngram_min", range_.min},
                               {"ngram_max", range_.max}}
                    .dump(2)
             << "\n";
        std::vector<std::pair<std::string, std::size_t>> sorted(df_.begin(), df_.end());
        std::sort(sorted.begin(), sorted.end());
        std::ofstream terms(dir / "df.jsonl", std::ios::trunc);
        for (const auto& [term, count] : sorted) terms << nlohmann::json{{"t", term}, {"df", count}}.dump() << "\n";
        if (!meta || !terms) throw Error("cannot write corpus index to " + dir.string());
    }

    static CorpusIndex load(const std::filesystem::path& dir) {
        std::ifstream meta_in(dir / "meta.json");
        if (!meta_in) throw Error("no corpus index in " + dir.string());
        const auto meta = nlohmann::json::parse(meta_in);
        CorpusIndex index;
        index.document_count_ = meta.at("document_count").get<std::size_t>();
        index.range_ = {meta.at("ngram_min").get<std::size_t>(), meta.at("ngram_max").get<std::size_t>()};
        std::ifstream terms(dir / "df.jsonl");
        std::string line;
        while (std::getline(terms, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            index.df_[j.at("t").get<std::string>()] = j.at("df").get<std::size_t>();
        }
        if (index.document_count_ == 0) throw DataError("corpus index has zero documents");
        return index;
    }

    friend bool operator==(const CorpusIndex&, const CorpusIndex&) = default;

private:
    friend CorpusIndex build_index(std::span<const std::vector<std::string>>, NgramRange);

    std::unordered_map<std::string, std::size_t> df_;
    std::size_t document_count_ = 0;
    NgramRange range_;
};

inline bool operator==(NgramRange a, NgramRange b) { return a.min == b.min && a.max == b.max; }

/// Each document is a term multiset (see document_terms).
inline CorpusIndex build_index(std::span<const std::vector<std::string>> documents, NgramRange range = {}) {
    if (documents.empty()) throw DataError("cannot build a corpus index from zero documents");
    CorpusIndex index;
    index.document_count_ = documents.size();
    index.range_ = range;
    for (const auto& doc : documents) {
        std::vector<std::string_view> unique(doc.begin(), doc.end());
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        for (auto term : unique) ++index.df_[std::string(term)];
    }
    return index;
}

/// Sparse tf-idf vector, entries sorted by term, with its Euclidean norm.
struct DocumentVector {
    std::vector<std::pair<std::string, double>> weights;
    double norm = 0.0;

    bool empty() const { return weights.empty(); }

    double weight(std::string_view term) const {
        auto it = std::lower_bound(weights.begin(), weights.end(), term,
                                   [](const auto& entry, std::string_view t) { return entry.first < t; });
        return it != weights.end() && it->first == term ? it->second : 0.0;
    }
};

inline DocumentVector make_vector(std::vector<std::pair<std::string, double>> weights) {
    std::sort(weights.begin(), weights.end());
    DocumentVector v;
    for (auto& [term, w] : weights) {
        if (!v.weights.empty() && v.weights.back().first == term) {
            v.weights.back().second += w;
        } else {
            v.weights.emplace_back(std::move(term), w);
        }
    }
    double sq = 0.0;
    for (const auto& entry : v.weights) sq += entry.second * entry.second;
    v.norm = std::sqrt(sq);
    return v;
}

inline DocumentVector vectorize(const std::vector<std::string>& terms, const CorpusIndex& index) {
    std::vector<std::string_view> sorted(terms.begin(), terms.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<std::string, double>> weights;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        weights.emplace_back(std::string(sorted[i]), static_cast<double>(j - i) * index.idf(sorted[i]));
        i = j;
    }
    return make_vector(std::move(weights));
}

inline DocumentVector vectorize(std::string_view text, const CorpusIndex& index) {
    return vectorize(document_terms(text, index.ngram_range()), index);
}

inline double cosine(const DocumentVector& a, const DocumentVector& b) {
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    double dot = 0.0;
    auto ia = a.weights.begin();
    auto ib = b.weights.begin();
    while (ia != a.weights.end() && ib != b.weights.end()) {
        const int c = ia->first.compare(ib->first);
        if (c == 0) {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        } else if (c < 0) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return std::clamp(dot / (a.norm * b.norm), 0.0, 1.0);
}

inline double sim(std::string_view text1, std::string_view text2, const CorpusIndex& index) {
    return cosine(vectorize(text1, index), vectorize(text2, index));
}

}  // namespace traceforge::text
