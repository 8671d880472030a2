#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "augbench/common.hpp"
#include "augbench/features.hpp"

using namespace augbench;

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Brute-force reference: first-occurrence vocabulary, df >= min_df filter,
// idf(t) = ln((1 + n) / (1 + df)) + 1, weight = count * idf, optional L2.
struct ReferenceTfidf {
    std::vector<std::string> tokens;
    std::map<std::string, std::size_t> index_of;
    std::vector<double> idf;

    static ReferenceTfidf fit(const std::vector<std::vector<std::string>>& docs,
                              std::uint32_t min_df) {
        std::vector<std::string> order;
        std::map<std::string, std::size_t> df;
        for (const auto& doc : docs) {
            std::map<std::string, bool> seen;
            for (const auto& tok : doc) {
                if (df.find(tok) == df.end()) order.push_back(tok);
                if (!seen[tok]) {
                    ++df[tok];
                    seen[tok] = true;
                }
            }
        }
        ReferenceTfidf model;
        for (const auto& tok : order) {
            if (df[tok] < min_df) continue;
            model.index_of[tok] = model.tokens.size();
            model.tokens.push_back(tok);
            model.idf.push_back(
                std::log((1.0 + static_cast<double>(docs.size())) /
                         (1.0 + static_cast<double>(df[tok]))) +
                1.0);
        }
        return model;
    }

    std::vector<double> transform(const std::vector<std::string>& doc, bool l2) const {
        std::vector<double> dense(tokens.size(), 0.0);
        for (const auto& tok : doc) {
            auto it = index_of.find(tok);
            if (it != index_of.end()) dense[it->second] += 1.0;
        }
        for (std::size_t i = 0; i < dense.size(); ++i) dense[i] *= idf[i];
        if (l2) {
            double norm = 0.0;
            for (double v : dense) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > 0.0) {
                for (double& v : dense) v /= norm;
            }
        }
        return dense;
    }
};

std::vector<double> densify(const SparseVector& v) {
    std::vector<double> dense(v.dim, 0.0);
    for (const auto& [idx, val] : v.entries) dense[idx] = val;
    return dense;
}

std::vector<std::vector<std::string>> random_corpus(Rng& rng, std::size_t max_docs,
                                                    std::size_t alphabet) {
    std::size_t n_docs = 1 + rng.next_below(max_docs);
    std::vector<std::vector<std::string>> docs(n_docs);
    bool any_token = false;
    for (auto& doc : docs) {
        std::size_t len = rng.next_below(9);
        for (std::size_t i = 0; i < len; ++i) {
            doc.push_back(std::string(1, static_cast<char>('a' + rng.next_below(alphabet))));
            any_token = true;
        }
    }
    if (!any_token) docs[0].push_back("a");
    return docs;
}

}  // namespace

TEST_CASE("tfidf matches the brute-force reference on random corpora") {
    Rng rng(2026);
    for (int round = 0; round < 20; ++round) {
        auto docs = random_corpus(rng, 6, 8);
        for (bool l2 : {true, false}) {
            ReferenceTfidf ref = ReferenceTfidf::fit(docs, 1);
            TfidfConfig config;
            config.min_df = 1;
            config.l2_normalize = l2;
            TfidfModel model = TfidfModel::fit(docs, config);

            REQUIRE(model.dimension() == ref.tokens.size());
            REQUIRE(model.vocabulary().tokens == ref.tokens);
            for (std::size_t i = 0; i < ref.idf.size(); ++i) {
                CHECK(close(model.idf()[i], ref.idf[i], 1e-12));
            }
            for (const auto& doc : docs) {
                std::vector<double> got = densify(model.transform(doc));
                std::vector<double> want = ref.transform(doc, l2);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    CHECK(close(got[i], want[i], 1e-12));
                }
            }
        }
    }
}

TEST_CASE("tfidf worked example: idf values and a transformed query") {
    std::vector<std::vector<std::string>> docs{{"a"}, {"a", "b"}, {"a", "c"}};
    TfidfModel model = TfidfModel::fit(docs);

    REQUIRE(model.dimension() == 3);
    CHECK(close(model.idf()[0], 1.0, 1e-12));
    CHECK(close(model.idf()[1], std::log(2.0) + 1.0, 1e-12));
    CHECK(close(model.idf()[2], std::log(2.0) + 1.0, 1e-12));

    // query "a a b": weights (2 * 1.0, 1 * (ln 2 + 1)), then L2.
    SparseVector v = model.transform({"a", "a", "b"});
    double wb = std::log(2.0) + 1.0;
    double norm = std::sqrt(4.0 + wb * wb);
    REQUIRE(v.entries.size() == 2);
    CHECK(v.entries[0].first == 0);
    CHECK(v.entries[1].first == 1);
    CHECK(close(v.entries[0].second, 2.0 / norm, 1e-12));
    CHECK(close(v.entries[1].second, wb / norm, 1e-12));
    CHECK(close(v.squared_norm(), 1.0, 1e-12));

    TfidfConfig raw;
    raw.l2_normalize = false;
    TfidfModel unnormalized = TfidfModel::fit(docs, raw);
    SparseVector u = unnormalized.transform({"a", "a", "b"});
    CHECK(close(u.value_at(0), 2.0, 1e-12));
    CHECK(close(u.value_at(1), wb, 1e-12));
    CHECK(close(u.value_at(2), 0.0, 1e-12));
}

TEST_CASE("tfidf min_df filter keeps first-occurrence order of survivors") {
    std::vector<std::vector<std::string>> docs{
        {"x", "y", "z"}, {"y", "z"}, {"z", "q"}};
    TfidfConfig config;
    config.min_df = 2;
    TfidfModel model = TfidfModel::fit(docs, config);
    REQUIRE(model.dimension() == 2);
    CHECK(model.vocabulary().tokens == std::vector<std::string>{"y", "z"});

    // OOV tokens drop silently from transforms.
    SparseVector v = model.transform({"x", "q", "y"});
    REQUIRE(v.entries.size() == 1);
    CHECK(v.entries[0].first == 0);
}

TEST_CASE("tfidf rejects degenerate fits") {
    CHECK_THROWS_AS(TfidfModel::fit({}), DataError);
    CHECK_THROWS_AS(TfidfModel::fit({{}, {}}), DataError);
    TfidfConfig config;
    config.min_df = 3;
    CHECK_THROWS_AS(TfidfModel::fit({{"a"}, {"b"}}, config), DataError);
}

TEST_CASE("sparse vectors keep sorted entries and consistent norms") {
    std::vector<std::vector<std::string>> docs{{"c", "a", "b"}, {"a"}};
    TfidfConfig raw;
    raw.l2_normalize = false;
    TfidfModel model = TfidfModel::fit(docs, raw);
    SparseVector v = model.transform({"b", "c", "b"});
    for (std::size_t i = 1; i < v.entries.size(); ++i) {
        CHECK(v.entries[i - 1].first < v.entries[i].first);
    }
    double sq = 0.0;
    for (const auto& [idx, val] : v.entries) sq += val * val;
    CHECK(close(v.squared_norm(), sq, 1e-12));
    CHECK(v.dim == model.dimension());

    // an all-OOV document transforms to the empty vector
    SparseVector empty = model.transform({"zz"});
    CHECK(empty.entries.empty());
    CHECK(close(empty.squared_norm(), 0.0, 1e-12));
}

TEST_CASE("tokenize splits normalized text on whitespace runs") {
    CHECK(tokenize("aku suka bakso") == std::vector<std::string>{"aku", "suka", "bakso"});
    CHECK(tokenize("  a  b ") == std::vector<std::string>{"a", "b"});
    CHECK(tokenize("[USERNAME] makan [NUM]") ==
          std::vector<std::string>{"[USERNAME]", "makan", "[NUM]"});
    CHECK(tokenize("").empty());
}

TEST_CASE("tfidf serialization carries the vocabulary and idf table") {
    std::vector<std::vector<std::string>> docs{{"a", "b"}, {"b"}};
    TfidfModel model = TfidfModel::fit(docs);
    nlohmann::json j = model.to_json();
    REQUIRE(j.contains("vocabulary"));
    REQUIRE(j.contains("idf"));
    CHECK(j["vocabulary"].size() == 2);
    CHECK(j["idf"].size() == 2);
}
