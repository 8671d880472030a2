#include "augbench/features.hpp"

#include <algorithm>
#include <cmath>

#include "augbench/common.hpp"

namespace augbench {

std::vector<std::string> tokenize(std::string_view norm_text) {
    return split_whitespace(norm_text);
}

double SparseVector::value_at(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    if (it != entries.end() && it->first == index) return it->second;
    return 0.0;
}

double SparseVector::squared_norm() const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * w;
    return s;
}

TfidfModel TfidfModel::fit(const std::vector<std::vector<std::string>>& docs, TfidfConfig config) {
    if (docs.empty()) throw DataError("tfidf fit: no documents");

    // df counted in first-occurrence order across the corpus.
    std::unordered_map<std::string, std::uint32_t> df;
    std::vector<std::string> order;
    for (const auto& doc : docs) {
        std::unordered_map<std::string, bool> seen;
        for (const auto& tok : doc) {
            if (seen.emplace(tok, true).second) {
                auto [it, inserted] = df.emplace(tok, 0);
                if (inserted) order.push_back(tok);
                ++it->second;
            }
        }
    }
    if (order.empty()) throw DataError("tfidf fit: all documents are empty, vocabulary would be empty");

    TfidfModel model;
    model.config_ = config;
    model.vocab_.n_docs = docs.size();
    const double n = static_cast<double>(docs.size());
    for (const auto& tok : order) {
        const std::uint32_t d = df[tok];
        if (d < config.min_df) continue;
        const auto idx = static_cast<std::uint32_t>(model.vocab_.tokens.size());
        model.vocab_.index_of.emplace(tok, idx);
        model.vocab_.tokens.push_back(tok);
        model.vocab_.document_frequency.push_back(d);
        model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0);
    }
    if (model.vocab_.tokens.empty()) {
        throw DataError("tfidf fit: min_df threshold removed every token");
    }
    return model;
}

SparseVector TfidfModel::transform(const std::vector<std::string>& doc) const {
    std::unordered_map<std::uint32_t, double> counts;
    for (const auto& tok : doc) {
        auto it = vocab_.index_of.find(tok);
        if (it != vocab_.index_of.end()) counts[it->second] += 1.0;
    }
    SparseVector v;
    v.dim = dimension();
    v.entries.reserve(counts.size());
    for (const auto& [idx, c] : counts) v.entries.emplace_back(idx, c * idf_[idx]);
    std::sort(v.entries.begin(), v.entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (config_.l2_normalize && !v.entries.empty()) {
        const double norm = std::sqrt(v.squared_norm());
        if (norm > 0.0) {
            for (auto& [idx, w] : v.entries) w /= norm;
        }
    }
    return v;
}

nlohmann::json TfidfModel::to_json() const {
    nlohmann::json vocab = nlohmann::json::object();
    for (std::size_t i = 0; i < vocab_.tokens.size(); ++i) {
        vocab[vocab_.tokens[i]] = {{"index", i}, {"df", vocab_.document_frequency[i]}};
    }
    return {{"vocabulary", std::move(vocab)},
            {"idf", idf_},
            {"n_docs", vocab_.n_docs},
            {"config", {{"min_df", config_.min_df}, {"l2_normalize", config_.l2_normalize}}}};
}

}  // namespace augbench
