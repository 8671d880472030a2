#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace augbench {

// Whitespace tokenization of already-normalized text. [NUM] and [USERNAME]
// come out as single tokens because normalization never leaves spaces inside
// them.
std::vector<std::string> tokenize(std::string_view norm_text);

struct Vocabulary {
    std::unordered_map<std::string, std::uint32_t> index_of;
    std::vector<std::string> tokens;          // index -> token
    std::vector<std::uint32_t> document_frequency;  // index -> df
    std::size_t n_docs = 0;

    std::size_t size() const { return tokens.size(); }
};

struct TfidfConfig {
    std::uint32_t min_df = 1;
    bool l2_normalize = true;
};

struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by index
    std::uint32_t dim = 0;

    double value_at(std::uint32_t index) const;
    double squared_norm() const;
};

class TfidfModel {
public:
    // Vocabulary keeps tokens with df >= min_df, indexed in first-occurrence
    // order; idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1.
    static TfidfModel fit(const std::vector<std::vector<std::string>>& docs, TfidfConfig config = {});

    // weight(t) = term count * idf(t); OOV tokens dropped; L2-normalized when
    // configured and the vector is nonzero.
    SparseVector transform(const std::vector<std::string>& doc) const;

    const Vocabulary& vocabulary() const { return vocab_; }
    const std::vector<double>& idf() const { return idf_; }
    const TfidfConfig& config() const { return config_; }
    std::uint32_t dimension() const { return static_cast<std::uint32_t>(vocab_.size()); }

    nlohmann::json to_json() const;

private:
    Vocabulary vocab_;
    std::vector<double> idf_;
    TfidfConfig config_;
};

}  // namespace augbench
