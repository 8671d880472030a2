#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augbench/augment.hpp"
#include "augbench/corpus.hpp"
#include "augbench/features.hpp"
#include "augbench/providers.hpp"

namespace augbench {

struct EmbeddingMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;

    std::size_t size() const { return rows.size(); }
    std::size_t dim() const { return rows.empty() ? 0 : rows[0].size(); }
    // Throws DataError on ragged rows or non-finite entries.
    void check() const;
};

// Arithmetic mean over rows.
std::vector<double> centroid(const EmbeddingMatrix& m);

// u.v / (|u||v|); zero-norm input is an error.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

class DocumentEmbedder {
public:
    virtual ~DocumentEmbedder() = default;
    virtual EmbeddingMatrix embed_documents(const std::vector<Document>& docs) = 0;
};

// Routes raw document text through an EmbeddingProvider in fixed-size chunks.
class ProviderEmbedder : public DocumentEmbedder {
public:
    explicit ProviderEmbedder(EmbeddingProvider& provider, std::size_t chunk_size = 64);
    EmbeddingMatrix embed_documents(const std::vector<Document>& docs) override;

private:
    EmbeddingProvider& provider_;
    std::size_t chunk_size_;
};

// Cosine between the centroid of the original positive documents and the
// centroid of the generated samples.
double semantic_similarity(const std::vector<Document>& original_positive,
                           const AugmentationBatch& augmented, DocumentEmbedder& embedder);

struct SimilarityRow {
    Source source = Source::Backtranslation;
    double similarity = 0.0;
};

// Principal components of a sparse dataset by power iteration on the
// implicitly centered covariance; components come out orthonormal.
struct PcaModel {
    std::vector<double> mean;
    std::vector<std::vector<double>> components;  // component-major, each length d
    std::vector<double> eigenvalues;
};

PcaModel pca_fit(const std::vector<SparseVector>& X, std::size_t n_components,
                 std::uint64_t seed);
std::vector<std::vector<double>> pca_transform(const PcaModel& model,
                                               const std::vector<SparseVector>& X);

}  // namespace augbench
