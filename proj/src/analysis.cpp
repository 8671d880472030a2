#include "augbench/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "augbench/common.hpp"

namespace augbench {

void EmbeddingMatrix::check() const {
    if (ids.size() != rows.size()) throw DataError("embedding matrix: id/row count mismatch");
    for (const auto& row : rows) {
        if (row.size() != dim()) throw DataError("embedding matrix: ragged rows");
        for (double v : row) {
            if (!std::isfinite(v)) throw DataError("embedding matrix: non-finite entry");
        }
    }
}

std::vector<double> centroid(const EmbeddingMatrix& m) {
    if (m.rows.empty()) throw UsageError("centroid of an empty matrix");
    std::vector<double> mean(m.dim(), 0.0);
    for (const auto& row : m.rows) {
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(m.rows.size());
    return mean;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw UsageError("cosine: dimension mismatch");
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw DataError("cosine: zero-norm input");
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

ProviderEmbedder::ProviderEmbedder(EmbeddingProvider& provider, std::size_t chunk_size)
    : provider_(provider), chunk_size_(chunk_size == 0 ? 1 : chunk_size) {}

EmbeddingMatrix ProviderEmbedder::embed_documents(const std::vector<Document>& docs) {
    EmbeddingMatrix m;
    m.ids.reserve(docs.size());
    m.rows.reserve(docs.size());
    for (std::size_t start = 0; start < docs.size(); start += chunk_size_) {
        std::size_t end = std::min(docs.size(), start + chunk_size_);
        std::vector<std::string> texts;
        texts.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) texts.push_back(docs[i].raw_text);
        std::vector<EmbeddingVector> vectors = provider_.embed(texts);
        if (vectors.size() != texts.size()) {
            throw ProviderError("embedding provider returned " + std::to_string(vectors.size()) +
                                " vectors for " + std::to_string(texts.size()) + " texts");
        }
        for (std::size_t i = start; i < end; ++i) {
            m.ids.push_back(docs[i].id);
            m.rows.push_back(std::move(vectors[i - start].values));
        }
    }
    m.check();
    return m;
}

double semantic_similarity(const std::vector<Document>& original_positive,
                           const AugmentationBatch& augmented, DocumentEmbedder& embedder) {
    if (original_positive.empty()) throw UsageError("semantic similarity: no original documents");
    if (augmented.samples.empty()) throw UsageError("semantic similarity: no augmented samples");
    EmbeddingMatrix original = embedder.embed_documents(original_positive);
    EmbeddingMatrix generated = embedder.embed_documents(augmented.samples);
    return cosine(centroid(original), centroid(generated));
}

namespace {

double sparse_dot(const SparseVector& x, const std::vector<double>& v) {
    double s = 0.0;
    for (const auto& [i, val] : x.entries) s += v[i] * val;
    return s;
}

}  // namespace

PcaModel pca_fit(const std::vector<SparseVector>& X, std::size_t n_components,
                 std::uint64_t seed) {
    if (X.empty()) throw UsageError("pca: empty input");
    std::size_t n = X.size();
    std::size_t d = X[0].dim;
    for (const SparseVector& x : X) {
        if (x.dim != d) throw UsageError("pca: inconsistent dimensions");
    }
    std::size_t k = std::min({n_components, d, n > 1 ? n - 1 : 1});

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (const SparseVector& x : X) {
        for (const auto& [i, v] : x.entries) model.mean[i] += v;
    }
    for (double& v : model.mean) v /= static_cast<double>(n);

    Rng rng = Rng(seed).derive("pca");
    std::vector<double> t(n);
    std::vector<double> u(d);
    for (std::size_t c = 0; c < k; ++c) {
        Rng comp_rng = rng.derive(static_cast<std::uint64_t>(c));
        std::vector<double> v(d);
        double norm = 0.0;
        for (double& vi : v) {
            vi = comp_rng.next_gaussian();
            norm += vi * vi;
        }
        norm = std::sqrt(norm);
        for (double& vi : v) vi /= norm;

        double eigenvalue = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
            double mean_dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) mean_dot += model.mean[j] * v[j];
            double t_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                t[i] = sparse_dot(X[i], v) - mean_dot;
                t_sum += t[i];
            }
            std::fill(u.begin(), u.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (const auto& [idx, val] : X[i].entries) u[idx] += t[i] * val;
            }
            for (std::size_t j = 0; j < d; ++j) {
                u[j] = (u[j] - t_sum * model.mean[j]) / static_cast<double>(n);
            }
            for (const auto& prev : model.components) {
                double proj = 0.0;
                for (std::size_t j = 0; j < d; ++j) proj += u[j] * prev[j];
                for (std::size_t j = 0; j < d; ++j) u[j] -= proj * prev[j];
            }
            double u_norm = 0.0;
            for (double uj : u) u_norm += uj * uj;
            u_norm = std::sqrt(u_norm);
            if (u_norm < 1e-12) {
                eigenvalue = 0.0;
                break;
            }
            double delta = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double next = u[j] / u_norm;
                double diff = next - v[j];
                delta += diff * diff;
                v[j] = next;
            }
            eigenvalue = u_norm;
            if (delta < 1e-20) break;
        }
        if (eigenvalue <= 0.0) break;  // remaining variance is numerically zero

        // Fix the sign so reruns with a different k agree on shared components.
        std::size_t peak = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(v[j]) > std::abs(v[peak])) peak = j;
        }
        if (v[peak] < 0.0) {
            for (double& vj : v) vj = -vj;
        }
        model.components.push_back(std::move(v));
        model.eigenvalues.push_back(eigenvalue);
    }
    return model;
}

std::vector<std::vector<double>> pca_transform(const PcaModel& model,
                                               const std::vector<SparseVector>& X) {
    std::size_t k = model.components.size();
    std::vector<double> mean_dot(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < model.mean.size(); ++j) {
            mean_dot[c] += model.mean[j] * model.components[c][j];
        }
    }
    std::vector<std::vector<double>> out;
    out.reserve(X.size());
    for (const SparseVector& x : X) {
        if (x.dim != model.mean.size()) throw UsageError("pca transform: dimension mismatch");
        std::vector<double> row(k);
        for (std::size_t c = 0; c < k; ++c) {
            row[c] = sparse_dot(x, model.components[c]) - mean_dot[c];
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace augbench
