#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "augbench/corpus.hpp"

namespace augbench {

struct DenseMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : n(rows), d(cols), data(rows * cols, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * d + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }
};

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    int momentum_switch_iter = 250;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double init_stddev = 1e-4;

    void validate(std::size_t n) const;  // needs 1 < 3 * perplexity < n
};

// Symmetric affinities: per-point bandwidths found by binary search (at most
// 64 steps) until the conditional entropy is within 1e-5 bits of
// log2(perplexity), then p_ij = (p_j|i + p_i|j) / 2n. Zero diagonal, sums
// to 1.
DenseMatrix pairwise_affinities(const DenseMatrix& points, double perplexity);

// sum p * ln(p/q) over entries with p > 0; q floored at 1e-12.
double kl_divergence(const DenseMatrix& P, const DenseMatrix& Q);

struct Projection2D {
    std::vector<std::array<double, 2>> coords;
    std::vector<std::string> ids;      // filled by the caller alongside tags
    std::vector<Source> sources;
    std::vector<Label> labels;
    double initial_kl = 0.0;           // measured when early exaggeration ends
    double final_kl = 0.0;
    std::vector<double> kl_history;    // sampled every 50 iterations after exaggeration
};

// Exact O(n^2) gradient descent on KL(P||Q) with the Student-t kernel,
// early exaggeration and the two-phase momentum schedule from the config.
// Deterministic given seed.
Projection2D tsne(const DenseMatrix& points, const TsneConfig& config, std::uint64_t seed);

// Self-contained SVG scatter (original positive red, original negative green,
// augmented sources in blues) with a legend, plus a CSV of coordinates at the
// same path with a .csv extension.
void emit_scatter(const Projection2D& proj, const std::string& svg_path);

}  // namespace augbench
