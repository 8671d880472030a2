#pragma once

#include <cstdint>
#include <vector>

#include "augbench/common.hpp"
#include "augbench/features.hpp"

#include <json.hpp>

namespace augbench {

// Feature-major (CSC) view of a row-major sparse dataset; tree fitting sweeps
// one feature at a time and must not touch the untouched columns of a node.
struct ColumnMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> col_start;     // n_cols + 1 offsets
    std::vector<std::uint32_t> row_index;   // ascending within a column
    std::vector<double> value;

    static ColumnMatrix from_rows(const std::vector<SparseVector>& rows);
};

// One node of either tree flavor; feature < 0 marks a leaf. Classification
// leaves carry label counts, regression leaves carry the fitted weight.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;  // vote (0/1) or regression weight
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    // Index of the leaf reached by x; rows absent from a feature read as 0.
    const TreeNode& leaf_for(const SparseVector& x) const;

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

struct ClassTreeOptions {
    int max_depth = 0;          // 0 = unbounded
    int min_samples_split = 2;
    std::size_t features_per_split = 0;  // 0 = all features
};

// Gini-greedy classification tree over a row multiset (bootstrap indices may
// repeat). Splits send value <= threshold left; zero entries participate via
// the implicit-zero block of each column. Leaf value is the majority label,
// ties toward 0.
Tree fit_classification_tree(const std::vector<SparseVector>& rows, const ColumnMatrix& columns,
                             const std::vector<std::uint32_t>& row_multiset,
                             const std::vector<std::uint8_t>& labels,
                             const ClassTreeOptions& options, Rng& rng);

struct RegTreeOptions {
    int max_depth = 6;
    double lambda = 1.0;
    double gamma = 0.0;
};

// Second-order regression tree: leaf weight -sum(g)/(sum(h)+lambda), split
// gain 0.5*(GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - gamma over all features.
Tree fit_regression_tree(const std::vector<SparseVector>& rows, const ColumnMatrix& columns,
                         const std::vector<double>& grad, const std::vector<double>& hess,
                         const RegTreeOptions& options);

}  // namespace augbench
