#include "augbench/trees.hpp"

#include <algorithm>
#include <cmath>

namespace augbench {

using nlohmann::json;

ColumnMatrix ColumnMatrix::from_rows(const std::vector<SparseVector>& rows) {
    ColumnMatrix m;
    m.n_rows = rows.size();
    m.n_cols = rows.empty() ? 0 : rows[0].dim;
    std::vector<std::size_t> fill(m.n_cols, 0);
    std::size_t nnz = 0;
    for (const SparseVector& r : rows) {
        for (const auto& [col, v] : r.entries) {
            (void)v;
            ++fill[col];
            ++nnz;
        }
    }
    m.col_start.assign(m.n_cols + 1, 0);
    for (std::size_t c = 0; c < m.n_cols; ++c) m.col_start[c + 1] = m.col_start[c] + fill[c];
    m.row_index.resize(nnz);
    m.value.resize(nnz);
    std::fill(fill.begin(), fill.end(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& [col, v] : rows[r].entries) {
            std::size_t at = m.col_start[col] + fill[col]++;
            m.row_index[at] = static_cast<std::uint32_t>(r);
            m.value[at] = v;
        }
    }
    return m;
}

const TreeNode& Tree::leaf_for(const SparseVector& x) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
        double v = x.value_at(static_cast<std::uint32_t>(nodes[at].feature));
        at = static_cast<std::size_t>(v <= nodes[at].threshold ? nodes[at].left
                                                               : nodes[at].right);
    }
    return nodes[at];
}

json Tree::to_json() const {
    json arr = json::array();
    for (const TreeNode& n : nodes) {
        arr.push_back({
            {"feature", n.feature},
            {"threshold", n.threshold},
            {"left", n.left},
            {"right", n.right},
            {"value", n.leaf_value},
            {"n_pos", n.n_pos},
            {"n_neg", n.n_neg},
        });
    }
    return arr;
}

Tree Tree::from_json(const json& j) {
    Tree t;
    for (const json& e : j) {
        TreeNode n;
        n.feature = e.at("feature").get<int>();
        n.threshold = e.at("threshold").get<double>();
        n.left = e.at("left").get<int>();
        n.right = e.at("right").get<int>();
        n.leaf_value = e.at("value").get<double>();
        n.n_pos = e.at("n_pos").get<std::size_t>();
        n.n_neg = e.at("n_neg").get<std::size_t>();
        t.nodes.push_back(n);
    }
    return t;
}

namespace {

// (value, per-class or grad/hess mass) accumulated for one candidate feature
// within one node; the implicit zeros of the column enter as one entry at 0.
struct SweepEntry {
    double value;
    double a;  // positive count or gradient sum
    double b;  // negative count or hessian sum
    std::size_t n;
};

void sort_and_merge(std::vector<SweepEntry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const SweepEntry& x, const SweepEntry& y) { return x.value < y.value; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (out > 0 && entries[out - 1].value == entries[i].value) {
            entries[out - 1].a += entries[i].a;
            entries[out - 1].b += entries[i].b;
            entries[out - 1].n += entries[i].n;
        } else {
            entries[out++] = entries[i];
        }
    }
    entries.resize(out);
}

// Midpoint that is guaranteed to classify lo as left and hi as right under
// the "value <= threshold goes left" rule, even for adjacent doubles.
double split_threshold(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid < hi)) return lo;
    return mid;
}

double gini(double pos, double neg) {
    double n = pos + neg;
    if (n <= 0.0) return 0.0;
    double fp = pos / n;
    double fn = neg / n;
    return 1.0 - fp * fp - fn * fn;
}

struct ClassFitContext {
    const std::vector<SparseVector>& rows;
    const ColumnMatrix& columns;
    const std::vector<std::uint8_t>& labels;
    const ClassTreeOptions& options;
    Rng& rng;
    std::vector<std::uint32_t> multiplicity;  // per dataset row, current node only
    std::vector<SweepEntry> scratch;
};

int build_class_node(ClassFitContext& ctx, Tree& tree, std::vector<std::uint32_t>& node_rows,
                     int depth) {
    std::size_t n = node_rows.size();
    std::size_t pos = 0;
    for (std::uint32_t r : node_rows) pos += ctx.labels[r];
    std::size_t neg = n - pos;

    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[index].n_pos = pos;
    tree.nodes[index].n_neg = neg;
    tree.nodes[index].leaf_value = pos > neg ? 1.0 : 0.0;

    bool can_split = pos != 0 && neg != 0 &&
                     n >= static_cast<std::size_t>(ctx.options.min_samples_split) &&
                     (ctx.options.max_depth <= 0 || depth < ctx.options.max_depth);
    if (!can_split) return index;

    for (std::uint32_t r : node_rows) ++ctx.multiplicity[r];

    std::size_t n_cols = ctx.columns.n_cols;
    std::vector<std::size_t> candidates;
    if (ctx.options.features_per_split == 0 || ctx.options.features_per_split >= n_cols) {
        candidates.resize(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) candidates[c] = c;
    } else {
        candidates = ctx.rng.sample_without_replacement(n_cols, ctx.options.features_per_split);
    }

    double parent_gini = gini(static_cast<double>(pos), static_cast<double>(neg));
    double best_impurity = parent_gini;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (std::size_t f : candidates) {
        auto& entries = ctx.scratch;
        entries.clear();
        std::size_t nnz_n = 0, nnz_pos = 0;
        for (std::size_t k = ctx.columns.col_start[f]; k < ctx.columns.col_start[f + 1]; ++k) {
            std::uint32_t r = ctx.columns.row_index[k];
            std::uint32_t m = ctx.multiplicity[r];
            if (m == 0) continue;
            double mp = ctx.labels[r] ? static_cast<double>(m) : 0.0;
            entries.push_back({ctx.columns.value[k], mp, static_cast<double>(m) - mp, m});
            nnz_n += m;
            nnz_pos += ctx.labels[r] ? m : 0;
        }
        if (nnz_n < n) {
            double zp = static_cast<double>(pos - nnz_pos);
            double zn = static_cast<double>((n - nnz_n) - (pos - nnz_pos));
            entries.push_back({0.0, zp, zn, n - nnz_n});
        }
        if (entries.size() < 2) continue;
        sort_and_merge(entries);
        if (entries.size() < 2) continue;

        double lp = 0.0, ln = 0.0;
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            lp += entries[i].a;
            ln += entries[i].b;
            double rp = static_cast<double>(pos) - lp;
            double rn = static_cast<double>(neg) - ln;
            double impurity =
                ((lp + ln) * gini(lp, ln) + (rp + rn) * gini(rp, rn)) / static_cast<double>(n);
            if (impurity < best_impurity - 1e-12) {
                best_impurity = impurity;
                best_feature = static_cast<int>(f);
                best_threshold = split_threshold(entries[i].value, entries[i + 1].value);
            }
        }
    }

    for (std::uint32_t r : node_rows) --ctx.multiplicity[r];

    if (best_feature < 0) return index;

    std::vector<std::uint32_t> left_rows, right_rows;
    left_rows.reserve(n);
    right_rows.reserve(n);
    auto feature = static_cast<std::uint32_t>(best_feature);
    for (std::uint32_t r : node_rows) {
        if (ctx.rows[r].value_at(feature) <= best_threshold) {
            left_rows.push_back(r);
        } else {
            right_rows.push_back(r);
        }
    }
    node_rows.clear();
    node_rows.shrink_to_fit();

    tree.nodes[index].feature = best_feature;
    tree.nodes[index].threshold = best_threshold;
    int left = build_class_node(ctx, tree, left_rows, depth + 1);
    tree.nodes[index].left = left;
    int right = build_class_node(ctx, tree, right_rows, depth + 1);
    tree.nodes[index].right = right;
    return index;
}

struct RegFitContext {
    const std::vector<SparseVector>& rows;
    const ColumnMatrix& columns;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const RegTreeOptions& options;
    std::vector<std::uint8_t> member;
    std::vector<SweepEntry> scratch;
};

int build_reg_node(RegFitContext& ctx, Tree& tree, std::vector<std::uint32_t>& node_rows,
                   int depth) {
    std::size_t n = node_rows.size();
    double g_sum = 0.0, h_sum = 0.0;
    for (std::uint32_t r : node_rows) {
        g_sum += ctx.grad[r];
        h_sum += ctx.hess[r];
    }

    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[index].leaf_value = -g_sum / (h_sum + ctx.options.lambda);

    if (depth >= ctx.options.max_depth || n < 2) return index;

    for (std::uint32_t r : node_rows) ctx.member[r] = 1;

    double parent_score = g_sum * g_sum / (h_sum + ctx.options.lambda);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (std::size_t f = 0; f < ctx.columns.n_cols; ++f) {
        auto& entries = ctx.scratch;
        entries.clear();
        std::size_t nnz_n = 0;
        double nnz_g = 0.0, nnz_h = 0.0;
        for (std::size_t k = ctx.columns.col_start[f]; k < ctx.columns.col_start[f + 1]; ++k) {
            std::uint32_t r = ctx.columns.row_index[k];
            if (!ctx.member[r]) continue;
            entries.push_back({ctx.columns.value[k], ctx.grad[r], ctx.hess[r], 1});
            ++nnz_n;
            nnz_g += ctx.grad[r];
            nnz_h += ctx.hess[r];
        }
        if (nnz_n == 0) continue;
        if (nnz_n < n) entries.push_back({0.0, g_sum - nnz_g, h_sum - nnz_h, n - nnz_n});
        sort_and_merge(entries);
        if (entries.size() < 2) continue;

        double gl = 0.0, hl = 0.0;
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            gl += entries[i].a;
            hl += entries[i].b;
            double gr = g_sum - gl;
            double hr = h_sum - hl;
            double gain = 0.5 * (gl * gl / (hl + ctx.options.lambda) +
                                 gr * gr / (hr + ctx.options.lambda) - parent_score) -
                          ctx.options.gamma;
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = split_threshold(entries[i].value, entries[i + 1].value);
            }
        }
    }

    for (std::uint32_t r : node_rows) ctx.member[r] = 0;

    if (best_feature < 0) return index;

    std::vector<std::uint32_t> left_rows, right_rows;
    auto feature = static_cast<std::uint32_t>(best_feature);
    for (std::uint32_t r : node_rows) {
        if (ctx.rows[r].value_at(feature) <= best_threshold) {
            left_rows.push_back(r);
        } else {
            right_rows.push_back(r);
        }
    }
    node_rows.clear();
    node_rows.shrink_to_fit();

    tree.nodes[index].feature = best_feature;
    tree.nodes[index].threshold = best_threshold;
    int left = build_reg_node(ctx, tree, left_rows, depth + 1);
    tree.nodes[index].left = left;
    int right = build_reg_node(ctx, tree, right_rows, depth + 1);
    tree.nodes[index].right = right;
    return index;
}

}  // namespace

Tree fit_classification_tree(const std::vector<SparseVector>& rows, const ColumnMatrix& columns,
                             const std::vector<std::uint32_t>& row_multiset,
                             const std::vector<std::uint8_t>& labels,
                             const ClassTreeOptions& options, Rng& rng) {
    if (row_multiset.empty()) throw UsageError("tree fit: empty row set");
    ClassFitContext ctx{rows, columns, labels, options, rng,
                        std::vector<std::uint32_t>(rows.size(), 0), {}};
    Tree tree;
    std::vector<std::uint32_t> node_rows = row_multiset;
    build_class_node(ctx, tree, node_rows, 0);
    return tree;
}

Tree fit_regression_tree(const std::vector<SparseVector>& rows, const ColumnMatrix& columns,
                         const std::vector<double>& grad, const std::vector<double>& hess,
                         const RegTreeOptions& options) {
    if (rows.empty()) throw UsageError("tree fit: empty row set");
    RegFitContext ctx{rows,    columns, grad, hess,
                      options, std::vector<std::uint8_t>(rows.size(), 0),
                      {}};
    Tree tree;
    std::vector<std::uint32_t> node_rows(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) node_rows[r] = static_cast<std::uint32_t>(r);
    build_reg_node(ctx, tree, node_rows, 0);
    return tree;
}

}  // namespace augbench
