#include "augbench/report.hpp"

#include <fstream>

#include <json.hpp>

#include "augbench/common.hpp"

namespace augbench {

using nlohmann::json;

namespace {

constexpr int kPerformanceDecimals = 3;
constexpr int kSimilarityDecimals = 4;

// The JSON side stores the parse of the exact string the Markdown shows, so
// the two documents can never drift apart.
double rounded(double v, int decimals) { return std::stod(format_fixed(v, decimals)); }

void composition_section(const CompositionTable& table, std::string& md, json& out) {
    md += "## Dataset Composition\n\n";
    md += "| Source | Non-gender-based HS | Gender-based HS |\n";
    md += "| --- | --- | --- |\n";
    json rows = json::array();
    for (Source s : {Source::Original, Source::Backtranslation, Source::SingleClassGen,
                     Source::DualClassGen}) {
        std::size_t neg = table.at(s, Label::Negative);
        std::size_t pos = table.at(s, Label::Positive);
        if (s != Source::Original && neg + pos == 0) continue;
        md += "| " + std::string(source_display(s)) + " | " + std::to_string(neg) + " | " +
              std::to_string(pos) + " |\n";
        rows.push_back({{"source", std::string(source_display(s))},
                        {"negative", neg},
                        {"positive", pos}});
    }
    md += "\n";
    out["composition"] = rows;
}

void performance_section(const EvalReport& report, std::string& md, json& out) {
    md += "## Model Performance\n\n";
    md += "Protocol: " + std::to_string(report.k) + "-fold stratified cross-validation, " +
          std::string(cv_mode_token(report.cv_mode)) +
          " mode; F1-Score is macro-averaged.\n\n";
    md += "| Dataset | Model | Accuracy | Accuracy Std | F1-Score | F1-Score Std |\n";
    md += "| --- | --- | --- | --- | --- | --- |\n";

    json rows = json::array();
    std::string last_dataset;
    for (const CellResult& cell : report.cells) {
        std::string shown = cell.dataset_label == last_dataset ? "" : cell.dataset_label;
        last_dataset = cell.dataset_label;
        md += "| " + shown + " | " + std::string(model_kind_display(cell.model)) + " | " +
              format_fixed(cell.accuracy_mean, kPerformanceDecimals) + " | " +
              format_fixed(cell.accuracy_std, kPerformanceDecimals) + " | " +
              format_fixed(cell.f1_macro_mean, kPerformanceDecimals) + " | " +
              format_fixed(cell.f1_macro_std, kPerformanceDecimals) + " |\n";
        rows.push_back(
            {{"dataset", cell.dataset_label},
             {"model", std::string(model_kind_display(cell.model))},
             {"accuracy", rounded(cell.accuracy_mean, kPerformanceDecimals)},
             {"accuracy_std", rounded(cell.accuracy_std, kPerformanceDecimals)},
             {"f1_score", rounded(cell.f1_macro_mean, kPerformanceDecimals)},
             {"f1_score_std", rounded(cell.f1_macro_std, kPerformanceDecimals)},
             {"f1_positive", rounded(cell.f1_positive_mean, kPerformanceDecimals)},
             {"f1_positive_std", rounded(cell.f1_positive_std, kPerformanceDecimals)}});
    }
    md += "\n";
    out["performance"] = {{"k", report.k},
                          {"cv_mode", std::string(cv_mode_token(report.cv_mode))},
                          {"rows", rows}};

    std::vector<GapRow> gaps = gap_analysis(report);
    md += "### Accuracy vs F1 Gap\n\n";
    md += "| Dataset | Model | Accuracy | F1-Score | F1 (positive) | Gap | Flag |\n";
    md += "| --- | --- | --- | --- | --- | --- | --- |\n";
    json gap_rows = json::array();
    last_dataset.clear();
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const GapRow& g = gaps[i];
        const CellResult& cell = report.cells[i];
        std::string shown = g.dataset_label == last_dataset ? "" : g.dataset_label;
        last_dataset = g.dataset_label;
        md += "| " + shown + " | " + std::string(model_kind_display(g.model)) + " | " +
              format_fixed(g.accuracy, kPerformanceDecimals) + " | " +
              format_fixed(g.f1_macro, kPerformanceDecimals) + " | " +
              format_fixed(cell.f1_positive_mean, kPerformanceDecimals) + " | " +
              format_fixed(g.gap, kPerformanceDecimals) + " | " + (g.flagged ? "gap > 0.05" : "") +
              " |\n";
        gap_rows.push_back({{"dataset", g.dataset_label},
                            {"model", std::string(model_kind_display(g.model))},
                            {"accuracy", rounded(g.accuracy, kPerformanceDecimals)},
                            {"f1_score", rounded(g.f1_macro, kPerformanceDecimals)},
                            {"gap", rounded(g.gap, kPerformanceDecimals)},
                            {"flagged", g.flagged}});
    }
    md += "\n";
    out["gap_analysis"] = gap_rows;
}

void similarity_section(const std::vector<SimilarityRow>& rows, std::string& md, json& out) {
    md += "## Semantic Similarity\n\n";
    md += "| Augmentation Method | Similarity to Original |\n";
    md += "| --- | --- |\n";
    json items = json::array();
    for (const SimilarityRow& row : rows) {
        md += "| " + std::string(source_display(row.source)) + " | " +
              format_fixed(row.similarity, kSimilarityDecimals) + " |\n";
        items.push_back({{"method", std::string(source_display(row.source))},
                         {"similarity", rounded(row.similarity, kSimilarityDecimals)}});
    }
    md += "\n";
    out["semantic_similarity"] = items;
}

void figures_section(const std::vector<FigureRef>& figures, std::string& md, json& out) {
    md += "## Figures\n\n";
    json items = json::array();
    for (const FigureRef& f : figures) {
        md += "- [" + f.caption + "](" + f.path + ")\n";
        items.push_back({{"caption", f.caption}, {"path", f.path}});
    }
    md += "\n";
    out["figures"] = items;
}

}  // namespace

void assemble_report(const ReportInputs& inputs, const std::string& md_path,
                     const std::string& json_path) {
    if (!inputs.composition && !inputs.eval_report && !inputs.similarity && !inputs.figures) {
        throw UsageError("assemble_report: no sections to render");
    }

    std::string md = "# Augmentation Workbench Report\n\n";
    json out = json::object();
    if (inputs.composition) composition_section(*inputs.composition, md, out);
    if (inputs.eval_report) performance_section(*inputs.eval_report, md, out);
    if (inputs.similarity) similarity_section(*inputs.similarity, md, out);
    if (inputs.figures) figures_section(*inputs.figures, md, out);

    std::ofstream md_file(md_path, std::ios::binary);
    if (!md_file) throw DataError("cannot write " + md_path);
    md_file << md;
    if (!md_file.good()) throw DataError("write failed for " + md_path);

    std::ofstream json_file(json_path, std::ios::binary);
    if (!json_file) throw DataError("cannot write " + json_path);
    json_file << out.dump(2) << '\n';
    if (!json_file.good()) throw DataError("write failed for " + json_path);
}

}  // namespace augbench
