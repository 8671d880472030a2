#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "augbench/augment.hpp"
#include "augbench/corpus.hpp"
#include "augbench/models.hpp"

#include <json.hpp>

namespace augbench {

struct FoldAssignment {
    std::vector<int> fold_of;  // aligned with the label vector given to stratified_kfold
    int k = 0;
    std::vector<std::string> warnings;
};

// Seeded shuffle within each label, then round-robin over folds, so per-fold
// label counts differ from ceil(n_label / k) by at most 1.
FoldAssignment stratified_kfold(const std::vector<Label>& labels, int k, std::uint64_t seed);

struct Metrics {
    double accuracy = 0.0;
    double f1_positive = 0.0;
    double f1_macro = 0.0;
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};  // [truth][prediction]
};

// Precision/recall/F1 with every 0/0 defined as 0; f1_macro averages the
// per-class F1 values.
Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& truth);

enum class CvMode { HoldoutOriginal, Mixed };
CvMode parse_cv_mode(std::string_view s);  // holdout_original | mixed
std::string_view cv_mode_token(CvMode m);

struct CellResult {
    std::string dataset_label;
    ModelKind model = ModelKind::LogReg;
    std::vector<Metrics> folds;
    double accuracy_mean = 0.0, accuracy_std = 0.0;
    double f1_macro_mean = 0.0, f1_macro_std = 0.0;
    double f1_positive_mean = 0.0, f1_positive_std = 0.0;
    std::vector<std::string> warnings;
};

struct EvalReport {
    CvMode cv_mode = CvMode::HoldoutOriginal;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<CellResult> cells;
};

// One (dataset configuration, model) cell. holdout_original draws folds from
// the original documents only and joins every augmented sample to every
// training fold; mixed folds over the union. TF-IDF is refit per fold on the
// training documents.
CellResult cross_validate(const Corpus& original, const AugmentationBatch* augmentation,
                          const ClassifierSpec& spec, int k, std::uint64_t seed, CvMode cv_mode);

struct GapRow {
    std::string dataset_label;
    ModelKind model = ModelKind::LogReg;
    double accuracy = 0.0;
    double f1_macro = 0.0;
    double gap = 0.0;
    bool flagged = false;  // gap > 0.05
};

std::vector<GapRow> gap_analysis(const EvalReport& report);

nlohmann::json eval_report_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace augbench
