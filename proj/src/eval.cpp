#include "augbench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "augbench/common.hpp"
#include "augbench/features.hpp"

namespace augbench {

using nlohmann::json;

FoldAssignment stratified_kfold(const std::vector<Label>& labels, int k, std::uint64_t seed) {
    if (k < 2) throw UsageError("k must be >= 2");
    if (static_cast<std::size_t>(k) > labels.size()) {
        throw UsageError("k (" + std::to_string(k) + ") exceeds the number of documents (" +
                         std::to_string(labels.size()) + ")");
    }
    FoldAssignment out;
    out.k = k;
    out.fold_of.assign(labels.size(), -1);
    for (Label value : {Label::Negative, Label::Positive}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == value) members.push_back(i);
        }
        if (!members.empty() && members.size() < static_cast<std::size_t>(k)) {
            out.warnings.push_back("label " + std::string(label_token(value)) + " has only " +
                                   std::to_string(members.size()) + " members for k=" +
                                   std::to_string(k));
        }
        Rng rng = Rng(seed).derive("kfold").derive(static_cast<std::uint64_t>(value));
        rng.shuffle(members);
        for (std::size_t j = 0; j < members.size(); ++j) {
            out.fold_of[members[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
        }
    }
    return out;
}

Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
    if (predictions.size() != truth.size()) {
        throw UsageError("compute_metrics: length mismatch (" + std::to_string(predictions.size()) +
                         " vs " + std::to_string(truth.size()) + ")");
    }
    if (predictions.empty()) throw UsageError("compute_metrics: empty input");

    Metrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predictions[i])];
    }
    auto tn = static_cast<double>(m.confusion[0][0]);
    auto fp = static_cast<double>(m.confusion[0][1]);
    auto fn = static_cast<double>(m.confusion[1][0]);
    auto tp = static_cast<double>(m.confusion[1][1]);

    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    auto f1 = [&](double prec, double rec) { return ratio(2.0 * prec * rec, prec + rec); };

    m.accuracy = (tp + tn) / static_cast<double>(truth.size());
    double f1_pos = f1(ratio(tp, tp + fp), ratio(tp, tp + fn));
    double f1_neg = f1(ratio(tn, tn + fn), ratio(tn, tn + fp));
    m.f1_positive = f1_pos;
    m.f1_macro = (f1_pos + f1_neg) / 2.0;
    return m;
}

CvMode parse_cv_mode(std::string_view s) {
    if (s == "holdout_original") return CvMode::HoldoutOriginal;
    if (s == "mixed") return CvMode::Mixed;
    throw UsageError("unknown cv mode '" + std::string(s) +
                     "' (expected holdout_original or mixed)");
}

std::string_view cv_mode_token(CvMode m) {
    return m == CvMode::HoldoutOriginal ? "holdout_original" : "mixed";
}

namespace {

struct PreparedDoc {
    std::string id;
    std::vector<std::string> tokens;
    Label label = Label::Negative;
    bool augmented = false;
};

PreparedDoc prepare(const Document& d, bool augmented) {
    PreparedDoc p;
    p.id = d.id;
    p.tokens = tokenize(d.norm_text ? *d.norm_text : normalize_text(d.raw_text));
    p.label = d.label;
    p.augmented = augmented;
    return p;
}

void aggregate(CellResult& cell) {
    auto collect = [&](auto field, double& mean, double& stddev) {
        double sum = 0.0;
        for (const Metrics& m : cell.folds) sum += field(m);
        auto n = static_cast<double>(cell.folds.size());
        mean = sum / n;
        double ss = 0.0;
        for (const Metrics& m : cell.folds) {
            double d = field(m) - mean;
            ss += d * d;
        }
        stddev = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    };
    collect([](const Metrics& m) { return m.accuracy; }, cell.accuracy_mean, cell.accuracy_std);
    collect([](const Metrics& m) { return m.f1_macro; }, cell.f1_macro_mean, cell.f1_macro_std);
    collect([](const Metrics& m) { return m.f1_positive; }, cell.f1_positive_mean,
            cell.f1_positive_std);
}

}  // namespace

CellResult cross_validate(const Corpus& original, const AugmentationBatch* augmentation,
                          const ClassifierSpec& spec, int k, std::uint64_t seed, CvMode cv_mode) {
    original.check_unique_ids();

    std::vector<PreparedDoc> docs;
    docs.reserve(original.documents.size() +
                 (augmentation ? augmentation->samples.size() : 0));
    for (const Document& d : original.documents) docs.push_back(prepare(d, false));
    std::size_t n_original = docs.size();
    if (augmentation) {
        for (const Document& d : augmentation->samples) docs.push_back(prepare(d, true));
    }

    // In holdout_original mode only original documents are fold-eligible;
    // augmented samples are appended to every training fold.
    std::size_t n_eligible = cv_mode == CvMode::HoldoutOriginal ? n_original : docs.size();
    std::vector<Label> fold_labels(n_eligible);
    for (std::size_t i = 0; i < n_eligible; ++i) fold_labels[i] = docs[i].label;
    FoldAssignment folds = stratified_kfold(fold_labels, k, seed);

    CellResult cell;
    cell.dataset_label =
        augmentation ? std::string(source_display(augmentation->source)) : "Original";
    cell.model = spec.kind;
    cell.warnings = folds.warnings;

    for (int fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < n_eligible; ++i) {
            (folds.fold_of[i] == fold ? test_idx : train_idx).push_back(i);
        }
        for (std::size_t i = n_eligible; i < docs.size(); ++i) train_idx.push_back(i);
        if (test_idx.empty()) throw DataError("fold " + std::to_string(fold) + " is empty");
        if (train_idx.empty()) throw DataError("fold " + std::to_string(fold) + " has no training data");

        if (cv_mode == CvMode::HoldoutOriginal) {
            for (std::size_t i : test_idx) {
                if (docs[i].augmented) {
                    throw DataError("augmented sample '" + docs[i].id + "' reached test fold " +
                                    std::to_string(fold));
                }
            }
        }

        std::vector<std::vector<std::string>> train_tokens;
        train_tokens.reserve(train_idx.size());
        for (std::size_t i : train_idx) train_tokens.push_back(docs[i].tokens);
        TfidfModel tfidf = TfidfModel::fit(train_tokens);

        std::vector<SparseVector> X_train, X_test;
        std::vector<Label> y_train, y_test;
        X_train.reserve(train_idx.size());
        for (std::size_t i : train_idx) {
            X_train.push_back(tfidf.transform(docs[i].tokens));
            y_train.push_back(docs[i].label);
        }
        X_test.reserve(test_idx.size());
        for (std::size_t i : test_idx) {
            X_test.push_back(tfidf.transform(docs[i].tokens));
            y_test.push_back(docs[i].label);
        }

        ClassifierSpec fold_spec = spec;
        Rng seed_rng = Rng(seed).derive("eval.model").derive(spec.seed).derive(
            static_cast<std::uint64_t>(fold));
        fold_spec.seed = seed_rng.next_u64();
        std::unique_ptr<Classifier> model = fit_classifier(fold_spec, X_train, y_train);
        for (const std::string& w : model->warnings()) {
            std::string tagged = "fold " + std::to_string(fold) + ": " + w;
            if (std::find(cell.warnings.begin(), cell.warnings.end(), tagged) ==
                cell.warnings.end()) {
                cell.warnings.push_back(tagged);
            }
        }

        std::vector<Label> preds;
        preds.reserve(X_test.size());
        for (const SparseVector& x : X_test) preds.push_back(model->predict(x));
        cell.folds.push_back(compute_metrics(preds, y_test));
    }

    aggregate(cell);
    return cell;
}

std::vector<GapRow> gap_analysis(const EvalReport& report) {
    std::vector<GapRow> rows;
    rows.reserve(report.cells.size());
    for (const CellResult& cell : report.cells) {
        GapRow row;
        row.dataset_label = cell.dataset_label;
        row.model = cell.model;
        row.accuracy = cell.accuracy_mean;
        row.f1_macro = cell.f1_macro_mean;
        row.gap = cell.accuracy_mean - cell.f1_macro_mean;
        row.flagged = row.gap > 0.05;
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json eval_report_json(const EvalReport& report) {
    json cells = json::array();
    for (const CellResult& cell : report.cells) {
        json folds = json::array();
        for (const Metrics& m : cell.folds) {
            folds.push_back({{"accuracy", m.accuracy},
                             {"f1_positive", m.f1_positive},
                             {"f1_macro", m.f1_macro},
                             {"confusion",
                              {{"tn", m.confusion[0][0]},
                               {"fp", m.confusion[0][1]},
                               {"fn", m.confusion[1][0]},
                               {"tp", m.confusion[1][1]}}}});
        }
        cells.push_back({{"dataset", cell.dataset_label},
                         {"model", std::string(model_kind_token(cell.model))},
                         {"folds", folds},
                         {"accuracy_mean", cell.accuracy_mean},
                         {"accuracy_std", cell.accuracy_std},
                         {"f1_macro_mean", cell.f1_macro_mean},
                         {"f1_macro_std", cell.f1_macro_std},
                         {"f1_positive_mean", cell.f1_positive_mean},
                         {"f1_positive_std", cell.f1_positive_std},
                         {"warnings", cell.warnings}});
    }
    return json{{"cv_mode", std::string(cv_mode_token(report.cv_mode))},
                {"k", report.k},
                {"seed", report.seed},
                {"cells", cells}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    try {
        EvalReport report;
        report.cv_mode = parse_cv_mode(j.at("cv_mode").get<std::string>());
        report.k = j.at("k").get<int>();
        report.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& c : j.at("cells")) {
            CellResult cell;
            cell.dataset_label = c.at("dataset").get<std::string>();
            cell.model = parse_model_kind(c.at("model").get<std::string>());
            for (const auto& f : c.at("folds")) {
                Metrics m;
                m.accuracy = f.at("accuracy").get<double>();
                m.f1_positive = f.at("f1_positive").get<double>();
                m.f1_macro = f.at("f1_macro").get<double>();
                const auto& confusion = f.at("confusion");
                m.confusion[0][0] = confusion.at("tn").get<std::size_t>();
                m.confusion[0][1] = confusion.at("fp").get<std::size_t>();
                m.confusion[1][0] = confusion.at("fn").get<std::size_t>();
                m.confusion[1][1] = confusion.at("tp").get<std::size_t>();
                cell.folds.push_back(m);
            }
            cell.accuracy_mean = c.at("accuracy_mean").get<double>();
            cell.accuracy_std = c.at("accuracy_std").get<double>();
            cell.f1_macro_mean = c.at("f1_macro_mean").get<double>();
            cell.f1_macro_std = c.at("f1_macro_std").get<double>();
            cell.f1_positive_mean = c.at("f1_positive_mean").get<double>();
            cell.f1_positive_std = c.at("f1_positive_std").get<double>();
            cell.warnings = c.at("warnings").get<std::vector<std::string>>();
            report.cells.push_back(std::move(cell));
        }
        return report;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed evaluation report: ") + e.what());
    }
}

}  // namespace augbench
