#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "augbench/augment.hpp"
#include "augbench/common.hpp"
#include "augbench/corpus.hpp"
#include "augbench/eval.hpp"
#include "augbench/models.hpp"

using namespace augbench;

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Brute-force confusion-matrix oracle with the same 0/0 -> 0 convention.
Metrics reference_metrics(const std::vector<Label>& preds, const std::vector<Label>& truth) {
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        bool t = truth[i] == Label::Positive;
        bool p = preds[i] == Label::Positive;
        if (t && p) ++tp;
        if (!t && p) ++fp;
        if (!t && !p) ++tn;
        if (t && !p) ++fn;
    }
    auto div = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    double prec_pos = div(tp, tp + fp), rec_pos = div(tp, tp + fn);
    double prec_neg = div(tn, tn + fn), rec_neg = div(tn, tn + fp);
    Metrics m;
    m.accuracy = (tp + tn) / static_cast<double>(truth.size());
    m.f1_positive = div(2.0 * prec_pos * rec_pos, prec_pos + rec_pos);
    double f1_negative = div(2.0 * prec_neg * rec_neg, prec_neg + rec_neg);
    m.f1_macro = (m.f1_positive + f1_negative) / 2.0;
    m.confusion[0][0] = static_cast<std::size_t>(tn);
    m.confusion[0][1] = static_cast<std::size_t>(fp);
    m.confusion[1][0] = static_cast<std::size_t>(fn);
    m.confusion[1][1] = static_cast<std::size_t>(tp);
    return m;
}

Document doc(std::string id, std::string text, Label label,
             Source source = Source::Original) {
    Document d;
    d.id = std::move(id);
    d.raw_text = std::move(text);
    d.label = label;
    d.source = source;
    return d;
}

// Small two-class corpus with overlapping vocabulary so every fold has signal.
Corpus eval_corpus(std::size_t n_negative, std::size_t n_positive) {
    static const char* neg_words[] = {"pagi", "kopi", "jalan", "hujan", "buku", "meja"};
    static const char* pos_words[] = {"kasar", "benci", "jahat", "bodoh", "culas", "licik"};
    Corpus corpus;
    corpus.name = "eval-fixture";
    Rng rng(8);
    char id[16];
    for (std::size_t i = 0; i < n_negative; ++i) {
        std::snprintf(id, sizeof(id), "n-%03zu", i);
        std::string text;
        for (int t = 0; t < 5; ++t) {
            text += neg_words[rng.next_below(6)];
            text += ' ';
        }
        corpus.documents.push_back(doc(id, text, Label::Negative));
    }
    for (std::size_t i = 0; i < n_positive; ++i) {
        std::snprintf(id, sizeof(id), "p-%03zu", i);
        std::string text;
        for (int t = 0; t < 5; ++t) {
            text += pos_words[rng.next_below(6)];
            text += ' ';
        }
        corpus.documents.push_back(doc(id, text, Label::Positive));
    }
    return corpus;
}

AugmentationBatch tiny_batch(std::size_t n) {
    static const char* pos_words[] = {"benci", "jahat", "bodoh", "kasar"};
    AugmentationBatch batch;
    batch.source = Source::DualClassGen;
    Rng rng(21);
    char id[16];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(id, sizeof(id), "aug-%03zu", i);
        std::string text;
        for (int t = 0; t < 4; ++t) {
            text += pos_words[rng.next_below(4)];
            text += ' ';
        }
        text += std::to_string(i);
        batch.samples.push_back(doc(id, text, Label::Positive, Source::DualClassGen));
        batch.provenance.push_back({"p-000"});
    }
    return batch;
}

std::size_t confusion_total(const CellResult& cell) {
    std::size_t total = 0;
    for (const Metrics& m : cell.folds) {
        total += m.confusion[0][0] + m.confusion[0][1] + m.confusion[1][0] + m.confusion[1][1];
    }
    return total;
}

}  // namespace

TEST_CASE("compute_metrics matches the brute-force oracle on random pairs") {
    Rng rng(314);
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 1 + rng.next_below(50);
        std::vector<Label> preds(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = rng.next_double() < 0.5 ? Label::Negative : Label::Positive;
            truth[i] = rng.next_double() < 0.5 ? Label::Negative : Label::Positive;
        }
        Metrics got = compute_metrics(preds, truth);
        Metrics want = reference_metrics(preds, truth);
        CHECK(close(got.accuracy, want.accuracy, 1e-12));
        CHECK(close(got.f1_positive, want.f1_positive, 1e-12));
        CHECK(close(got.f1_macro, want.f1_macro, 1e-12));
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                CHECK(got.confusion[a][b] == want.confusion[a][b]);
            }
        }
    }
}

TEST_CASE("compute_metrics hand cases") {
    const Label P = Label::Positive, N = Label::Negative;

    // one of each confusion cell: accuracy 0.5, F1 0.5 for both classes
    Metrics m = compute_metrics({P, P, N, N}, {P, N, N, P});
    CHECK(close(m.accuracy, 0.5, 1e-12));
    CHECK(close(m.f1_positive, 0.5, 1e-12));
    CHECK(close(m.f1_macro, 0.5, 1e-12));
    CHECK(m.confusion[0][0] == 1);
    CHECK(m.confusion[0][1] == 1);
    CHECK(m.confusion[1][0] == 1);
    CHECK(m.confusion[1][1] == 1);

    // no positives anywhere: the positive-class 0/0 ratios resolve to 0
    Metrics zero = compute_metrics({N, N, N}, {N, N, N});
    CHECK(close(zero.accuracy, 1.0, 1e-12));
    CHECK(close(zero.f1_positive, 0.0, 1e-12));
    CHECK(close(zero.f1_macro, 0.5, 1e-12));

    CHECK_THROWS_AS(compute_metrics({}, {}), UsageError);
    CHECK_THROWS_AS(compute_metrics({P}, {P, N}), UsageError);
}

TEST_CASE("stratified k-fold satisfies partition and stratification invariants") {
    Rng rng(1618);
    for (int round = 0; round < 200; ++round) {
        int k = 2 + static_cast<int>(rng.next_below(4));
        std::size_t n = static_cast<std::size_t>(k) + rng.next_below(60);
        std::vector<Label> labels(n);
        for (auto& l : labels) {
            l = rng.next_double() < 0.3 ? Label::Positive : Label::Negative;
        }
        std::uint64_t seed = rng.next_u64();
        FoldAssignment folds = stratified_kfold(labels, k, seed);

        REQUIRE(folds.fold_of.size() == n);
        REQUIRE(folds.k == k);

        // partition: every index lands in exactly one valid fold
        std::vector<std::vector<std::size_t>> per_fold_label(k, std::vector<std::size_t>(2, 0));
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(folds.fold_of[i] >= 0);
            REQUIRE(folds.fold_of[i] < k);
            ++per_fold_label[folds.fold_of[i]][static_cast<std::size_t>(labels[i])];
        }

        // stratification: per-label fold counts differ by at most 1
        for (std::size_t lab = 0; lab < 2; ++lab) {
            std::size_t lo = n, hi = 0;
            for (int f = 0; f < k; ++f) {
                lo = std::min(lo, per_fold_label[f][lab]);
                hi = std::max(hi, per_fold_label[f][lab]);
            }
            CHECK(hi - lo <= 1);
        }

        // determinism
        FoldAssignment again = stratified_kfold(labels, k, seed);
        CHECK(again.fold_of == folds.fold_of);
    }
}

TEST_CASE("stratified k-fold argument checks and sparse-label warning") {
    std::vector<Label> labels(10, Label::Negative);
    labels[0] = Label::Positive;
    CHECK_THROWS_AS(stratified_kfold(labels, 1, 0), UsageError);
    CHECK_THROWS_AS(stratified_kfold(labels, 11, 0), UsageError);

    FoldAssignment folds = stratified_kfold(labels, 5, 0);
    CHECK_FALSE(folds.warnings.empty());
}

TEST_CASE("cross-validation keeps augmented samples out of test folds") {
    Corpus corpus = eval_corpus(16, 8);
    AugmentationBatch batch = tiny_batch(6);
    ClassifierSpec spec;
    spec.kind = ModelKind::NaiveBayes;
    spec.seed = 42;

    // holdout mode tests only original documents: summed confusion counts
    // must equal the original corpus size exactly
    CellResult holdout = cross_validate(corpus, &batch, spec, 4, 42, CvMode::HoldoutOriginal);
    REQUIRE(holdout.folds.size() == 4);
    CHECK(confusion_total(holdout) == corpus.documents.size());
    CHECK(holdout.dataset_label == "Dual-class prompt generation");

    // mixed mode folds over the union instead
    CellResult mixed = cross_validate(corpus, &batch, spec, 4, 42, CvMode::Mixed);
    CHECK(confusion_total(mixed) == corpus.documents.size() + batch.samples.size());

    // baseline cell with no augmentation
    CellResult baseline = cross_validate(corpus, nullptr, spec, 4, 42, CvMode::HoldoutOriginal);
    CHECK(baseline.dataset_label == "Original");
    CHECK(confusion_total(baseline) == corpus.documents.size());
}

TEST_CASE("cross-validation is deterministic and aggregates sane statistics") {
    Corpus corpus = eval_corpus(16, 8);
    ClassifierSpec spec;
    spec.kind = ModelKind::NaiveBayes;
    spec.seed = 7;
    CellResult a = cross_validate(corpus, nullptr, spec, 4, 9, CvMode::HoldoutOriginal);
    CellResult b = cross_validate(corpus, nullptr, spec, 4, 9, CvMode::HoldoutOriginal);

    EvalReport ra{CvMode::HoldoutOriginal, 4, 9, {a}};
    EvalReport rb{CvMode::HoldoutOriginal, 4, 9, {b}};
    CHECK(eval_report_json(ra).dump() == eval_report_json(rb).dump());

    double mean = 0.0;
    for (const Metrics& m : a.folds) mean += m.accuracy;
    mean /= static_cast<double>(a.folds.size());
    CHECK(close(a.accuracy_mean, mean, 1e-12));

    double var = 0.0;
    for (const Metrics& m : a.folds) var += (m.accuracy - mean) * (m.accuracy - mean);
    var /= static_cast<double>(a.folds.size() - 1);
    CHECK(close(a.accuracy_std, std::sqrt(var), 1e-12));
}

TEST_CASE("gap analysis subtracts macro F1 from accuracy and flags above 0.05") {
    EvalReport report;
    report.k = 2;
    CellResult wide;
    wide.dataset_label = "Original";
    wide.model = ModelKind::LogReg;
    wide.accuracy_mean = 0.90;
    wide.f1_macro_mean = 0.80;
    CellResult narrow;
    narrow.dataset_label = "Backtranslation";
    narrow.model = ModelKind::LogReg;
    narrow.accuracy_mean = 0.90;
    narrow.f1_macro_mean = 0.88;
    report.cells = {wide, narrow};

    std::vector<GapRow> rows = gap_analysis(report);
    REQUIRE(rows.size() == 2);
    CHECK(close(rows[0].gap, 0.10, 1e-12));
    CHECK(rows[0].flagged);
    CHECK(close(rows[1].gap, 0.02, 1e-12));
    CHECK_FALSE(rows[1].flagged);
}

TEST_CASE("evaluation reports round-trip through JSON") {
    Corpus corpus = eval_corpus(12, 6);
    ClassifierSpec spec;
    spec.kind = ModelKind::NaiveBayes;
    EvalReport report;
    report.cv_mode = CvMode::Mixed;
    report.k = 3;
    report.seed = 17;
    report.cells.push_back(cross_validate(corpus, nullptr, spec, 3, 17, CvMode::Mixed));

    nlohmann::json j = eval_report_json(report);
    EvalReport back = eval_report_from_json(j);
    CHECK(eval_report_json(back).dump() == j.dump());
    CHECK(back.k == 3);
    CHECK(back.cv_mode == CvMode::Mixed);
    REQUIRE(back.cells.size() == 1);
    CHECK(back.cells[0].folds.size() == 3);

    CHECK_THROWS_AS(eval_report_from_json(nlohmann::json{{"cells", 5}}), DataError);
}

TEST_CASE("cv mode tokens round-trip") {
    CHECK(parse_cv_mode("holdout_original") == CvMode::HoldoutOriginal);
    CHECK(parse_cv_mode("mixed") == CvMode::Mixed);
    CHECK_THROWS_AS(parse_cv_mode("loocv"), UsageError);
    CHECK(cv_mode_token(CvMode::HoldoutOriginal) == "holdout_original");
}
