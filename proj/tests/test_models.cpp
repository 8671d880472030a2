#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "augbench/common.hpp"
#include "augbench/features.hpp"
#include "augbench/models.hpp"

using namespace augbench;

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

SparseVector sparse(std::vector<std::pair<std::uint32_t, double>> entries, std::uint32_t dim) {
    SparseVector v;
    v.entries = std::move(entries);
    v.dim = dim;
    return v;
}

SparseVector one_hot(std::uint32_t index, std::uint32_t dim) {
    return sparse({{index, 1.0}}, dim);
}

// Two-feature XOR-style task: quadrant sign pattern decides the label, with a
// margin band excluded so the decision surface is clean.
void xor_task(std::size_t n, std::uint64_t seed, std::vector<SparseVector>& X,
              std::vector<Label>& y) {
    Rng rng(seed);
    while (X.size() < n) {
        double a = 2.0 * rng.next_double() - 1.0;
        double b = 2.0 * rng.next_double() - 1.0;
        if (std::abs(a) < 0.05 || std::abs(b) < 0.05) continue;
        X.push_back(sparse({{0, a}, {1, b}}, 2));
        y.push_back((a > 0.0) != (b > 0.0) ? Label::Positive : Label::Negative);
    }
}

double holdout_accuracy(const Classifier& model, const std::vector<SparseVector>& X,
                        const std::vector<Label>& y, std::size_t from) {
    std::size_t correct = 0;
    for (std::size_t i = from; i < X.size(); ++i) {
        if (model.predict(X[i]) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(X.size() - from);
}

// 4-document fixture over a 4-token vocabulary: tokens 0,1 appear once each
// in the Negative class, tokens 2,3 once each in the Positive class.
void nb_fixture(std::vector<SparseVector>& X, std::vector<Label>& y) {
    X = {one_hot(0, 4), one_hot(1, 4), one_hot(2, 4), one_hot(3, 4)};
    y = {Label::Negative, Label::Negative, Label::Positive, Label::Positive};
}

}  // namespace

TEST_CASE("naive bayes matches hand-computed Laplace-smoothed values") {
    std::vector<SparseVector> X;
    std::vector<Label> y;
    nb_fixture(X, y);
    ClassifierSpec spec;
    spec.kind = ModelKind::NaiveBayes;
    auto model = fit_classifier(spec, X, y);
    auto* nb = dynamic_cast<NaiveBayesModel*>(model.get());
    REQUIRE(nb != nullptr);

    // priors: 2 of 4 documents per class
    CHECK(close(nb->log_prior(Label::Negative), std::log(0.5), 1e-12));
    CHECK(close(nb->log_prior(Label::Positive), std::log(0.5), 1e-12));

    // alpha = 1, class mass 2, vocabulary 4: present token (1+1)/(2+4),
    // absent token (0+1)/(2+4)
    CHECK(close(nb->log_likelihood(Label::Negative, 0), std::log(2.0 / 6.0), 1e-12));
    CHECK(close(nb->log_likelihood(Label::Negative, 1), std::log(2.0 / 6.0), 1e-12));
    CHECK(close(nb->log_likelihood(Label::Negative, 2), std::log(1.0 / 6.0), 1e-12));
    CHECK(close(nb->log_likelihood(Label::Positive, 2), std::log(2.0 / 6.0), 1e-12));
    CHECK(close(nb->log_likelihood(Label::Positive, 0), std::log(1.0 / 6.0), 1e-12));

    // posterior of a single-token document: (1/6) / (1/6 + 2/6) = 1/3
    CHECK(close(model->predict_proba(one_hot(0, 4)), 1.0 / 3.0, 1e-12));
    CHECK(close(model->predict_proba(one_hot(2, 4)), 2.0 / 3.0, 1e-12));
    CHECK(model->predict(one_hot(0, 4)) == Label::Negative);
    CHECK(model->predict(one_hot(2, 4)) == Label::Positive);

    // a document holding one token of each class scores exactly 0.5, and the
    // tie goes to Negative
    SparseVector tie = sparse({{0, 1.0}, {2, 1.0}}, 4);
    CHECK(close(model->predict_proba(tie), 0.5, 1e-12));
    CHECK(model->predict(tie) == Label::Negative);
}

TEST_CASE("logreg analytic gradient agrees with central finite differences") {
    Rng rng(77);
    for (int round = 0; round < 10; ++round) {
        std::size_t n = 4 + rng.next_below(9);
        std::uint32_t d = static_cast<std::uint32_t>(2 + rng.next_below(5));
        std::vector<SparseVector> X;
        std::vector<Label> y;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::pair<std::uint32_t, double>> entries;
            for (std::uint32_t j = 0; j < d; ++j) {
                if (rng.next_double() < 0.7) {
                    entries.push_back({j, 2.0 * rng.next_double() - 1.0});
                }
            }
            X.push_back(sparse(std::move(entries), d));
            y.push_back(rng.next_double() < 0.5 ? Label::Negative : Label::Positive);
        }
        std::vector<double> w(d);
        for (double& wi : w) wi = rng.next_gaussian() * 0.5;
        double bias = rng.next_gaussian() * 0.5;
        double l2 = (round % 3 == 0) ? 0.0 : 0.1 * (round % 3);

        std::vector<double> grad_w;
        double grad_b = 0.0;
        LogRegModel::gradient_at(w, bias, X, y, l2, grad_w, grad_b);

        const double h = 1e-5;
        std::vector<double> numeric(d + 1, 0.0);
        for (std::uint32_t j = 0; j < d; ++j) {
            std::vector<double> wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            numeric[j] = (LogRegModel::loss_at(wp, bias, X, y, l2) -
                          LogRegModel::loss_at(wm, bias, X, y, l2)) /
                         (2.0 * h);
        }
        numeric[d] = (LogRegModel::loss_at(w, bias + h, X, y, l2) -
                      LogRegModel::loss_at(w, bias - h, X, y, l2)) /
                     (2.0 * h);

        double diff = 0.0, na = 0.0, nn = 0.0;
        for (std::uint32_t j = 0; j < d; ++j) {
            diff += (grad_w[j] - numeric[j]) * (grad_w[j] - numeric[j]);
            na += grad_w[j] * grad_w[j];
            nn += numeric[j] * numeric[j];
        }
        diff += (grad_b - numeric[d]) * (grad_b - numeric[d]);
        na += grad_b * grad_b;
        nn += numeric[d] * numeric[d];
        double rel = std::sqrt(diff) / std::max(1e-8, std::sqrt(na) + std::sqrt(nn));
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("logreg separates linearly separable data") {
    std::vector<SparseVector> X;
    std::vector<Label> y;
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        X.push_back(sparse({{0, -2.0 + rng.next_double()}}, 1));
        y.push_back(Label::Negative);
        X.push_back(sparse({{0, 1.0 + rng.next_double()}}, 1));
        y.push_back(Label::Positive);
    }
    ClassifierSpec spec;
    spec.kind = ModelKind::LogReg;
    auto model = fit_classifier(spec, X, y);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (model->predict(X[i]) == y[i]) ++correct;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(X.size()) >= 0.99);

    // backtracking accepts only improving epochs, so the recorded losses
    // never rise
    auto* lr = dynamic_cast<LogRegModel*>(model.get());
    REQUIRE(lr != nullptr);
    REQUIRE(lr->loss_history().size() >= 2);
    for (std::size_t i = 1; i < lr->loss_history().size(); ++i) {
        CHECK(lr->loss_history()[i] <= lr->loss_history()[i - 1] + 1e-12);
    }
}

TEST_CASE("forest and boosted trees learn the nonlinear quadrant task") {
    std::vector<SparseVector> X;
    std::vector<Label> y;
    xor_task(500, 911, X, y);
    std::vector<SparseVector> train(X.begin(), X.begin() + 350);
    std::vector<Label> train_y(y.begin(), y.begin() + 350);

    ClassifierSpec rf;
    rf.kind = ModelKind::RandomForest;
    rf.seed = 3;
    auto forest = fit_classifier(rf, train, train_y);
    CHECK(holdout_accuracy(*forest, X, y, 350) >= 0.90);

    ClassifierSpec gb;
    gb.kind = ModelKind::GradientBoostedTrees;
    gb.seed = 3;
    auto boosted = fit_classifier(gb, train, train_y);
    CHECK(holdout_accuracy(*boosted, X, y, 350) >= 0.90);

    // training loss never increases across the default 100 boosting rounds
    auto* gbt = dynamic_cast<GbtModel*>(boosted.get());
    REQUIRE(gbt != nullptr);
    REQUIRE(gbt->loss_history().size() == 101);
    for (std::size_t i = 1; i < gbt->loss_history().size(); ++i) {
        CHECK(gbt->loss_history()[i] <= gbt->loss_history()[i - 1] + 1e-9);
    }
}

TEST_CASE("seeded refits are byte-identical for every model kind") {
    // non-negative count-style features so every model kind is in contract
    Rng rng(1234);
    std::vector<SparseVector> X;
    std::vector<Label> y;
    for (int i = 0; i < 60; ++i) {
        SparseVector v;
        v.dim = 6;
        for (std::uint32_t j = 0; j < 6; ++j) {
            if (rng.next_double() < 0.7) v.entries.push_back({j, 2.0 * rng.next_double()});
        }
        X.push_back(v);
        y.push_back(rng.next_below(2) ? Label::Positive : Label::Negative);
    }
    for (ModelKind kind : {ModelKind::LogReg, ModelKind::NaiveBayes, ModelKind::RandomForest,
                           ModelKind::GradientBoostedTrees}) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.seed = 99;
        auto first = fit_classifier(spec, X, y);
        auto second = fit_classifier(spec, X, y);
        CHECK(first->to_json() == second->to_json());
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(first->predict_proba(X[i]) == second->predict_proba(X[i]));
        }
    }
}

TEST_CASE("fit_classifier validates shapes and hyperparameters") {
    std::vector<SparseVector> X{one_hot(0, 2), one_hot(1, 2)};
    std::vector<Label> y{Label::Negative, Label::Positive};

    ClassifierSpec spec;
    CHECK_THROWS_AS(fit_classifier(spec, {}, {}), UsageError);
    CHECK_THROWS_AS(fit_classifier(spec, X, {Label::Negative}), UsageError);
    CHECK_THROWS_AS(fit_classifier(spec, {one_hot(0, 2)}, {Label::Negative}), UsageError);

    std::vector<SparseVector> ragged{one_hot(0, 2), one_hot(0, 3)};
    CHECK_THROWS_AS(fit_classifier(spec, ragged, y), UsageError);

    ClassifierSpec bad_nb;
    bad_nb.kind = ModelKind::NaiveBayes;
    bad_nb.naive_bayes.alpha = 0.0;
    CHECK_THROWS_AS(fit_classifier(bad_nb, X, y), UsageError);

    ClassifierSpec bad_rf;
    bad_rf.kind = ModelKind::RandomForest;
    bad_rf.random_forest.n_trees = 0;
    CHECK_THROWS_AS(bad_rf.validate(), UsageError);

    ClassifierSpec bad_gbt;
    bad_gbt.kind = ModelKind::GradientBoostedTrees;
    bad_gbt.gbt.learning_rate = 0.0;
    CHECK_THROWS_AS(bad_gbt.validate(), UsageError);
}

TEST_CASE("single-class training data is flagged, not fatal") {
    std::vector<SparseVector> X{one_hot(0, 2), one_hot(1, 2), one_hot(0, 2)};
    std::vector<Label> y(3, Label::Negative);
    for (ModelKind kind : {ModelKind::LogReg, ModelKind::NaiveBayes}) {
        ClassifierSpec spec;
        spec.kind = kind;
        auto model = fit_classifier(spec, X, y);
        CHECK_FALSE(model->warnings().empty());
        CHECK(model->predict(one_hot(0, 2)) == Label::Negative);
    }
}

TEST_CASE("model kind tokens round-trip and display labels are stable") {
    CHECK(parse_model_kind("logreg") == ModelKind::LogReg);
    CHECK(parse_model_kind("naive_bayes") == ModelKind::NaiveBayes);
    CHECK(parse_model_kind("random_forest") == ModelKind::RandomForest);
    CHECK(parse_model_kind("gbt") == ModelKind::GradientBoostedTrees);
    CHECK_THROWS_AS(parse_model_kind("svm"), UsageError);
    CHECK(model_kind_display(ModelKind::LogReg) == "Logistic Regression");
    CHECK(model_kind_display(ModelKind::NaiveBayes) == "Naive Bayes");
    CHECK(model_kind_display(ModelKind::RandomForest) == "Random Forest");
    CHECK(model_kind_display(ModelKind::GradientBoostedTrees) == "Gradient Boosted Trees");
}
