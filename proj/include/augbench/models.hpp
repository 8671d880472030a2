#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "augbench/corpus.hpp"
#include "augbench/features.hpp"
#include "augbench/trees.hpp"

namespace augbench {

enum class ModelKind { LogReg, NaiveBayes, RandomForest, GradientBoostedTrees };

ModelKind parse_model_kind(std::string_view s);  // logreg | naive_bayes | random_forest | gbt
std::string_view model_kind_token(ModelKind k);
std::string_view model_kind_display(ModelKind k);  // report row label

struct LogRegParams {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 1e-4;
    double tol = 1e-6;
};

struct NaiveBayesParams {
    double alpha = 1.0;
};

struct RandomForestParams {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unbounded
    int min_samples_split = 2;
};

struct GbtParams {
    int rounds = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    double lambda = 1.0;
    double gamma = 0.0;
};

struct ClassifierSpec {
    ModelKind kind = ModelKind::LogReg;
    std::uint64_t seed = 0;
    LogRegParams logreg;
    NaiveBayesParams naive_bayes;
    RandomForestParams random_forest;
    GbtParams gbt;

    void validate() const;  // throws UsageError on out-of-range hyperparams
};

class Classifier {
public:
    virtual ~Classifier() = default;

    virtual ModelKind kind() const = 0;
    // Probability of the Positive class.
    virtual double predict_proba(const SparseVector& x) const = 0;
    // proba > 0.5 -> Positive; the 0.5 tie goes to Negative.
    Label predict(const SparseVector& x) const;

    // Self-describing container {kind, hyperparams, parameters}.
    virtual std::string to_json() const = 0;

    const std::vector<std::string>& warnings() const { return warnings_; }
    std::uint32_t dimension() const { return dim_; }

protected:
    void check_dimension(const SparseVector& x) const;
    std::vector<std::string> warnings_;
    std::uint32_t dim_ = 0;
};

class LogRegModel : public Classifier {
public:
    ModelKind kind() const override { return ModelKind::LogReg; }
    double predict_proba(const SparseVector& x) const override;
    std::string to_json() const override;

    // Mean L2-regularized logistic loss and its analytic gradient, evaluated
    // at an arbitrary point; the fit path and the finite-difference check in
    // the tests both go through these.
    static double loss_at(const std::vector<double>& w, double bias,
                          const std::vector<SparseVector>& X, const std::vector<Label>& y,
                          double l2);
    static void gradient_at(const std::vector<double>& w, double bias,
                            const std::vector<SparseVector>& X, const std::vector<Label>& y,
                            double l2, std::vector<double>& grad_w, double& grad_bias);

    // Loss after each accepted epoch, preceded by the initial loss.
    const std::vector<double>& loss_history() const { return loss_history_; }
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

private:
    friend std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec&,
                                                      const std::vector<SparseVector>&,
                                                      const std::vector<Label>&);
    void fit(const std::vector<SparseVector>& X, const std::vector<Label>& y);
    LogRegParams params_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    std::vector<double> loss_history_;
};

class NaiveBayesModel : public Classifier {
public:
    ModelKind kind() const override { return ModelKind::NaiveBayes; }
    double predict_proba(const SparseVector& x) const override;
    std::string to_json() const override;

    double log_prior(Label l) const;
    // ln((mass(class, token) + alpha) / (mass(class) + alpha * |V|))
    double log_likelihood(Label l, std::uint32_t token_index) const;

private:
    friend std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec&,
                                                      const std::vector<SparseVector>&,
                                                      const std::vector<Label>&);
    void fit(const std::vector<SparseVector>& X, const std::vector<Label>& y);
    NaiveBayesParams params_;
    double log_prior_[2] = {0.0, 0.0};
    std::vector<double> log_likelihood_[2];
};

class RandomForestModel : public Classifier {
public:
    ModelKind kind() const override { return ModelKind::RandomForest; }
    // Fraction of trees voting Positive.
    double predict_proba(const SparseVector& x) const override;
    std::string to_json() const override;

    const std::vector<Tree>& trees() const { return trees_; }

private:
    friend std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec&,
                                                      const std::vector<SparseVector>&,
                                                      const std::vector<Label>&);
    void fit(std::uint64_t seed, const std::vector<SparseVector>& X,
             const std::vector<Label>& y);
    RandomForestParams params_;
    std::vector<Tree> trees_;
};

class GbtModel : public Classifier {
public:
    ModelKind kind() const override { return ModelKind::GradientBoostedTrees; }
    // sigmoid(base_score + sum of learning_rate * tree(x))
    double predict_proba(const SparseVector& x) const override;
    std::string to_json() const override;

    double base_score() const { return base_score_; }
    const std::vector<Tree>& trees() const { return trees_; }
    // Training logistic loss after each boosting round, preceded by the
    // base-score-only loss.
    const std::vector<double>& loss_history() const { return loss_history_; }

private:
    friend std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec&,
                                                      const std::vector<SparseVector>&,
                                                      const std::vector<Label>&);
    void fit(const std::vector<SparseVector>& X, const std::vector<Label>& y);
    GbtParams params_;
    double base_score_ = 0.0;
    std::vector<Tree> trees_;
    std::vector<double> loss_history_;
};

// Deterministic given (spec, X, y). Requires |X| == |y| >= 2 and a uniform
// feature dimension; a single-class y records a warning on the model.
std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec& spec,
                                           const std::vector<SparseVector>& X,
                                           const std::vector<Label>& y);

}  // namespace augbench
