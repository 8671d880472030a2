#include "augbench/models.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "augbench/common.hpp"

namespace augbench {

using nlohmann::json;

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double dot(const std::vector<double>& w, const SparseVector& x) {
    double s = 0.0;
    for (const auto& [i, v] : x.entries) s += w[i] * v;
    return s;
}

// Log prior stand-in for a class absent from training: exp() of it is 0, so
// the priors still sum to 1, and JSON can carry the value.
constexpr double kAbsentClassLogPrior = -1e300;

json hyperparams_json(const ClassifierSpec& spec) {
    switch (spec.kind) {
        case ModelKind::LogReg:
            return {{"learning_rate", spec.logreg.learning_rate},
                    {"epochs", spec.logreg.epochs},
                    {"l2", spec.logreg.l2},
                    {"tol", spec.logreg.tol}};
        case ModelKind::NaiveBayes:
            return {{"alpha", spec.naive_bayes.alpha}};
        case ModelKind::RandomForest:
            return {{"n_trees", spec.random_forest.n_trees},
                    {"max_depth", spec.random_forest.max_depth},
                    {"min_samples_split", spec.random_forest.min_samples_split}};
        case ModelKind::GradientBoostedTrees:
            return {{"rounds", spec.gbt.rounds},
                    {"learning_rate", spec.gbt.learning_rate},
                    {"max_depth", spec.gbt.max_depth},
                    {"lambda", spec.gbt.lambda},
                    {"gamma", spec.gbt.gamma}};
    }
    return {};
}

}  // namespace

ModelKind parse_model_kind(std::string_view s) {
    if (s == "logreg") return ModelKind::LogReg;
    if (s == "naive_bayes") return ModelKind::NaiveBayes;
    if (s == "random_forest") return ModelKind::RandomForest;
    if (s == "gbt") return ModelKind::GradientBoostedTrees;
    throw UsageError("unknown model kind '" + std::string(s) +
                     "' (expected logreg, naive_bayes, random_forest, or gbt)");
}

std::string_view model_kind_token(ModelKind k) {
    switch (k) {
        case ModelKind::LogReg: return "logreg";
        case ModelKind::NaiveBayes: return "naive_bayes";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::GradientBoostedTrees: return "gbt";
    }
    return "unknown";
}

std::string_view model_kind_display(ModelKind k) {
    switch (k) {
        case ModelKind::LogReg: return "Logistic Regression";
        case ModelKind::NaiveBayes: return "Naive Bayes";
        case ModelKind::RandomForest: return "Random Forest";
        case ModelKind::GradientBoostedTrees: return "Gradient Boosted Trees";
    }
    return "unknown";
}

void ClassifierSpec::validate() const {
    switch (kind) {
        case ModelKind::LogReg:
            if (logreg.learning_rate <= 0.0) throw UsageError("logreg learning_rate must be > 0");
            if (logreg.epochs < 0) throw UsageError("logreg epochs must be >= 0");
            if (logreg.l2 < 0.0) throw UsageError("logreg l2 must be >= 0");
            if (logreg.tol < 0.0) throw UsageError("logreg tol must be >= 0");
            break;
        case ModelKind::NaiveBayes:
            if (naive_bayes.alpha <= 0.0) throw UsageError("naive_bayes alpha must be > 0");
            break;
        case ModelKind::RandomForest:
            if (random_forest.n_trees < 1) throw UsageError("random_forest n_trees must be >= 1");
            if (random_forest.max_depth < 0) throw UsageError("random_forest max_depth must be >= 0");
            if (random_forest.min_samples_split < 2) {
                throw UsageError("random_forest min_samples_split must be >= 2");
            }
            break;
        case ModelKind::GradientBoostedTrees:
            if (gbt.rounds < 0) throw UsageError("gbt rounds must be >= 0");
            if (gbt.learning_rate <= 0.0) throw UsageError("gbt learning_rate must be > 0");
            if (gbt.max_depth < 1) throw UsageError("gbt max_depth must be >= 1");
            if (gbt.lambda < 0.0) throw UsageError("gbt lambda must be >= 0");
            if (gbt.gamma < 0.0) throw UsageError("gbt gamma must be >= 0");
            break;
    }
}

Label Classifier::predict(const SparseVector& x) const {
    return predict_proba(x) > 0.5 ? Label::Positive : Label::Negative;
}

void Classifier::check_dimension(const SparseVector& x) const {
    if (x.dim != dim_) {
        throw UsageError("feature dimension mismatch: model " + std::to_string(dim_) +
                         ", input " + std::to_string(x.dim));
    }
}

double LogRegModel::loss_at(const std::vector<double>& w, double bias,
                            const std::vector<SparseVector>& X, const std::vector<Label>& y,
                            double l2) {
    double total = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double margin = bias + dot(w, X[i]);
        total += y[i] == Label::Positive ? softplus(-margin) : softplus(margin);
    }
    double reg = 0.0;
    for (double wi : w) reg += wi * wi;
    return total / static_cast<double>(X.size()) + 0.5 * l2 * reg;
}

void LogRegModel::gradient_at(const std::vector<double>& w, double bias,
                              const std::vector<SparseVector>& X, const std::vector<Label>& y,
                              double l2, std::vector<double>& grad_w, double& grad_bias) {
    grad_w.assign(w.size(), 0.0);
    grad_bias = 0.0;
    double inv_n = 1.0 / static_cast<double>(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        double p = sigmoid(bias + dot(w, X[i]));
        double r = (p - (y[i] == Label::Positive ? 1.0 : 0.0)) * inv_n;
        for (const auto& [idx, v] : X[i].entries) grad_w[idx] += r * v;
        grad_bias += r;
    }
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] += l2 * w[j];
}

double LogRegModel::predict_proba(const SparseVector& x) const {
    check_dimension(x);
    return sigmoid(bias_ + dot(weights_, x));
}

std::string LogRegModel::to_json() const {
    ClassifierSpec spec;
    spec.kind = ModelKind::LogReg;
    spec.logreg = params_;
    json j = {{"kind", std::string(model_kind_token(kind()))},
              {"hyperparams", hyperparams_json(spec)},
              {"parameters", {{"weights", weights_}, {"bias", bias_}}}};
    return j.dump();
}

double NaiveBayesModel::log_prior(Label l) const {
    return log_prior_[static_cast<std::size_t>(l)];
}

double NaiveBayesModel::log_likelihood(Label l, std::uint32_t token_index) const {
    return log_likelihood_[static_cast<std::size_t>(l)][token_index];
}

double NaiveBayesModel::predict_proba(const SparseVector& x) const {
    check_dimension(x);
    double score[2];
    for (int c = 0; c < 2; ++c) {
        score[c] = log_prior_[c];
        for (const auto& [idx, v] : x.entries) score[c] += v * log_likelihood_[c][idx];
    }
    double m = std::max(score[0], score[1]);
    double e0 = std::exp(score[0] - m);
    double e1 = std::exp(score[1] - m);
    return e1 / (e0 + e1);
}

std::string NaiveBayesModel::to_json() const {
    ClassifierSpec spec;
    spec.kind = ModelKind::NaiveBayes;
    spec.naive_bayes = params_;
    json j = {{"kind", std::string(model_kind_token(kind()))},
              {"hyperparams", hyperparams_json(spec)},
              {"parameters",
               {{"log_prior", {log_prior_[0], log_prior_[1]}},
                {"log_likelihood", {log_likelihood_[0], log_likelihood_[1]}}}}};
    return j.dump();
}

double RandomForestModel::predict_proba(const SparseVector& x) const {
    check_dimension(x);
    std::size_t votes = 0;
    for (const Tree& t : trees_) {
        if (t.leaf_for(x).leaf_value > 0.5) ++votes;
    }
    return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

std::string RandomForestModel::to_json() const {
    ClassifierSpec spec;
    spec.kind = ModelKind::RandomForest;
    spec.random_forest = params_;
    json arr = json::array();
    for (const Tree& t : trees_) arr.push_back(t.to_json());
    json j = {{"kind", std::string(model_kind_token(kind()))},
              {"hyperparams", hyperparams_json(spec)},
              {"parameters", {{"trees", arr}}}};
    return j.dump();
}

double GbtModel::predict_proba(const SparseVector& x) const {
    check_dimension(x);
    double margin = base_score_;
    for (const Tree& t : trees_) margin += params_.learning_rate * t.leaf_for(x).leaf_value;
    return sigmoid(margin);
}

std::string GbtModel::to_json() const {
    ClassifierSpec spec;
    spec.kind = ModelKind::GradientBoostedTrees;
    spec.gbt = params_;
    json arr = json::array();
    for (const Tree& t : trees_) arr.push_back(t.to_json());
    json j = {{"kind", std::string(model_kind_token(kind()))},
              {"hyperparams", hyperparams_json(spec)},
              {"parameters", {{"base_score", base_score_}, {"trees", arr}}}};
    return j.dump();
}

void LogRegModel::fit(const std::vector<SparseVector>& X, const std::vector<Label>& y) {
    dim_ = X[0].dim;
    weights_.assign(dim_, 0.0);
    bias_ = 0.0;

    double step = params_.learning_rate;
    double loss = loss_at(weights_, bias_, X, y, params_.l2);
    loss_history_.push_back(loss);

    std::vector<double> grad_w;
    std::vector<double> trial_w(weights_.size());
    for (int epoch = 0; epoch < params_.epochs; ++epoch) {
        double grad_b = 0.0;
        gradient_at(weights_, bias_, X, y, params_.l2, grad_w, grad_b);

        // Halve the step until the full-batch move stops increasing the loss;
        // the shrunken step carries over to later epochs.
        bool accepted = false;
        double trial_b = 0.0;
        double trial_loss = 0.0;
        for (int tries = 0; tries < 40; ++tries) {
            for (std::size_t j = 0; j < trial_w.size(); ++j) {
                trial_w[j] = weights_[j] - step * grad_w[j];
            }
            trial_b = bias_ - step * grad_b;
            trial_loss = loss_at(trial_w, trial_b, X, y, params_.l2);
            if (trial_loss <= loss) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        double improvement = loss - trial_loss;
        weights_.swap(trial_w);
        bias_ = trial_b;
        loss = trial_loss;
        loss_history_.push_back(loss);
        if (improvement < params_.tol) break;
    }
}

void NaiveBayesModel::fit(const std::vector<SparseVector>& X, const std::vector<Label>& y) {
    dim_ = X[0].dim;
    std::size_t n_class[2] = {0, 0};
    std::vector<double> mass[2];
    mass[0].assign(dim_, 0.0);
    mass[1].assign(dim_, 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        auto c = static_cast<std::size_t>(y[i]);
        ++n_class[c];
        for (const auto& [idx, v] : X[i].entries) mass[c][idx] += v;
    }
    for (int c = 0; c < 2; ++c) {
        log_prior_[c] =
            n_class[c] == 0
                ? kAbsentClassLogPrior
                : std::log(static_cast<double>(n_class[c]) / static_cast<double>(X.size()));
        double total = 0.0;
        for (double m : mass[c]) total += m;
        double denom = total + params_.alpha * static_cast<double>(dim_);
        log_likelihood_[c].resize(dim_);
        for (std::size_t t = 0; t < dim_; ++t) {
            log_likelihood_[c][t] = std::log((mass[c][t] + params_.alpha) / denom);
        }
    }
}

void RandomForestModel::fit(std::uint64_t seed, const std::vector<SparseVector>& X,
                            const std::vector<Label>& y) {
    dim_ = X[0].dim;
    ColumnMatrix columns = ColumnMatrix::from_rows(X);
    std::vector<std::uint8_t> labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) labels[i] = y[i] == Label::Positive ? 1 : 0;

    ClassTreeOptions options;
    options.max_depth = params_.max_depth;
    options.min_samples_split = params_.min_samples_split;
    options.features_per_split =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(dim_))));

    Rng forest_rng = Rng(seed).derive("rf");
    std::size_t n = X.size();
    trees_.reserve(params_.n_trees);
    for (int t = 0; t < params_.n_trees; ++t) {
        Rng tree_rng = forest_rng.derive(static_cast<std::uint64_t>(t));
        std::vector<std::uint32_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) {
            bootstrap[i] = static_cast<std::uint32_t>(tree_rng.next_below(n));
        }
        trees_.push_back(fit_classification_tree(X, columns, bootstrap, labels, options, tree_rng));
    }
}

void GbtModel::fit(const std::vector<SparseVector>& X, const std::vector<Label>& y) {
    dim_ = X[0].dim;
    std::size_t n = X.size();
    std::vector<double> target(n);
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        target[i] = y[i] == Label::Positive ? 1.0 : 0.0;
        pos += target[i];
    }
    double prior = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    base_score_ = std::log(prior / (1.0 - prior));

    ColumnMatrix columns = ColumnMatrix::from_rows(X);
    RegTreeOptions options;
    options.max_depth = params_.max_depth;
    options.lambda = params_.lambda;
    options.gamma = params_.gamma;

    std::vector<double> margin(n, base_score_);
    auto train_loss = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += target[i] > 0.5 ? softplus(-margin[i]) : softplus(margin[i]);
        }
        return total / static_cast<double>(n);
    };
    loss_history_.push_back(train_loss());

    std::vector<double> grad(n), hess(n);
    trees_.reserve(params_.rounds);
    for (int round = 0; round < params_.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(margin[i]);
            grad[i] = p - target[i];
            hess[i] = p * (1.0 - p);
        }
        Tree tree = fit_regression_tree(X, columns, grad, hess, options);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += params_.learning_rate * tree.leaf_for(X[i]).leaf_value;
        }
        trees_.push_back(std::move(tree));
        loss_history_.push_back(train_loss());
    }
}

std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec& spec,
                                           const std::vector<SparseVector>& X,
                                           const std::vector<Label>& y) {
    spec.validate();
    if (X.size() != y.size()) {
        throw UsageError("fit: X and y sizes differ (" + std::to_string(X.size()) + " vs " +
                         std::to_string(y.size()) + ")");
    }
    if (X.size() < 2) throw UsageError("fit: need at least 2 training samples");
    for (const SparseVector& x : X) {
        if (x.dim != X[0].dim) throw UsageError("fit: inconsistent feature dimensions");
    }
    bool has_pos = false, has_neg = false;
    for (Label l : y) (l == Label::Positive ? has_pos : has_neg) = true;
    bool single_class = !(has_pos && has_neg);

    switch (spec.kind) {
        case ModelKind::LogReg: {
            auto m = std::make_unique<LogRegModel>();
            m->params_ = spec.logreg;
            if (single_class) m->warnings_.push_back("training labels contain a single class");
            m->fit(X, y);
            return m;
        }
        case ModelKind::NaiveBayes: {
            auto m = std::make_unique<NaiveBayesModel>();
            m->params_ = spec.naive_bayes;
            if (single_class) m->warnings_.push_back("training labels contain a single class");
            m->fit(X, y);
            return m;
        }
        case ModelKind::RandomForest: {
            auto m = std::make_unique<RandomForestModel>();
            m->params_ = spec.random_forest;
            m->fit(spec.seed, X, y);
            return m;
        }
        case ModelKind::GradientBoostedTrees: {
            auto m = std::make_unique<GbtModel>();
            m->params_ = spec.gbt;
            m->fit(X, y);
            return m;
        }
    }
    throw UsageError("unknown model kind");
}

}  // namespace augbench
