#include "augbench/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <utility>

#include "augbench/analysis.hpp"
#include "augbench/augment.hpp"
#include "augbench/common.hpp"
#include "augbench/manifest.hpp"
#include "augbench/report.hpp"
#include "augbench/sha256.hpp"
#include "augbench/tsne.hpp"

namespace fs = std::filesystem;

namespace augbench {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const UsageError& e) {
        throw UsageError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    } catch (const ProviderError& e) {
        throw ProviderError(std::string(name) + ": " + e.what());
    }
}

std::unordered_map<std::string, std::string> default_substitutions() {
    return {{"tidak", "tak"},
            {"sudah", "udah"},
            {"saya", "aku"},
            {"kamu", "dikau"},
            {"dengan", "sama"}};
}

HttpOptions http_options_for(const ProviderConfig& c, const std::string& base_url,
                             const std::string& path, const char* role) {
    if (base_url.empty()) {
        throw UsageError(std::string(role) + " base URL is required in http provider mode");
    }
    HttpOptions o;
    o.base_url = base_url;
    o.path = path;
    o.api_key_env = c.api_key_env;
    o.max_attempts = c.max_attempts;
    o.backoff_initial_ms = c.backoff_initial_ms;
    o.requests_per_second = c.requests_per_second;
    o.max_in_flight = c.max_in_flight;
    o.cache_dir = c.cache_dir;
    o.cache_mode = c.cache_mode;
    return o;
}

std::string_view cache_mode_token(CacheMode mode) {
    switch (mode) {
        case CacheMode::Off: return "off";
        case CacheMode::Record: return "record";
        case CacheMode::Replay: return "replay";
        case CacheMode::ReadWrite: return "readwrite";
    }
    return "readwrite";
}

CorpusFormat resolve_format(const PipelineConfig& config) {
    if (config.corpus_format.empty()) return format_from_path(config.corpus_path);
    if (config.corpus_format == "csv") return CorpusFormat::Csv;
    if (config.corpus_format == "jsonl") return CorpusFormat::Jsonl;
    throw UsageError("unknown corpus format: \"" + config.corpus_format + "\" (csv|jsonl)");
}

nlohmann::json spec_json(const ClassifierSpec& s) {
    nlohmann::json j{{"kind", std::string(model_kind_token(s.kind))}, {"seed", s.seed}};
    switch (s.kind) {
        case ModelKind::LogReg:
            j["hyperparams"] = {{"learning_rate", s.logreg.learning_rate},
                                {"epochs", s.logreg.epochs},
                                {"l2", s.logreg.l2},
                                {"tol", s.logreg.tol}};
            break;
        case ModelKind::NaiveBayes:
            j["hyperparams"] = {{"alpha", s.naive_bayes.alpha}};
            break;
        case ModelKind::RandomForest:
            j["hyperparams"] = {{"n_trees", s.random_forest.n_trees},
                                {"max_depth", s.random_forest.max_depth},
                                {"min_samples_split", s.random_forest.min_samples_split}};
            break;
        case ModelKind::GradientBoostedTrees:
            j["hyperparams"] = {{"rounds", s.gbt.rounds},
                                {"learning_rate", s.gbt.learning_rate},
                                {"max_depth", s.gbt.max_depth},
                                {"lambda", s.gbt.lambda},
                                {"gamma", s.gbt.gamma}};
            break;
    }
    return j;
}

}  // namespace

void ProviderConfig::validate() const {
    if (mode != "mock" && mode != "http") {
        throw UsageError("provider mode must be mock or http, got \"" + mode + "\"");
    }
    if (mock_embed_dim == 0) throw UsageError("mock embedding dimension must be positive");
    if (requests_per_second <= 0.0) throw UsageError("requests_per_second must be positive");
    if (max_attempts < 1) throw UsageError("max_attempts must be at least 1");
    if (backoff_initial_ms < 0) throw UsageError("backoff_initial_ms must be non-negative");
    if (max_in_flight < 1) throw UsageError("max_in_flight must be at least 1");
}

ProviderSet make_providers(const ProviderConfig& config) {
    config.validate();
    ProviderSet set;
    if (config.mode == "mock") {
        set.chat = std::make_unique<MockChatProvider>(config.mock_seed);
        MockTranslationProvider::Options opts;
        opts.seed = config.mock_seed;
        opts.rotate = true;
        opts.substitutions = default_substitutions();
        set.translator = std::make_unique<MockTranslationProvider>(std::move(opts));
        set.embedder = std::make_unique<MockEmbeddingProvider>(config.mock_embed_dim);
        return set;
    }
    set.chat = std::make_unique<HttpChatProvider>(
        http_options_for(config, config.chat_base_url, config.chat_path, "chat"));
    set.translator = std::make_unique<HttpTranslationProvider>(
        http_options_for(config, config.translate_base_url, config.translate_path, "translate"));
    set.embedder = std::make_unique<HttpEmbeddingProvider>(
        http_options_for(config, config.embed_base_url, config.embed_path, "embed"));
    return set;
}

void PipelineConfig::validate() const {
    gen_params.validate();
    provider.validate();
    for (const auto& spec : models) spec.validate();
    if (balance_ratio < 0.0) throw UsageError("balance ratio must be non-negative");
    if (target_count < 0) throw UsageError("target count must be non-negative");
    if (k < 2) throw UsageError("k must be at least 2");
    if (perplexity <= 0.0) throw UsageError("perplexity must be positive");
    if (tsne_iterations < 1) throw UsageError("tsne iterations must be at least 1");
    if (pca_components == 0) throw UsageError("pca components must be positive");
    if (projection_features != "embedding" && projection_features != "tfidf") {
        throw UsageError("projection features must be embedding or tfidf, got \"" +
                         projection_features + "\"");
    }
    if (pivot_lang.empty() || source_lang.empty()) {
        throw UsageError("pivot and source languages must be nonempty");
    }
    if (pivot_lang == source_lang) {
        throw UsageError("pivot language must differ from the source language");
    }
    if (!corpus_format.empty() && corpus_format != "csv" && corpus_format != "jsonl") {
        throw UsageError("unknown corpus format: \"" + corpus_format + "\" (csv|jsonl)");
    }
    if (out_dir.empty()) throw UsageError("output directory must be nonempty");
}

std::vector<ClassifierSpec> default_model_specs(std::uint64_t seed) {
    std::vector<ClassifierSpec> specs(4);
    specs[0].kind = ModelKind::LogReg;
    specs[1].kind = ModelKind::NaiveBayes;
    specs[2].kind = ModelKind::RandomForest;
    specs[3].kind = ModelKind::GradientBoostedTrees;
    for (auto& spec : specs) spec.seed = seed;
    return specs;
}

nlohmann::json pipeline_config_json(const PipelineConfig& config) {
    nlohmann::json models = nlohmann::json::array();
    const auto specs = config.models.empty() ? default_model_specs(config.seed) : config.models;
    for (const auto& spec : specs) models.push_back(spec_json(spec));
    nlohmann::json provider{{"mode", config.provider.mode},
                            {"mock_seed", config.provider.mock_seed},
                            {"mock_embed_dim", config.provider.mock_embed_dim},
                            {"chat_base_url", config.provider.chat_base_url},
                            {"chat_path", config.provider.chat_path},
                            {"translate_base_url", config.provider.translate_base_url},
                            {"translate_path", config.provider.translate_path},
                            {"embed_base_url", config.provider.embed_base_url},
                            {"embed_path", config.provider.embed_path},
                            {"api_key_env", config.provider.api_key_env},
                            {"cache_dir", config.provider.cache_dir},
                            {"cache_mode", std::string(cache_mode_token(config.provider.cache_mode))},
                            {"requests_per_second", config.provider.requests_per_second},
                            {"max_attempts", config.provider.max_attempts},
                            {"backoff_initial_ms", config.provider.backoff_initial_ms},
                            {"max_in_flight", config.provider.max_in_flight}};
    return nlohmann::json{
        {"corpus_path", config.corpus_path},
        {"corpus_format", config.corpus_format},
        {"balance_ratio", config.balance_ratio},
        {"target_count", config.target_count},
        {"generation",
         {{"model_name", config.gen_params.model_name},
          {"temperature", config.gen_params.temperature},
          {"top_p", config.gen_params.top_p},
          {"max_tokens", config.gen_params.max_tokens}}},
        {"models", models},
        {"k", config.k},
        {"seed", config.seed},
        {"cv_mode", std::string(cv_mode_token(config.cv_mode))},
        {"out_dir", config.out_dir},
        {"provider", provider},
        {"projection_features", config.projection_features},
        {"perplexity", config.perplexity},
        {"tsne_iterations", config.tsne_iterations},
        {"pca_components", config.pca_components},
        {"pivot_lang", config.pivot_lang},
        {"source_lang", config.source_lang},
        {"synthetic",
         {{"n_negative", config.synth.n_negative},
          {"n_positive", config.synth.n_positive},
          {"seed", config.synth.seed}}}};
}

RunAllResult run_all(const PipelineConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);
    const std::string out = config.out_dir;

    RunManifest manifest;
    manifest.command = "run-all";
    manifest.tool_version = std::string(kToolVersion);
    manifest.started_at = iso8601_utc_now();
    manifest.config = pipeline_config_json(config);
    manifest.seeds = {{"pipeline", config.seed},
                      {"synthetic", config.synth.seed},
                      {"mock_provider", config.provider.mock_seed}};

    ProviderSet providers = make_providers(config.provider);

    Corpus corpus = stage("ingest", [&] {
        if (config.corpus_path.empty()) return synth_corpus(config.synth);
        manifest.input_hashes[config.corpus_path] = sha256_file_hex(config.corpus_path);
        return ingest(config.corpus_path, resolve_format(config));
    });

    corpus = stage("balance", [&] {
        if (config.balance_ratio <= 0.0) return std::move(corpus);
        return balance(corpus, config.balance_ratio, config.seed);
    });
    const std::string balanced_path = out + "/corpus_balanced.jsonl";
    write_corpus(corpus, balanced_path, CorpusFormat::Jsonl);
    manifest.artifacts.push_back(balanced_path);

    std::vector<Document> original_positive;
    for (std::size_t i : corpus.indices_with_label(Label::Positive)) {
        original_positive.push_back(corpus.documents[i]);
    }

    const int target = config.target_count > 0
                           ? config.target_count
                           : static_cast<int>(corpus.count_label(Label::Positive));
    std::vector<AugmentationBatch> batches;
    stage("augment", [&] {
        batches.push_back(backtranslate(original_positive, config.pivot_lang,
                                        *providers.translator, config.source_lang));
        batches.push_back(generate_prompted(corpus, PromptMode::Single, target, config.gen_params,
                                            *providers.chat, config.seed));
        batches.push_back(generate_prompted(corpus, PromptMode::Dual, target, config.gen_params,
                                            *providers.chat, config.seed));
        for (const auto& batch : batches) {
            const std::string path =
                out + "/batch_" + std::string(source_token(batch.source)) + ".jsonl";
            write_batch(batch, path);
            manifest.artifacts.push_back(path);
        }
    });

    CompositionTable table = stage("composition", [&] {
        Corpus combined = corpus;
        for (const auto& batch : batches) {
            combined.documents.insert(combined.documents.end(), batch.samples.begin(),
                                      batch.samples.end());
        }
        return composition(combined);
    });

    const auto specs = config.models.empty() ? default_model_specs(config.seed) : config.models;
    EvalReport eval_report;
    stage("trainval", [&] {
        eval_report.cv_mode = config.cv_mode;
        eval_report.k = config.k;
        eval_report.seed = config.seed;
        std::vector<const AugmentationBatch*> configs{nullptr};
        for (const auto& batch : batches) configs.push_back(&batch);
        for (const AugmentationBatch* batch : configs) {
            for (const auto& spec : specs) {
                eval_report.cells.push_back(
                    cross_validate(corpus, batch, spec, config.k, config.seed, config.cv_mode));
            }
        }
        const std::string path = out + "/eval_report.json";
        std::ofstream file(path, std::ios::binary);
        if (!file) throw DataError("cannot write " + path);
        file << eval_report_json(eval_report).dump(2) << '\n';
        if (!file.good()) throw DataError("write failed for " + path);
        manifest.artifacts.push_back(path);
    });

    ProviderEmbedder embedder(*providers.embedder);
    std::vector<SimilarityRow> similarity = stage("semsim", [&] {
        std::vector<SimilarityRow> rows;
        for (const auto& batch : batches) {
            rows.push_back({batch.source, semantic_similarity(original_positive, batch, embedder)});
        }
        return rows;
    });

    std::vector<FigureRef> figures;
    std::vector<std::string> figure_paths;
    stage("project", [&] {
        for (std::size_t f = 0; f < batches.size() + 1; ++f) {
            std::vector<Document> docs = corpus.documents;
            std::string token = "original";
            std::string caption = "Original data distribution";
            if (f > 0) {
                const AugmentationBatch& batch = batches[f - 1];
                docs.insert(docs.end(), batch.samples.begin(), batch.samples.end());
                token = std::string(source_token(batch.source));
                caption = "Original + " + std::string(source_display(batch.source));
            }

            DenseMatrix points;
            if (config.projection_features == "embedding") {
                EmbeddingMatrix m = embedder.embed_documents(docs);
                points = DenseMatrix(m.size(), m.dim());
                for (std::size_t i = 0; i < m.size(); ++i) {
                    for (std::size_t j = 0; j < m.dim(); ++j) points.at(i, j) = m.rows[i][j];
                }
            } else {
                std::vector<std::vector<std::string>> tokens;
                tokens.reserve(docs.size());
                for (auto& doc : docs) tokens.push_back(tokenize(norm_text_of(doc)));
                TfidfModel tfidf = TfidfModel::fit(tokens);
                std::vector<SparseVector> X;
                X.reserve(tokens.size());
                for (const auto& t : tokens) X.push_back(tfidf.transform(t));
                PcaModel pca = pca_fit(X, config.pca_components, config.seed);
                const auto coords = pca_transform(pca, X);
                points = DenseMatrix(coords.size(), coords.empty() ? 0 : coords[0].size());
                for (std::size_t i = 0; i < coords.size(); ++i) {
                    for (std::size_t j = 0; j < coords[i].size(); ++j) {
                        points.at(i, j) = coords[i][j];
                    }
                }
            }

            TsneConfig tc;
            tc.perplexity = std::min(config.perplexity,
                                     (static_cast<double>(points.n) - 1.0) / 3.0);
            tc.iterations = config.tsne_iterations;
            Projection2D proj = tsne(points, tc, config.seed);
            proj.ids.reserve(docs.size());
            for (const auto& doc : docs) {
                proj.ids.push_back(doc.id);
                proj.sources.push_back(doc.source);
                proj.labels.push_back(doc.label);
            }

            const std::string svg_name = "fig_" + token + ".svg";
            const std::string svg = out + "/" + svg_name;
            emit_scatter(proj, svg);
            figures.push_back({caption, svg_name});
            figure_paths.push_back(svg);
            manifest.artifacts.push_back(svg);
        }
    });

    const std::string report_md = out + "/report.md";
    const std::string report_json = out + "/report.json";
    stage("report", [&] {
        ReportInputs inputs;
        inputs.composition = &table;
        inputs.eval_report = &eval_report;
        inputs.similarity = &similarity;
        inputs.figures = &figures;
        assemble_report(inputs, report_md, report_json);
        manifest.artifacts.push_back(report_md);
        manifest.artifacts.push_back(report_json);
    });

    if (!config.provider.cache_dir.empty()) {
        manifest.cache_digests =
            ResponseCache(config.provider.cache_dir, CacheMode::ReadWrite).digests();
    }
    manifest.finished_at = iso8601_utc_now();
    write_manifest(manifest, out + "/run_manifest.json");

    return {report_md, report_json, figure_paths};
}

}  // namespace augbench
