#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "augbench/analysis.hpp"
#include "augbench/augment.hpp"
#include "augbench/common.hpp"
#include "augbench/corpus.hpp"
#include "augbench/eval.hpp"
#include "augbench/manifest.hpp"
#include "augbench/pipeline.hpp"
#include "augbench/report.hpp"
#include "augbench/sha256.hpp"
#include "augbench/synth.hpp"
#include "augbench/tsne.hpp"

namespace fs = std::filesystem;
using namespace augbench;

namespace {

std::string dir_of(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

std::string ensure_parent(const std::string& path) {
    fs::create_directories(dir_of(path));
    return path;
}

CorpusFormat format_or_infer(const std::string& format, const std::string& path) {
    if (format.empty()) return format_from_path(path);
    if (format == "csv") return CorpusFormat::Csv;
    if (format == "jsonl") return CorpusFormat::Jsonl;
    throw UsageError("unknown corpus format: \"" + format + "\" (csv|jsonl)");
}

// Collects what a command read and wrote, then lands next to the primary
// artifact as <command>_manifest.json.
struct ManifestWriter {
    RunManifest m;

    explicit ManifestWriter(std::string command) {
        m.command = std::move(command);
        m.tool_version = std::string(kToolVersion);
        m.started_at = iso8601_utc_now();
    }
    void input(const std::string& path) { m.input_hashes[path] = sha256_file_hex(path); }
    void artifact(const std::string& path) { m.artifacts.push_back(path); }
    void finish(const std::string& dir) {
        m.finished_at = iso8601_utc_now();
        std::string name = m.command;
        std::replace(name.begin(), name.end(), '-', '_');
        write_manifest(m, dir + "/" + name + "_manifest.json");
    }
};

struct ProviderFlagState {
    ProviderConfig cfg;
    std::string cache_mode_str = "readwrite";

    ProviderConfig resolve() {
        cfg.cache_mode = parse_cache_mode(cache_mode_str);
        return cfg;
    }
};

void add_provider_flags(CLI::App* cmd, ProviderFlagState& s) {
    cmd->add_option("--provider", s.cfg.mode, "Provider backend: mock or http")
        ->capture_default_str();
    cmd->add_option("--mock-seed", s.cfg.mock_seed, "Seed for the mock providers")
        ->capture_default_str();
    cmd->add_option("--mock-embed-dim", s.cfg.mock_embed_dim,
                    "Dimension of the mock embedding vectors")
        ->capture_default_str();
    cmd->add_option("--chat-url", s.cfg.chat_base_url, "Chat completion base URL (http mode)");
    cmd->add_option("--chat-path", s.cfg.chat_path, "Chat completion endpoint path")
        ->capture_default_str();
    cmd->add_option("--translate-url", s.cfg.translate_base_url,
                    "Translation base URL (http mode)");
    cmd->add_option("--translate-path", s.cfg.translate_path, "Translation endpoint path")
        ->capture_default_str();
    cmd->add_option("--embed-url", s.cfg.embed_base_url, "Embedding base URL (http mode)");
    cmd->add_option("--embed-path", s.cfg.embed_path, "Embedding endpoint path")
        ->capture_default_str();
    cmd->add_option("--api-key-env", s.cfg.api_key_env,
                    "Environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--cache-dir", s.cfg.cache_dir, "Response cache directory (http mode)");
    cmd->add_option("--cache-mode", s.cache_mode_str, "off | record | replay | readwrite")
        ->capture_default_str();
    cmd->add_option("--rps", s.cfg.requests_per_second, "Request rate limit per second")
        ->capture_default_str();
    cmd->add_option("--max-attempts", s.cfg.max_attempts, "Retry budget per request")
        ->capture_default_str();
    cmd->add_option("--backoff-ms", s.cfg.backoff_initial_ms,
                    "Initial retry backoff in milliseconds")
        ->capture_default_str();
    cmd->add_option("--max-in-flight", s.cfg.max_in_flight, "Concurrent request cap")
        ->capture_default_str();
}

void add_generation_flags(CLI::App* cmd, GenerationParams& p) {
    cmd->add_option("--model-name", p.model_name, "Generation model identifier")
        ->capture_default_str();
    cmd->add_option("--temperature", p.temperature, "Sampling temperature")
        ->capture_default_str();
    cmd->add_option("--top-p", p.top_p, "Nucleus sampling threshold")->capture_default_str();
    cmd->add_option("--max-tokens", p.max_tokens, "Completion token cap")->capture_default_str();
}

std::vector<Document> positive_documents(const Corpus& corpus) {
    std::vector<Document> docs;
    for (std::size_t i : corpus.indices_with_label(Label::Positive)) {
        docs.push_back(corpus.documents[i]);
    }
    return docs;
}

std::vector<ClassifierSpec> specs_from_tokens(const std::vector<std::string>& tokens,
                                              std::uint64_t seed) {
    std::vector<ClassifierSpec> specs;
    for (const auto& token : tokens) {
        ClassifierSpec spec;
        spec.kind = parse_model_kind(token);
        spec.seed = seed;
        specs.push_back(spec);
    }
    if (specs.empty()) return default_model_specs(seed);
    return specs;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out.good()) throw DataError("write failed for " + path);
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workbench for minority-class text augmentation experiments"};
    app.set_version_flag("--version", std::string("augbench ") + std::string(kToolVersion));
    app.set_config("--config", "", "Key-value config file; command-line flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    // synth-corpus
    struct {
        SynthConfig cfg;
        std::string out = "corpus_synth.jsonl";
        std::string format;
    } synth_state;
    {
        auto* cmd = app.add_subcommand("synth-corpus", "Generate the bundled synthetic corpus");
        cmd->add_option("--negatives", synth_state.cfg.n_negative, "Negative document count")
            ->capture_default_str();
        cmd->add_option("--positives", synth_state.cfg.n_positive, "Positive document count")
            ->capture_default_str();
        cmd->add_option("--seed", synth_state.cfg.seed, "Generator seed")->capture_default_str();
        cmd->add_option("--out", synth_state.out, "Output corpus path")->capture_default_str();
        cmd->add_option("--format", synth_state.format, "csv | jsonl (default: from extension)");
        cmd->callback([&] {
            ManifestWriter manifest("synth-corpus");
            const Corpus corpus = synth_corpus(synth_state.cfg);
            write_corpus(corpus, ensure_parent(synth_state.out),
                         format_or_infer(synth_state.format, synth_state.out));
            manifest.m.config = {{"negatives", synth_state.cfg.n_negative},
                                 {"positives", synth_state.cfg.n_positive},
                                 {"out", synth_state.out}};
            manifest.m.seeds = {{"synthetic", synth_state.cfg.seed}};
            manifest.artifact(synth_state.out);
            manifest.finish(dir_of(synth_state.out));
            std::cout << "wrote " << corpus.documents.size() << " documents to " << synth_state.out
                      << "\n";
        });
    }

    // ingest
    struct {
        std::string in, format, out, out_format;
    } ingest_state;
    {
        auto* cmd = app.add_subcommand("ingest", "Validate a corpus and write it in canonical form");
        cmd->add_option("--in", ingest_state.in, "Input corpus path")->required();
        cmd->add_option("--format", ingest_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--out", ingest_state.out, "Output corpus path")->required();
        cmd->add_option("--out-format", ingest_state.out_format,
                        "csv | jsonl (default: from extension)");
        cmd->callback([&] {
            ManifestWriter manifest("ingest");
            const Corpus corpus =
                ingest(ingest_state.in, format_or_infer(ingest_state.format, ingest_state.in));
            write_corpus(corpus, ensure_parent(ingest_state.out),
                         format_or_infer(ingest_state.out_format, ingest_state.out));
            manifest.input(ingest_state.in);
            manifest.m.config = {{"in", ingest_state.in}, {"out", ingest_state.out}};
            manifest.artifact(ingest_state.out);
            manifest.finish(dir_of(ingest_state.out));
            std::cout << "ingested " << corpus.documents.size() << " documents\n";
        });
    }

    // balance
    struct {
        std::string in, format, out;
        double ratio = 2.0;
        std::uint64_t seed = 42;
    } balance_state;
    {
        auto* cmd = app.add_subcommand("balance", "Downsample the majority class");
        cmd->add_option("--in", balance_state.in, "Input corpus path")->required();
        cmd->add_option("--format", balance_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--ratio", balance_state.ratio, "Negatives kept per positive")
            ->capture_default_str();
        cmd->add_option("--seed", balance_state.seed, "Sampling seed")->capture_default_str();
        cmd->add_option("--out", balance_state.out, "Output corpus path")->required();
        cmd->callback([&] {
            ManifestWriter manifest("balance");
            const Corpus corpus =
                ingest(balance_state.in, format_or_infer(balance_state.format, balance_state.in));
            const Corpus balanced = balance(corpus, balance_state.ratio, balance_state.seed);
            write_corpus(balanced, ensure_parent(balance_state.out),
                         format_or_infer(balance_state.format, balance_state.out));
            manifest.input(balance_state.in);
            manifest.m.config = {{"in", balance_state.in},
                                 {"ratio", balance_state.ratio},
                                 {"out", balance_state.out}};
            manifest.m.seeds = {{"balance", balance_state.seed}};
            manifest.artifact(balance_state.out);
            manifest.finish(dir_of(balance_state.out));
            std::cout << "kept " << balanced.documents.size() << " of " << corpus.documents.size()
                      << " documents\n";
        });
    }

    // augment
    struct {
        std::string in, format, method, out;
        int target = 0;
        std::uint64_t seed = 42;
        int examples_per_class = 5;
        int attempt_budget = 0;
        std::string pivot_lang = "en";
        std::string source_lang = "id";
        GenerationParams params;
        ProviderFlagState provider;
    } augment_state;
    {
        auto* cmd = app.add_subcommand("augment", "Generate one batch of minority-class samples");
        cmd->add_option("--in", augment_state.in, "Input corpus path")->required();
        cmd->add_option("--format", augment_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--method", augment_state.method,
                        "backtranslation | single | dual")
            ->required();
        cmd->add_option("--target", augment_state.target,
                        "Samples to generate (0: match the positive count)")
            ->capture_default_str();
        cmd->add_option("--seed", augment_state.seed, "Example sampling seed")
            ->capture_default_str();
        cmd->add_option("--examples-per-class", augment_state.examples_per_class,
                        "Few-shot examples per class")
            ->capture_default_str();
        cmd->add_option("--attempt-budget", augment_state.attempt_budget,
                        "Generation attempt cap (0: 10x target)")
            ->capture_default_str();
        cmd->add_option("--pivot-lang", augment_state.pivot_lang, "Backtranslation pivot language")
            ->capture_default_str();
        cmd->add_option("--source-lang", augment_state.source_lang, "Corpus language")
            ->capture_default_str();
        add_generation_flags(cmd, augment_state.params);
        add_provider_flags(cmd, augment_state.provider);
        cmd->add_option("--out", augment_state.out, "Output batch path (JSONL)")->required();
        cmd->callback([&] {
            ManifestWriter manifest("augment");
            const Corpus corpus =
                ingest(augment_state.in, format_or_infer(augment_state.format, augment_state.in));
            ProviderSet providers = make_providers(augment_state.provider.resolve());
            const int target = augment_state.target > 0
                                   ? augment_state.target
                                   : static_cast<int>(corpus.count_label(Label::Positive));
            AugmentationBatch batch;
            if (augment_state.method == "backtranslation") {
                batch = backtranslate(positive_documents(corpus), augment_state.pivot_lang,
                                      *providers.translator, augment_state.source_lang);
            } else if (augment_state.method == "single" || augment_state.method == "dual") {
                const PromptMode mode = augment_state.method == "single" ? PromptMode::Single
                                                                         : PromptMode::Dual;
                batch = generate_prompted(corpus, mode, target, augment_state.params,
                                          *providers.chat, augment_state.seed,
                                          augment_state.examples_per_class,
                                          augment_state.attempt_budget);
            } else {
                throw UsageError("unknown augmentation method: \"" + augment_state.method +
                                 "\" (backtranslation|single|dual)");
            }
            write_batch(batch, ensure_parent(augment_state.out));
            manifest.input(augment_state.in);
            manifest.m.config = {{"in", augment_state.in},
                                 {"method", augment_state.method},
                                 {"target", target},
                                 {"out", augment_state.out}};
            manifest.m.seeds = {{"augment", augment_state.seed},
                                {"mock_provider", augment_state.provider.cfg.mock_seed}};
            if (!augment_state.provider.cfg.cache_dir.empty()) {
                manifest.m.cache_digests =
                    ResponseCache(augment_state.provider.cfg.cache_dir, CacheMode::ReadWrite)
                        .digests();
            }
            manifest.artifact(augment_state.out);
            manifest.finish(dir_of(augment_state.out));
            std::cout << "generated " << batch.samples.size() << " samples ("
                      << batch.attempts << " attempts, " << batch.rejected << " rejected)\n";
        });
    }

    // trainval
    struct {
        std::string in, format, out_dir;
        std::vector<std::string> batch_paths;
        std::vector<std::string> models;
        int k = 5;
        std::uint64_t seed = 42;
        std::string cv_mode = "holdout_original";
    } trainval_state;
    {
        auto* cmd = app.add_subcommand(
            "trainval", "Cross-validate every model over the original and augmented configs");
        cmd->add_option("--in", trainval_state.in, "Input corpus path")->required();
        cmd->add_option("--format", trainval_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--batch", trainval_state.batch_paths, "Augmentation batch (repeatable)");
        cmd->add_option("--models", trainval_state.models,
                        "Model subset: logreg naive_bayes random_forest gbt");
        cmd->add_option("--k", trainval_state.k, "Fold count")->capture_default_str();
        cmd->add_option("--seed", trainval_state.seed, "Fold and model seed")
            ->capture_default_str();
        cmd->add_option("--cv-mode", trainval_state.cv_mode, "holdout_original | mixed")
            ->capture_default_str();
        cmd->add_option("--out-dir", trainval_state.out_dir, "Output directory")->required();
        cmd->callback([&] {
            ManifestWriter manifest("trainval");
            const Corpus corpus = ingest(
                trainval_state.in, format_or_infer(trainval_state.format, trainval_state.in));
            manifest.input(trainval_state.in);
            std::vector<AugmentationBatch> batches;
            for (const auto& path : trainval_state.batch_paths) {
                batches.push_back(read_batch(path));
                manifest.input(path);
            }
            const auto specs = specs_from_tokens(trainval_state.models, trainval_state.seed);
            EvalReport report;
            report.cv_mode = parse_cv_mode(trainval_state.cv_mode);
            report.k = trainval_state.k;
            report.seed = trainval_state.seed;
            std::vector<const AugmentationBatch*> configs{nullptr};
            for (const auto& batch : batches) configs.push_back(&batch);
            for (const AugmentationBatch* batch : configs) {
                for (const auto& spec : specs) {
                    report.cells.push_back(cross_validate(corpus, batch, spec, trainval_state.k,
                                                          trainval_state.seed, report.cv_mode));
                }
            }
            fs::create_directories(trainval_state.out_dir);
            const std::string out = trainval_state.out_dir + "/eval_report.json";
            write_json_file(eval_report_json(report), out);
            manifest.m.config = {{"in", trainval_state.in},
                                 {"k", trainval_state.k},
                                 {"cv_mode", trainval_state.cv_mode}};
            manifest.m.seeds = {{"eval", trainval_state.seed}};
            manifest.artifact(out);
            manifest.finish(trainval_state.out_dir);
            std::cout << "evaluated " << report.cells.size() << " dataset x model cells\n";
        });
    }

    // semsim
    struct {
        std::string in, format, out;
        std::vector<std::string> batch_paths;
        ProviderFlagState provider;
    } semsim_state;
    {
        auto* cmd = app.add_subcommand(
            "semsim", "Centroid cosine similarity of each batch to the original positives");
        cmd->add_option("--in", semsim_state.in, "Input corpus path")->required();
        cmd->add_option("--format", semsim_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--batch", semsim_state.batch_paths, "Augmentation batch (repeatable)")
            ->required();
        add_provider_flags(cmd, semsim_state.provider);
        cmd->add_option("--out", semsim_state.out, "Output JSON path")->required();
        cmd->callback([&] {
            ManifestWriter manifest("semsim");
            const Corpus corpus =
                ingest(semsim_state.in, format_or_infer(semsim_state.format, semsim_state.in));
            manifest.input(semsim_state.in);
            ProviderSet providers = make_providers(semsim_state.provider.resolve());
            ProviderEmbedder embedder(*providers.embedder);
            const auto original_positive = positive_documents(corpus);
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& path : semsim_state.batch_paths) {
                const AugmentationBatch batch = read_batch(path);
                manifest.input(path);
                rows.push_back(
                    {{"method", std::string(source_token(batch.source))},
                     {"similarity", semantic_similarity(original_positive, batch, embedder)}});
            }
            write_json_file(rows, ensure_parent(semsim_state.out));
            manifest.m.config = {{"in", semsim_state.in}, {"out", semsim_state.out}};
            manifest.artifact(semsim_state.out);
            manifest.finish(dir_of(semsim_state.out));
            std::cout << "wrote " << rows.size() << " similarity rows\n";
        });
    }

    // project
    struct {
        std::string in, format, out;
        std::vector<std::string> batch_paths;
        std::string features = "embedding";
        double perplexity = 30.0;
        int iterations = 1000;
        std::size_t pca_components = 50;
        std::uint64_t seed = 42;
        ProviderFlagState provider;
    } project_state;
    {
        auto* cmd = app.add_subcommand(
            "project", "t-SNE scatter of the original corpus plus any supplied batches");
        cmd->add_option("--in", project_state.in, "Input corpus path")->required();
        cmd->add_option("--format", project_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--batch", project_state.batch_paths, "Augmentation batch (repeatable)");
        cmd->add_option("--features", project_state.features, "embedding | tfidf")
            ->capture_default_str();
        cmd->add_option("--perplexity", project_state.perplexity, "t-SNE perplexity")
            ->capture_default_str();
        cmd->add_option("--iterations", project_state.iterations, "t-SNE iterations")
            ->capture_default_str();
        cmd->add_option("--pca-components", project_state.pca_components,
                        "Principal components kept in tfidf mode")
            ->capture_default_str();
        cmd->add_option("--seed", project_state.seed, "Projection seed")->capture_default_str();
        add_provider_flags(cmd, project_state.provider);
        cmd->add_option("--out", project_state.out, "Output SVG path")->required();
        cmd->callback([&] {
            ManifestWriter manifest("project");
            const Corpus corpus =
                ingest(project_state.in, format_or_infer(project_state.format, project_state.in));
            manifest.input(project_state.in);
            std::vector<Document> docs = corpus.documents;
            for (const auto& path : project_state.batch_paths) {
                const AugmentationBatch batch = read_batch(path);
                manifest.input(path);
                docs.insert(docs.end(), batch.samples.begin(), batch.samples.end());
            }

            DenseMatrix points;
            if (project_state.features == "embedding") {
                ProviderSet providers = make_providers(project_state.provider.resolve());
                ProviderEmbedder embedder(*providers.embedder);
                const EmbeddingMatrix m = embedder.embed_documents(docs);
                points = DenseMatrix(m.size(), m.dim());
                for (std::size_t i = 0; i < m.size(); ++i) {
                    for (std::size_t j = 0; j < m.dim(); ++j) points.at(i, j) = m.rows[i][j];
                }
            } else if (project_state.features == "tfidf") {
                std::vector<std::vector<std::string>> tokens;
                tokens.reserve(docs.size());
                for (auto& doc : docs) tokens.push_back(tokenize(norm_text_of(doc)));
                const TfidfModel tfidf = TfidfModel::fit(tokens);
                std::vector<SparseVector> X;
                X.reserve(tokens.size());
                for (const auto& t : tokens) X.push_back(tfidf.transform(t));
                const PcaModel pca = pca_fit(X, project_state.pca_components, project_state.seed);
                const auto coords = pca_transform(pca, X);
                points = DenseMatrix(coords.size(), coords.empty() ? 0 : coords[0].size());
                for (std::size_t i = 0; i < coords.size(); ++i) {
                    for (std::size_t j = 0; j < coords[i].size(); ++j) {
                        points.at(i, j) = coords[i][j];
                    }
                }
            } else {
                throw UsageError("unknown feature space: \"" + project_state.features +
                                 "\" (embedding|tfidf)");
            }

            TsneConfig tc;
            tc.perplexity = std::min(project_state.perplexity,
                                     (static_cast<double>(points.n) - 1.0) / 3.0);
            tc.iterations = project_state.iterations;
            Projection2D proj = tsne(points, tc, project_state.seed);
            for (const auto& doc : docs) {
                proj.ids.push_back(doc.id);
                proj.sources.push_back(doc.source);
                proj.labels.push_back(doc.label);
            }
            emit_scatter(proj, ensure_parent(project_state.out));

            manifest.m.config = {{"in", project_state.in},
                                 {"features", project_state.features},
                                 {"perplexity", tc.perplexity},
                                 {"iterations", tc.iterations},
                                 {"out", project_state.out}};
            manifest.m.seeds = {{"projection", project_state.seed}};
            manifest.artifact(project_state.out);
            manifest.finish(dir_of(project_state.out));
            std::cout << "projected " << docs.size() << " documents (final KL "
                      << format_fixed(proj.final_kl, 4) << ")\n";
        });
    }

    // report
    struct {
        std::string corpus_path, format, eval_path, similarity_path, out_dir;
        std::vector<std::string> batch_paths;
        std::vector<std::string> figure_paths;
    } report_state;
    {
        auto* cmd = app.add_subcommand("report", "Assemble the report from persisted artifacts");
        cmd->add_option("--in", report_state.corpus_path,
                        "Corpus path (enables the composition section)");
        cmd->add_option("--format", report_state.format, "csv | jsonl (default: from extension)");
        cmd->add_option("--batch", report_state.batch_paths,
                        "Augmentation batch for composition (repeatable)");
        cmd->add_option("--eval", report_state.eval_path, "eval_report.json from trainval");
        cmd->add_option("--similarity", report_state.similarity_path, "JSON from semsim");
        cmd->add_option("--figure", report_state.figure_paths, "Figure path (repeatable)");
        cmd->add_option("--out-dir", report_state.out_dir, "Output directory")->required();
        cmd->callback([&] {
            ManifestWriter manifest("report");
            ReportInputs inputs;

            CompositionTable table;
            if (!report_state.corpus_path.empty()) {
                Corpus corpus = ingest(
                    report_state.corpus_path,
                    format_or_infer(report_state.format, report_state.corpus_path));
                manifest.input(report_state.corpus_path);
                for (const auto& path : report_state.batch_paths) {
                    const AugmentationBatch batch = read_batch(path);
                    manifest.input(path);
                    corpus.documents.insert(corpus.documents.end(), batch.samples.begin(),
                                            batch.samples.end());
                }
                table = composition(corpus);
                inputs.composition = &table;
            }

            EvalReport eval_report;
            if (!report_state.eval_path.empty()) {
                eval_report = eval_report_from_json(read_json_file(report_state.eval_path));
                manifest.input(report_state.eval_path);
                inputs.eval_report = &eval_report;
            }

            std::vector<SimilarityRow> similarity;
            if (!report_state.similarity_path.empty()) {
                const nlohmann::json rows = read_json_file(report_state.similarity_path);
                manifest.input(report_state.similarity_path);
                try {
                    for (const auto& row : rows) {
                        similarity.push_back({parse_source(row.at("method").get<std::string>()),
                                              row.at("similarity").get<double>()});
                    }
                } catch (const nlohmann::json::exception& e) {
                    throw DataError("malformed similarity file " + report_state.similarity_path +
                                    ": " + e.what());
                }
                inputs.similarity = &similarity;
            }

            std::vector<FigureRef> figures;
            for (const auto& path : report_state.figure_paths) {
                figures.push_back({fs::path(path).stem().string(), path});
            }
            if (!figures.empty()) inputs.figures = &figures;

            fs::create_directories(report_state.out_dir);
            const std::string md = report_state.out_dir + "/report.md";
            const std::string js = report_state.out_dir + "/report.json";
            assemble_report(inputs, md, js);
            manifest.artifact(md);
            manifest.artifact(js);
            manifest.finish(report_state.out_dir);
            std::cout << "wrote " << md << " and " << js << "\n";
        });
    }

    // run-all
    struct {
        PipelineConfig cfg;
        ProviderFlagState provider;
        std::string cv_mode = "holdout_original";
        std::vector<std::string> models;
    } run_state;
    {
        auto* cmd = app.add_subcommand("run-all", "Execute the whole pipeline into one directory");
        cmd->add_option("--corpus", run_state.cfg.corpus_path,
                        "Input corpus path (default: generate the synthetic corpus)");
        cmd->add_option("--format", run_state.cfg.corpus_format,
                        "csv | jsonl (default: from extension)");
        cmd->add_option("--balance-ratio", run_state.cfg.balance_ratio,
                        "Negatives kept per positive (0 disables balancing)")
            ->capture_default_str();
        cmd->add_option("--target", run_state.cfg.target_count,
                        "Samples per method (0: match the positive count)")
            ->capture_default_str();
        add_generation_flags(cmd, run_state.cfg.gen_params);
        cmd->add_option("--models", run_state.models,
                        "Model subset: logreg naive_bayes random_forest gbt");
        cmd->add_option("--k", run_state.cfg.k, "Fold count")->capture_default_str();
        cmd->add_option("--seed", run_state.cfg.seed, "Pipeline seed")->capture_default_str();
        cmd->add_option("--cv-mode", run_state.cv_mode, "holdout_original | mixed")
            ->capture_default_str();
        cmd->add_option("--out-dir", run_state.cfg.out_dir, "Output directory")
            ->capture_default_str();
        add_provider_flags(cmd, run_state.provider);
        cmd->add_option("--features", run_state.cfg.projection_features, "embedding | tfidf")
            ->capture_default_str();
        cmd->add_option("--perplexity", run_state.cfg.perplexity, "t-SNE perplexity")
            ->capture_default_str();
        cmd->add_option("--tsne-iterations", run_state.cfg.tsne_iterations, "t-SNE iterations")
            ->capture_default_str();
        cmd->add_option("--pca-components", run_state.cfg.pca_components,
                        "Principal components kept in tfidf mode")
            ->capture_default_str();
        cmd->add_option("--pivot-lang", run_state.cfg.pivot_lang, "Backtranslation pivot language")
            ->capture_default_str();
        cmd->add_option("--source-lang", run_state.cfg.source_lang, "Corpus language")
            ->capture_default_str();
        cmd->add_option("--synth-negatives", run_state.cfg.synth.n_negative,
                        "Synthetic negative count (when no corpus is given)")
            ->capture_default_str();
        cmd->add_option("--synth-positives", run_state.cfg.synth.n_positive,
                        "Synthetic positive count")
            ->capture_default_str();
        cmd->add_option("--synth-seed", run_state.cfg.synth.seed, "Synthetic corpus seed")
            ->capture_default_str();
        cmd->callback([&] {
            run_state.cfg.provider = run_state.provider.resolve();
            run_state.cfg.cv_mode = parse_cv_mode(run_state.cv_mode);
            run_state.cfg.models = specs_from_tokens(run_state.models, run_state.cfg.seed);
            const RunAllResult result = run_all(run_state.cfg);
            std::cout << "report: " << result.report_md << "\n";
            std::cout << "report: " << result.report_json << "\n";
            for (const auto& fig : result.figures) std::cout << "figure: " << fig << "\n";
        });
    }

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ProviderError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
