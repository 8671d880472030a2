#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "augbench/eval.hpp"
#include "augbench/http_provider.hpp"
#include "augbench/providers.hpp"
#include "augbench/synth.hpp"

namespace augbench {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct ProviderConfig {
    std::string mode = "mock";  // mock | http
    std::uint64_t mock_seed = 7;
    std::size_t mock_embed_dim = 32;
    std::string chat_base_url;
    std::string chat_path = "/v1/chat/completions";
    std::string translate_base_url;
    std::string translate_path = "/v1/translate";
    std::string embed_base_url;
    std::string embed_path = "/v1/embeddings";
    std::string api_key_env = "AUGBENCH_API_KEY";
    std::string cache_dir;
    CacheMode cache_mode = CacheMode::ReadWrite;
    double requests_per_second = 1.0;
    int max_attempts = 3;
    int backoff_initial_ms = 1000;
    int max_in_flight = 4;

    void validate() const;
};

struct ProviderSet {
    std::unique_ptr<ChatProvider> chat;
    std::unique_ptr<TranslationProvider> translator;
    std::unique_ptr<EmbeddingProvider> embedder;
};

ProviderSet make_providers(const ProviderConfig& config);

struct PipelineConfig {
    std::string corpus_path;     // empty: generate the synthetic corpus
    std::string corpus_format;   // csv | jsonl; empty: infer from extension
    double balance_ratio = 2.0;  // negatives kept per positive; 0 disables
    int target_count = 0;        // generated samples per method; 0: match positives
    GenerationParams gen_params;
    std::vector<ClassifierSpec> models;  // empty: all four defaults
    int k = 5;
    std::uint64_t seed = 42;
    CvMode cv_mode = CvMode::HoldoutOriginal;
    std::string out_dir = "out";
    ProviderConfig provider;
    std::string projection_features = "embedding";  // embedding | tfidf
    double perplexity = 30.0;
    int tsne_iterations = 1000;
    std::size_t pca_components = 50;
    std::string pivot_lang = "en";
    std::string source_lang = "id";
    SynthConfig synth;

    void validate() const;
};

std::vector<ClassifierSpec> default_model_specs(std::uint64_t seed);

nlohmann::json pipeline_config_json(const PipelineConfig& config);

struct RunAllResult {
    std::string report_md;
    std::string report_json;
    std::vector<std::string> figures;
};

// ingest -> balance -> three augmentations -> cross-validated training over
// the four dataset configurations -> semantic similarity -> projection
// figures -> assembled report plus manifest, everything under out_dir. Stage
// failures are rethrown with the stage name prefixed, keeping their type and
// exit code.
RunAllResult run_all(const PipelineConfig& config);

}  // namespace augbench
