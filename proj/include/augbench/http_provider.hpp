#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "augbench/providers.hpp"

namespace augbench {

struct HttpOptions {
    std::string base_url;          // scheme://host[:port]
    std::string path;              // endpoint path, e.g. /v1/chat/completions
    std::string api_key_env;       // env var holding a bearer token; empty = none
    int max_attempts = 3;          // total attempts per call, backoff between them
    int backoff_initial_ms = 1000;
    double requests_per_second = 1.0;
    int max_in_flight = 4;
    int timeout_sec = 60;
    std::string cache_dir;         // empty = no cache
    CacheMode cache_mode = CacheMode::ReadWrite;
};

struct TransportStats {
    std::uint64_t network_calls = 0;   // actual POSTs sent
    std::uint64_t cache_hits = 0;
    std::uint64_t last_call_attempts = 0;
};

// POST-only JSON endpoint with token-bucket rate limiting, bounded retries,
// an in-flight cap, and a content-addressed record/replay cache.
class HttpEndpoint {
public:
    explicit HttpEndpoint(HttpOptions options);
    ~HttpEndpoint();

    HttpEndpoint(const HttpEndpoint&) = delete;
    HttpEndpoint& operator=(const HttpEndpoint&) = delete;

    std::string post_json(ProviderRequest::Kind kind, const std::string& body);
    TransportStats stats() const;
    std::string endpoint_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpOptions options);
    std::string generate(const std::string& prompt, const GenerationParams& params) override;
    HttpEndpoint& endpoint() { return endpoint_; }

private:
    HttpEndpoint endpoint_;
};

class HttpTranslationProvider : public TranslationProvider {
public:
    explicit HttpTranslationProvider(HttpOptions options);
    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;
    HttpEndpoint& endpoint() { return endpoint_; }

private:
    HttpEndpoint endpoint_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpOptions options);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    HttpEndpoint& endpoint() { return endpoint_; }

private:
    HttpEndpoint endpoint_;
    std::size_t session_dim_ = 0;
};

}  // namespace augbench
