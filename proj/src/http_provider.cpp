#include "augbench/http_provider.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "augbench/common.hpp"

namespace augbench {

using nlohmann::json;

namespace {

// Token bucket: capacity one burst-second worth of tokens, refilled continuously.
class RateLimiter {
public:
    explicit RateLimiter(double per_second)
        : per_second_(per_second > 0.0 ? per_second : 0.0),
          tokens_(per_second_ > 0.0 ? 1.0 : 0.0),
          last_(std::chrono::steady_clock::now()) {}

    void acquire() {
        if (per_second_ <= 0.0) return;  // unlimited
        std::unique_lock<std::mutex> lock(mu_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            double deficit = 1.0 - tokens_;
            auto wait = std::chrono::duration<double>(deficit / per_second_);
            cv_.wait_for(lock, wait);
        }
    }

private:
    void refill() {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(1.0, tokens_ + elapsed * per_second_);
    }

    double per_second_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
    std::condition_variable cv_;
};

class InFlightGate {
public:
    explicit InFlightGate(int limit) : limit_(limit > 0 ? limit : 1) {}

    void enter() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [this] { return active_ < limit_; });
        ++active_;
    }

    void leave() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    int limit_;
    int active_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

std::string kind_token(ProviderRequest::Kind kind) {
    switch (kind) {
        case ProviderRequest::Kind::Chat: return "chat";
        case ProviderRequest::Kind::Translate: return "translate";
        case ProviderRequest::Kind::Embed: return "embed";
    }
    return "unknown";
}

}  // namespace

struct HttpEndpoint::Impl {
    HttpOptions options;
    RateLimiter limiter;
    InFlightGate gate;
    std::optional<ResponseCache> cache;
    std::string bearer;
    mutable std::mutex stats_mu;
    TransportStats stats;

    explicit Impl(HttpOptions opts)
        : options(std::move(opts)),
          limiter(options.requests_per_second),
          gate(options.max_in_flight) {
        if (!options.cache_dir.empty() && options.cache_mode != CacheMode::Off) {
            cache.emplace(options.cache_dir, options.cache_mode);
        }
        if (!options.api_key_env.empty()) {
            if (const char* v = std::getenv(options.api_key_env.c_str())) bearer = v;
        }
    }

    std::string url() const { return options.base_url + options.path; }

    std::string send(ProviderRequest::Kind kind, const std::string& body) {
        ProviderRequest req{kind, url(), body};
        const std::string digest = req.digest();

        if (cache && options.cache_mode != CacheMode::Record) {
            if (auto hit = cache->lookup(digest)) {
                std::lock_guard<std::mutex> lock(stats_mu);
                ++stats.cache_hits;
                stats.last_call_attempts = 0;
                return *hit;
            }
            if (options.cache_mode == CacheMode::Replay) {
                throw ProviderError("replay cache miss for " + kind_token(kind) +
                                    " request digest " + digest);
            }
        }

        gate.enter();
        std::string response;
        std::uint64_t attempts = 0;
        try {
            response = post_with_retry(body, attempts);
        } catch (...) {
            gate.leave();
            throw;
        }
        gate.leave();

        {
            std::lock_guard<std::mutex> lock(stats_mu);
            ++stats.network_calls;
            stats.last_call_attempts = attempts;
        }
        if (cache && options.cache_mode != CacheMode::Replay) {
            cache->store(req, digest, response);
        }
        return response;
    }

    std::string post_with_retry(const std::string& body, std::uint64_t& attempts) {
        httplib::Client client(options.base_url);
        client.set_connection_timeout(options.timeout_sec, 0);
        client.set_read_timeout(options.timeout_sec, 0);

        httplib::Headers headers;
        if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);

        std::string last_error;
        int backoff_ms = options.backoff_initial_ms;
        int max_attempts = std::max(1, options.max_attempts);
        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            ++attempts;
            limiter.acquire();
            auto res = client.Post(options.path, headers, body, "application/json");
            if (res && res->status == 200) return res->body;

            if (!res) {
                last_error = "transport error (" + httplib::to_string(res.error()) + ")";
            } else {
                last_error = "HTTP " + std::to_string(res->status);
                if (!retryable_status(res->status)) {
                    throw ProviderError("request to " + url() + " failed: " + last_error);
                }
            }
            if (attempt < max_attempts) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
        }
        throw ProviderError("request to " + url() + " failed after " +
                            std::to_string(max_attempts) + " attempts: " + last_error);
    }
};

HttpEndpoint::HttpEndpoint(HttpOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

HttpEndpoint::~HttpEndpoint() = default;

std::string HttpEndpoint::post_json(ProviderRequest::Kind kind, const std::string& body) {
    return impl_->send(kind, body);
}

TransportStats HttpEndpoint::stats() const {
    std::lock_guard<std::mutex> lock(impl_->stats_mu);
    return impl_->stats;
}

std::string HttpEndpoint::endpoint_url() const { return impl_->url(); }

HttpChatProvider::HttpChatProvider(HttpOptions options) : endpoint_(std::move(options)) {}

std::string HttpChatProvider::generate(const std::string& prompt, const GenerationParams& params) {
    params.validate();
    json body = {
        {"model", params.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"top_p", params.top_p},
        {"max_tokens", params.max_tokens},
    };
    std::string raw = endpoint_.post_json(ProviderRequest::Kind::Chat, body.dump());
    json parsed;
    try {
        parsed = json::parse(raw);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("chat response is not valid JSON: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
        throw ProviderError("chat response has no choices");
    }
    const json& msg = parsed["choices"][0];
    if (!msg.contains("message") || !msg["message"].contains("content") ||
        !msg["message"]["content"].is_string()) {
        throw ProviderError("chat response choice has no message content");
    }
    return msg["message"]["content"].get<std::string>();
}

HttpTranslationProvider::HttpTranslationProvider(HttpOptions options)
    : endpoint_(std::move(options)) {}

std::string HttpTranslationProvider::translate(const std::string& text,
                                               const std::string& source_lang,
                                               const std::string& target_lang) {
    if (text.empty()) throw ProviderError("translate: empty text");
    if (source_lang == target_lang) throw ProviderError("translate: source equals target");
    json body = {{"text", text}, {"source", source_lang}, {"target", target_lang}};
    std::string raw = endpoint_.post_json(ProviderRequest::Kind::Translate, body.dump());
    json parsed;
    try {
        parsed = json::parse(raw);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("translate response is not valid JSON: ") + e.what());
    }
    if (!parsed.contains("translation") || !parsed["translation"].is_string()) {
        throw ProviderError("translate response has no translation field");
    }
    return parsed["translation"].get<std::string>();
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpOptions options) : endpoint_(std::move(options)) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    json body = {{"texts", texts}};
    std::string raw = endpoint_.post_json(ProviderRequest::Kind::Embed, body.dump());
    json parsed;
    try {
        parsed = json::parse(raw);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("embed response is not valid JSON: ") + e.what());
    }
    if (!parsed.contains("vectors") || !parsed["vectors"].is_array()) {
        throw ProviderError("embed response has no vectors array");
    }
    const json& vecs = parsed["vectors"];
    if (vecs.size() != texts.size()) {
        throw ProviderError("embed response count mismatch: asked " +
                            std::to_string(texts.size()) + ", got " +
                            std::to_string(vecs.size()));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(vecs.size());
    for (const json& v : vecs) {
        if (!v.is_array()) throw ProviderError("embed response vector is not an array");
        EmbeddingVector e;
        e.values.reserve(v.size());
        for (const json& x : v) {
            if (!x.is_number()) throw ProviderError("embed response vector has non-numeric entry");
            e.values.push_back(x.get<double>());
        }
        e.check_finite();
        if (session_dim_ == 0) session_dim_ = e.values.size();
        if (e.values.size() != session_dim_) {
            throw ProviderError("embed response dimension changed mid-session: expected " +
                                std::to_string(session_dim_) + ", got " +
                                std::to_string(e.values.size()));
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace augbench
