#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augbench/corpus.hpp"

namespace augbench {

struct GenerationParams {
    double temperature = 0.25;
    double top_p = 0.4;
    int max_tokens = 120;
    std::string model_name = "gpt-3.5-turbo";

    void validate() const;  // temperature in [0,2], top_p in (0,1], max_tokens >= 1
    std::string canonical_json() const;
};

struct ProviderRequest {
    enum class Kind { Chat, Translate, Embed };
    Kind kind;
    std::string endpoint;
    std::string payload;  // canonical serialization

    // Pure function of (endpoint, payload).
    std::string digest() const;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
    void check_finite() const;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    // Completion text, trimmed. Prompt must be nonempty.
    virtual std::string generate(const std::string& prompt, const GenerationParams& params) = 0;
};

class TranslationProvider {
public:
    virtual ~TranslationProvider() = default;
    virtual std::string translate(const std::string& text, const std::string& source_lang,
                                  const std::string& target_lang) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One vector per input, order preserving, constant dimension per session.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

// Seeded template filler: samples tokens from the positive-class example block
// of the prompt (the lines after the last 'hate speech towards gender' header)
// and assembles a short sentence. Pure function of (seed, prompt).
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::uint64_t seed) : seed_(seed) {}
    std::string generate(const std::string& prompt, const GenerationParams& params) override;

private:
    std::uint64_t seed_;
};

// Deterministic translator. With an empty substitution table and rotation off
// it is the identity. The default perturbing configuration substitutes tokens
// through the table and rotates token order by a text-dependent shift, which
// keeps the bag of words nearly intact while changing surface form.
class MockTranslationProvider : public TranslationProvider {
public:
    struct Options {
        std::uint64_t seed = 0;
        bool rotate = true;
        std::unordered_map<std::string, std::string> substitutions;
    };

    MockTranslationProvider() = default;
    explicit MockTranslationProvider(Options opts) : opts_(std::move(opts)) {}
    static MockTranslationProvider identity() {
        return MockTranslationProvider(Options{0, false, {}});
    }

    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;

private:
    Options opts_;
};

// Hashed bag-of-words with mean pooling: each whitespace token adds 1 to
// component fnv1a64(token) % dim, and the vector is divided by the token
// count. Deterministic and documented so tests can recompute it by hand.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::size_t dim = 16) : dim_(dim) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    std::size_t dim_;
};

enum class CacheMode { Off, Record, Replay, ReadWrite };

CacheMode parse_cache_mode(std::string_view s);

// One file per digest under a directory; entries are written to a temp file
// and renamed into place so concurrent readers never see partial entries.
class ResponseCache {
public:
    ResponseCache(std::string dir, CacheMode mode);

    CacheMode mode() const { return mode_; }
    std::optional<std::string> lookup(const std::string& digest) const;
    void store(const ProviderRequest& request, const std::string& digest,
               const std::string& response) const;
    std::vector<std::string> digests() const;

private:
    std::string dir_;
    CacheMode mode_;
};

}  // namespace augbench
