#include "augbench/providers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "augbench/common.hpp"
#include "augbench/sha256.hpp"

namespace fs = std::filesystem;

namespace augbench {

void GenerationParams::validate() const {
    if (temperature < 0.0 || temperature > 2.0) throw UsageError("temperature must be in [0, 2]");
    if (top_p <= 0.0 || top_p > 1.0) throw UsageError("top_p must be in (0, 1]");
    if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
}

std::string GenerationParams::canonical_json() const {
    // std::map ordering inside nlohmann keeps this byte-stable.
    nlohmann::json j{{"max_tokens", max_tokens},
                     {"model_name", model_name},
                     {"temperature", temperature},
                     {"top_p", top_p}};
    return j.dump();
}

std::string ProviderRequest::digest() const {
    return sha256_hex(endpoint + "\n" + payload);
}

void EmbeddingVector::check_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) throw ProviderError("embedding vector contains a non-finite entry");
    }
}

namespace {

constexpr std::string_view kPositiveHeader =
    "The following tweets belong to the category of 'hate speech towards gender':";
constexpr std::string_view kGenerateCue = "Please generate";

std::vector<std::string> positive_block_tokens(const std::string& prompt) {
    const std::size_t header = prompt.rfind(kPositiveHeader);
    std::vector<std::string> tokens;
    std::string_view region;
    if (header == std::string::npos) {
        region = prompt;
    } else {
        std::size_t begin = header + kPositiveHeader.size();
        std::size_t end = prompt.find(kGenerateCue, begin);
        if (end == std::string::npos) end = prompt.size();
        region = std::string_view(prompt).substr(begin, end - begin);
    }
    std::istringstream lines{std::string(region)};
    std::string line;
    while (std::getline(lines, line)) {
        std::string_view sv = line;
        // strip a leading "N. " list marker
        std::size_t p = 0;
        while (p < sv.size() && sv[p] >= '0' && sv[p] <= '9') ++p;
        if (p > 0 && p + 1 < sv.size() && sv[p] == '.' && sv[p + 1] == ' ') sv.remove_prefix(p + 2);
        for (auto& tok : split_whitespace(sv)) tokens.push_back(std::move(tok));
    }
    return tokens;
}

}  // namespace

std::string MockChatProvider::generate(const std::string& prompt, const GenerationParams& params) {
    if (prompt.empty()) throw DataError("chat_generate: prompt must be nonempty");
    params.validate();
    const auto pool = positive_block_tokens(prompt);
    Rng rng = Rng(seed_).derive(fnv1a64(prompt));
    if (pool.empty()) return "kosong";
    const std::size_t len = 6 + static_cast<std::size_t>(rng.next_below(7));
    std::vector<std::string> words;
    words.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        words.push_back(pool[static_cast<std::size_t>(rng.next_below(pool.size()))]);
    }
    return join(words, " ");
}

std::string MockTranslationProvider::translate(const std::string& text,
                                               const std::string& source_lang,
                                               const std::string& target_lang) {
    if (text.empty()) throw DataError("translate: text must be nonempty");
    if (source_lang == target_lang) throw DataError("translate: source and target language are equal");
    auto tokens = split_whitespace(text);
    for (auto& tok : tokens) {
        auto it = opts_.substitutions.find(tok);
        if (it != opts_.substitutions.end()) tok = it->second;
    }
    if (opts_.rotate && tokens.size() >= 2) {
        const std::uint64_t h = fnv1a64(text) ^ (opts_.seed * 0x9E3779B97F4A7C15ull);
        const std::size_t shift = 1 + static_cast<std::size_t>(h % std::min<std::uint64_t>(3, tokens.size() - 1));
        std::rotate(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(shift), tokens.end());
    }
    return join(tokens, " ");
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw DataError("embed: text list must be nonempty");
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        if (text.empty()) throw DataError("embed: empty string in input list");
        const auto tokens = split_whitespace(text);
        EmbeddingVector v;
        v.values.assign(dim_, 0.0);
        for (const auto& tok : tokens) {
            v.values[fnv1a64(tok) % dim_] += 1.0;
        }
        if (!tokens.empty()) {
            for (double& x : v.values) x /= static_cast<double>(tokens.size());
        }
        out.push_back(std::move(v));
    }
    return out;
}

CacheMode parse_cache_mode(std::string_view s) {
    if (s == "off") return CacheMode::Off;
    if (s == "record") return CacheMode::Record;
    if (s == "replay") return CacheMode::Replay;
    if (s == "readwrite" || s == "auto") return CacheMode::ReadWrite;
    throw UsageError("unknown cache mode: \"" + std::string(s) + "\" (off|record|replay|readwrite)");
}

ResponseCache::ResponseCache(std::string dir, CacheMode mode) : dir_(std::move(dir)), mode_(mode) {
    if (mode_ != CacheMode::Off) fs::create_directories(dir_);
}

std::optional<std::string> ResponseCache::lookup(const std::string& digest) const {
    if (mode_ == CacheMode::Off || mode_ == CacheMode::Record) return std::nullopt;
    const fs::path path = fs::path(dir_) / (digest + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
        return j.at("response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError("corrupt cache entry " + path.string() + ": " + e.what());
    }
}

void ResponseCache::store(const ProviderRequest& request, const std::string& digest,
                          const std::string& response) const {
    if (mode_ == CacheMode::Off || mode_ == CacheMode::Replay) return;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    nlohmann::json j{
        {"kind", request.kind == ProviderRequest::Kind::Chat        ? "chat"
                 : request.kind == ProviderRequest::Kind::Translate ? "translate"
                                                                    : "embed"},
        {"endpoint", request.endpoint},
        {"payload", request.payload},
        {"response", response},
        {"created_at", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
    const fs::path path = fs::path(dir_) / (digest + ".json");
    const fs::path tmp = fs::path(dir_) / (digest + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ProviderError("cannot write cache entry: " + tmp.string());
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

std::vector<std::string> ResponseCache::digests() const {
    std::vector<std::string> out;
    if (mode_ == CacheMode::Off || !fs::exists(dir_)) return out;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace augbench
