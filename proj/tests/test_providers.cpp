#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "augbench/augment.hpp"
#include "augbench/common.hpp"
#include "augbench/http_provider.hpp"
#include "augbench/providers.hpp"
#include "augbench/sha256.hpp"

using namespace augbench;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "augbench-provider-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> tokens_of(const std::string& s) { return split_whitespace(s); }

// Serves all three provider endpoints on a loopback port with per-path hit
// counters, so tests can prove when the network was and was not used.
struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> chat_hits{0};
    std::atomic<int> translate_hits{0};
    std::atomic<int> flaky_hits{0};
    std::atomic<int> reject_hits{0};
    std::atomic<int> embed_hits{0};
    std::string last_auth;
    std::string last_chat_body;

    LocalServer() {
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        ++chat_hits;
                        last_auth = req.get_header_value("Authorization");
                        last_chat_body = req.body;
                        nlohmann::json out{
                            {"choices",
                             {{{"message", {{"content", "balasan tetap dari server"}}}}}}};
                        res.set_content(out.dump(), "application/json");
                    });
        server.Post("/v1/translate", [this](const httplib::Request& req, httplib::Response& res) {
            ++translate_hits;
            nlohmann::json in = nlohmann::json::parse(req.body);
            nlohmann::json out{{"translation", "terjemahan " + in["text"].get<std::string>()}};
            res.set_content(out.dump(), "application/json");
        });
        server.Post("/v1/flaky", [this](const httplib::Request&, httplib::Response& res) {
            ++flaky_hits;
            res.status = 500;
            res.set_content("{}", "application/json");
        });
        server.Post("/v1/reject", [this](const httplib::Request&, httplib::Response& res) {
            ++reject_hits;
            res.status = 400;
            res.set_content("{}", "application/json");
        });
        server.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            int call = ++embed_hits;
            nlohmann::json in = nlohmann::json::parse(req.body);
            std::size_t dim = call == 1 ? 3 : 2;  // second call shrinks the dimension
            nlohmann::json vectors = nlohmann::json::array();
            for (std::size_t i = 0; i < in["texts"].size(); ++i) {
                std::vector<double> v(dim, static_cast<double>(i) + 0.5);
                vectors.push_back(v);
            }
            res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpOptions fast_options(const std::string& base_url, const std::string& path) {
    HttpOptions options;
    options.base_url = base_url;
    options.path = path;
    options.api_key_env.clear();
    options.requests_per_second = 0.0;  // unlimited, tests should not sleep
    options.backoff_initial_ms = 1;
    options.timeout_sec = 5;
    return options;
}

}  // namespace

TEST_CASE("sha256 matches published test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");

    fs::path file = fresh_dir("sha") / "abc.txt";
    std::ofstream(file, std::ios::binary) << "abc";
    CHECK(sha256_file_hex(file.string()) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("request digests are a pure function of endpoint and payload") {
    ProviderRequest req{ProviderRequest::Kind::Chat, "http://host/v1/x", "{\"a\":1}"};
    CHECK(req.digest() == sha256_hex("http://host/v1/x\n{\"a\":1}"));
    ProviderRequest same = req;
    same.kind = ProviderRequest::Kind::Embed;  // kind does not enter the digest
    CHECK(same.digest() == req.digest());
    ProviderRequest other{ProviderRequest::Kind::Chat, "http://host/v1/x", "{\"a\":2}"};
    CHECK(other.digest() != req.digest());
}

TEST_CASE("generation params validate ranges and serialize canonically") {
    GenerationParams params;
    CHECK(params.temperature == 0.25);
    CHECK(params.top_p == 0.4);
    CHECK(params.max_tokens == 120);
    CHECK(params.model_name == "gpt-3.5-turbo");
    params.validate();
    CHECK(params.canonical_json() == GenerationParams{}.canonical_json());

    GenerationParams bad = params;
    bad.temperature = 2.5;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = params;
    bad.top_p = 0.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = params;
    bad.max_tokens = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("mock chat provider samples only the positive example block") {
    std::vector<std::string> negatives{"pagi cerah sekali", "kopi enak pagi", "jalan santai sore",
                                       "buku baru bagus", "meja rapi bersih"};
    std::vector<std::string> positives{"benci kamu semua", "dasar jahat kamu", "bodoh sekali dia",
                                       "culas dan licik", "kasar sekali mulutnya"};
    std::string prompt = build_dual_class_prompt(negatives, positives);

    MockChatProvider provider(7);
    GenerationParams params;
    std::string completion = provider.generate(prompt, params);
    CHECK(completion == provider.generate(prompt, params));

    std::set<std::string> allowed;
    for (const auto& example : positives) {
        for (const auto& tok : tokens_of(example)) allowed.insert(tok);
    }
    std::set<std::string> negative_only{"pagi", "kopi", "jalan", "buku", "meja"};
    auto words = tokens_of(completion);
    CHECK(words.size() >= 6);
    CHECK(words.size() <= 12);
    for (const auto& word : words) {
        CHECK(allowed.count(word) == 1);
        CHECK(negative_only.count(word) == 0);
    }

    // different seeds diverge on the same prompt
    MockChatProvider other(8);
    CHECK(other.generate(prompt, params) != completion);

    CHECK_THROWS_AS(provider.generate("", params), DataError);
    CHECK(provider.generate("tidak ada blok header di sini", params) != "");
}

TEST_CASE("mock translator perturbs surface form but keeps the bag of words") {
    MockTranslationProvider::Options opts;
    opts.seed = 3;
    opts.rotate = true;
    opts.substitutions = {{"tidak", "tak"}};
    MockTranslationProvider translator(opts);

    std::string out = translator.translate("aku tidak suka kamu", "id", "en");
    CHECK(out == translator.translate("aku tidak suka kamu", "id", "en"));
    auto got = tokens_of(out);
    std::vector<std::string> want{"aku", "tak", "suka", "kamu"};
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    CHECK(out != "aku tak suka kamu");  // rotation moved something

    // single-token input cannot rotate
    CHECK(translator.translate("tidak", "id", "en") == "tak");

    MockTranslationProvider id_translator = MockTranslationProvider::identity();
    CHECK(id_translator.translate("aku tidak suka kamu", "id", "en") == "aku tidak suka kamu");

    CHECK_THROWS_AS(translator.translate("", "id", "en"), DataError);
    CHECK_THROWS_AS(translator.translate("halo", "id", "id"), DataError);
}

TEST_CASE("mock embedder is a hand-computable hashed bag of words") {
    const std::size_t dim = 16;
    MockEmbeddingProvider provider(dim);
    auto out = provider.embed({"a b a", "c"});
    REQUIRE(out.size() == 2);
    REQUIRE(out[0].dimension() == dim);

    // independent recomputation straight from the declared formula
    auto fnv = [](std::string_view s) {
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    };
    std::vector<double> expected(dim, 0.0);
    expected[fnv("a") % dim] += 2.0 / 3.0;
    expected[fnv("b") % dim] += 1.0 / 3.0;
    for (std::size_t i = 0; i < dim; ++i) {
        CHECK(std::abs(out[0].values[i] - expected[i]) <= 1e-12);
    }
    double sum = 0.0;
    for (double v : out[0].values) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    out[0].check_finite();

    CHECK_THROWS_AS(provider.embed({}), DataError);
    CHECK_THROWS_AS(provider.embed({""}), DataError);
}

TEST_CASE("response cache honours its mode and lists digests in order") {
    fs::path dir = fresh_dir("cache-modes");
    ProviderRequest req{ProviderRequest::Kind::Chat, "http://x/y", "{\"q\":1}"};
    std::string digest = req.digest();

    ResponseCache record(dir.string(), CacheMode::Record);
    CHECK_FALSE(record.lookup(digest).has_value());
    record.store(req, digest, "jawaban");
    CHECK_FALSE(record.lookup(digest).has_value());  // record mode never reads

    ResponseCache replay(dir.string(), CacheMode::Replay);
    auto hit = replay.lookup(digest);
    REQUIRE(hit.has_value());
    CHECK(*hit == "jawaban");
    ProviderRequest other{ProviderRequest::Kind::Chat, "http://x/y", "{\"q\":2}"};
    replay.store(other, other.digest(), "z");  // replay mode never writes
    CHECK_FALSE(replay.lookup(other.digest()).has_value());

    ResponseCache rw(dir.string(), CacheMode::ReadWrite);
    rw.store(other, other.digest(), "z");
    CHECK(rw.lookup(other.digest()).value() == "z");

    auto digests = rw.digests();
    REQUIRE(digests.size() == 2);
    CHECK(digests[0] < digests[1]);

    ResponseCache off(dir.string(), CacheMode::Off);
    CHECK_FALSE(off.lookup(digest).has_value());

    CHECK(parse_cache_mode("off") == CacheMode::Off);
    CHECK(parse_cache_mode("record") == CacheMode::Record);
    CHECK(parse_cache_mode("replay") == CacheMode::Replay);
    CHECK(parse_cache_mode("readwrite") == CacheMode::ReadWrite);
    CHECK(parse_cache_mode("auto") == CacheMode::ReadWrite);
    CHECK_THROWS_AS(parse_cache_mode("maybe"), UsageError);
}

TEST_CASE("http chat provider records, replays and never re-sends cached calls") {
    LocalServer server;
    fs::path cache_dir = fresh_dir("cache-http");

    HttpOptions options = fast_options(server.base_url(), "/v1/chat/completions");
    options.cache_dir = cache_dir.string();
    options.cache_mode = CacheMode::ReadWrite;

    GenerationParams params;
    std::string first, second;
    {
        HttpChatProvider provider(options);
        first = provider.generate("prompt pertama", params);
        second = provider.generate("prompt pertama", params);
        CHECK(first == "balasan tetap dari server");
        CHECK(second == first);
        CHECK(server.chat_hits.load() == 1);
        CHECK(provider.endpoint().stats().network_calls == 1);
        CHECK(provider.endpoint().stats().cache_hits == 1);
        CHECK(provider.endpoint().stats().last_call_attempts == 0);

        // the outbound body carries the generation parameters
        nlohmann::json body = nlohmann::json::parse(server.last_chat_body);
        CHECK(body["model"] == "gpt-3.5-turbo");
        CHECK(body["messages"][0]["content"] == "prompt pertama");
    }

    // replay answers from the cache alone; the server-side counter proves
    // nothing went over the wire (the digest includes the URL, so it stays)
    HttpOptions replay = fast_options(server.base_url(), "/v1/chat/completions");
    replay.cache_dir = cache_dir.string();
    replay.cache_mode = CacheMode::Replay;
    {
        HttpChatProvider provider(replay);
        CHECK(provider.generate("prompt pertama", params) == first);
        CHECK(provider.endpoint().stats().network_calls == 0);
        CHECK(provider.endpoint().stats().cache_hits == 1);
        CHECK(server.chat_hits.load() == 1);

        CHECK_THROWS_AS(provider.generate("prompt lain", params), ProviderError);
        CHECK(server.chat_hits.load() == 1);
    }
}

TEST_CASE("http retry stops at the attempt budget and skips client errors") {
    LocalServer server;

    HttpOptions flaky = fast_options(server.base_url(), "/v1/flaky");
    flaky.max_attempts = 3;
    {
        HttpTranslationProvider provider(flaky);
        try {
            provider.translate("halo dunia", "id", "en");
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(std::string(e.what()).find("after 3 attempts") != std::string::npos);
        }
        CHECK(server.flaky_hits.load() == 3);
        CHECK(provider.endpoint().stats().network_calls == 0);
    }

    HttpOptions reject = fast_options(server.base_url(), "/v1/reject");
    reject.max_attempts = 5;
    {
        HttpTranslationProvider provider(reject);
        CHECK_THROWS_AS(provider.translate("halo dunia", "id", "en"), ProviderError);
        CHECK(server.reject_hits.load() == 1);  // 400 is not retryable
    }
}

TEST_CASE("http translate and embed parse their documented response shapes") {
    LocalServer server;

    HttpTranslationProvider translator(fast_options(server.base_url(), "/v1/translate"));
    CHECK(translator.translate("apa kabar", "id", "en") == "terjemahan apa kabar");

    HttpEmbeddingProvider embedder(fast_options(server.base_url(), "/v1/embeddings"));
    auto vectors = embedder.embed({"satu", "dua"});
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0].dimension() == 3);
    CHECK(vectors[1].values[0] == 1.5);

    // the session dimension is pinned by the first response
    CHECK_THROWS_AS(embedder.embed({"tiga"}), ProviderError);
}

TEST_CASE("http providers attach the bearer token from the configured env var") {
    LocalServer server;
    setenv("AUGBENCH_TEST_KEY", "test-key-123", 1);
    HttpOptions options = fast_options(server.base_url(), "/v1/chat/completions");
    options.api_key_env = "AUGBENCH_TEST_KEY";
    HttpChatProvider provider(options);
    provider.generate("cek header", GenerationParams{});
    CHECK(server.last_auth == "Bearer test-key-123");
    unsetenv("AUGBENCH_TEST_KEY");
}
