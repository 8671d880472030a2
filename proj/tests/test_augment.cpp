#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "augbench/augment.hpp"
#include "augbench/common.hpp"
#include "augbench/corpus.hpp"
#include "augbench/providers.hpp"
#include "augbench/sha256.hpp"

using namespace augbench;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path data_dir() { return fs::path(AUGBENCH_TEST_DATA_DIR); }

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "augbench-augment-tests";
    fs::create_directories(dir);
    return dir;
}

Document doc(std::string id, std::string text, Label label) {
    Document d;
    d.id = std::move(id);
    d.raw_text = std::move(text);
    d.label = label;
    return d;
}

// Ten-plus documents per class so example sampling always has room.
Corpus prompt_corpus() {
    static const char* neg[] = {"pagi yang cerah sekali hari ini",
                                "kopi hitam tanpa gula favoritku",
                                "jalan sore menyusuri taman kota",
                                "buku baru dari penulis kesukaanku",
                                "meja kerja rapi membuat senang",
                                "hujan deras membasahi jalan pulang"};
    static const char* pos[] = {"dasar perempuan tidak becus kerjanya",
                                "laki laki lemah tidak berguna sama sekali",
                                "perempuan kok berani bicara begitu",
                                "jangan percaya omongan perempuan itu",
                                "perempuan seperti itu memang jahat sekali",
                                "mulut kasar perempuan itu memalukan"};
    Corpus corpus;
    corpus.name = "prompt-fixture";
    char id[16];
    for (int i = 0; i < 6; ++i) {
        std::snprintf(id, sizeof(id), "neg-%02d", i);
        corpus.documents.push_back(doc(id, neg[i], Label::Negative));
        std::snprintf(id, sizeof(id), "pos-%02d", i);
        corpus.documents.push_back(doc(id, pos[i], Label::Positive));
    }
    return corpus;
}

std::string spaced_tokens(int n, int offset = 0) {
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) words.push_back("kata" + std::to_string(i + offset));
    return join(words, " ");
}

}  // namespace

TEST_CASE("dual-class prompt matches the golden template byte for byte") {
    std::vector<std::string> negatives{"{example1}", "{example2}", "{example3}", "{example4}",
                                       "{example5}"};
    std::vector<std::string> positives = negatives;
    std::string prompt = build_dual_class_prompt(negatives, positives);
    std::string golden = read_file(data_dir() / "dual_prompt_golden.txt");
    CHECK(prompt == golden);

    // structural anchors, so a regression pinpoints what moved
    CHECK(prompt.find("the category of 'non-hate speech towards gender':") != std::string::npos);
    CHECK(prompt.find("the category of 'hate speech towards gender':") != std::string::npos);
    CHECK(prompt.find("1. {example1}") != std::string::npos);
    CHECK(prompt.find("5. {example5}") != std::string::npos);
    CHECK(prompt.find("Generate the tweet in Indonesian language.") != std::string::npos);
    CHECK(prompt.rfind("Generated tweet:") == prompt.size() - std::string("Generated tweet:").size());
}

TEST_CASE("single-class prompt renders the positive block only") {
    std::string prompt = build_single_class_prompt({"contoh satu", "contoh dua"});
    CHECK(prompt.find("non-hate speech") == std::string::npos);
    CHECK(prompt.find("'hate speech towards gender':") != std::string::npos);
    CHECK(prompt.find("1. contoh satu\n2. contoh dua\n") != std::string::npos);
    CHECK(prompt.find("Generated tweet:") != std::string::npos);

    CHECK_THROWS_AS(build_single_class_prompt({}), UsageError);
    CHECK_THROWS_AS(build_single_class_prompt({"ok", "  "}), UsageError);
    CHECK_THROWS_AS(build_dual_class_prompt({"a", "b", "c", "d"},
                                            {"a", "b", "c", "d", "e"}),
                    UsageError);
}

TEST_CASE("generated completions are unwrapped before validation") {
    CHECK(parse_generated_text("Generated tweet: kalimat baru") == "kalimat baru");
    CHECK(parse_generated_text("\"dalam tanda kutip\"") == "dalam tanda kutip");
    CHECK(parse_generated_text("  berspasi  ") == "berspasi");
    CHECK(parse_generated_text("Generated tweet: \"keduanya sekaligus\"") ==
          "keduanya sekaligus");
    CHECK(parse_generated_text("tanpa hiasan") == "tanpa hiasan");
}

TEST_CASE("candidate validation enforces the documented rejection rules") {
    Corpus corpus = prompt_corpus();
    std::vector<std::string> accepted;

    CHECK(validate_generated("kalimat baru yang cukup panjang", corpus, accepted).accepted);

    ValidationResult r = validate_generated("!!! --- ...", corpus, accepted);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "empty after normalization");

    r = validate_generated("dua kata", corpus, accepted);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "too short (2 tokens)");

    r = validate_generated(spaced_tokens(101), corpus, accepted);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "too long (101 tokens)");

    // boundary lengths pass
    CHECK(validate_generated("tiga kata cukup", corpus, accepted).accepted);
    CHECK(validate_generated(spaced_tokens(100), corpus, accepted).accepted);

    // duplicates are matched on normalized text
    r = validate_generated("PAGI yang cerah sekali, hari ini!", corpus, accepted);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "exact duplicate");

    accepted.push_back("kalimat baru yang cukup panjang");
    r = validate_generated("kalimat baru yang cukup panjang", corpus, accepted);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "exact duplicate");

    // 22 distinct alphabetic tokens (stable under normalization), last one
    // swapped: trigram Jaccard 19/21 > 0.9
    auto letter_tokens = [](const char* last) {
        std::string out;
        for (int i = 0; i < 21; ++i) {
            out += std::string("t") + static_cast<char>('a' + i) + " ";
        }
        return out + last;
    };
    std::string base = letter_tokens("tv");
    std::string near = letter_tokens("lain");
    accepted = {base};
    r = validate_generated(near, corpus, accepted);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "near duplicate (trigram Jaccard > 0.9)");
}

TEST_CASE("token trigram jaccard hand values") {
    CHECK(token_trigram_jaccard("a b c d", "a b c d") == 1.0);
    CHECK(token_trigram_jaccard("a b c d", "w x y z") == 0.0);
    CHECK(token_trigram_jaccard("a b", "a b") == 0.0);  // fewer than three tokens

    // 22 tokens vs the same with the last replaced: 19 shared of 21 distinct
    std::string base = spaced_tokens(22);
    std::string near = spaced_tokens(21) + " lain";
    double j = token_trigram_jaccard(base, near);
    CHECK(std::abs(j - 19.0 / 21.0) <= 1e-12);

    // half-overlapping windows
    CHECK(std::abs(token_trigram_jaccard("a b c d", "b c d e") - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("prompted generation fills the target with validated samples") {
    Corpus corpus = prompt_corpus();
    MockChatProvider provider(7);
    GenerationParams params;

    AugmentationBatch dual = generate_prompted(corpus, PromptMode::Dual, 8, params, provider, 42);
    CHECK(dual.source == Source::DualClassGen);
    REQUIRE(dual.samples.size() == 8);
    REQUIRE(dual.provenance.size() == 8);
    CHECK(dual.attempts >= 8);
    CHECK(dual.rejected == dual.attempts - 8);
    CHECK(dual.params_digest.empty());
    CHECK(dual.digest_or_compute() == sha256_hex(params.canonical_json()));

    std::set<std::string> ids;
    std::set<std::string> corpus_ids;
    for (const auto& d : corpus.documents) corpus_ids.insert(d.id);
    for (std::size_t i = 0; i < dual.samples.size(); ++i) {
        const Document& d = dual.samples[i];
        CHECK(d.label == Label::Positive);
        CHECK(d.source == Source::DualClassGen);
        CHECK(d.id.rfind("dual-", 0) == 0);
        ids.insert(d.id);
        // five negative and five positive example ids, negatives first
        REQUIRE(dual.provenance[i].size() == 10);
        for (const auto& src_id : dual.provenance[i]) CHECK(corpus_ids.count(src_id) == 1);
        CHECK(dual.provenance[i][0].rfind("neg-", 0) == 0);
        CHECK(dual.provenance[i][9].rfind("pos-", 0) == 0);
    }
    CHECK(ids.size() == 8);

    AugmentationBatch single =
        generate_prompted(corpus, PromptMode::Single, 8, params, provider, 42);
    CHECK(single.source == Source::SingleClassGen);
    REQUIRE(single.samples.size() == 8);
    CHECK(single.samples[0].id.rfind("single-", 0) == 0);
    REQUIRE(single.provenance[0].size() == 5);
    for (const auto& src_id : single.provenance[0]) CHECK(src_id.rfind("pos-", 0) == 0);

    // same seed, same provider seed: identical batches
    MockChatProvider replay_provider(7);
    AugmentationBatch again =
        generate_prompted(corpus, PromptMode::Dual, 8, params, replay_provider, 42);
    REQUIRE(again.samples.size() == dual.samples.size());
    for (std::size_t i = 0; i < dual.samples.size(); ++i) {
        CHECK(again.samples[i].id == dual.samples[i].id);
        CHECK(again.samples[i].raw_text == dual.samples[i].raw_text);
    }
}

TEST_CASE("prompted generation fails loudly when the budget runs out") {
    Corpus corpus = prompt_corpus();
    MockChatProvider provider(7);
    GenerationParams params;
    try {
        generate_prompted(corpus, PromptMode::Dual, 50, params, provider, 42, 5, 3);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("generation budget exhausted") != std::string::npos);
        CHECK(msg.find("3 attempts") != std::string::npos);
    }
}

TEST_CASE("backtranslation round-trips every document through the pivot") {
    Corpus corpus = prompt_corpus();
    std::vector<Document> positives;
    for (std::size_t i : corpus.indices_with_label(Label::Positive)) {
        positives.push_back(corpus.documents[i]);
    }

    MockTranslationProvider::Options opts;
    opts.seed = 7;
    opts.rotate = true;
    opts.substitutions = {{"tidak", "tak"}, {"perempuan", "wanita"}};
    MockTranslationProvider translator(opts);

    AugmentationBatch batch = backtranslate(positives, "en", translator, "id");
    CHECK(batch.source == Source::Backtranslation);
    CHECK(batch.samples.size() + static_cast<std::size_t>(batch.rejected) == positives.size());
    REQUIRE(!batch.samples.empty());
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const Document& d = batch.samples[i];
        CHECK(d.id.rfind("bt-", 0) == 0);
        CHECK(d.label == Label::Positive);
        REQUIRE(batch.provenance[i].size() == 1);
        CHECK(d.id == "bt-" + batch.provenance[i][0]);
    }

    CHECK_THROWS_AS(backtranslate({}, "en", translator, "id"), UsageError);
    CHECK_THROWS_AS(backtranslate(positives, "id", translator, "id"), UsageError);

    // an identity translator reproduces the originals, so every sample is
    // rejected as a duplicate
    MockTranslationProvider identity = MockTranslationProvider::identity();
    CHECK_THROWS_AS(backtranslate(positives, "en", identity, "id"), DataError);
}

TEST_CASE("batches survive the JSONL round trip") {
    Corpus corpus = prompt_corpus();
    MockChatProvider provider(7);
    AugmentationBatch batch =
        generate_prompted(corpus, PromptMode::Single, 5, GenerationParams{}, provider, 11);

    fs::path path = temp_dir() / "batch.jsonl";
    write_batch(batch, path.string());
    AugmentationBatch back = read_batch(path.string());

    CHECK(back.source == batch.source);
    REQUIRE(back.samples.size() == batch.samples.size());
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        CHECK(back.samples[i].id == batch.samples[i].id);
        CHECK(back.samples[i].raw_text == batch.samples[i].raw_text);
        CHECK(back.samples[i].label == batch.samples[i].label);
        CHECK(back.provenance[i] == batch.provenance[i]);
    }
    CHECK(back.params_digest == batch.digest_or_compute());

    // two writes of the same seeded batch are byte-identical
    fs::path second = temp_dir() / "batch2.jsonl";
    MockChatProvider provider2(7);
    write_batch(generate_prompted(corpus, PromptMode::Single, 5, GenerationParams{}, provider2, 11),
                second.string());
    CHECK(read_file(path) == read_file(second));

    fs::path mixed = temp_dir() / "mixed.jsonl";
    {
        std::ofstream out(mixed, std::ios::binary);
        out << R"({"id":"a","text":"x y z","label":"1","source":"dual_class_gen","provenance":[],"params_digest":"d"})"
            << '\n'
            << R"({"id":"b","text":"x y w","label":"1","source":"backtranslation","provenance":[],"params_digest":"d"})"
            << '\n';
    }
    CHECK_THROWS_AS(read_batch(mixed.string()), DataError);

    fs::path missing = temp_dir() / "missing.jsonl";
    {
        std::ofstream out(missing, std::ios::binary);
        out << R"({"id":"a","text":"x y z","label":"1","source":"dual_class_gen"})" << '\n';
    }
    CHECK_THROWS_AS(read_batch(missing.string()), DataError);
}
