#include "augbench/augment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "augbench/common.hpp"
#include "augbench/sha256.hpp"

namespace augbench {

using nlohmann::json;

namespace {

constexpr const char* kNegativeHeader =
    "The following tweets belong to the category of 'non-hate speech towards gender':";
constexpr const char* kPositiveHeader =
    "The following tweets belong to the category of 'hate speech towards gender':";
constexpr const char* kInstruction =
    "Please generate a new tweet that belongs to the category of 'hate speech towards gender'. "
    "Important requirement: Generate the tweet in Indonesian language.";
constexpr const char* kCue = "Generated tweet:";

constexpr int kMinTokens = 3;
constexpr int kMaxTokens = 100;
constexpr double kNearDuplicateJaccard = 0.9;

void append_block(std::string& out, const char* header, const std::vector<std::string>& examples) {
    out += header;
    out += "\n\n";
    for (std::size_t i = 0; i < examples.size(); ++i) {
        out += std::to_string(i + 1);
        out += ". ";
        out += examples[i];
        out += '\n';
    }
    out += '\n';
}

void check_examples(const std::vector<std::string>& examples, std::size_t expected,
                    const char* which) {
    if (expected != 0 && examples.size() != expected) {
        throw UsageError(std::string(which) + " example count must be " +
                         std::to_string(expected) + ", got " + std::to_string(examples.size()));
    }
    for (const std::string& e : examples) {
        if (trim(e).empty()) throw UsageError(std::string(which) + " example is empty");
    }
}

std::vector<std::string> token_trigrams(const std::string& norm_text) {
    std::vector<std::string> tokens = split_whitespace(norm_text);
    std::vector<std::string> grams;
    if (tokens.size() < 3) return grams;
    grams.reserve(tokens.size() - 2);
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
        grams.push_back(tokens[i] + ' ' + tokens[i + 1] + ' ' + tokens[i + 2]);
    }
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        int cmp = a[i].compare(b[j]);
        if (cmp == 0) {
            ++inter;
            ++i;
            ++j;
        } else if (cmp < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Incremental duplicate checks shared by the generation loops. The public
// validate_generated builds one per call; the engines keep one alive.
class Validator {
public:
    explicit Validator(const Corpus& corpus) {
        for (const Document& d : corpus.documents) {
            corpus_norms_.insert(d.norm_text ? *d.norm_text : normalize_text(d.raw_text));
        }
    }

    explicit Validator(const std::vector<Document>& documents) {
        for (const Document& d : documents) {
            corpus_norms_.insert(d.norm_text ? *d.norm_text : normalize_text(d.raw_text));
        }
    }

    ValidationResult check(const std::string& candidate) const {
        std::string norm = normalize_text(candidate);
        if (norm.empty()) return {false, "empty after normalization"};
        std::size_t n_tokens = split_whitespace(norm).size();
        if (n_tokens < kMinTokens) return {false, "too short (" + std::to_string(n_tokens) + " tokens)"};
        if (n_tokens > kMaxTokens) return {false, "too long (" + std::to_string(n_tokens) + " tokens)"};
        if (corpus_norms_.count(norm) || accepted_norms_.count(norm)) {
            return {false, "exact duplicate"};
        }
        std::vector<std::string> grams = token_trigrams(norm);
        for (const auto& prior : accepted_grams_) {
            if (jaccard(grams, prior) > kNearDuplicateJaccard) {
                return {false, "near duplicate (trigram Jaccard > 0.9)"};
            }
        }
        return {true, {}};
    }

    void accept(const std::string& candidate) {
        std::string norm = normalize_text(candidate);
        accepted_grams_.push_back(token_trigrams(norm));
        accepted_norms_.insert(std::move(norm));
    }

private:
    std::unordered_set<std::string> corpus_norms_;
    std::unordered_set<std::string> accepted_norms_;
    std::vector<std::vector<std::string>> accepted_grams_;
};

std::string sample_id(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%04zu", prefix, n);
    return buf;
}

}  // namespace

std::string build_dual_class_prompt(const std::vector<std::string>& negative_examples,
                                    const std::vector<std::string>& positive_examples) {
    check_examples(negative_examples, 5, "negative");
    check_examples(positive_examples, 5, "positive");
    std::string out;
    append_block(out, kNegativeHeader, negative_examples);
    append_block(out, kPositiveHeader, positive_examples);
    out += kInstruction;
    out += '\n';
    out += kCue;
    return out;
}

std::string build_single_class_prompt(const std::vector<std::string>& positive_examples) {
    if (positive_examples.empty()) throw UsageError("positive example list is empty");
    check_examples(positive_examples, 0, "positive");
    std::string out;
    append_block(out, kPositiveHeader, positive_examples);
    out += kInstruction;
    out += '\n';
    out += kCue;
    return out;
}

std::string parse_generated_text(const std::string& completion) {
    std::string text = trim(completion);
    if (text.rfind(kCue, 0) == 0) text = trim(text.substr(std::string(kCue).size()));
    if (text.size() >= 2) {
        char first = text.front();
        char last = text.back();
        if ((first == '"' && last == '"') || (first == '\'' && last == '\'')) {
            text = trim(text.substr(1, text.size() - 2));
        }
    }
    return text;
}

double token_trigram_jaccard(const std::string& norm_a, const std::string& norm_b) {
    return jaccard(token_trigrams(norm_a), token_trigrams(norm_b));
}

ValidationResult validate_generated(const std::string& candidate, const Corpus& corpus,
                                    const std::vector<std::string>& accepted_so_far) {
    Validator v(corpus);
    for (const std::string& prior : accepted_so_far) v.accept(prior);
    return v.check(candidate);
}

std::string AugmentationBatch::digest_or_compute() const {
    if (!params_digest.empty()) return params_digest;
    return sha256_hex(params.canonical_json());
}

AugmentationBatch generate_prompted(const Corpus& corpus, PromptMode mode, int target_count,
                                    const GenerationParams& params, ChatProvider& provider,
                                    std::uint64_t seed, int examples_per_class,
                                    int attempt_budget) {
    if (target_count < 0) throw UsageError("target_count must be non-negative");
    if (examples_per_class < 1) throw UsageError("examples_per_class must be positive");
    params.validate();

    const bool dual = mode == PromptMode::Dual;
    AugmentationBatch batch;
    batch.source = dual ? Source::DualClassGen : Source::SingleClassGen;
    batch.params = params;
    if (target_count == 0) return batch;

    std::vector<std::size_t> pos_pool = corpus.indices_with_label(Label::Positive);
    std::vector<std::size_t> neg_pool = corpus.indices_with_label(Label::Negative);
    const auto need = static_cast<std::size_t>(examples_per_class);
    if (pos_pool.size() < need) {
        throw DataError("prompted generation needs at least " + std::to_string(need) +
                        " Positive documents, corpus has " + std::to_string(pos_pool.size()));
    }
    if (dual && neg_pool.size() < need) {
        throw DataError("dual-class generation needs at least " + std::to_string(need) +
                        " Negative documents, corpus has " + std::to_string(neg_pool.size()));
    }

    if (attempt_budget <= 0) attempt_budget = 10 * target_count;
    Rng rng = Rng(seed).derive(dual ? "augment.dual" : "augment.single");
    Validator validator(corpus);
    const char* prefix = dual ? "dual" : "single";

    while (static_cast<int>(batch.samples.size()) < target_count) {
        if (batch.attempts >= attempt_budget) {
            throw DataError("generation budget exhausted: " + std::to_string(batch.attempts) +
                            " attempts produced " + std::to_string(batch.samples.size()) +
                            " of " + std::to_string(target_count) + " samples");
        }
        std::vector<std::size_t> pos_pick = rng.sample_without_replacement(pos_pool.size(), need);
        std::vector<std::string> pos_examples;
        std::vector<std::string> example_ids;
        for (std::size_t pick : pos_pick) {
            const Document& d = corpus.documents[pos_pool[pick]];
            pos_examples.push_back(d.raw_text);
            example_ids.push_back(d.id);
        }
        std::string prompt;
        if (dual) {
            std::vector<std::size_t> neg_pick = rng.sample_without_replacement(neg_pool.size(), need);
            std::vector<std::string> neg_examples;
            std::vector<std::string> neg_ids;
            for (std::size_t pick : neg_pick) {
                const Document& d = corpus.documents[neg_pool[pick]];
                neg_examples.push_back(d.raw_text);
                neg_ids.push_back(d.id);
            }
            prompt = build_dual_class_prompt(neg_examples, pos_examples);
            example_ids.insert(example_ids.begin(), neg_ids.begin(), neg_ids.end());
        } else {
            prompt = build_single_class_prompt(pos_examples);
        }

        ++batch.attempts;
        std::string text = parse_generated_text(provider.generate(prompt, params));
        ValidationResult result = validator.check(text);
        if (!result.accepted) {
            ++batch.rejected;
            continue;
        }
        validator.accept(text);
        Document doc;
        doc.id = sample_id(prefix, batch.samples.size());
        doc.raw_text = text;
        doc.label = Label::Positive;
        doc.source = batch.source;
        batch.samples.push_back(std::move(doc));
        batch.provenance.push_back(std::move(example_ids));
    }
    return batch;
}

AugmentationBatch backtranslate(const std::vector<Document>& documents,
                                const std::string& pivot_lang, TranslationProvider& provider,
                                const std::string& source_lang) {
    if (documents.empty()) throw UsageError("backtranslate: document list is empty");
    if (pivot_lang.empty() || pivot_lang == source_lang) {
        throw UsageError("backtranslate: pivot language must differ from the corpus language");
    }

    AugmentationBatch batch;
    batch.source = Source::Backtranslation;
    Validator validator(documents);

    for (const Document& src : documents) {
        ++batch.attempts;
        std::string pivot_text = provider.translate(src.raw_text, source_lang, pivot_lang);
        std::string round_trip = provider.translate(pivot_text, pivot_lang, source_lang);
        ValidationResult result = validator.check(round_trip);
        if (!result.accepted) {
            ++batch.rejected;
            continue;
        }
        validator.accept(round_trip);
        Document doc;
        doc.id = "bt-" + src.id;
        doc.raw_text = round_trip;
        doc.label = Label::Positive;
        doc.source = Source::Backtranslation;
        batch.samples.push_back(std::move(doc));
        batch.provenance.push_back({src.id});
    }
    if (batch.samples.empty()) {
        throw DataError("backtranslation rejected all " + std::to_string(documents.size()) +
                        " samples");
    }
    return batch;
}

void write_batch(const AugmentationBatch& batch, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    const std::string digest = batch.digest_or_compute();
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const Document& d = batch.samples[i];
        json row = {
            {"id", d.id},
            {"text", d.raw_text},
            {"label", std::string(label_token(d.label))},
            {"source", std::string(source_token(d.source))},
            {"provenance", batch.provenance[i]},
            {"params_digest", digest},
        };
        out << row.dump() << '\n';
    }
    if (!out.good()) throw DataError("write failed for " + path);
}

AugmentationBatch read_batch(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    AugmentationBatch batch;
    bool have_source = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        for (const char* key : {"id", "text", "label", "source", "provenance", "params_digest"}) {
            if (!row.contains(key)) {
                throw DataError(path + ":" + std::to_string(line_no) + ": missing key '" + key + "'");
            }
        }
        Document d;
        d.id = row["id"].get<std::string>();
        d.raw_text = row["text"].get<std::string>();
        d.label = parse_label(row["label"].is_string() ? row["label"].get<std::string>()
                                                       : row["label"].dump());
        d.source = parse_source(row["source"].get<std::string>());
        if (!have_source) {
            batch.source = d.source;
            have_source = true;
        } else if (d.source != batch.source) {
            throw DataError(path + ":" + std::to_string(line_no) + ": mixed sources in one batch");
        }
        std::vector<std::string> prov;
        if (row["provenance"].is_array()) {
            for (const json& p : row["provenance"]) prov.push_back(p.get<std::string>());
        } else {
            prov.push_back(row["provenance"].get<std::string>());
        }
        std::string digest = row["params_digest"].get<std::string>();
        if (batch.params_digest.empty()) {
            batch.params_digest = digest;
        } else if (digest != batch.params_digest) {
            throw DataError(path + ":" + std::to_string(line_no) + ": mixed params digests");
        }
        batch.samples.push_back(std::move(d));
        batch.provenance.push_back(std::move(prov));
    }
    batch.attempts = static_cast<int>(batch.samples.size());
    return batch;
}

}  // namespace augbench
