#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augbench/corpus.hpp"
#include "augbench/providers.hpp"

namespace augbench {

enum class PromptMode { Single, Dual };

// Renders the two-block generation prompt: Negative examples first, Positive
// second, five numbered items each, then the fixed instruction tail. Examples
// are inserted verbatim. No trailing newline.
std::string build_dual_class_prompt(const std::vector<std::string>& negative_examples,
                                    const std::vector<std::string>& positive_examples);

// Positive block only, k >= 1 numbered items, same instruction tail.
std::string build_single_class_prompt(const std::vector<std::string>& positive_examples);

// Completion text -> candidate sample: strip a leading "Generated tweet:"
// echo, trim whitespace, drop one pair of surrounding quotes.
std::string parse_generated_text(const std::string& completion);

struct ValidationResult {
    bool accepted = false;
    std::string reason;  // empty when accepted
};

// Rejects candidates that normalize to nothing, fall outside 3..100 tokens,
// exactly duplicate a corpus document or accepted sample (post-normalization),
// or exceed 0.9 token-trigram Jaccard similarity against an accepted sample.
ValidationResult validate_generated(const std::string& candidate, const Corpus& corpus,
                                    const std::vector<std::string>& accepted_so_far);

// Jaccard similarity between the token-trigram sets of two normalized texts.
// Both sets empty counts as 0.
double token_trigram_jaccard(const std::string& norm_a, const std::string& norm_b);

struct AugmentationBatch {
    Source source = Source::DualClassGen;
    std::vector<Document> samples;
    // Parallel to samples: prompt example ids, or the source document id
    // for backtranslation.
    std::vector<std::vector<std::string>> provenance;
    GenerationParams params;
    std::string params_digest;  // filled on read-back; derived from params otherwise
    int attempts = 0;
    int rejected = 0;

    std::string digest_or_compute() const;
};

// Repeatedly samples 5 fresh examples per required class, renders the prompt,
// calls the provider, and validates, until target_count samples are accepted.
// attempt_budget 0 means 10 * target_count provider calls.
AugmentationBatch generate_prompted(const Corpus& corpus, PromptMode mode, int target_count,
                                    const GenerationParams& params, ChatProvider& provider,
                                    std::uint64_t seed, int examples_per_class = 5,
                                    int attempt_budget = 0);

// Round-trips each document source_lang -> pivot_lang -> source_lang.
// Samples failing validation are dropped and counted in rejected.
AugmentationBatch backtranslate(const std::vector<Document>& documents,
                                const std::string& pivot_lang, TranslationProvider& provider,
                                const std::string& source_lang = "id");

// JSONL rows {id, text, label, source, provenance, params_digest}.
void write_batch(const AugmentationBatch& batch, const std::string& path);
AugmentationBatch read_batch(const std::string& path);

}  // namespace augbench
