#pragma once

#include <cstddef>
#include <cstdint>

#include "augbench/corpus.hpp"

namespace augbench {

// Seeded generator for the bundled benchmark corpus: short Indonesian-like
// tweets with a heavy negative majority. Positive documents carry at least two
// tokens from a marker vocabulary; a slice of the negatives carries exactly
// one, so single-token rules stay imperfect. Raw text includes handles, digit
// runs, casing and punctuation noise for the normalizer to clean up.
struct SynthConfig {
    std::size_t n_negative = 2000;
    std::size_t n_positive = 100;
    std::uint64_t seed = 42;
};

Corpus synth_corpus(const SynthConfig& config);

}  // namespace augbench
