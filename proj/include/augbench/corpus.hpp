#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace augbench {

enum class Label : std::uint8_t { Negative = 0, Positive = 1 };

// Accepts "1"/"0" and "gender_hs"/"non_gender_hs".
Label parse_label(std::string_view s);
std::string_view label_token(Label l);  // "1" / "0"

enum class Source : std::uint8_t {
    Original = 0,
    Backtranslation = 1,
    SingleClassGen = 2,
    DualClassGen = 3,
};

Source parse_source(std::string_view s);
std::string_view source_token(Source s);    // snake_case wire value
std::string_view source_display(Source s);  // report row label

struct Document {
    std::string id;
    std::string raw_text;
    std::optional<std::string> norm_text;
    Label label = Label::Negative;
    Source source = Source::Original;
};

struct Corpus {
    std::string name;
    std::vector<Document> documents;

    std::vector<std::size_t> indices_with_label(Label l) const;
    std::size_t count_label(Label l) const;
    // Throws DataError if any id repeats.
    void check_unique_ids() const;
};

enum class CorpusFormat { Csv, Jsonl };
CorpusFormat format_from_path(const std::string& path);

// Reads a corpus with source=Original for every row, preserving row order.
// CSV needs a header with text and label columns (id optional); JSONL needs
// the same keys per line. Malformed rows report their line number.
Corpus ingest(const std::string& path, CorpusFormat format);

void write_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format);

// Text normalization applied before feature extraction:
//   1. @handle (@ + [A-Za-z0-9_]+) -> [USERNAME]
//   2. digit run -> [NUM]
//   3. lowercase (Unicode simple mapping)
//   4. drop everything that is not a letter, whitespace, or a placeholder;
//      placeholders already present in the input are protected too
//   5. collapse whitespace runs, trim
std::string normalize_text(std::string_view raw);

// Normalized text for a document, computing and caching it when absent.
const std::string& norm_text_of(Document& doc);

// Keeps every Positive document and a seeded uniform sample of
// floor(ratio * n_positive) Negative documents; original order preserved.
Corpus balance(const Corpus& corpus, double negative_per_positive, std::uint64_t seed);

struct CompositionTable {
    // counts[source][label]
    std::array<std::array<std::size_t, 2>, 4> counts{};

    std::size_t at(Source s, Label l) const {
        return counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)];
    }
    std::size_t total() const;
};

CompositionTable composition(const Corpus& corpus);

}  // namespace augbench
