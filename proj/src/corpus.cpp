#include "augbench/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "augbench/common.hpp"
#include "augbench/unicode.hpp"

namespace augbench {

Label parse_label(std::string_view s) {
    if (s == "1" || s == "gender_hs") return Label::Positive;
    if (s == "0" || s == "non_gender_hs") return Label::Negative;
    throw DataError("unparseable label value: \"" + std::string(s) + "\"");
}

std::string_view label_token(Label l) { return l == Label::Positive ? "1" : "0"; }

Source parse_source(std::string_view s) {
    if (s == "original") return Source::Original;
    if (s == "backtranslation") return Source::Backtranslation;
    if (s == "single_class_gen") return Source::SingleClassGen;
    if (s == "dual_class_gen") return Source::DualClassGen;
    throw DataError("unparseable source value: \"" + std::string(s) + "\"");
}

std::string_view source_token(Source s) {
    switch (s) {
        case Source::Original: return "original";
        case Source::Backtranslation: return "backtranslation";
        case Source::SingleClassGen: return "single_class_gen";
        case Source::DualClassGen: return "dual_class_gen";
    }
    return "original";
}

std::string_view source_display(Source s) {
    switch (s) {
        case Source::Original: return "Original";
        case Source::Backtranslation: return "Backtranslation";
        case Source::SingleClassGen: return "Single-class prompt generation";
        case Source::DualClassGen: return "Dual-class prompt generation";
    }
    return "Original";
}

std::vector<std::size_t> Corpus::indices_with_label(Label l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < documents.size(); ++i) {
        if (documents[i].label == l) out.push_back(i);
    }
    return out;
}

std::size_t Corpus::count_label(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(documents.begin(), documents.end(),
                      [l](const Document& d) { return d.label == l; }));
}

void Corpus::check_unique_ids() const {
    std::unordered_set<std::string_view> seen;
    seen.reserve(documents.size());
    for (const auto& d : documents) {
        if (!seen.insert(d.id).second) {
            throw DataError("duplicate document id: \"" + d.id + "\"");
        }
    }
}

CorpusFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return CorpusFormat::Csv;
    if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0) return CorpusFormat::Jsonl;
    throw UsageError("cannot infer corpus format from path (want .csv or .jsonl): " + path);
}

namespace {

// RFC 4180-style CSV records; quoted fields may span lines.
struct CsvReader {
    std::istream& in;
    std::size_t line = 0;

    explicit CsvReader(std::istream& s) : in(s) {}

    // Returns false at EOF. `record_line` is the line the record started on.
    bool next(std::vector<std::string>& fields, std::size_t& record_line) {
        fields.clear();
        int c = in.get();
        if (c == EOF) return false;
        ++line;
        record_line = line;
        std::string field;
        bool in_quotes = false;
        bool record_done = false;
        while (!record_done) {
            if (c == EOF) {
                fields.push_back(std::move(field));
                break;
            }
            const char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in.peek() == '"') {
                        field.push_back('"');
                        in.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line;
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty()) {
                in_quotes = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\r') {
                if (in.peek() == '\n') in.get();
                fields.push_back(std::move(field));
                record_done = true;
            } else if (ch == '\n') {
                fields.push_back(std::move(field));
                record_done = true;
            } else {
                field.push_back(ch);
            }
            if (!record_done) c = in.get();
        }
        return true;
    }
};

std::string csv_quote(std::string_view s) {
    const bool needs = s.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string auto_id(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "d%06zu", index);
    return buf;
}

Corpus ingest_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    CsvReader reader(in);
    std::vector<std::string> fields;
    std::size_t record_line = 0;
    if (!reader.next(fields, record_line)) throw DataError(path + ": empty file, expected a header row");

    int col_id = -1, col_text = -1, col_label = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name = to_lower_ascii(trim(fields[i]));
        if (name == "id") col_id = static_cast<int>(i);
        else if (name == "text") col_text = static_cast<int>(i);
        else if (name == "label") col_label = static_cast<int>(i);
    }
    if (col_text < 0 || col_label < 0) {
        throw DataError(path + ": header must name text and label columns");
    }

    Corpus corpus;
    corpus.name = path;
    std::size_t row = 0;
    while (reader.next(fields, record_line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        const std::size_t want = static_cast<std::size_t>(std::max({col_id, col_text, col_label})) + 1;
        if (fields.size() < want) {
            throw DataError(path + ":" + std::to_string(record_line) + ": malformed row, expected " +
                            std::to_string(want) + " fields, got " + std::to_string(fields.size()));
        }
        Document doc;
        doc.id = col_id >= 0 && !trim(fields[col_id]).empty() ? trim(fields[col_id]) : auto_id(row);
        doc.raw_text = fields[col_text];
        if (trim(doc.raw_text).empty()) {
            throw DataError(path + ":" + std::to_string(record_line) + ": empty text field");
        }
        try {
            doc.label = parse_label(trim(fields[col_label]));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(record_line) + ": " + e.what());
        }
        doc.source = Source::Original;
        corpus.documents.push_back(std::move(doc));
        ++row;
    }
    corpus.check_unique_ids();
    return corpus;
}

Corpus ingest_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    Corpus corpus;
    corpus.name = path;
    std::string line;
    std::size_t lineno = 0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("text") || !j.contains("label")) {
            throw DataError(path + ":" + std::to_string(lineno) + ": object with text and label keys required");
        }
        Document doc;
        if (j.contains("id") && !j["id"].is_null()) {
            doc.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        } else {
            doc.id = auto_id(row);
        }
        if (!j["text"].is_string()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": text must be a string");
        }
        doc.raw_text = j["text"].get<std::string>();
        if (trim(doc.raw_text).empty()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": empty text field");
        }
        try {
            if (j["label"].is_number_integer()) {
                doc.label = parse_label(std::to_string(j["label"].get<long long>()));
            } else if (j["label"].is_string()) {
                doc.label = parse_label(j["label"].get<std::string>());
            } else {
                throw DataError("label must be a string or integer");
            }
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        doc.source = Source::Original;
        corpus.documents.push_back(std::move(doc));
        ++row;
    }
    corpus.check_unique_ids();
    return corpus;
}

}  // namespace

Corpus ingest(const std::string& path, CorpusFormat format) {
    return format == CorpusFormat::Csv ? ingest_csv(path) : ingest_jsonl(path);
}

void write_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    if (format == CorpusFormat::Csv) {
        out << "id,text,label\n";
        for (const auto& d : corpus.documents) {
            out << csv_quote(d.id) << ',' << csv_quote(d.raw_text) << ',' << label_token(d.label) << '\n';
        }
    } else {
        for (const auto& d : corpus.documents) {
            nlohmann::json j{{"id", d.id}, {"text", d.raw_text}, {"label", std::string(label_token(d.label))}};
            out << j.dump() << '\n';
        }
    }
    if (!out) throw DataError("failed writing corpus to " + path);
}

namespace {

constexpr std::string_view kNumToken = "[NUM]";
constexpr std::string_view kUserToken = "[USERNAME]";

inline bool is_word_byte(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || u == '_';
}

inline bool is_digit_byte(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string normalize_text(std::string_view raw) {
    // First pass: split into placeholder pieces and ordinary text. Existing
    // [NUM]/[USERNAME] literals are recognized so the pipeline is idempotent.
    struct Piece {
        bool placeholder;
        std::string text;
    };
    std::vector<Piece> pieces;
    std::string pending;
    const auto flush = [&] {
        if (!pending.empty()) {
            pieces.push_back({false, std::move(pending)});
            pending.clear();
        }
    };
    std::size_t i = 0;
    while (i < raw.size()) {
        const char c = raw[i];
        if (c == '@' && i + 1 < raw.size() && is_word_byte(raw[i + 1])) {
            std::size_t j = i + 1;
            while (j < raw.size() && is_word_byte(raw[j])) ++j;
            flush();
            pieces.push_back({true, std::string(kUserToken)});
            i = j;
        } else if (is_digit_byte(c)) {
            std::size_t j = i;
            while (j < raw.size() && is_digit_byte(raw[j])) ++j;
            flush();
            pieces.push_back({true, std::string(kNumToken)});
            i = j;
        } else if (c == '[' && raw.compare(i, kNumToken.size(), kNumToken) == 0) {
            flush();
            pieces.push_back({true, std::string(kNumToken)});
            i += kNumToken.size();
        } else if (c == '[' && raw.compare(i, kUserToken.size(), kUserToken) == 0) {
            flush();
            pieces.push_back({true, std::string(kUserToken)});
            i += kUserToken.size();
        } else {
            pending.push_back(c);
            ++i;
        }
    }
    flush();

    // Second pass: lowercase and keep letters/whitespace in ordinary pieces.
    std::string filtered;
    for (const auto& piece : pieces) {
        if (piece.placeholder) {
            filtered += piece.text;
            continue;
        }
        std::size_t k = 0;
        const std::string_view sv = piece.text;
        while (k < sv.size()) {
            char32_t cp = decode_utf8(sv, k);
            cp = to_lower(cp);
            if (is_letter(cp)) {
                append_utf8(filtered, cp);
            } else if (is_space_cp(cp)) {
                filtered.push_back(' ');
            }
        }
    }

    // Third pass: collapse spaces and trim.
    std::string out;
    out.reserve(filtered.size());
    bool prev_space = true;
    for (char c : filtered) {
        if (c == ' ') {
            if (!prev_space) out.push_back(' ');
            prev_space = true;
        } else {
            out.push_back(c);
            prev_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

const std::string& norm_text_of(Document& doc) {
    if (!doc.norm_text) doc.norm_text = normalize_text(doc.raw_text);
    return *doc.norm_text;
}

Corpus balance(const Corpus& corpus, double negative_per_positive, std::uint64_t seed) {
    if (negative_per_positive < 1.0) {
        throw UsageError("negative-per-positive ratio must be >= 1");
    }
    const auto positives = corpus.indices_with_label(Label::Positive);
    const auto negatives = corpus.indices_with_label(Label::Negative);
    if (positives.empty()) throw DataError("balance: corpus has no Positive documents");

    const std::size_t want_neg =
        static_cast<std::size_t>(negative_per_positive * static_cast<double>(positives.size()));
    if (want_neg > negatives.size()) {
        throw DataError("balance: requested " + std::to_string(want_neg) +
                        " Negative documents but only " + std::to_string(negatives.size()) +
                        " are available");
    }

    Rng rng = Rng(seed).derive("corpus.balance");
    const auto picks = rng.sample_without_replacement(negatives.size(), want_neg);
    std::vector<bool> keep(corpus.documents.size(), false);
    for (std::size_t p : positives) keep[p] = true;
    for (std::size_t p : picks) keep[negatives[p]] = true;

    Corpus out;
    out.name = corpus.name;
    out.documents.reserve(positives.size() + want_neg);
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        if (keep[i]) out.documents.push_back(corpus.documents[i]);
    }
    return out;
}

std::size_t CompositionTable::total() const {
    std::size_t sum = 0;
    for (const auto& row : counts) sum += row[0] + row[1];
    return sum;
}

CompositionTable composition(const Corpus& corpus) {
    CompositionTable table;
    for (const auto& d : corpus.documents) {
        ++table.counts[static_cast<std::size_t>(d.source)][static_cast<std::size_t>(d.label)];
    }
    return table;
}

}  // namespace augbench
