#include "augbench/synth.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include "augbench/common.hpp"

namespace augbench {

namespace {

const std::vector<std::string>& noise_words() {
    static const std::vector<std::string> words{
        "yang", "di",    "ke",   "dari", "ini",   "itu",  "dan",  "atau",
        "dengan", "untuk", "pada", "juga", "ada",   "akan", "sudah", "belum",
        "tidak", "saya",  "kamu", "dia",  "kita",  "mereka"};
    return words;
}

const std::vector<std::string>& topic_words() {
    static const std::vector<std::string> words{
        "bola",   "pertandingan", "tim",    "skor",   "gol",    "pemain",
        "liga",   "berita",       "pemerintah", "harga", "pasar", "ekonomi",
        "kerja",  "kantor",       "jalan",  "macet",  "hujan",  "cuaca",
        "panas",  "makan",        "nasi",   "kopi",   "film",   "musik",
        "lagu",   "konser",       "sekolah", "kuliah", "libur",  "pantai"};
    return words;
}

const std::vector<std::string>& marker_words() {
    static const std::vector<std::string> words{
        "perempuan", "wanita",  "cewek",    "lelaki",  "cowok",    "gender",
        "dapur",     "kodrat",  "lemah",    "cengeng", "bodoh",    "payah",
        "lebay",     "bawel",   "manja",    "drama",   "baper",    "norak",
        "kampungan", "berisik", "rewel",    "cerewet", "ngatur",   "sok",
        "jelek",     "culun",   "alay",     "kepo",    "caper",    "songong",
        "belagu",    "ngeselin", "nyebelin", "dasar",   "bego",     "oon",
        "lemot",     "telat",   "malas",    "ribet",   "ngondek",  "cupu",
        "jutek",     "galak",   "judes",    "bacot",   "nyinyir",  "gaya",
        "centil",    "ganjen",  "genit",    "norek",    "cempreng", "letoy",
        "gembeng",   "mewek",   "ngambek",  "merajuk",  "bucin",    "kolot",
        "jadul",     "receh",   "katrok",   "ndeso",    "kuper",    "minder",
        "sombong",   "angkuh",  "egois",    "pelit",    "cuek",     "jahil",
        "usil",      "resek",   "songog",   "lembek",   "penakut",  "cengok",
        "planga",    "plongo",  "ngegas",   "ngeyel",   "mutung",   "baperan",
        "halu",      "gabut",   "julid",    "sirik",    "dengki",   "iri",
        "licik",     "culas",   "lamban",   "loyo",     "letih",    "lesu",
        "lunglai",   "gagap",   "gugup",    "grogi",    "kaku",     "saklek",
        "kikir",     "medit",   "boros",    "ceroboh",  "teledor",  "lalai",
        "lengah",    "bebal",   "dungu",    "tulalit",  "gaptek",   "kemayu",
        "menye",     "melow",   "cembeng",  "klemar",   "klemer",   "kepel"};
    return words;
}

const std::vector<std::string>& handle_stems() {
    static const std::vector<std::string> stems{"budi", "sari", "agus", "dewi",
                                                "rina", "joko", "tari", "eko"};
    return stems;
}

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
    return pool[static_cast<std::size_t>(rng.next_below(pool.size()))];
}

bool is_marker(const std::string& token) {
    for (const auto& m : marker_words()) {
        if (m == token) return true;
    }
    return false;
}

std::vector<std::string> base_tokens(Label label, Rng& rng) {
    const std::size_t len = 8 + static_cast<std::size_t>(rng.next_below(8));
    std::vector<std::string> tokens;
    tokens.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double r = rng.next_double();
        if (label == Label::Negative) {
            tokens.push_back(r < 0.55 ? pick(noise_words(), rng) : pick(topic_words(), rng));
        } else if (r < 0.55) {
            tokens.push_back(pick(noise_words(), rng));
        } else if (r < 0.75) {
            tokens.push_back(pick(topic_words(), rng));
        } else {
            tokens.push_back(pick(marker_words(), rng));
        }
    }
    if (label == Label::Positive) {
        std::size_t markers = 0;
        for (const auto& t : tokens) markers += is_marker(t) ? 1 : 0;
        while (markers < 2) {
            const std::size_t slot = static_cast<std::size_t>(rng.next_below(tokens.size()));
            if (is_marker(tokens[slot])) continue;
            tokens[slot] = pick(marker_words(), rng);
            ++markers;
        }
    }
    return tokens;
}

std::string decorate(std::vector<std::string> tokens, Rng& rng) {
    if (rng.next_double() < 0.20) {
        char handle[32];
        std::snprintf(handle, sizeof(handle), "@%s%u", pick(handle_stems(), rng).c_str(),
                      static_cast<unsigned>(rng.next_below(90) + 10));
        const std::size_t at = static_cast<std::size_t>(rng.next_below(tokens.size() + 1));
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), handle);
    }
    if (rng.next_double() < 0.15) {
        const std::size_t at = static_cast<std::size_t>(rng.next_below(tokens.size() + 1));
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at),
                      std::to_string(rng.next_below(10000)));
    }
    for (auto& tok : tokens) {
        if (tok[0] >= 'a' && tok[0] <= 'z' && rng.next_double() < 0.08) {
            tok[0] = static_cast<char>(tok[0] - 'a' + 'A');
        }
        if (rng.next_double() < 0.05) tok += ",";
    }
    std::string text = join(tokens, " ");
    const double tail = rng.next_double();
    if (tail < 0.10) {
        text += "!";
    } else if (tail < 0.18) {
        text += "...";
    } else if (tail < 0.25) {
        text += ".";
    }
    return text;
}

Document make_document(const char* prefix, std::size_t index, Label label, Rng& rng) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%04zu", prefix, index);
    Document doc;
    doc.id = id;
    doc.label = label;
    doc.source = Source::Original;
    doc.raw_text = decorate(base_tokens(label, rng), rng);
    return doc;
}

}  // namespace

Corpus synth_corpus(const SynthConfig& config) {
    if (config.n_negative == 0 || config.n_positive == 0) {
        throw UsageError("synth_corpus: both class counts must be positive");
    }
    const Rng base = Rng(config.seed).derive("synth");

    Corpus corpus;
    corpus.name = "synthetic";
    corpus.documents.reserve(config.n_negative + config.n_positive);

    const Rng negatives = base.derive("negative");
    for (std::size_t i = 0; i < config.n_negative; ++i) {
        Rng doc_rng = negatives.derive(static_cast<std::uint64_t>(i));
        Document doc = make_document("neg", i, Label::Negative, doc_rng);
        if (doc_rng.next_double() < 0.35) {
            auto tokens = split_whitespace(doc.raw_text);
            const std::size_t slot = static_cast<std::size_t>(doc_rng.next_below(tokens.size()));
            tokens[slot] = pick(marker_words(), doc_rng);
            doc.raw_text = join(tokens, " ");
        }
        corpus.documents.push_back(std::move(doc));
    }

    const Rng positives = base.derive("positive");
    for (std::size_t i = 0; i < config.n_positive; ++i) {
        Rng doc_rng = positives.derive(static_cast<std::uint64_t>(i));
        corpus.documents.push_back(make_document("pos", i, Label::Positive, doc_rng));
    }

    Rng order = base.derive("order");
    order.shuffle(corpus.documents);
    return corpus;
}

}  // namespace augbench
