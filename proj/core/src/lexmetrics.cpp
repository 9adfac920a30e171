#include "mirage/lexmetrics.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mirage/error.hpp"
#include "mirage/util.hpp"

namespace mirage::lexmetrics {

namespace {

struct Codepoint {
    uint32_t value;
    std::size_t offset;
    std::size_t length;
};

// Total decoder: invalid bytes fall back to their Latin-1 value so tokenize
// never throws on arbitrary input.
std::vector<Codepoint> decode_utf8(std::string_view text) {
    std::vector<Codepoint> cps;
    cps.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        uint32_t cp = b0;
        std::size_t len = 1;
        if (b0 >= 0xF0 && i + 3 < text.size()) {
            cp = b0 & 0x07u;
            len = 4;
        } else if (b0 >= 0xE0 && i + 2 < text.size()) {
            cp = b0 & 0x0Fu;
            len = 3;
        } else if (b0 >= 0xC0 && i + 1 < text.size()) {
            cp = b0 & 0x1Fu;
            len = 2;
        }
        if (len > 1) {
            bool valid = true;
            for (std::size_t k = 1; k < len; ++k) {
                const auto bk = static_cast<unsigned char>(text[i + k]);
                if ((bk & 0xC0u) != 0x80u) {
                    valid = false;
                    break;
                }
                cp = (cp << 6) | (bk & 0x3Fu);
            }
            if (!valid) {
                cp = b0;
                len = 1;
            }
        }
        cps.push_back({cp, i, len});
        i += len;
    }
    return cps;
}

bool is_ws(uint32_t cp) {
    switch (cp) {
        case ' ':
        case '\t':
        case '\n':
        case '\r':
        case '\f':
        case '\v':
        case 0x00A0:
        case 0x1680:
        case 0x200B:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_emoji_scalar(uint32_t cp) {
    return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
           (cp >= 0x231A && cp <= 0x23FF) || (cp >= 0x2B00 && cp <= 0x2BFF);
}

// Glue codepoints that extend an emoji cluster but never start one.
bool is_emoji_joiner(uint32_t cp) { return cp == 0xFE0F || cp == 0x200D; }

bool is_ascii_letter(uint32_t cp) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

bool is_ascii_digit(uint32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_apostrophe(uint32_t cp) { return cp == '\'' || cp == 0x2019; }

bool is_punct_cp(uint32_t cp) {
    if (cp < 0x80) {
        return std::ispunct(static_cast<int>(cp)) != 0;
    }
    if (is_emoji_scalar(cp) || is_emoji_joiner(cp)) return false;
    return (cp >= 0x2010 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x303F) ||
           (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20);
}

// Anything non-ASCII that is not whitespace, emoji, or punctuation counts as
// a letter, so accented and non-Latin words stay single tokens.
bool is_letter(uint32_t cp) {
    if (cp < 0x80) return is_ascii_letter(cp);
    return !is_ws(cp) && !is_emoji_scalar(cp) && !is_emoji_joiner(cp) &&
           !is_punct_cp(cp);
}

bool is_vowel(uint32_t cp) {
    switch (cp | 0x20u) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
        case 'y':
            return true;
        default:
            return false;
    }
}

PosCategory parse_pos_category(std::string_view name) {
    if (name == "noun" || name == "n") return PosCategory::noun;
    if (name == "adjective" || name == "adj") return PosCategory::adjective;
    if (name == "preposition" || name == "prep") return PosCategory::preposition;
    if (name == "article" || name == "art") return PosCategory::article;
    if (name == "pronoun" || name == "pron") return PosCategory::pronoun;
    if (name == "verb" || name == "v") return PosCategory::verb;
    if (name == "adverb" || name == "adv") return PosCategory::adverb;
    if (name == "interjection" || name == "intj") return PosCategory::interjection;
    if (name == "other") return PosCategory::other;
    throw Error(Errc::schema, "unknown part-of-speech category '" +
                                  std::string(name) + "'");
}

struct SuffixRule {
    std::string_view suffix;
    PosCategory category;
};

// Checked in order; a rule fires only when a plausible stem remains.
constexpr SuffixRule kSuffixRules[] = {
    {"ly", PosCategory::adverb},     {"ing", PosCategory::verb},
    {"ed", PosCategory::verb},       {"ous", PosCategory::adjective},
    {"ful", PosCategory::adjective}, {"ive", PosCategory::adjective},
    {"able", PosCategory::adjective}, {"ible", PosCategory::adjective},
    {"al", PosCategory::adjective},  {"ic", PosCategory::adjective},
    {"less", PosCategory::adjective}, {"ish", PosCategory::adjective},
    {"tion", PosCategory::noun},     {"sion", PosCategory::noun},
    {"ment", PosCategory::noun},     {"ness", PosCategory::noun},
    {"ity", PosCategory::noun},      {"er", PosCategory::noun},
    {"or", PosCategory::noun},       {"ist", PosCategory::noun},
    {"ism", PosCategory::noun},      {"ship", PosCategory::noun},
    {"hood", PosCategory::noun},     {"dom", PosCategory::noun},
};

bool ends_with(std::string_view word, std::string_view suffix) {
    return word.size() >= suffix.size() &&
           word.substr(word.size() - suffix.size()) == suffix;
}

std::string lowercase_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

std::size_t TokenList::word_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::word) ++n;
    }
    return n;
}

std::size_t TokenList::sentence_count() const {
    std::size_t count = sentence_boundaries.size();
    const std::size_t next =
        sentence_boundaries.empty() ? 0 : sentence_boundaries.back() + 1;
    for (std::size_t i = next; i < tokens.size(); ++i) {
        if (tokens[i].kind == TokenKind::word) {
            ++count;
            break;
        }
    }
    return count;
}

std::string TokenList::reconstruct() const {
    std::string out;
    for (const auto& t : tokens) {
        out += t.leading_ws;
        out += t.surface;
    }
    out += trailing_ws;
    return out;
}

TokenList tokenize(std::string_view text) {
    TokenList result;
    const auto cps = decode_utf8(text);
    std::string pending_ws;
    std::size_t i = 0;

    auto slice = [&](std::size_t first, std::size_t last) {
        const std::size_t begin = cps[first].offset;
        const std::size_t end = cps[last].offset + cps[last].length;
        return std::string(text.substr(begin, end - begin));
    };
    auto emit = [&](std::size_t first, std::size_t last, TokenKind kind) {
        result.tokens.push_back({slice(first, last), kind, std::move(pending_ws)});
        pending_ws.clear();
    };

    while (i < cps.size()) {
        const uint32_t cp = cps[i].value;
        if (is_ws(cp)) {
            pending_ws += slice(i, i);
            ++i;
            continue;
        }
        if (is_letter(cp) || is_ascii_digit(cp)) {
            const std::size_t first = i;
            ++i;
            while (i < cps.size()) {
                const uint32_t c = cps[i].value;
                if (is_letter(c) || is_ascii_digit(c)) {
                    ++i;
                } else if (is_apostrophe(c) && i + 1 < cps.size() &&
                           is_letter(cps[i + 1].value)) {
                    i += 2;
                } else {
                    break;
                }
            }
            emit(first, i - 1, TokenKind::word);
            continue;
        }
        if (is_emoji_scalar(cp)) {
            const std::size_t first = i;
            ++i;
            while (i < cps.size() &&
                   (is_emoji_scalar(cps[i].value) || is_emoji_joiner(cps[i].value))) {
                ++i;
            }
            emit(first, i - 1, TokenKind::emoji);
            continue;
        }
        if (is_punct_cp(cp)) {
            emit(i, i, TokenKind::punctuation);
            if (cp == '.' || cp == '!' || cp == '?') {
                const bool at_end = i + 1 >= cps.size();
                if (at_end || is_ws(cps[i + 1].value)) {
                    result.sentence_boundaries.push_back(result.tokens.size() - 1);
                }
            }
            ++i;
            continue;
        }
        emit(i, i, TokenKind::other);
        ++i;
    }
    result.trailing_ws = std::move(pending_ws);
    return result;
}

std::size_t count_syllables(std::string_view word) {
    std::size_t groups = 0;
    bool in_group = false;
    bool has_letter = false;
    for (const auto& cp : decode_utf8(word)) {
        if (is_letter(cp.value)) has_letter = true;
        if (cp.value < 0x80 && is_vowel(cp.value)) {
            if (!in_group) {
                ++groups;
                in_group = true;
            }
        } else {
            in_group = false;
        }
    }
    if (groups == 0 && has_letter) return 1;
    return groups;
}

std::string_view pos_category_name(PosCategory category) {
    switch (category) {
        case PosCategory::noun: return "noun";
        case PosCategory::adjective: return "adjective";
        case PosCategory::preposition: return "preposition";
        case PosCategory::article: return "article";
        case PosCategory::pronoun: return "pronoun";
        case PosCategory::verb: return "verb";
        case PosCategory::adverb: return "adverb";
        case PosCategory::interjection: return "interjection";
        case PosCategory::other: return "other";
    }
    return "other";
}

nlohmann::ordered_json PosHistogram::to_json() const {
    nlohmann::ordered_json out;
    for (std::size_t i = 0; i < kPosCategoryCount; ++i) {
        out[std::string(pos_category_name(static_cast<PosCategory>(i)))] = freq[i];
    }
    return out;
}

RuleTagger RuleTagger::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::file_not_found, "tagger lexicon '" + path + "'");
    }
    return from_stream(in, path);
}

RuleTagger RuleTagger::from_stream(std::istream& in, const std::string& origin) {
    RuleTagger tagger;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error(Errc::schema, origin + ":" + std::to_string(lineno) +
                                          ": expected word<TAB>category");
        }
        const std::string word = lowercase_ascii(util::trim(line.substr(0, tab)));
        const std::string cat = lowercase_ascii(util::trim(line.substr(tab + 1)));
        if (word.empty()) {
            throw Error(Errc::schema,
                        origin + ":" + std::to_string(lineno) + ": empty word");
        }
        tagger.lexicon_[word] = parse_pos_category(cat);
    }
    return tagger;
}

PosCategory RuleTagger::tag(std::string_view lowercase_word) const {
    const auto it = lexicon_.find(std::string(lowercase_word));
    if (it != lexicon_.end()) return it->second;
    for (const auto& rule : kSuffixRules) {
        if (lowercase_word.size() >= rule.suffix.size() + 2 &&
            ends_with(lowercase_word, rule.suffix)) {
            return rule.category;
        }
    }
    return PosCategory::noun;
}

const RuleTagger& default_tagger() {
    static const RuleTagger tagger = [] {
        if (const char* env = std::getenv("MIRAGE_TAGGER_LEXICON")) {
            return RuleTagger::from_file(env);
        }
        return RuleTagger::from_file(std::string(MIRAGE_DATA_DIR) +
                                     "/tagger_lexicon.tsv");
    }();
    return tagger;
}

const ConcretenessLexicon& default_concreteness() {
    static const ConcretenessLexicon lexicon = [] {
        if (const char* env = std::getenv("MIRAGE_CONCRETENESS_LEXICON")) {
            return ConcretenessLexicon::from_file(env);
        }
        return ConcretenessLexicon::from_file(std::string(MIRAGE_DATA_DIR) +
                                              "/concreteness_sample.tsv");
    }();
    return lexicon;
}

PosHistogram pos_tag(const TokenList& tokens, const PosTagger& tagger) {
    std::array<std::size_t, kPosCategoryCount> counts{};
    std::size_t words = 0;
    for (const auto& t : tokens.tokens) {
        if (t.kind != TokenKind::word) continue;
        ++words;
        const auto category = tagger.tag(lowercase_ascii(t.surface));
        ++counts[static_cast<int>(category)];
    }
    if (words == 0) {
        throw Error(Errc::empty_text, "no word tokens to tag");
    }
    PosHistogram hist;
    for (std::size_t i = 0; i < kPosCategoryCount; ++i) {
        hist.freq[i] = 100.0 * static_cast<double>(counts[i]) /
                       static_cast<double>(words);
    }
    return hist;
}

double fres_from_counts(std::size_t words, std::size_t sentences,
                        std::size_t syllables) {
    if (words == 0 || sentences == 0) {
        throw Error(Errc::empty_text, "readability needs words and sentences");
    }
    const double w = static_cast<double>(words);
    const double s = static_cast<double>(sentences);
    const double y = static_cast<double>(syllables);
    return 206.835 - 1.015 * (w / s) - 84.6 * (y / w);
}

double fres(std::string_view text) {
    const auto tokens = tokenize(text);
    std::size_t syllables = 0;
    for (const auto& t : tokens.tokens) {
        if (t.kind == TokenKind::word) syllables += count_syllables(t.surface);
    }
    return fres_from_counts(tokens.word_count(), tokens.sentence_count(),
                            syllables);
}

double formality_from_histogram(const PosHistogram& hist) {
    const double f = hist[PosCategory::noun] + hist[PosCategory::adjective] +
                     hist[PosCategory::preposition] + hist[PosCategory::article] -
                     hist[PosCategory::pronoun] - hist[PosCategory::verb] -
                     hist[PosCategory::adverb] - hist[PosCategory::interjection] +
                     100.0;
    return f / 2.0;
}

double formality(std::string_view text, const PosTagger& tagger) {
    return formality_from_histogram(pos_tag(tokenize(text), tagger));
}

ConcretenessLexicon ConcretenessLexicon::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::file_not_found, "concreteness lexicon '" + path + "'");
    }
    return from_stream(in, path);
}

ConcretenessLexicon ConcretenessLexicon::from_stream(std::istream& in,
                                                     const std::string& origin) {
    ConcretenessLexicon lex;
    lex.source_ = origin;
    std::string line;
    std::size_t lineno = 0;
    bool saw_data = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            if (!saw_data) continue;  // header without tabs
            throw Error(Errc::schema, origin + ":" + std::to_string(lineno) +
                                          ": expected word<TAB>rating");
        }
        const std::string word = lowercase_ascii(util::trim(line.substr(0, tab)));
        const std::string rating_text = util::trim(line.substr(tab + 1));
        char* end = nullptr;
        const double rating = std::strtod(rating_text.c_str(), &end);
        if (end == rating_text.c_str() || *end != '\0') {
            if (!saw_data) continue;  // header line
            throw Error(Errc::schema, origin + ":" + std::to_string(lineno) +
                                          ": rating '" + rating_text +
                                          "' is not a number");
        }
        saw_data = true;
        lex.entries_[word] = rating;
    }
    return lex;
}

std::optional<double> ConcretenessLexicon::lookup(std::string_view word) const {
    const auto it = entries_.find(lowercase_ascii(word));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

ConcretenessResult concreteness(const TokenList& tokens,
                                const ConcretenessLexicon& lexicon) {
    std::size_t words = 0;
    std::size_t covered = 0;
    double sum = 0.0;
    for (const auto& t : tokens.tokens) {
        if (t.kind != TokenKind::word) continue;
        ++words;
        if (const auto rating = lexicon.lookup(t.surface)) {
            ++covered;
            sum += *rating;
        }
    }
    if (words == 0) {
        throw Error(Errc::empty_text, "no word tokens to rate");
    }
    ConcretenessResult result;
    result.covered_words = covered;
    result.covered_word_ratio =
        static_cast<double>(covered) / static_cast<double>(words);
    if (covered > 0) {
        result.mean = sum / static_cast<double>(covered);
    }
    return result;
}

ConcretenessResult concreteness(std::string_view text,
                                const ConcretenessLexicon& lexicon) {
    return concreteness(tokenize(text), lexicon);
}

nlohmann::ordered_json MetricReport::to_json() const {
    nlohmann::ordered_json out;
    out["fres"] = fres;
    out["formality"] = formality;
    if (concreteness.has_value()) {
        out["concreteness"] = *concreteness;
    } else {
        out["concreteness"] = nullptr;
    }
    out["word_count"] = word_count;
    out["sentence_count"] = sentence_count;
    out["syllable_count"] = syllable_count;
    out["pos"] = pos.to_json();
    out["covered_word_ratio"] = covered_word_ratio;
    return out;
}

MetricReport nuance_report(std::string_view text,
                           const ConcretenessLexicon* lexicon,
                           const PosTagger& tagger) {
    const auto tokens = tokenize(text);
    if (tokens.word_count() == 0) {
        throw Error(Errc::empty_text, "no word tokens to analyze");
    }
    MetricReport report;
    report.word_count = tokens.word_count();
    report.sentence_count = tokens.sentence_count();
    for (const auto& t : tokens.tokens) {
        if (t.kind == TokenKind::word) {
            report.syllable_count += count_syllables(t.surface);
        }
    }
    report.fres = fres_from_counts(report.word_count, report.sentence_count,
                                   report.syllable_count);
    report.pos = pos_tag(tokens, tagger);
    report.formality = formality_from_histogram(report.pos);
    if (lexicon != nullptr) {
        const auto conc = concreteness(tokens, *lexicon);
        report.concreteness = conc.mean;
        report.covered_word_ratio = conc.covered_word_ratio;
    }
    return report;
}

}  // namespace mirage::lexmetrics
