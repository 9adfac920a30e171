#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace mirage::lexmetrics {

enum class TokenKind { word, punctuation, emoji, other };

struct Token {
    std::string surface;
    TokenKind kind = TokenKind::other;
    // Whitespace between the previous token (or start of text) and this one.
    std::string leading_ws;
};

struct TokenList {
    std::vector<Token> tokens;
    // Indices of the terminal-punctuation tokens (. ! ?) that close a
    // sentence; strictly increasing.
    std::vector<std::size_t> sentence_boundaries;
    std::string trailing_ws;

    std::size_t word_count() const;
    // Closed sentences plus one for any trailing content after the last
    // boundary.
    std::size_t sentence_count() const;
    // Surfaces re-joined with the original whitespace; byte-equal to the
    // tokenized input.
    std::string reconstruct() const;
};

TokenList tokenize(std::string_view text);

// Maximal contiguous vowel groups (a e i o u y, case-insensitive), at least 1
// for any token containing a letter. Deliberately naive: no silent-e or
// dictionary correction.
std::size_t count_syllables(std::string_view word);

enum class PosCategory : int {
    noun = 0,
    adjective,
    preposition,
    article,
    pronoun,
    verb,
    adverb,
    interjection,
    other,
};

constexpr std::size_t kPosCategoryCount = 9;

std::string_view pos_category_name(PosCategory category);

// Per-category percentage of word tokens; all categories sum to 100.
struct PosHistogram {
    std::array<double, kPosCategoryCount> freq{};

    double& operator[](PosCategory c) { return freq[static_cast<int>(c)]; }
    double operator[](PosCategory c) const { return freq[static_cast<int>(c)]; }

    nlohmann::ordered_json to_json() const;
};

class PosTagger {
public:
    virtual ~PosTagger() = default;
    virtual PosCategory tag(std::string_view lowercase_word) const = 0;
};

// Closed-class lexicon plus suffix heuristics, defaulting to noun. The
// lexicon ships as a word<TAB>category TSV.
class RuleTagger : public PosTagger {
public:
    RuleTagger() = default;

    static RuleTagger from_file(const std::string& path);
    static RuleTagger from_stream(std::istream& in, const std::string& origin);

    PosCategory tag(std::string_view lowercase_word) const override;

    std::size_t lexicon_size() const { return lexicon_.size(); }

private:
    std::unordered_map<std::string, PosCategory> lexicon_;
};

// Process-wide default tagger backed by the shipped lexicon. Resolution
// order: MIRAGE_TAGGER_LEXICON env var, then the compiled-in data directory.
const RuleTagger& default_tagger();

PosHistogram pos_tag(const TokenList& tokens, const PosTagger& tagger);

double fres_from_counts(std::size_t words, std::size_t sentences,
                        std::size_t syllables);
double fres(std::string_view text);

double formality_from_histogram(const PosHistogram& hist);
double formality(std::string_view text, const PosTagger& tagger);

class ConcretenessLexicon {
public:
    ConcretenessLexicon() = default;

    // word<TAB>rating TSV, UTF-8; an optional header line and '#' comments
    // are skipped.
    static ConcretenessLexicon from_file(const std::string& path);
    static ConcretenessLexicon from_stream(std::istream& in,
                                           const std::string& origin);

    std::optional<double> lookup(std::string_view word) const;
    std::size_t size() const { return entries_.size(); }
    const std::string& source() const { return source_; }

private:
    std::unordered_map<std::string, double> entries_;
    std::string source_;
};

struct ConcretenessResult {
    std::optional<double> mean;  // absent iff no word was covered
    double covered_word_ratio = 0.0;
    std::size_t covered_words = 0;
};

ConcretenessResult concreteness(const TokenList& tokens,
                                const ConcretenessLexicon& lexicon);
ConcretenessResult concreteness(std::string_view text,
                                const ConcretenessLexicon& lexicon);

// Bundled sample ratings unless MIRAGE_CONCRETENESS_LEXICON points at a
// full published lexicon file.
const ConcretenessLexicon& default_concreteness();

struct MetricReport {
    double fres = 0.0;
    double formality = 0.0;
    std::optional<double> concreteness;
    std::size_t word_count = 0;
    std::size_t sentence_count = 0;
    std::size_t syllable_count = 0;
    PosHistogram pos;
    double covered_word_ratio = 0.0;

    nlohmann::ordered_json to_json() const;
};

MetricReport nuance_report(std::string_view text,
                           const ConcretenessLexicon* lexicon,
                           const PosTagger& tagger);

}  // namespace mirage::lexmetrics
