#ifndef GAMSUM_PREPROCESS_HPP
#define GAMSUM_PREPROCESS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gamsum/corpus.hpp"

namespace gamsum {

struct Token {
    std::string surface;
    std::string stem;     // stemmed lowercase form
    bool is_stopword = false;
    bool is_proper_noun = false;
    bool is_numeric = false;
    bool is_punctuation = false;
};

struct Sentence {
    std::size_t index = 0;
    std::string raw;
    std::vector<Token> tokens;

    // Non-punctuation tokens ("terms", stopwords included): the basis for
    // length and the proper-noun/numeric ratios.
    std::vector<const Token*> terms() const;
    std::size_t term_count() const;
    // Stems of non-stopword, non-punctuation tokens: feed TF-ISF and
    // sentence similarity.
    std::vector<std::string> content_stems() const;
};

struct Document {
    std::string id;
    std::vector<Sentence> sentences;
    std::vector<Sentence> reference_sentences;
    std::vector<std::string> raw_reference;
    std::optional<std::vector<int>> labels; // pass-through from RawDocument
};

// Word lists shipped as data files, one entry per line, '#' comments.
struct LanguageData {
    std::vector<std::string> stopwords;     // lowercase
    std::vector<std::string> abbreviations; // with trailing period, e.g. "Dr."
};

LanguageData load_language_data(const std::string& data_dir);

// Splits raw text into sentences on . ! ? followed by whitespace and an
// uppercase letter, quote or digit; suppressed after known abbreviations.
// Text without terminal punctuation comes back as a single sentence.
std::vector<std::string> segment_sentences(const std::string& body,
                                           const LanguageData& lang);

// Tokenizes one sentence and sets all per-token flags that do not need
// document context. A capitalized sentence-initial token is not marked as
// a proper noun here; preprocess_document resolves it against the rest of
// the document.
std::vector<Token> annotate(const std::string& sentence_raw, bool sentence_initial,
                            const LanguageData& lang);

// Full pipeline: segmentation, annotation, document-level proper-noun
// resolution, reference preprocessing. Throws ValidationError when no
// sentence with at least one token survives.
Document preprocess_document(const RawDocument& raw, const LanguageData& lang);

} // namespace gamsum

#endif
